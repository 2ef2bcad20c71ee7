//! Embedded discrete-time chain of an LTS and first-passage termination.

use std::collections::{BTreeMap, BTreeSet};

use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::concrete::{Lts, TransLabel};
use crate::iteration::StopRule;
use crate::multiset::Multiset;
use crate::scalar::Scalar;

/// Sparse row-stochastic chain. Rows are sorted by target index.
#[derive(Debug, Clone, PartialEq)]
pub struct Dtmc<S> {
    pub states: Vec<Multiset>,
    pub rows: Vec<Vec<(usize, S)>>,
    /// `L(M, M′)`; pairs without labels are absent.
    pub labels: BTreeMap<(usize, usize), BTreeSet<TransLabel>>,
    pub initial: usize,
}

impl<S: Scalar> Dtmc<S> {
    pub fn prob(&self, s: usize, t: usize) -> S {
        self.rows[s]
            .iter()
            .find(|(j, _)| *j == t)
            .map(|(_, p)| p.clone())
            .unwrap_or_else(S::zero)
    }

    pub fn map_scalar<T>(&self, f: impl Fn(&S) -> T) -> Dtmc<T> {
        Dtmc {
            states: self.states.clone(),
            rows: self
                .rows
                .iter()
                .map(|row| row.iter().map(|(j, p)| (*j, f(p))).collect())
                .collect(),
            labels: self.labels.clone(),
            initial: self.initial,
        }
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }
}

/// `Pr(M)(M′) = R(M,M′)/E(M)`, or a probability-1 self-loop when `E(M) = 0`.
pub fn to_dtmc(lts: &Lts) -> Dtmc<BigRational> {
    let mut rows = Vec::with_capacity(lts.states.len());
    let mut labels: BTreeMap<(usize, usize), BTreeSet<TransLabel>> = BTreeMap::new();
    for s in 0..lts.states.len() {
        let exit = lts.exit_rate(s);
        if exit.is_zero() {
            rows.push(vec![(s, BigRational::one())]);
            continue;
        }
        let mut sums: BTreeMap<usize, BigRational> = BTreeMap::new();
        for e in lts.edges_from(s) {
            *sums.entry(e.target).or_insert_with(BigRational::zero) += &e.rate;
            labels
                .entry((s, e.target))
                .or_default()
                .insert(e.transition.theta.clone());
        }
        rows.push(sums.into_iter().map(|(t, r)| (t, r / &exit)).collect());
    }
    Dtmc {
        states: lts.states.clone(),
        rows,
        labels,
        initial: lts.initial,
    }
}

/// The row of `s` is the point distribution on `s`.
pub fn terminated<S: Scalar>(dtmc: &Dtmc<S>, s: usize) -> bool {
    matches!(&dtmc.rows[s][..], [(t, p)] if *t == s && p.is_one())
}

/// States from which some state in `targets` is reachable along edges of
/// positive probability.
pub(crate) fn can_reach<S: Scalar>(rows: &[Vec<(usize, S)>], targets: &[bool]) -> Vec<bool> {
    let n = rows.len();
    let mut preds = vec![Vec::new(); n];
    for (s, row) in rows.iter().enumerate() {
        for (t, p) in row {
            if !p.is_zero() {
                preds[*t].push(s);
            }
        }
    }
    let mut seen = targets.to_vec();
    let mut stack: Vec<usize> = (0..n).filter(|&s| targets[s]).collect();
    while let Some(t) = stack.pop() {
        for &s in &preds[t] {
            if !seen[s] {
                seen[s] = true;
                stack.push(s);
            }
        }
    }
    seen
}

/// Probability of eventually reaching a terminated state, per state.
/// Gauss–Seidel in state order until the estimated error is below `epsilon`.
pub fn reach_termination<S: Scalar>(dtmc: &Dtmc<S>, epsilon: f64) -> Vec<S> {
    reach_termination_bounded(dtmc, epsilon, 1_000_000)
}

pub fn reach_termination_bounded<S: Scalar>(
    dtmc: &Dtmc<S>,
    epsilon: f64,
    max_iters: usize,
) -> Vec<S> {
    let n = dtmc.len();
    let target: Vec<bool> = (0..n).map(|s| terminated(dtmc, s)).collect();
    let live = can_reach(&dtmc.rows, &target);
    // states that cannot slip into a dead state before terminating reach
    // termination almost surely; pinning them spares slow iterations
    let dead: Vec<bool> = live.iter().map(|l| !l).collect();
    let cut: Vec<Vec<(usize, S)>> = (0..n)
        .map(|s| {
            if target[s] {
                Vec::new()
            } else {
                dtmc.rows[s].clone()
            }
        })
        .collect();
    let risky = can_reach(&cut, &dead);
    let sure: Vec<bool> = (0..n).map(|s| target[s] || !risky[s]).collect();
    let mut x: Vec<S> = sure
        .iter()
        .map(|&t| if t { S::one() } else { S::zero() })
        .collect();
    let free: Vec<usize> = (0..n).filter(|&s| live[s] && !sure[s]).collect();
    let mut stop = StopRule::new(epsilon);
    for _ in 0..max_iters {
        let mut change = 0.0f64;
        for &s in &free {
            let mut stay = S::zero();
            let mut acc = S::zero();
            for (t, p) in &dtmc.rows[s] {
                if *t == s {
                    stay = p.clone();
                } else {
                    acc = acc + p.clone() * x[*t].clone();
                }
            }
            // a non-terminated state never has a probability-1 self-loop
            let v = (acc / (S::one() - stay)).clamp_unit();
            change = change.max((v.clone() - x[s].clone()).to_f64().abs());
            x[s] = v;
        }
        if stop.done(change) {
            break;
        }
    }
    x
}
