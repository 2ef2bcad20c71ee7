//! Lower and upper bounds on the probability of termination over an IMC.
//!
//! Both bounds are least fixpoints computed by Jacobi value iteration from
//! the zero vector. The scheduler picks a no-conflict set and a distribution
//! inside the interval bounds at every step; memoryless choices suffice.

use thiserror::Error;

use crate::imc::{feasible, no_conflict_sets, Imc};
use crate::iteration::StopRule;
use crate::scalar::Scalar;

pub const DEFAULT_EPSILON: f64 = 1e-9;
pub const DEFAULT_MAX_ITERS: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    Min,
    Max,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TerminationError {
    #[error("bounds admit no distribution (lower sum above 1 or upper sum below 1)")]
    InfeasibleSet,
    #[error("state {0} has no feasible no-conflict set")]
    NoFeasibleSet(usize),
}

/// `Pr⁻(M̂)(M̂) = 1`.
pub fn forall_terminated<S: Scalar>(imc: &Imc<S>, s: usize) -> bool {
    imc.lo(s, s) == S::one()
}

/// `Pr⁺(M̂)(M̂) = 1`.
pub fn exists_terminated<S: Scalar>(imc: &Imc<S>, s: usize) -> bool {
    imc.hi(s, s) == S::one()
}

/// Optimum of `Σ ρ·v` over `lo ≤ ρ ≤ hi`, `Σ ρ = 1`.
///
/// Starts from `lo` and hands out the remaining mass in value order. Ties go
/// to the lower index, so the witness is reproducible.
pub fn extremal_expectation<S: Scalar>(
    lo: &[S],
    hi: &[S],
    values: &[S],
    direction: Direction,
) -> Result<S, TerminationError> {
    assert!(
        lo.len() == hi.len() && lo.len() == values.len(),
        "bound and value vectors differ in length"
    );
    let sum = |xs: &[S]| xs.iter().fold(S::zero(), |acc, x| acc + x.clone());
    let lo_sum = sum(lo);
    if lo_sum > S::one() + S::slack() || sum(hi) + S::slack() < S::one() {
        return Err(TerminationError::InfeasibleSet);
    }
    let mut order: Vec<usize> = (0..lo.len()).collect();
    order.sort_by(|&a, &b| {
        let by_value = values[a]
            .partial_cmp(&values[b])
            .unwrap_or(std::cmp::Ordering::Equal);
        let by_value = match direction {
            Direction::Min => by_value,
            Direction::Max => by_value.reverse(),
        };
        by_value.then(a.cmp(&b))
    });
    let mut left = S::max_of(S::zero(), S::one() - lo_sum);
    let mut total = lo
        .iter()
        .zip(values)
        .fold(S::zero(), |acc, (l, v)| acc + l.clone() * v.clone());
    for i in order {
        if left <= S::zero() {
            break;
        }
        let extra = S::min_of(hi[i].clone() - lo[i].clone(), left.clone());
        left = left - extra.clone();
        total = total + extra * values[i].clone();
    }
    Ok(total)
}

/// `Reach⁻` and `Reach⁺` per state.
#[derive(Debug, Clone, PartialEq)]
pub struct ReachBounds<S> {
    pub lo: Vec<S>,
    pub hi: Vec<S>,
    /// Both runs met the tolerance before the iteration cap.
    pub converged: bool,
}

impl<S: Scalar> ReachBounds<S> {
    pub fn at(&self, s: usize) -> (S, S) {
        (self.lo[s].clone(), self.hi[s].clone())
    }
}

struct Choice<S> {
    targets: Vec<usize>,
    lo: Vec<S>,
    hi: Vec<S>,
}

fn choices<S: Scalar>(imc: &Imc<S>, s: usize) -> Vec<Choice<S>> {
    no_conflict_sets(imc, s)
        .into_iter()
        .filter(|set| feasible(imc, s, set))
        .map(|targets| Choice {
            lo: targets.iter().map(|&t| imc.lo(s, t)).collect(),
            hi: targets.iter().map(|&t| imc.hi(s, t)).collect(),
            targets,
        })
        .collect()
}

/// One value-iteration run. Target states are absorbing with value 1.
fn iterate<S: Scalar>(
    menus: &[Vec<Choice<S>>],
    target: &[bool],
    direction: Direction,
    epsilon: f64,
    max_iters: usize,
) -> Result<(Vec<S>, bool), TerminationError> {
    let n = target.len();
    for s in (0..n).filter(|&s| !target[s]) {
        if menus[s].is_empty() {
            return Err(TerminationError::NoFeasibleSet(s));
        }
    }
    let mut x: Vec<S> = target
        .iter()
        .map(|&t| if t { S::one() } else { S::zero() })
        .collect();
    let mut stop = StopRule::new(epsilon);
    for _ in 0..max_iters {
        let mut next = x.clone();
        let mut change = 0.0f64;
        for s in (0..n).filter(|&s| !target[s]) {
            let mut best: Option<S> = None;
            for c in &menus[s] {
                let v: Vec<S> = c.targets.iter().map(|&t| x[t].clone()).collect();
                let e = extremal_expectation(&c.lo, &c.hi, &v, direction)?;
                best = Some(match (best, direction) {
                    (None, _) => e,
                    (Some(b), Direction::Min) => S::min_of(b, e),
                    (Some(b), Direction::Max) => S::max_of(b, e),
                });
            }
            let v = best.expect("menu checked nonempty").clamp_unit();
            change = change.max((v.clone() - x[s].clone()).to_f64().abs());
            next[s] = v;
        }
        x = next;
        if stop.done(change) {
            return Ok((x, true));
        }
    }
    Ok((x, false))
}

/// Lower bound over `∀`-terminated targets with the minimizing scheduler,
/// upper bound over `∃`-terminated targets with the maximizing one.
pub fn reach_bounds<S: Scalar>(
    imc: &Imc<S>,
    epsilon: f64,
    max_iters: usize,
) -> Result<ReachBounds<S>, TerminationError> {
    let n = imc.len();
    let menus: Vec<Vec<Choice<S>>> = (0..n).map(|s| choices(imc, s)).collect();
    let all_target: Vec<bool> = (0..n).map(|s| forall_terminated(imc, s)).collect();
    let any_target: Vec<bool> = (0..n).map(|s| exists_terminated(imc, s)).collect();
    let (lo, lo_done) = iterate(&menus, &all_target, Direction::Min, epsilon, max_iters)?;
    let (hi, hi_done) = iterate(&menus, &any_target, Direction::Max, epsilon, max_iters)?;
    Ok(ReachBounds {
        lo,
        hi,
        converged: lo_done && hi_done,
    })
}
