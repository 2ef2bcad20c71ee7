//! Labelled interval Markov chains and the translation of an abstract LTS
//! into one.

use std::collections::{BTreeMap, BTreeSet};

use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::alts::{AbsEdge, AbstractLts};
use crate::concrete::TransLabel;
use crate::domain::AbstractState;
use crate::dtmc::Dtmc;
use crate::scalar::Scalar;
use crate::symbolic::{bound_ratio, sym_add, sym_merge, sym_rate, InconsistentMerge, SymbolicRate};

/// Probability bounds of one `(source, target)` pair.
#[derive(Debug, Clone, PartialEq)]
pub struct ImcEntry<S> {
    pub target: usize,
    pub lo: S,
    pub hi: S,
}

/// Rows are sorted by target; pairs with both bounds 0 are absent.
#[derive(Debug, Clone, PartialEq)]
pub struct Imc<S> {
    pub states: Vec<AbstractState>,
    pub rows: Vec<Vec<ImcEntry<S>>>,
    /// `L(M̂₁, M̂₂)`; pairs without labels are absent.
    pub labels: BTreeMap<(usize, usize), BTreeSet<TransLabel>>,
    pub initial: usize,
    /// Some bound came from corner arithmetic instead of enumeration.
    pub fallback_used: bool,
}

impl<S: Scalar> Imc<S> {
    pub fn entry(&self, s: usize, t: usize) -> Option<&ImcEntry<S>> {
        self.rows[s].iter().find(|e| e.target == t)
    }

    pub fn lo(&self, s: usize, t: usize) -> S {
        self.entry(s, t).map_or_else(S::zero, |e| e.lo.clone())
    }

    pub fn hi(&self, s: usize, t: usize) -> S {
        self.entry(s, t).map_or_else(S::zero, |e| e.hi.clone())
    }

    pub fn labels_of(&self, s: usize, t: usize) -> BTreeSet<TransLabel> {
        self.labels.get(&(s, t)).cloned().unwrap_or_default()
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn map_scalar<T>(&self, f: impl Fn(&S) -> T) -> Imc<T> {
        Imc {
            states: self.states.clone(),
            rows: self
                .rows
                .iter()
                .map(|row| {
                    row.iter()
                        .map(|e| ImcEntry {
                            target: e.target,
                            lo: f(&e.lo),
                            hi: f(&e.hi),
                        })
                        .collect()
                })
                .collect(),
            labels: self.labels.clone(),
            initial: self.initial,
            fallback_used: self.fallback_used,
        }
    }

    /// States with a positive upper bound or a nonempty label set.
    pub fn successors(&self, s: usize) -> Vec<usize> {
        let mut out: BTreeSet<usize> = self.rows[s]
            .iter()
            .filter(|e| e.hi > S::zero())
            .map(|e| e.target)
            .collect();
        out.extend(
            self.labels
                .range((s, 0)..=(s, usize::MAX))
                .filter(|(_, l)| !l.is_empty())
                .map(|((_, t), _)| *t),
        );
        out.into_iter().collect()
    }
}

/// Two label sets conflict iff they are the same singleton.
pub fn conflict(a: &BTreeSet<TransLabel>, b: &BTreeSet<TransLabel>) -> bool {
    a.len() == 1 && a == b
}

fn labels_between(alts: &AbstractLts, s: usize, t: usize) -> BTreeSet<TransLabel> {
    alts.edges_between(s, t)
        .map(|e| e.transition.theta.clone())
        .collect()
}

/// `Ts_∖M̂₂(M̂₁)`: transitions of `s` towards other states whose label does
/// not conflict with the labels of `Ts(s, t)`.
pub fn ts_minus(alts: &AbstractLts, s: usize, t: usize) -> Vec<&AbsEdge> {
    let here = labels_between(alts, s, t);
    alts.edges_from(s)
        .filter(|e| {
            e.target != t && !conflict(&BTreeSet::from([e.transition.theta.clone()]), &here)
        })
        .collect()
}

/// `r̂ate(t̂)` for an edge from `s` to `t`: the plain symbolic rate, or the
/// same rate marked as possibly absent when its label also leads elsewhere
/// in parallel.
pub fn hat_rate(alts: &AbstractLts, edge: &AbsEdge) -> SymbolicRate {
    let rate = sym_rate(&edge.transition);
    let parallel: BTreeSet<&TransLabel> = ts_minus(alts, edge.source, edge.target)
        .into_iter()
        .map(|e| &e.transition.theta)
        .collect();
    if parallel.contains(&edge.transition.theta) {
        rate.zeroed()
    } else {
        rate
    }
}

/// `rate(T̂s)`: one merged rate per label, in label order.
pub fn merged_rates<'a>(
    rates: impl IntoIterator<Item = (&'a TransLabel, SymbolicRate)>,
) -> Result<BTreeMap<TransLabel, SymbolicRate>, InconsistentMerge> {
    let mut out: BTreeMap<TransLabel, SymbolicRate> = BTreeMap::new();
    for (label, rate) in rates {
        let merged = match out.get(label) {
            Some(prev) => sym_merge(prev, &rate)?,
            None => rate,
        };
        out.insert(label.clone(), merged);
    }
    Ok(out)
}

fn sum(rates: BTreeMap<TransLabel, SymbolicRate>) -> SymbolicRate {
    rates
        .values()
        .fold(SymbolicRate::zero(), |acc, r| sym_add(&acc, r))
}

/// `Ê_{M̂₂}(M̂₁)`.
pub fn exit_rate_sym(
    alts: &AbstractLts,
    s: usize,
    t: usize,
) -> Result<SymbolicRate, InconsistentMerge> {
    let edges = ts_minus(alts, s, t)
        .into_iter()
        .chain(alts.edges_between(s, t));
    Ok(sum(merged_rates(
        edges.map(|e| (&e.transition.theta, sym_rate(&e.transition))),
    )?))
}

/// `R̂(M̂₁, M̂₂)`.
pub fn rat_sym(alts: &AbstractLts, s: usize, t: usize) -> Result<SymbolicRate, InconsistentMerge> {
    Ok(sum(merged_rates(
        alts.edges_between(s, t)
            .map(|e| (&e.transition.theta, hat_rate(alts, e))),
    )?))
}

/// `N̂`: interval probabilities from symbolic rate ratios.
pub fn to_imc(alts: &AbstractLts, enum_cap: usize) -> Result<Imc<BigRational>, InconsistentMerge> {
    let zero = BigRational::zero;
    let one = BigRational::one;
    let mut rows = Vec::with_capacity(alts.states.len());
    let mut labels = BTreeMap::new();
    let mut fallback_used = false;
    for s in 0..alts.states.len() {
        let mut row: BTreeMap<usize, ImcEntry<BigRational>> = BTreeMap::new();
        let mut may_stall = false;
        for t in alts.successors(s) {
            let exit = exit_rate_sym(alts, s, t)?;
            if exit.max().is_zero() {
                continue;
            }
            if exit.min().is_zero() {
                may_stall = true;
            }
            let rate = rat_sym(alts, s, t)?;
            let bounds = bound_ratio(&rate, &exit, enum_cap);
            fallback_used |= !bounds.exhaustive;
            let lo = if rate.min().is_zero() {
                zero()
            } else {
                bounds.lo
            };
            row.insert(
                t,
                ImcEntry {
                    target: t,
                    lo,
                    hi: bounds.hi,
                },
            );
            let firing: BTreeSet<TransLabel> = alts
                .edges_between(s, t)
                .filter(|e| sym_rate(&e.transition).max().is_positive())
                .map(|e| e.transition.theta.clone())
                .collect();
            if !firing.is_empty() {
                labels.insert((s, t), firing);
            }
        }
        if row.is_empty() {
            row.insert(
                s,
                ImcEntry {
                    target: s,
                    lo: one(),
                    hi: one(),
                },
            );
        } else if may_stall {
            row.insert(
                s,
                ImcEntry {
                    target: s,
                    lo: zero(),
                    hi: one(),
                },
            );
        }
        rows.push(row.into_values().collect());
    }
    Ok(Imc {
        states: alts.states.clone(),
        rows,
        labels,
        initial: alts.initial,
        fallback_used,
    })
}

/// Maximal pairwise non-conflicting subsets of the successors of `s`.
/// Successors sharing one singleton label set form a group; each set takes
/// one member per group plus every successor outside the groups.
pub fn no_conflict_sets<S: Scalar>(imc: &Imc<S>, s: usize) -> Vec<Vec<usize>> {
    let succ = imc.successors(s);
    let mut groups: Vec<(BTreeSet<TransLabel>, Vec<usize>)> = Vec::new();
    for &t in &succ {
        let l = imc.labels_of(s, t);
        match groups.iter_mut().find(|(g, _)| conflict(g, &l)) {
            Some((_, members)) => members.push(t),
            None => groups.push((l, vec![t])),
        }
    }
    let (free, choices): (Vec<_>, Vec<_>) = groups
        .into_iter()
        .map(|(_, m)| m)
        .partition(|m| m.len() == 1);
    let free: Vec<usize> = free.into_iter().flatten().collect();
    let mut sets = vec![free];
    for group in choices {
        sets = sets
            .into_iter()
            .flat_map(|base| {
                group.iter().map(move |&t| {
                    let mut next = base.clone();
                    next.push(t);
                    next
                })
            })
            .collect();
    }
    for set in &mut sets {
        set.sort_unstable();
    }
    sets
}

/// Some distribution within the bounds is supported on `set`.
pub fn feasible<S: Scalar>(imc: &Imc<S>, s: usize, set: &[usize]) -> bool {
    let lo = set.iter().fold(S::zero(), |acc, &t| acc + imc.lo(s, t));
    let hi = set.iter().fold(S::zero(), |acc, &t| acc + imc.hi(s, t));
    lo <= S::one() + S::slack() && S::one() <= hi + S::slack()
}

/// `α_MC`: point intervals over the exact abstraction of every state.
pub fn best_abstraction_mc<S: Scalar>(dtmc: &Dtmc<S>) -> Imc<S> {
    Imc {
        states: dtmc.states.iter().map(AbstractState::alpha).collect(),
        rows: dtmc
            .rows
            .iter()
            .map(|row| {
                row.iter()
                    .map(|(t, p)| ImcEntry {
                        target: *t,
                        lo: p.clone(),
                        hi: p.clone(),
                    })
                    .collect()
            })
            .collect(),
        labels: dtmc.labels.clone(),
        initial: dtmc.initial,
        fallback_used: false,
    }
}
