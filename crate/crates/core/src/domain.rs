//! Interval abstraction of multisets.
//!
//! An [`AbstractState`] maps every species to an [`Interval`] of possible
//! multiplicities and stands for the set of multisets it contains (its
//! concretization). The split operators separate the "species exhausted"
//! case from the "species still present" case so that abstract states never
//! mix terminated and non-terminated solutions.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::Name;
use crate::multiset::Multiset;

/// Upper end of an interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Upper {
    Finite(u64),
    Infinity,
}

impl Upper {
    pub fn finite(self) -> Option<u64> {
        match self {
            Upper::Finite(n) => Some(n),
            Upper::Infinity => None,
        }
    }

    fn add(self, other: Upper) -> Upper {
        match (self, other) {
            (Upper::Finite(a), Upper::Finite(b)) => Upper::Finite(a + b),
            _ => Upper::Infinity,
        }
    }

    /// `self −̂ n`; `∞ −̂ n = ∞`.
    fn sub_nat(self, n: u64) -> Upper {
        match self {
            Upper::Finite(a) => Upper::Finite(a.saturating_sub(n)),
            Upper::Infinity => Upper::Infinity,
        }
    }
}

impl fmt::Display for Upper {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Upper::Finite(n) => write!(f, "{n}"),
            Upper::Infinity => write!(f, "inf"),
        }
    }
}

/// `[lo, hi]` with `lo ∈ ℕ`, `hi ∈ ℕ ∪ {∞}` and `lo ≤ hi`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Interval {
    lo: u64,
    hi: Upper,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("empty interval: lower bound {lo} exceeds upper bound {hi}")]
pub struct EmptyInterval {
    pub lo: u64,
    pub hi: Upper,
}

impl Interval {
    pub fn new(lo: u64, hi: Upper) -> Result<Self, EmptyInterval> {
        if Upper::Finite(lo) <= hi {
            Ok(Interval { lo, hi })
        } else {
            Err(EmptyInterval { lo, hi })
        }
    }

    /// `[lo, hi]`; panics if `lo > hi`.
    pub fn range(lo: u64, hi: u64) -> Self {
        Self::new(lo, Upper::Finite(hi)).expect("interval bounds out of order")
    }

    pub fn exact(n: u64) -> Self {
        Interval {
            lo: n,
            hi: Upper::Finite(n),
        }
    }

    pub fn at_least(lo: u64) -> Self {
        Interval {
            lo,
            hi: Upper::Infinity,
        }
    }

    pub const ZERO: Interval = Interval {
        lo: 0,
        hi: Upper::Finite(0),
    };

    pub fn lo(&self) -> u64 {
        self.lo
    }

    pub fn hi(&self) -> Upper {
        self.hi
    }

    pub fn is_exact(&self) -> bool {
        self.hi == Upper::Finite(self.lo)
    }

    pub fn contains(&self, n: u64) -> bool {
        self.lo <= n && Upper::Finite(n) <= self.hi
    }

    /// Number of integers in the interval, `None` when unbounded.
    pub fn width(&self) -> Option<u64> {
        self.hi.finite().map(|h| h - self.lo + 1)
    }

    /// `I ⊑ J`: both ends of `I` lie in `J`.
    pub fn leq(&self, other: &Interval) -> bool {
        other.lo <= self.lo && self.hi <= other.hi
    }

    pub fn join(&self, other: &Interval) -> Interval {
        Interval {
            lo: self.lo.min(other.lo),
            hi: self.hi.max(other.hi),
        }
    }

    /// Intersection, `None` when disjoint.
    pub fn meet(&self, other: &Interval) -> Option<Interval> {
        Interval::new(self.lo.max(other.lo), self.hi.min(other.hi)).ok()
    }

    /// `[min I + min J, max I + max J]`.
    pub fn add(&self, other: &Interval) -> Interval {
        Interval {
            lo: self.lo + other.lo,
            hi: self.hi.add(other.hi),
        }
    }

    /// `[min I −̂ max J, max I −̂ min J]` with `n −̂ ∞ = 0`.
    pub fn sub(&self, other: &Interval) -> Interval {
        let lo = match other.hi {
            Upper::Finite(h) => self.lo.saturating_sub(h),
            Upper::Infinity => 0,
        };
        Interval {
            lo,
            hi: self.hi.sub_nat(other.lo),
        }
    }

    /// Integer points in increasing order; panics on unbounded intervals.
    pub fn points(&self) -> impl Iterator<Item = u64> {
        let hi = self
            .hi
            .finite()
            .expect("cannot enumerate an unbounded interval");
        self.lo..=hi
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{},{}]", self.lo, self.hi)
    }
}

pub fn interval_leq(i: &Interval, j: &Interval) -> bool {
    i.leq(j)
}

pub fn interval_join(i: &Interval, j: &Interval) -> Interval {
    i.join(j)
}

pub fn interval_add(i: &Interval, j: &Interval) -> Interval {
    i.add(j)
}

pub fn interval_sub(i: &Interval, j: &Interval) -> Interval {
    i.sub(j)
}

/// Whether a split tag asserts the species is exhausted or still present.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Polarity {
    Zero,
    Positive,
}

/// `(X=0)` or `(X>0)`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SplitTag {
    pub species: Name,
    pub polarity: Polarity,
}

impl SplitTag {
    pub fn zero(species: Name) -> Self {
        SplitTag {
            species,
            polarity: Polarity::Zero,
        }
    }

    pub fn positive(species: Name) -> Self {
        SplitTag {
            species,
            polarity: Polarity::Positive,
        }
    }

    /// `ℵ(X)`.
    pub fn both(species: &Name) -> [SplitTag; 2] {
        [
            SplitTag::zero(species.clone()),
            SplitTag::positive(species.clone()),
        ]
    }
}

impl fmt::Display for SplitTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.polarity {
            Polarity::Zero => write!(f, "({}=0)", self.species),
            Polarity::Positive => write!(f, "({}>0)", self.species),
        }
    }
}

/// Whether `∇♯` would change an interval: it has the form `[0,n]`, `n > 0`.
pub fn splittable(i: &Interval) -> bool {
    i.lo == 0 && i.hi > Upper::Finite(0)
}

/// `I♯`, clipping the pre-move multiplicity of a species consumed once.
pub fn split_interval(i: &Interval, tag: &SplitTag) -> Interval {
    split_interval_at(i, tag, 1)
}

/// `I♯` generalised to a move consuming `consumed` copies of the species:
/// `(X=0)` keeps `[lo, consumed]`, `(X>0)` keeps `[consumed+1, hi]`, and
/// anything else is returned unchanged. `consumed = 1` is the plain `I♯`.
pub fn split_interval_at(i: &Interval, tag: &SplitTag, consumed: u64) -> Interval {
    match tag.polarity {
        Polarity::Zero if i.lo <= consumed => Interval {
            lo: i.lo,
            hi: Upper::Finite(consumed),
        },
        Polarity::Positive if i.lo <= consumed && i.hi >= Upper::Finite(consumed + 1) => Interval {
            lo: consumed + 1,
            hi: i.hi,
        },
        _ => *i,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GammaError {
    #[error("abstract state has an unbounded interval")]
    Unbounded,
    #[error("abstract state has {count} concretizations, above the cap of {cap}")]
    TooLarge { count: u128, cap: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("cannot abstract an empty set of multisets")]
pub struct EmptySet;

/// Interval-valued state `M̂`. Species not stored map to `[0,0]`, so
/// equality is pointwise equality of the total function.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct AbstractState(BTreeMap<Name, Interval>);

impl AbstractState {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, name: &Name) -> Interval {
        self.0.get(name).copied().unwrap_or(Interval::ZERO)
    }

    /// `M̂[I/X]`.
    pub fn set(&mut self, name: Name, interval: Interval) {
        if interval == Interval::ZERO {
            self.0.remove(&name);
        } else {
            self.0.insert(name, interval);
        }
    }

    pub fn with(mut self, name: &Name, interval: Interval) -> Self {
        self.set(name.clone(), interval);
        self
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Name, &Interval)> {
        self.0.iter()
    }

    /// Species with a non-`[0,0]` interval.
    pub fn species(&self) -> impl Iterator<Item = &Name> {
        self.0.keys()
    }

    /// `α(M)`: exact intervals.
    pub fn alpha(m: &Multiset) -> Self {
        AbstractState(
            m.iter()
                .map(|(n, c)| (n.clone(), Interval::exact(c)))
                .collect(),
        )
    }

    /// The single concretization of an all-exact state.
    pub fn as_exact(&self) -> Option<Multiset> {
        self.0
            .iter()
            .map(|(n, i)| i.is_exact().then(|| (n.clone(), i.lo)))
            .collect::<Option<Multiset>>()
    }

    pub fn leq(&self, other: &AbstractState) -> bool {
        self.0
            .keys()
            .chain(other.0.keys())
            .all(|n| self.get(n).leq(&other.get(n)))
    }

    fn zip_with(
        &self,
        other: &AbstractState,
        f: impl Fn(&Interval, &Interval) -> Interval,
    ) -> AbstractState {
        let mut out = AbstractState::new();
        for name in self.0.keys().chain(other.0.keys()) {
            out.set(name.clone(), f(&self.get(name), &other.get(name)));
        }
        out
    }

    pub fn join(&self, other: &AbstractState) -> AbstractState {
        self.zip_with(other, Interval::join)
    }

    /// `M̂ ⊕̂ N̂`.
    pub fn sum(&self, other: &AbstractState) -> AbstractState {
        self.zip_with(other, Interval::add)
    }

    /// `M̂ ⊖̂ N̂`.
    pub fn diff(&self, other: &AbstractState) -> AbstractState {
        self.zip_with(other, Interval::sub)
    }

    /// Membership of `m` in `γ(M̂)`.
    pub fn contains(&self, m: &Multiset) -> bool {
        AbstractState::alpha(m).leq(self)
    }

    /// Number of concretizations, `None` when infinite.
    pub fn concretization_count(&self) -> Option<u128> {
        self.0.values().try_fold(1u128, |acc, i| {
            i.width().map(|w| acc.saturating_mul(w as u128))
        })
    }

    /// All of `γ(M̂)` in lexicographic order of the species-indexed
    /// multiplicity vector.
    pub fn enumerate(&self, cap: usize) -> Result<Vec<Multiset>, GammaError> {
        let count = self.concretization_count().ok_or(GammaError::Unbounded)?;
        if count > cap as u128 {
            return Err(GammaError::TooLarge { count, cap });
        }
        let axes: Vec<(&Name, Vec<u64>)> = self
            .0
            .iter()
            .map(|(n, i)| (n, i.points().collect()))
            .collect();
        let mut out = Vec::with_capacity(count as usize);
        let mut idx = vec![0usize; axes.len()];
        loop {
            out.push(
                axes.iter()
                    .zip(&idx)
                    .map(|((n, pts), &k)| ((*n).clone(), pts[k]))
                    .collect(),
            );
            // odometer, last axis fastest
            let mut d = axes.len();
            loop {
                if d == 0 {
                    return Ok(out);
                }
                d -= 1;
                idx[d] += 1;
                if idx[d] < axes[d].1.len() {
                    break;
                }
                idx[d] = 0;
            }
        }
    }

    /// `∇♯(M̂)`.
    pub fn split(&self, tag: &SplitTag) -> AbstractState {
        let i = self.get(&tag.species);
        if !splittable(&i) {
            return self.clone();
        }
        let replaced = match tag.polarity {
            Polarity::Zero => Interval::ZERO,
            Polarity::Positive => Interval { lo: 1, hi: i.hi },
        };
        self.clone().with(&tag.species, replaced)
    }
}

pub fn state_leq(a: &AbstractState, b: &AbstractState) -> bool {
    a.leq(b)
}

pub fn state_join(a: &AbstractState, b: &AbstractState) -> AbstractState {
    a.join(b)
}

pub fn astate_sum(a: &AbstractState, b: &AbstractState) -> AbstractState {
    a.sum(b)
}

pub fn astate_diff(a: &AbstractState, b: &AbstractState) -> AbstractState {
    a.diff(b)
}

pub fn alpha_state(m: &Multiset) -> AbstractState {
    AbstractState::alpha(m)
}

/// `α(S)`, the pointwise join of the exact abstractions.
pub fn alpha_set<'a>(
    set: impl IntoIterator<Item = &'a Multiset>,
) -> Result<AbstractState, EmptySet> {
    set.into_iter()
        .map(AbstractState::alpha)
        .reduce(|a, b| a.join(&b))
        .ok_or(EmptySet)
}

pub fn gamma_contains(a: &AbstractState, m: &Multiset) -> bool {
    a.contains(m)
}

pub fn gamma_enumerate(a: &AbstractState, cap: usize) -> Result<Vec<Multiset>, GammaError> {
    a.enumerate(cap)
}

pub fn split_state(a: &AbstractState, tag: &SplitTag) -> AbstractState {
    a.split(tag)
}

impl fmt::Display for AbstractState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, (name, i)) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, ", ")?;
            }
            if i.is_exact() {
                write!(f, "{name}:{}", i.lo)?;
            } else {
                write!(f, "{name}:{i}")?;
            }
        }
        write!(f, "}}")
    }
}
