//! Concrete transition relation and LTS construction.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;

use num_rational::BigRational;
use num_traits::Zero;
use serde::Serialize;
use thiserror::Error;

use crate::model::{ActionKind, Environment, Label, Name, Prefix};
use crate::multiset::Multiset;
use crate::scalar::int;

/// `Θ`: one label for a delay, two for a synchronisation. The two labels of
/// a pair are ordered by the declaration position of their prefixes.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum TransLabel {
    Single(Label),
    Pair(Label, Label),
}

impl fmt::Display for TransLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TransLabel::Single(l) => write!(f, "{l}"),
            TransLabel::Pair(a, b) => write!(f, "({a},{b})"),
        }
    }
}

/// `Δ`: source multiplicities of the participating species.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum MultInfo {
    Single(u64),
    Pair(u64, u64),
}

impl fmt::Display for MultInfo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MultInfo::Single(n) => write!(f, "{n}"),
            MultInfo::Pair(n, m) => write!(f, "({n},{m})"),
        }
    }
}

/// Species owning the prefixes of a move, in the order of `Θ`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Reactants {
    One(Name),
    Two(Name, Name),
}

impl Reactants {
    /// Both prefixes belong to the same species.
    pub fn is_homo(&self) -> bool {
        matches!(self, Reactants::Two(x, y) if x == y)
    }

    /// Copies of each species the move consumes.
    pub fn consumed(&self) -> Multiset {
        match self {
            Reactants::One(x) => Multiset::singleton(x.clone(), 1),
            Reactants::Two(x, y) => [(x.clone(), 1), (y.clone(), 1)].into_iter().collect(),
        }
    }

    pub fn names(&self) -> Vec<&Name> {
        match self {
            Reactants::One(x) => vec![x],
            Reactants::Two(x, y) => vec![x, y],
        }
    }
}

/// A reaction of the environment, independent of any state: one delay prefix
/// or one complementary input/output pair with equal channel and rate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Reaction {
    pub theta: TransLabel,
    pub reactants: Reactants,
    pub rate_param: BigRational,
    /// `⦅Q⦆`, or `⦅Q₁⦆ ⊕ ⦅Q₂⦆` for a pair.
    pub product: Multiset,
}

fn complementary(p: &Prefix, q: &Prefix) -> bool {
    let same_rate = p.action.rate == q.action.rate;
    match (&p.action.kind, &q.action.kind) {
        (ActionKind::Input(a), ActionKind::Output(b))
        | (ActionKind::Output(a), ActionKind::Input(b)) => a == b && same_rate,
        _ => false,
    }
}

/// Every delay prefix and complementary pair, in declaration order.
pub fn reactions(env: &Environment) -> Vec<Reaction> {
    let prefixes: Vec<_> = env.prefixes().collect();
    let mut out = Vec::new();
    for (i, (_, x, p)) in prefixes.iter().enumerate() {
        if p.action.kind == ActionKind::Delay {
            out.push(Reaction {
                theta: TransLabel::Single(p.action.label.clone()),
                reactants: Reactants::One((*x).clone()),
                rate_param: p.action.rate.clone(),
                product: p.product.clone(),
            });
        }
        for (_, y, q) in &prefixes[i + 1..] {
            if complementary(p, q) {
                out.push(Reaction {
                    theta: TransLabel::Pair(p.action.label.clone(), q.action.label.clone()),
                    reactants: Reactants::Two((*x).clone(), (*y).clone()),
                    rate_param: p.action.rate.clone(),
                    product: p.product.msum(&q.product),
                });
            }
        }
    }
    out
}

/// `M —Θ,Δ,r→ M′`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Transition {
    pub source: Multiset,
    pub theta: TransLabel,
    pub delta: MultInfo,
    pub rate_param: BigRational,
    pub target: Multiset,
    pub reactants: Reactants,
}

impl Reaction {
    pub fn apply(&self, m: &Multiset) -> Transition {
        let delta = match &self.reactants {
            Reactants::One(x) => MultInfo::Single(m.get(x)),
            Reactants::Two(x, y) => MultInfo::Pair(m.get(x), m.get(y)),
        };
        Transition {
            source: m.clone(),
            theta: self.theta.clone(),
            delta,
            rate_param: self.rate_param.clone(),
            target: m.mdiff(&self.reactants.consumed()).msum(&self.product),
            reactants: self.reactants.clone(),
        }
    }
}

/// All instances of the transition rules at `m`, including those whose rate
/// is zero because a reactant is missing.
pub fn enabled_transitions(env: &Environment, m: &Multiset) -> Vec<Transition> {
    reactions(env).iter().map(|r| r.apply(m)).collect()
}

/// `n·r`, `n·(m−̂1)·r` for a homo-species pair, `n·m·r` otherwise.
pub fn rate(t: &Transition) -> BigRational {
    let combos = match t.delta {
        MultInfo::Single(n) => n,
        MultInfo::Pair(n, m) if t.reactants.is_homo() => n * m.saturating_sub(1),
        MultInfo::Pair(n, m) => n * m,
    };
    int(combos) * &t.rate_param
}

/// A transition of a built LTS, with endpoints as state indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    pub source: usize,
    pub target: usize,
    pub transition: Transition,
    pub rate: BigRational,
}

/// Reachable fragment of the concrete LTS. Only transitions with positive
/// rate are kept.
#[derive(Debug, Clone)]
pub struct Lts {
    pub env: Environment,
    pub states: Vec<Multiset>,
    pub edges: Vec<Edge>,
    /// Indices into `edges`, per source state.
    pub outgoing: Vec<Vec<usize>>,
    pub initial: usize,
    index: HashMap<Multiset, usize>,
}

impl Lts {
    pub fn state_index(&self, m: &Multiset) -> Option<usize> {
        self.index.get(m).copied()
    }

    pub fn edges_from(&self, s: usize) -> impl Iterator<Item = &Edge> {
        self.outgoing[s].iter().map(move |&e| &self.edges[e])
    }

    /// `R(M, M′)`.
    pub fn rate_sum(&self, s: usize, t: usize) -> BigRational {
        self.edges_from(s)
            .filter(|e| e.target == t)
            .map(|e| e.rate.clone())
            .sum()
    }

    /// `E(M)`.
    pub fn exit_rate(&self, s: usize) -> BigRational {
        self.edges_from(s).map(|e| e.rate.clone()).sum()
    }

    /// Per state, outgoing labels are pairwise distinct.
    pub fn labels_distinct(&self) -> bool {
        (0..self.states.len()).all(|s| {
            let mut seen = BTreeSet::new();
            self.edges_from(s).all(|e| seen.insert(&e.transition.theta))
        })
    }
}

#[derive(Debug, Clone, Error)]
#[error("state space exceeds the cap of {cap} states")]
pub struct CapExceeded<T> {
    pub cap: usize,
    /// What had been built when the cap was hit.
    pub partial: T,
}

/// Breadth-first closure from `init`. States are numbered in discovery order;
/// successors first seen from the same state are numbered in multiset order.
pub fn build_lts(
    env: &Environment,
    init: &Multiset,
    state_cap: usize,
) -> Result<Lts, Box<CapExceeded<Lts>>> {
    let reactions = reactions(env);
    let mut lts = Lts {
        env: env.clone(),
        states: vec![init.clone()],
        edges: Vec::new(),
        outgoing: vec![Vec::new()],
        initial: 0,
        index: HashMap::from([(init.clone(), 0)]),
    };
    let mut queue = VecDeque::from([0usize]);
    while let Some(s) = queue.pop_front() {
        let source = lts.states[s].clone();
        let moves: Vec<(Transition, BigRational)> = reactions
            .iter()
            .map(|r| r.apply(&source))
            .map(|t| {
                let r = rate(&t);
                (t, r)
            })
            .filter(|(_, r)| !r.is_zero())
            .collect();
        let fresh: BTreeSet<&Multiset> = moves
            .iter()
            .map(|(t, _)| &t.target)
            .filter(|m| !lts.index.contains_key(*m))
            .collect();
        for m in fresh {
            if lts.states.len() >= state_cap {
                return Err(Box::new(CapExceeded {
                    cap: state_cap,
                    partial: lts,
                }));
            }
            lts.index.insert(m.clone(), lts.states.len());
            queue.push_back(lts.states.len());
            lts.states.push(m.clone());
            lts.outgoing.push(Vec::new());
        }
        for (t, r) in moves {
            let target = lts.index[&t.target];
            lts.outgoing[s].push(lts.edges.len());
            lts.edges.push(Edge {
                source: s,
                target,
                transition: t,
                rate: r,
            });
        }
    }
    Ok(lts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_model;
    use crate::scalar::ratio;

    const GROUPIES: &str = "species X = ?a(1)@lam.X + !b(1)@del.Y\nspecies Y = !a(1)@mu.X + ?b(1)@eta.Y\ninit X:1, Y:2\n";

    fn n(s: &str) -> Name {
        Name::new(s).unwrap()
    }

    fn ms(entries: &[(&str, u64)]) -> Multiset {
        entries.iter().map(|(k, c)| (n(k), *c)).collect()
    }

    fn pair(a: &str, b: &str) -> TransLabel {
        TransLabel::Pair(Label::new(a), Label::new(b))
    }

    fn env(text: &str) -> Environment {
        parse_model(text).unwrap().env
    }

    #[test]
    fn groupies_initial_moves() {
        let e = env(GROUPIES);
        let ts: Vec<_> = enabled_transitions(&e, &ms(&[("X", 1), ("Y", 2)]));
        let summary: Vec<_> = ts
            .iter()
            .map(|t| (t.theta.clone(), t.delta, t.target.clone(), rate(t)))
            .collect();
        assert_eq!(
            summary,
            vec![
                (
                    pair("lam", "mu"),
                    MultInfo::Pair(1, 2),
                    ms(&[("X", 2), ("Y", 1)]),
                    int(2)
                ),
                (
                    pair("del", "eta"),
                    MultInfo::Pair(1, 2),
                    ms(&[("Y", 3)]),
                    int(2)
                ),
            ]
        );
    }

    #[test]
    fn exhausted_partner_gives_zero_rate() {
        let e = env(GROUPIES);
        let ts = enabled_transitions(&e, &ms(&[("X", 3)]));
        assert_eq!(ts.len(), 2);
        assert!(ts
            .iter()
            .all(|t| t.delta == MultInfo::Pair(3, 0) && rate(t).is_zero()));
        assert!(enabled_transitions(&e, &Multiset::new())
            .iter()
            .all(|t| rate(t).is_zero()));
    }

    #[test]
    fn rate_formula() {
        let delay = Transition {
            source: ms(&[("X", 3)]),
            theta: TransLabel::Single(Label::new("l")),
            delta: MultInfo::Single(3),
            rate_param: int(2),
            target: ms(&[("X", 2)]),
            reactants: Reactants::One(n("X")),
        };
        assert_eq!(rate(&delay), int(6));
        let homo = Transition {
            theta: pair("l", "m"),
            delta: MultInfo::Pair(3, 3),
            rate_param: int(1),
            reactants: Reactants::Two(n("X"), n("X")),
            ..delay.clone()
        };
        assert_eq!(rate(&homo), int(6));
        let single_copy = Transition {
            delta: MultInfo::Pair(1, 1),
            ..homo.clone()
        };
        assert!(rate(&single_copy).is_zero());
        let hetero = Transition {
            delta: MultInfo::Pair(1, 2),
            rate_param: ratio(3, 2),
            reactants: Reactants::Two(n("X"), n("Y")),
            ..homo
        };
        assert_eq!(rate(&hetero), int(3));
    }

    #[test]
    fn homo_sync_consumes_two_copies() {
        let e = env("species X = ?a(1)@in.X + !a(1)@out.0\ninit X:3");
        let ts = enabled_transitions(&e, &ms(&[("X", 3)]));
        assert_eq!(ts.len(), 1);
        assert_eq!(ts[0].theta, pair("in", "out"));
        assert_eq!(ts[0].target, ms(&[("X", 2)]));
        assert_eq!(rate(&ts[0]), int(6));
    }

    #[test]
    fn groupies_lts() {
        let e = env(GROUPIES);
        let lts = build_lts(&e, &ms(&[("X", 1), ("Y", 2)]), 100).unwrap();
        assert_eq!(lts.states.len(), 4);
        assert_eq!(lts.states[1], ms(&[("X", 2), ("Y", 1)]));
        assert_eq!(lts.states[2], ms(&[("Y", 3)]));
        assert_eq!(lts.states[3], ms(&[("X", 3)]));
        assert_eq!(lts.rate_sum(0, 1), int(2));
        assert_eq!(lts.rate_sum(0, 2), int(2));
        assert_eq!(lts.rate_sum(0, 3), int(0));
        assert_eq!(lts.exit_rate(0), int(4));
        assert_eq!(lts.exit_rate(2), int(0));
        assert!(lts.labels_distinct());
    }

    #[test]
    fn inert_and_divergent() {
        let e = env("species X = 0\ninit X:1");
        let lts = build_lts(&e, &ms(&[("X", 1)]), 10).unwrap();
        assert_eq!((lts.states.len(), lts.edges.len()), (1, 0));
        let e = env("species X = tau(1).X|X\ninit X:1");
        let err = build_lts(&e, &ms(&[("X", 1)]), 10).unwrap_err();
        assert_eq!(err.cap, 10);
        assert_eq!(err.partial.states.len(), 10);
    }
}
