//! Abstract transition relation over interval states and its exploration.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;

use num_rational::BigRational;
use serde::Serialize;

use crate::concrete::{reactions, CapExceeded, Lts, MultInfo, Reactants, Reaction, TransLabel};
use crate::domain::{
    split_interval_at, splittable, AbstractState, Interval, Polarity, SplitTag, Upper,
};
use crate::model::{Environment, Name};

/// `Δ̂`: possible source multiplicities of the participating species.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum AbsMultInfo {
    Single(Interval),
    Pair(Interval, Interval),
}

impl AbsMultInfo {
    pub fn exact(delta: MultInfo) -> Self {
        match delta {
            MultInfo::Single(n) => AbsMultInfo::Single(Interval::exact(n)),
            MultInfo::Pair(n, m) => AbsMultInfo::Pair(Interval::exact(n), Interval::exact(m)),
        }
    }

    /// Componentwise `⊑`; arities must agree.
    pub fn leq(&self, other: &AbsMultInfo) -> bool {
        match (self, other) {
            (AbsMultInfo::Single(a), AbsMultInfo::Single(b)) => a.leq(b),
            (AbsMultInfo::Pair(a1, a2), AbsMultInfo::Pair(b1, b2)) => a1.leq(b1) && a2.leq(b2),
            _ => false,
        }
    }

    pub fn contains(&self, delta: MultInfo) -> bool {
        AbsMultInfo::exact(delta).leq(self)
    }
}

impl fmt::Display for AbsMultInfo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AbsMultInfo::Single(i) => write!(f, "{i}"),
            AbsMultInfo::Pair(i, j) => write!(f, "({i},{j})"),
        }
    }
}

/// `M̂ —Θ,Δ̂,r→◦ M̂′`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AbstractTransition {
    pub source: AbstractState,
    pub theta: TransLabel,
    pub delta: AbsMultInfo,
    pub rate_param: BigRational,
    pub target: AbstractState,
    /// Split choices that produced this branch; diagnostic only.
    pub split_tags: BTreeSet<SplitTag>,
    pub reactants: Reactants,
}

impl AbstractTransition {
    /// Whether some valuation within `Δ̂` gives a positive rate.
    pub fn may_fire(&self) -> bool {
        let positive = |i: &Interval, at_least: u64| i.hi() >= Upper::Finite(at_least);
        match &self.delta {
            AbsMultInfo::Single(i) => positive(i, 1),
            AbsMultInfo::Pair(i, _) if self.reactants.is_homo() => positive(i, 2),
            AbsMultInfo::Pair(i, j) => positive(i, 1) && positive(j, 1),
        }
    }
}

/// One participant species with its pre-move interval and how many copies
/// the move consumes.
struct Participant<'a> {
    name: &'a Name,
    source: Interval,
    consumed: u64,
}

/// Instances of one reaction at `source`. For each participant whose
/// post-move interval has the form `[0,n]`, `n > 0`, the move splits on
/// whether the participant is exhausted; the matching `Δ̂` component is
/// clipped to the pre-move multiplicities compatible with that outcome.
fn instantiate(reaction: &Reaction, source: &AbstractState) -> Vec<AbstractTransition> {
    let consumed = reaction.reactants.consumed();
    let base = source
        .diff(&AbstractState::alpha(&consumed))
        .sum(&AbstractState::alpha(&reaction.product));
    let participants: Vec<Participant> = consumed
        .iter()
        .map(|(name, c)| Participant {
            name,
            source: source.get(name),
            consumed: c,
        })
        .collect();

    // per participant: (tag, clipped source, target interval) choices
    let choices: Vec<Vec<(Option<SplitTag>, Interval, Interval)>> = participants
        .iter()
        .map(|p| {
            let after = base.get(p.name);
            if !splittable(&after) {
                return vec![(None, p.source, after)];
            }
            SplitTag::both(p.name)
                .into_iter()
                .map(|tag| {
                    let clipped = split_interval_at(&p.source, &tag, p.consumed);
                    let target = match tag.polarity {
                        Polarity::Zero => Interval::ZERO,
                        Polarity::Positive => Interval::new(1, after.hi()).expect("after.hi > 0"),
                    };
                    (Some(tag), clipped, target)
                })
                .collect()
        })
        .collect();

    let mut out = Vec::new();
    let mut pick = vec![0usize; participants.len()];
    loop {
        let mut target = base.clone();
        let mut tags = BTreeSet::new();
        let mut clipped: HashMap<&Name, Interval> = HashMap::new();
        for (k, p) in participants.iter().enumerate() {
            let (tag, src, tgt) = &choices[k][pick[k]];
            target.set(p.name.clone(), *tgt);
            clipped.insert(p.name, *src);
            tags.extend(tag.clone());
        }
        let delta = match &reaction.reactants {
            Reactants::One(x) => AbsMultInfo::Single(clipped[x]),
            Reactants::Two(x, y) => AbsMultInfo::Pair(clipped[x], clipped[y]),
        };
        out.push(AbstractTransition {
            source: source.clone(),
            theta: reaction.theta.clone(),
            delta,
            rate_param: reaction.rate_param.clone(),
            target,
            split_tags: tags,
            reactants: reaction.reactants.clone(),
        });
        let mut d = participants.len();
        loop {
            if d == 0 {
                return out;
            }
            d -= 1;
            pick[d] += 1;
            if pick[d] < choices[d].len() {
                break;
            }
            pick[d] = 0;
        }
    }
}

fn dedup(ts: Vec<AbstractTransition>) -> Vec<AbstractTransition> {
    let mut seen = BTreeSet::new();
    ts.into_iter()
        .filter(|t| seen.insert((t.theta.clone(), t.delta, t.target.clone())))
        .collect()
}

/// Every abstract transition from `source`, including those that can never
/// fire, with duplicates in `(Θ, Δ̂, target)` removed.
pub fn abstract_enabled(env: &Environment, source: &AbstractState) -> Vec<AbstractTransition> {
    dedup(
        reactions(env)
            .iter()
            .flat_map(|r| instantiate(r, source))
            .collect(),
    )
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AbsEdge {
    pub source: usize,
    pub target: usize,
    pub transition: AbstractTransition,
}

/// Explored abstract LTS. Transitions whose rate is zero under every
/// valuation are not kept.
#[derive(Debug, Clone)]
pub struct AbstractLts {
    pub env: Environment,
    pub states: Vec<AbstractState>,
    pub edges: Vec<AbsEdge>,
    pub outgoing: Vec<Vec<usize>>,
    pub initial: usize,
    pub widened: bool,
    /// `(computed target, state it was replaced by)` for every widening step.
    pub replacements: Vec<(AbstractState, usize)>,
    index: HashMap<AbstractState, usize>,
}

impl AbstractLts {
    fn empty(env: &Environment, widened: bool) -> Self {
        AbstractLts {
            env: env.clone(),
            states: Vec::new(),
            edges: Vec::new(),
            outgoing: Vec::new(),
            initial: 0,
            widened,
            replacements: Vec::new(),
            index: HashMap::new(),
        }
    }

    fn add_state(&mut self, s: AbstractState) -> usize {
        let i = self.states.len();
        self.index.insert(s.clone(), i);
        self.states.push(s);
        self.outgoing.push(Vec::new());
        i
    }

    fn add_edge(&mut self, source: usize, target: usize, transition: AbstractTransition) {
        self.outgoing[source].push(self.edges.len());
        self.edges.push(AbsEdge {
            source,
            target,
            transition,
        });
    }

    pub fn state_index(&self, s: &AbstractState) -> Option<usize> {
        self.index.get(s).copied()
    }

    pub fn edges_from(&self, s: usize) -> impl Iterator<Item = &AbsEdge> {
        self.outgoing[s].iter().map(move |&e| &self.edges[e])
    }

    /// `Ts(M̂₁, M̂₂)`.
    pub fn edges_between(&self, s: usize, t: usize) -> impl Iterator<Item = &AbsEdge> {
        self.edges_from(s).filter(move |e| e.target == t)
    }

    /// Distinct successor indices of `s` in first-edge order.
    pub fn successors(&self, s: usize) -> Vec<usize> {
        let mut seen = BTreeSet::new();
        self.edges_from(s)
            .map(|e| e.target)
            .filter(|t| seen.insert(*t))
            .collect()
    }
}

/// Breadth-first closure from `init`. With `widening`, a freshly computed
/// target is replaced by the first already discovered state that contains it.
pub fn explore(
    env: &Environment,
    init: &AbstractState,
    widening: bool,
    state_cap: usize,
) -> Result<AbstractLts, Box<CapExceeded<AbstractLts>>> {
    let reactions = reactions(env);
    let mut lts = AbstractLts::empty(env, widening);
    lts.add_state(init.clone());
    let mut queue = VecDeque::from([0usize]);
    while let Some(s) = queue.pop_front() {
        let source = lts.states[s].clone();
        let moves: Vec<AbstractTransition> = reactions
            .iter()
            .flat_map(|r| instantiate(r, &source))
            .filter(|t| t.may_fire())
            .collect();
        let mut seen = BTreeSet::new();
        for mut t in moves {
            let target = match lts.state_index(&t.target) {
                Some(i) if !widening => i,
                _ => {
                    let cover = if widening {
                        lts.states.iter().position(|p| t.target.leq(p))
                    } else {
                        None
                    };
                    match cover {
                        Some(i) => {
                            if lts.states[i] != t.target {
                                lts.replacements.push((t.target.clone(), i));
                                t.target = lts.states[i].clone();
                            }
                            i
                        }
                        None => {
                            if lts.states.len() >= state_cap {
                                return Err(Box::new(CapExceeded {
                                    cap: state_cap,
                                    partial: lts,
                                }));
                            }
                            queue.push_back(lts.states.len());
                            lts.add_state(t.target.clone())
                        }
                    }
                }
            };
            if seen.insert((t.theta.clone(), t.delta, target)) {
                lts.add_edge(s, target, t);
            }
        }
    }
    Ok(lts)
}

/// `α_lts`: exact abstraction of every state and transition.
pub fn best_abstraction_lts(lts: &Lts) -> AbstractLts {
    let mut out = AbstractLts::empty(&lts.env, false);
    for m in &lts.states {
        out.add_state(AbstractState::alpha(m));
    }
    out.initial = lts.initial;
    for e in &lts.edges {
        let t = &e.transition;
        let transition = AbstractTransition {
            source: out.states[e.source].clone(),
            theta: t.theta.clone(),
            delta: AbsMultInfo::exact(t.delta),
            rate_param: t.rate_param.clone(),
            target: out.states[e.target].clone(),
            split_tags: BTreeSet::new(),
            reactants: t.reactants.clone(),
        };
        out.add_edge(e.source, e.target, transition);
    }
    out
}
