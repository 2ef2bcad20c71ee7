//! Invariants of every pipeline stage, checked on random models.

use std::collections::{BTreeMap, BTreeSet};

use cgfa_core::alts::abstract_enabled;
use cgfa_core::domain::splittable;
use cgfa_core::imc::{merged_rates, ts_minus};
use cgfa_core::random::{random_model, CorpusConfig};
use cgfa_core::simulation::simulation_relation;
use cgfa_core::symbolic::sym_rate;
use cgfa_core::termination::forall_terminated;
use cgfa_core::{
    best_abstraction_lts, build_lts, check_simulation, enabled_transitions, explore, feasible,
    no_conflict_sets, rate, reach_bounds, reach_termination, terminated, to_dtmc, to_imc,
    AbsMultInfo, AbstractState, Interval, Model, MultInfo, Multiset, Name, Rational, Scalar,
};
use num_traits::{One, Zero};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn model_from(seed: u64) -> (String, Model) {
    random_model(
        &mut ChaCha8Rng::seed_from_u64(seed),
        &CorpusConfig::default(),
    )
}

/// The initial state with every `[0,n]`, `n > 0`, moved up to `[1,n+1]`.
/// Exploration only splits species that take part in a move, so a
/// splittable species that never moves stays hybrid.
fn unsplittable_init(model: &Model) -> AbstractState {
    let mut init = model.init.to_abstract();
    for (x, i) in model.init.to_abstract().iter() {
        if splittable(i) {
            init.set(x.clone(), i.add(&Interval::exact(1)));
        }
    }
    init
}

/// Whether `state` covers both terminated and live multisets.
fn hybrid(model: &Model, state: &AbstractState) -> bool {
    let Ok(members) = state.enumerate(64) else {
        return false;
    };
    let kinds: BTreeSet<bool> = members
        .iter()
        .map(|m| {
            enabled_transitions(&model.env, m)
                .iter()
                .all(|t| rate(t).is_zero())
        })
        .collect();
    kinds.len() > 1
}

fn multiset() -> impl Strategy<Value = Multiset> {
    proptest::collection::btree_map(0usize..4, 0u64..5, 0..4).prop_map(|m| {
        m.into_iter()
            .map(|(k, n)| (Name::new(["A", "B", "C", "D"][k]).unwrap(), n))
            .collect()
    })
}

fn delta_within(d: &MultInfo, hat: &AbsMultInfo) -> bool {
    hat.contains(*d)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn msum_laws(m in multiset(), n in multiset(), k in multiset()) {
        prop_assert_eq!(m.msum(&n).mdiff(&n), m.clone());
        prop_assert_eq!(m.msum(&n), n.msum(&m));
        prop_assert_eq!(m.msum(&n).msum(&k), m.msum(&n.msum(&k)));
        prop_assert_eq!(m.msum(&Multiset::new()), m);
    }

    #[test]
    fn labels_are_a_bijection_onto_prefixes(seed in any::<u64>()) {
        let (_, model) = model_from(seed);
        let env = &model.env;
        let mut seen = BTreeSet::new();
        for (pos, _, prefix) in env.prefixes() {
            prop_assert_eq!(env.position_of(&prefix.action.label), Some(pos));
            prop_assert!(seen.insert(prefix.action.label.clone()));
        }
    }

    #[test]
    fn concrete_stage_invariants(seed in any::<u64>()) {
        let (text, model) = model_from(seed);
        for m in model.init.to_abstract().enumerate(64).unwrap() {
            let lts = build_lts(&model.env, &m, 100_000).unwrap();
            prop_assert!(lts.labels_distinct(), "{}", text);
            for s in &lts.states {
                for t in enabled_transitions(&model.env, s) {
                    let r = rate(&t);
                    let zero_factor = match t.delta {
                        MultInfo::Single(n) => n == 0,
                        MultInfo::Pair(n, k) if t.reactants.is_homo() => n == 0 || k <= 1,
                        MultInfo::Pair(n, k) => n == 0 || k == 0,
                    };
                    prop_assert!(r >= Rational::zero());
                    prop_assert_eq!(r.is_zero(), zero_factor);
                }
            }
            let dtmc = to_dtmc(&lts);
            for row in &dtmc.rows {
                let sum: Rational = row.iter().map(|(_, p)| p.clone()).sum();
                prop_assert!(sum.is_one());
            }
            let f = dtmc.map_scalar(f64::from_rational);
            let x = reach_termination(&f, 1e-12);
            for (s, row) in f.rows.iter().enumerate() {
                prop_assert!((0.0..=1.0).contains(&x[s]));
                if terminated(&f, s) || x[s] == 0.0 {
                    continue;
                }
                let rhs: f64 = row.iter().map(|(t, p)| p * x[*t]).sum();
                prop_assert!((rhs - x[s]).abs() < 1e-9, "{} vs {}", rhs, x[s]);
            }
        }
    }

    #[test]
    fn local_soundness(seed in any::<u64>()) {
        let (text, model) = model_from(seed);
        let init = model.init.to_abstract();
        let moves = abstract_enabled(&model.env, &init);
        for m in init.enumerate(64).unwrap() {
            for t in enabled_transitions(&model.env, &m).into_iter().filter(|t| rate(t) > Rational::zero()) {
                let covered = moves.iter().any(|a| {
                    a.theta == t.theta
                        && a.rate_param == t.rate_param
                        && delta_within(&t.delta, &a.delta)
                        && a.target.contains(&t.target)
                });
                prop_assert!(covered, "{} --{}--> {} uncovered\n{}", m, t.theta, t.target, text);
            }
        }
        let triples: BTreeSet<_> = moves.iter().map(|a| (a.theta.clone(), a.delta, a.target.clone())).collect();
        prop_assert_eq!(triples.len(), moves.len());
    }

    #[test]
    fn no_hybrid_termination_states(seed in any::<u64>(), widening in any::<bool>()) {
        let (text, model) = model_from(seed);
        let init = unsplittable_init(&model);
        // exploration never splits the initial state itself
        prop_assume!(!hybrid(&model, &init));
        let Ok(alts) = explore(&model.env, &init, widening, 2_000) else { return Ok(()) };
        // splits happen at 0, so a species syncing with itself keeps
        // [1,n] together although one copy cannot react
        prop_assume!(alts.edges.iter().all(|e| !e.transition.reactants.is_homo()));
        for s in &alts.states {
            prop_assert!(!hybrid(&model, s), "hybrid state {}\n{}", s, text);
        }
    }

    #[test]
    fn imc_invariants(seed in any::<u64>()) {
        let (text, model) = model_from(seed);
        let Ok(alts) = explore(&model.env, &model.init.to_abstract(), true, 2_000) else { return Ok(()) };
        let imc = to_imc(&alts, 4096).unwrap();
        for s in 0..imc.len() {
            for e in &imc.rows[s] {
                prop_assert!(Rational::zero() <= e.lo && e.lo <= e.hi && e.hi <= Rational::one());
            }
            prop_assert!(no_conflict_sets(&imc, s).iter().any(|ns| feasible(&imc, s, ns)), "state {}\n{}", s, text);
            for t in alts.successors(s) {
                let edges = ts_minus(&alts, s, t).into_iter().chain(alts.edges_between(s, t));
                let pairs: Vec<_> = edges.map(|e| (&e.transition.theta, sym_rate(&e.transition))).collect();
                let merged = merged_rates(pairs.iter().map(|(l, r)| (*l, r.clone()))).unwrap();
                for (label, rate) in &pairs {
                    for (x, i) in &rate.constraints {
                        prop_assert!(i.leq(&merged[*label].constraints[x]));
                    }
                }
            }
        }
    }

    #[test]
    fn one_step_enclosure(seed in any::<u64>()) {
        let (text, model) = model_from(seed);
        let init = model.init.to_abstract();
        let Ok(alts) = explore(&model.env, &init, true, 2_000) else { return Ok(()) };
        let imc = to_imc(&alts, 4096).unwrap();
        for m in init.enumerate(64).unwrap() {
            let lts = build_lts(&model.env, &m, 100_000).unwrap();
            let dtmc = to_dtmc(&lts);
            let concrete = best_abstraction_lts(&lts);
            let rel = simulation_relation(&concrete, &alts);
            for i in (0..lts.states.len()).filter(|&i| !terminated(&dtmc, i)) {
                let exit = lts.exit_rate(i);
                for s in (0..alts.states.len()).filter(|&s| rel[i][s]) {
                    // abstract targets each concrete move can be matched to
                    let options: Vec<(Rational, BTreeSet<usize>)> = lts
                        .edges_from(i)
                        .map(|e1| {
                            let ts = alts
                                .edges_from(s)
                                .filter(|e2| {
                                    e2.transition.theta == e1.transition.theta
                                        && e2.transition.delta.contains(e1.transition.delta)
                                        && rel[e1.target][e2.target]
                                })
                                .map(|e2| e2.target)
                                .collect();
                            (&e1.rate / &exit, ts)
                        })
                        .collect();
                    let matched: BTreeSet<usize> = options.iter().flat_map(|(_, ts)| ts.iter().copied()).collect();
                    for t in matched {
                        let mass = |only: bool| -> Rational {
                            options
                                .iter()
                                .filter(|(_, ts)| ts.contains(&t) && (!only || ts.len() == 1))
                                .map(|(p, _)| p.clone())
                                .sum()
                        };
                        // widening may lump several concrete targets into one
                        // abstract state, so compare aggregated masses
                        let (forced, possible) = (mass(true), mass(false));
                        let (lo, hi) = (imc.lo(s, t), imc.hi(s, t));
                        prop_assert!(
                            forced <= hi && lo <= possible,
                            "{} into {}: mass in [{}, {}] vs bounds [{}, {}]\n{}",
                            lts.states[i],
                            alts.states[t],
                            forced,
                            possible,
                            lo,
                            hi,
                            text
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn termination_bound_invariants(seed in any::<u64>()) {
        let (text, model) = model_from(seed);
        let init = unsplittable_init(&model);
        let Ok(wide) = explore(&model.env, &init, true, 2_000) else { return Ok(()) };
        let Ok(plain) = explore(&model.env, &init, false, 2_000) else { return Ok(()) };
        let bounds = |a: &cgfa_core::AbstractLts| {
            let imc = to_imc(a, 4096).unwrap().map_scalar(f64::from_rational);
            reach_bounds(&imc, 1e-12, 50_000).unwrap()
        };
        let (bw, bp) = (bounds(&wide), bounds(&plain));
        // an unconverged run is only a prefix of the iteration; nothing to compare
        prop_assume!(bw.converged && bp.converged);
        for s in 0..wide.states.len() {
            // both runs stop within the iteration tolerance of their limits
            prop_assert!(bw.lo[s] <= bw.hi[s] + 1e-9);
        }
        prop_assert!(check_simulation(&plain, &wide));
        let (pl, ph) = bp.at(plain.initial);
        let (wl, wh) = bw.at(wide.initial);
        // widening can fold a live state's moves into self-loops; such a
        // state reads as terminated and tightens the widened bounds
        let wide_imc = to_imc(&wide, 4096).unwrap();
        let looping = (0..wide.states.len()).any(|s| {
            forall_terminated(&wide_imc, s) && wide.edges_from(s).any(|e| !sym_rate(&e.transition).max().is_zero())
        });
        // hybrid states from self-syncs stall in the IMC, unevenly across
        // the two explorations
        let self_sync = plain.edges.iter().any(|e| e.transition.reactants.is_homo());
        prop_assert!(looping || self_sync || wl <= pl + 1e-9 && ph <= wh + 1e-9, "({}, {}) not within ({}, {})\n{}", pl, ph, wl, wh, text);

        // iterates never decrease: run k and k + 1 sweeps without early stop;
        // the greedy sums may round by an ulp
        let imc = wide_imc.map_scalar(f64::from_rational);
        let mut prev = reach_bounds(&imc, 0.0, 1).unwrap();
        for k in 2..12 {
            let next = reach_bounds(&imc, 0.0, k).unwrap();
            for s in 0..imc.len() {
                prop_assert!(prev.lo[s] <= next.lo[s] + 1e-15 && prev.hi[s] <= next.hi[s] + 1e-15);
            }
            prev = next;
        }
        for s in (0..imc.len()).filter(|&s| forall_terminated(&imc, s)) {
            prop_assert_eq!(prev.at(s), (1.0, 1.0));
        }
    }
}

#[test]
fn enclosure_holds_on_the_groupies_family() {
    let text = "species X = ?a(1)@lam.X + !b(1)@del.Y\nspecies Y = !a(1)@mu.X + ?b(1)@eta.Y\ninit X:[1,2], Y:[1,2]\n";
    let model = cgfa_core::parse_model(text).unwrap();
    let alts = explore(&model.env, &model.init.to_abstract(), true, 100).unwrap();
    let imc = to_imc(&alts, 4096).unwrap();
    let half = Rational::new(1.into(), 2.into());
    let mut checked = BTreeMap::new();
    for m in model.init.to_abstract().enumerate(64).unwrap() {
        let dtmc = to_dtmc(&build_lts(&model.env, &m, 100).unwrap());
        for (i, row) in dtmc.rows.iter().enumerate() {
            for (_, p) in row.iter().filter(|_| !terminated(&dtmc, i)) {
                assert_eq!(*p, half);
                *checked.entry(m.to_string()).or_insert(0) += 1;
            }
        }
    }
    assert_eq!(checked.len(), 4);
    assert!(imc
        .rows
        .iter()
        .enumerate()
        .all(|(s, r)| r.iter().all(|e| e.target == s || e.lo == half)));
}

/// A target reachable under two labels never conflicts with a target of one
/// of them, so a no-conflict set can force mass onto a branch a concrete
/// member never takes. Pins the current behaviour of the literal conflict
/// relation.
#[test]
fn multi_label_targets_escape_conflict_groups() {
    let text = "species A = tau(1).0\nspecies B = !a(1).0 + !a(1).C\nspecies C = !b(1).C + ?b(1).0\ninit A:[2,4], B:[0,2], C:[1,3]\n";
    let model = cgfa_core::parse_model(text).unwrap();
    let alts = explore(&model.env, &model.init.to_abstract(), true, 100).unwrap();
    let imc = to_imc(&alts, 4096).unwrap();
    let s = alts
        .states
        .iter()
        .position(|m| m.to_string() == "{A:[1,3], B:[0,2], C:[1,3]}")
        .unwrap();
    let shrunk = alts
        .states
        .iter()
        .position(|m| m.to_string() == "{B:[0,2], C:[1,3]}")
        .unwrap();
    assert_eq!(imc.labels_of(s, s).len(), 2);
    assert_eq!(no_conflict_sets(&imc, s), vec![vec![s, shrunk]]);
    // {A:2, C:1} moves to {A:1, C:1}, inside s, with probability 1
    assert_eq!(imc.lo(s, shrunk), Rational::new(1.into(), 7.into()));
}

/// The two ways a hybrid state still arises, pinned so a change in the
/// refinement shows up here.
#[test]
fn hybrid_states_from_idle_species_and_self_sync() {
    let idle = "species A = ?a(2).0 + tau(2).0\nspecies B = tau(1).0 + tau(1).0\nspecies C = !b(2).C\ninit A:[0,2], B:[2,5], C:[2,4]\n";
    let self_sync = "species A = ?a(1).A + !a(1).0\nspecies B = tau(2).A\nspecies C = !a(2).0\ninit A:[1,2], B:[1,4], C:[1,2]\n";
    for (text, state) in [
        (idle, "{A:[0,2], C:[2,4]}"),
        (self_sync, "{A:[1,2], C:[1,2]}"),
    ] {
        let model = cgfa_core::parse_model(text).unwrap();
        let alts = explore(&model.env, &model.init.to_abstract(), false, 2_000).unwrap();
        let s = alts.states.iter().find(|m| m.to_string() == state).unwrap();
        assert!(hybrid(&model, s), "{state}");
    }
}

/// Widening folds every move of this model into self-loops, so the single
/// widened state counts as terminated while the unwidened chain still admits
/// a scheduler that never reaches a terminated state.
#[test]
fn widened_self_loops_can_tighten_bounds() {
    let text = "species A = !a(2).C\nspecies B = ?b(2).B + !b(2).B\nspecies C = tau(1).C + !b(1).B\ninit A:[1,3], B:[1,3], C:[1,2]\n";
    let model = cgfa_core::parse_model(text).unwrap();
    let init = model.init.to_abstract();
    let run = |widening| {
        let alts = explore(&model.env, &init, widening, 2_000).unwrap();
        let imc = to_imc(&alts, 4096).unwrap().map_scalar(f64::from_rational);
        reach_bounds(&imc, 1e-12, 1_000_000)
            .unwrap()
            .at(alts.initial)
    };
    assert_eq!(run(true), (1.0, 1.0));
    assert_eq!(run(false).0, 0.0);
    // every concrete move is a self-loop, so each member is terminated
    for m in init.enumerate(64).unwrap() {
        let dtmc = to_dtmc(&build_lts(&model.env, &m, 1_000).unwrap());
        assert!(terminated(&dtmc, dtmc.initial));
    }
}
