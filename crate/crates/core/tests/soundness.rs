//! End-to-end soundness of the abstraction on random models.

use cgfa_core::random::{random_model, CorpusConfig};
use cgfa_core::termination::DEFAULT_MAX_ITERS;
use cgfa_core::{
    best_abstraction_lts, build_lts, check_simulation, explore, reach_bounds, reach_termination,
    to_dtmc, to_imc, AbstractState, Scalar,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const ABSTRACT_CAP: usize = 2_000;

#[test]
fn bounds_bracket_every_concretization() {
    let config = CorpusConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut checked = 0;
    let mut failures = Vec::new();
    while checked < 60 {
        let (text, model) = random_model(&mut rng, &config);
        let init = model.init.to_abstract();
        let Ok(alts) = explore(&model.env, &init, true, ABSTRACT_CAP) else {
            continue;
        };
        checked += 1;
        let imc = to_imc(&alts, 4096).unwrap().map_scalar(f64::from_rational);
        let bounds = match reach_bounds(&imc, 1e-12, DEFAULT_MAX_ITERS) {
            Ok(b) => b,
            Err(e) => {
                failures.push(format!("{e}\n{text}"));
                continue;
            }
        };
        let (lo, hi) = bounds.at(imc.initial);
        for m in init.enumerate(64).unwrap() {
            let lts = build_lts(&model.env, &m, 100_000).unwrap();
            if !check_simulation(&best_abstraction_lts(&lts), &alts) {
                failures.push(format!("simulation fails at {m}\n{text}"));
            }
            let d = to_dtmc(&lts).map_scalar(f64::from_rational);
            let p = reach_termination(&d, 1e-12)[d.initial];
            if p < lo - 1e-6 || p > hi + 1e-6 {
                failures.push(format!("{m}: {p} outside [{lo}, {hi}]\n{text}"));
            }
        }
    }
    assert!(
        failures.is_empty(),
        "{} failures:\n{}",
        failures.len(),
        failures.join("\n")
    );
}

#[test]
fn exact_initial_state_collapses_to_concrete_answer() {
    let config = CorpusConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for _ in 0..40 {
        let (text, model) = random_model(&mut rng, &config);
        for m in model.init.to_abstract().enumerate(64).unwrap() {
            let d = to_dtmc(&build_lts(&model.env, &m, 100_000).unwrap())
                .map_scalar(f64::from_rational);
            let p = reach_termination(&d, 1e-12)[d.initial];
            let alts = explore(&model.env, &AbstractState::alpha(&m), true, ABSTRACT_CAP).unwrap();
            assert_eq!(alts.states.len(), d.len(), "{m}\n{text}");
            let imc = to_imc(&alts, 4096).unwrap().map_scalar(f64::from_rational);
            let (lo, hi) = reach_bounds(&imc, 1e-12, DEFAULT_MAX_ITERS)
                .unwrap()
                .at(imc.initial);
            assert!(
                (lo - p).abs() <= 2e-9 && (hi - p).abs() <= 2e-9,
                "{m}: ({lo}, {hi}) vs {p}\n{text}"
            );
        }
    }
}

#[test]
fn fallback_bounds_still_bracket() {
    let config = CorpusConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..30 {
        let (text, model) = random_model(&mut rng, &config);
        let init = model.init.to_abstract();
        let alts = explore(&model.env, &init, true, ABSTRACT_CAP).unwrap();
        let exact = reach_bounds(
            &to_imc(&alts, 4096).unwrap().map_scalar(f64::from_rational),
            1e-12,
            DEFAULT_MAX_ITERS,
        )
        .unwrap()
        .at(alts.initial);
        let coarse = reach_bounds(
            &to_imc(&alts, 1).unwrap().map_scalar(f64::from_rational),
            1e-12,
            DEFAULT_MAX_ITERS,
        )
        .unwrap()
        .at(alts.initial);
        assert!(
            coarse.0 <= exact.0 + 1e-9 && exact.1 <= coarse.1 + 1e-9,
            "{coarse:?} vs {exact:?}\n{text}"
        );
    }
}
