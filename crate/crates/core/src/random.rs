//! Random models for property tests and the soundness corpus.
//!
//! Every product holds at most one species, so the population never grows
//! and concrete state spaces stay finite.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::domain::{AbstractState, Interval};
use crate::model::{Model, Name};
use crate::parser::parse_model;

#[derive(Debug, Clone)]
pub struct CorpusConfig {
    pub min_species: usize,
    pub max_species: usize,
    pub max_summands: usize,
    /// Upper bound on `hi - lo` of each initial interval.
    pub max_width: u64,
    pub max_low: u64,
    /// Largest admissible concretization of the initial state.
    pub gamma_cap: u64,
}

impl Default for CorpusConfig {
    fn default() -> Self {
        Self {
            min_species: 2,
            max_species: 3,
            max_summands: 2,
            max_width: 3,
            max_low: 2,
            gamma_cap: 64,
        }
    }
}

const NAMES: [&str; 3] = ["A", "B", "C"];
const CHANNELS: [&str; 2] = ["a", "b"];

fn random_prefix(rng: &mut impl Rng, species: &[&str]) -> String {
    let rate = rng.gen_range(1..=2);
    let channel = CHANNELS.choose(rng).expect("nonempty");
    let action = match rng.gen_range(0..3) {
        0 => format!("tau({rate})"),
        1 => format!("?{channel}({rate})"),
        _ => format!("!{channel}({rate})"),
    };
    let product = if rng.gen_bool(0.3) {
        "0"
    } else {
        species.choose(rng).expect("nonempty")
    };
    format!("{action}.{product}")
}

/// Source text of a random model with an interval `init`.
pub fn random_model_text(rng: &mut impl Rng, config: &CorpusConfig) -> String {
    let count = rng.gen_range(config.min_species..=config.max_species);
    let species = &NAMES[..count];
    let mut text = String::new();
    for name in species {
        let summands: Vec<String> = (0..rng.gen_range(1..=config.max_summands))
            .map(|_| random_prefix(rng, species))
            .collect();
        text.push_str(&format!("species {name} = {}\n", summands.join(" + ")));
    }
    let init = loop {
        let intervals: Vec<(u64, u64)> = species
            .iter()
            .map(|_| {
                let lo = rng.gen_range(0..=config.max_low);
                (lo, lo + rng.gen_range(0..=config.max_width))
            })
            .collect();
        let gamma: u64 = intervals.iter().map(|(lo, hi)| hi - lo + 1).product();
        if gamma <= config.gamma_cap && intervals.iter().any(|&(_, hi)| hi > 0) {
            break intervals;
        }
    };
    let decls: Vec<String> = species
        .iter()
        .zip(&init)
        .map(|(n, (lo, hi))| format!("{n}:[{lo},{hi}]"))
        .collect();
    text.push_str(&format!("init {}\n", decls.join(", ")));
    text
}

/// A parsed random model. Generated text is always well formed.
pub fn random_model(rng: &mut impl Rng, config: &CorpusConfig) -> (String, Model) {
    let text = random_model_text(rng, config);
    let model = parse_model(&text)
        .unwrap_or_else(|e| panic!("generated model does not parse: {e}\n{text}"));
    (text, model)
}

/// A random abstract state over `species` with the configured widths.
pub fn random_abstract_state(
    rng: &mut impl Rng,
    species: &[Name],
    config: &CorpusConfig,
) -> AbstractState {
    let mut state = AbstractState::new();
    for name in species {
        let lo = rng.gen_range(0..=config.max_low);
        state.set(
            name.clone(),
            Interval::range(lo, lo + rng.gen_range(0..=config.max_width)),
        );
    }
    state
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::concrete::build_lts;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn generated_models_are_finite_and_reproducible() {
        let config = CorpusConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut again = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..40 {
            let (text, model) = random_model(&mut rng, &config);
            assert_eq!(text, random_model_text(&mut again, &config));
            let init = model.init.to_abstract();
            assert!(init
                .concretization_count()
                .is_some_and(|c| c <= u128::from(config.gamma_cap)));
            for m in init.enumerate(64).unwrap() {
                let lts = build_lts(&model.env, &m, 10_000).unwrap();
                // population never grows
                assert!(lts.states.iter().all(|s| s.size() <= m.size()));
            }
        }
    }
}
