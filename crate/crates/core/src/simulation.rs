//! Simulation preorder between abstract LTSs.
//!
//! `M̂₁` is simulated by `M̂₂` when `M̂₁ ⊑ M̂₂` and every transition of `M̂₁`
//! is matched by one of `M̂₂` with the same label and rate parameter, a
//! larger `Δ̂`, and a target that again simulates. The matching is a total
//! function from left transitions; it need not be onto.

use crate::alts::AbstractLts;

/// Greatest simulation relation, as a dense `left × right` table.
pub fn simulation_relation(a1: &AbstractLts, a2: &AbstractLts) -> Vec<Vec<bool>> {
    let mut rel: Vec<Vec<bool>> = a1
        .states
        .iter()
        .map(|s1| a2.states.iter().map(|s2| s1.leq(s2)).collect())
        .collect();
    loop {
        let mut changed = false;
        for i in 0..a1.states.len() {
            for j in 0..a2.states.len() {
                if !rel[i][j] {
                    continue;
                }
                let matched = a1.edges_from(i).all(|e1| {
                    let t1 = &e1.transition;
                    a2.edges_from(j).any(|e2| {
                        let t2 = &e2.transition;
                        t1.theta == t2.theta
                            && t1.rate_param == t2.rate_param
                            && t1.delta.leq(&t2.delta)
                            && rel[e1.target][e2.target]
                    })
                });
                if !matched {
                    rel[i][j] = false;
                    changed = true;
                }
            }
        }
        if !changed {
            return rel;
        }
    }
}

/// `a1 ⊑_lts a2`: the initial states are related.
pub fn check_simulation(a1: &AbstractLts, a2: &AbstractLts) -> bool {
    check_simulation_from(a1, a1.initial, a2, a2.initial)
}

/// Whether state `s1` of `a1` is simulated by state `s2` of `a2`.
pub fn check_simulation_from(a1: &AbstractLts, s1: usize, a2: &AbstractLts, s2: usize) -> bool {
    simulation_relation(a1, a2)[s1][s2]
}
