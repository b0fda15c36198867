//! Inputs shared by the benchmarks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use railsched_core::dl::{DiffConstraint, DiffVar};
use railsched_core::gen::{generate, GenParams};
use railsched_core::{parse_instance, Instance};

const REFERENCE: &str = include_str!("../../../fixtures/reference.lp");
const REFERENCE_FULL: &str = include_str!("../../../fixtures/reference_full.lp");

pub fn reference() -> Instance {
    parse_instance(REFERENCE).expect("fixture parses")
}

pub fn reference_full() -> Instance {
    parse_instance(REFERENCE_FULL).expect("fixture parses")
}

pub fn generated(trains: usize, nodes: usize, seed: u64) -> Instance {
    generate(&GenParams {
        trains,
        nodes,
        seed,
        ..GenParams::default()
    })
}

/// Random constraints `u − v ≤ d` over `vars` variables plus zero.
pub fn random_constraints(vars: u32, count: usize, max_weight: i64, seed: u64) -> Vec<DiffConstraint> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|i| {
            let u = DiffVar(rng.random_range(0..=vars));
            let v = DiffVar(rng.random_range(0..=vars));
            DiffConstraint::new(u, v, rng.random_range(-max_weight..=max_weight), i as u32 + 1)
        })
        .collect()
}
