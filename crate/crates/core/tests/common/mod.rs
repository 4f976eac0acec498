#![allow(dead_code)]

use qap_core::instance::generate_synthetic;
use qap_core::{Instance, OfflineConstraint, PartialOrder};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random layered DAG on `n` products: arcs go forward in a shuffled order.
pub fn random_order(n: usize, rng: &mut ChaCha8Rng) -> PartialOrder {
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(rng);
    let mut arcs = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            if rng.random_bool(0.25) {
                arcs.push((perm[a], perm[b]));
            }
        }
    }
    PartialOrder::new(n, arcs).unwrap()
}

/// Small synthetic instance, optionally with random orders on every online
/// segment and a cardinality limit.
pub fn small_instance(n: usize, m: usize, u_on0: f64, seed: u64, luce: bool, k: Option<usize>) -> Instance {
    let mut inst = generate_synthetic(n, m, 0.5, u_on0, seed).unwrap();
    if luce {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
        inst = inst.with_orders((0..m).map(|_| random_order(n, &mut rng)).collect());
    }
    if let Some(k) = k {
        inst = inst.with_constraint(OfflineConstraint::Cardinality(k));
    }
    inst
}
