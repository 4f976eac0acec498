//! Exact solvers and heuristics against exhaustive enumeration.

mod common;

use common::small_instance;
use proptest::prelude::*;
use qap_core::heuristics::{improved_ro, two_step_ro};
use qap_core::oracle::brute_force_qap;
use qap_core::solver::{solve_qap, Formulation, SolveOptions};
use qap_core::Instance;

fn instance() -> impl Strategy<Value = Instance> {
    (4usize..=8, 1usize..=3, prop_oneof![Just(2.0), Just(5.0), Just(10.0)], any::<u64>(), any::<bool>(), any::<bool>())
        .prop_map(|(n, m, u, seed, luce, card)| small_instance(n, m, u, seed, luce, card.then(|| n.div_ceil(3))))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(120))]

    #[test]
    fn both_formulations_match_enumeration(inst in instance()) {
        let truth = brute_force_qap(&inst).unwrap();
        for f in [Formulation::Ch, Formulation::Milp] {
            let opts = SolveOptions { formulation: f, mip: qap_core::lp::MipOptions { mip_gap: 0.0, ..Default::default() }, ..Default::default() };
            let sol = solve_qap(&inst, &opts).unwrap();
            prop_assert!((sol.objective - truth.objective).abs() < 1e-6, "{:?}: {} vs {}", f, sol.objective, truth.objective);
            sol.check(&inst).unwrap();
        }
        truth.check(&inst).unwrap();
    }

    #[test]
    fn heuristics_are_feasible_and_dominated(inst in instance()) {
        let truth = brute_force_qap(&inst).unwrap().objective;
        let ro = two_step_ro(&inst).unwrap();
        let iro = improved_ro(&inst).unwrap();
        ro.check(&inst).unwrap();
        iro.check(&inst).unwrap();
        prop_assert!(ro.objective <= truth + 1e-9);
        prop_assert!(iro.objective <= truth + 1e-9);
        if inst.offline_constraint == qap_core::OfflineConstraint::Unconstrained {
            prop_assert!(iro.objective >= ro.objective - 1e-12);
        }
    }

    #[test]
    fn oracle_ignores_product_labels(inst in instance(), rot in 1usize..8) {
        let n = inst.n;
        let perm: Vec<usize> = (0..n).map(|j| (j + rot) % n).collect();
        let mut relabeled = inst.clone();
        for seg in &mut relabeled.segments {
            let (r, u) = (seg.r.clone(), seg.u.clone());
            for j in 0..n {
                seg.r[perm[j]] = r[j];
                seg.u[perm[j]] = u[j];
            }
        }
        for o in relabeled.orders.iter_mut().flatten() {
            let arcs = o.arcs().iter().map(|&(a, b)| (perm[a], perm[b])).collect();
            *o = qap_core::PartialOrder::new(n, arcs).unwrap();
        }
        let a = brute_force_qap(&inst).unwrap().objective;
        let b = brute_force_qap(&relabeled).unwrap().objective;
        prop_assert!((a - b).abs() < 1e-9);
    }
}
