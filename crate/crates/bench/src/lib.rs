//! Fixtures shared by the benchmarks.

use qap_core::formulations::build_ch0;
use qap_core::instance::generate_synthetic;
use qap_core::lp::solve_lp;
use qap_core::{Instance, Segment};

pub fn instance(n: usize, m: usize, seed: u64) -> Instance {
    generate_synthetic(n, m, 0.5, 2.0, seed).expect("valid generator arguments")
}

/// Offline segment with a fractional relaxation point `(x, y0, y)` taken
/// from the root LP of the base formulation.
pub fn relaxation_point(n: usize, seed: u64) -> (Segment, Vec<f64>, f64, Vec<f64>) {
    let inst = instance(n, 1, seed);
    let (model, vm) = build_ch0(&inst).expect("generated instance is valid");
    let r = solve_lp(&model, None);
    let p = vm.point(0, &r.x);
    (inst.segments[0].clone(), vm.x_values(&r.x), p.y0, p.y)
}
