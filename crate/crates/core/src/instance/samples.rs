//! Small hand-built instances with known optima, used by tests and the CLI demo.

use super::{Instance, Segment};

fn seg(alpha: f64, r: [f64; 3], u: [f64; 3]) -> Segment {
    Segment { alpha, u0: 1.0, r: r.to_vec(), u: u.to_vec() }
}

/// Three products, two online segments. Optimum 9.1096 with offline {1,3},
/// online {1,3} and {1}; the two-step rule only reaches 7.94.
pub fn ro_gap() -> Instance {
    let r = [10.0, 9.0, 8.0];
    Instance::new(
        3,
        vec![seg(0.4, r, [100.0, 100.0, 1.0]), seg(0.4, r, [1.0, 1.0, 100.0]), seg(0.2, r, [100.0, 1.0, 1.0])],
    )
}

/// Three products where the improved two-step rule helps but is still
/// short of the optimum 18.386.
pub fn improved_ro_gap() -> Instance {
    Instance::new(
        3,
        vec![
            seg(0.7, [20.0, 14.0, 14.0], [100.0, 200.0, 1.0]),
            seg(0.2, [10.0, 10.0, 18.0], [1.0, 1.0, 100.0]),
            seg(0.1, [10.0, 10.0, 20.0], [2.0, 2.0, 1.0]),
        ],
    )
}
