use rand::seq::index;
use rand::seq::SliceRandom;
use rand::Rng;

use super::{IdmData, IdmInstance, Instance, PartialOrder, Segment};
use crate::error::{Error, Result};
use crate::rng::{self, FAVORITES, ORDERS, PRICES, WEIGHTS};

/// Random instance with offline prices in U(10,20), weights in U(0,1) and a
/// distinct favorite product (weight 1) per online segment. The first
/// `ceil(m/2)` online segments pay offline prices, the rest get a discount
/// factor in U(0.8,1) per product.
pub fn generate_synthetic(n: usize, m: usize, alpha0: f64, u_on0: f64, seed: u64) -> Result<Instance> {
    if m == 0 {
        return Err(Error::Precondition("at least one online segment is required".into()));
    }
    if n < m {
        return Err(Error::Precondition(format!(
            "cannot assign unique favorites: {m} online segments but only {n} products"
        )));
    }
    if !(0.0..=1.0).contains(&alpha0) {
        return Err(Error::Precondition(format!("alpha0 = {alpha0} is not a probability")));
    }
    if !(u_on0.is_finite() && u_on0 > 0.0) {
        return Err(Error::Precondition(format!("online no-purchase weight {u_on0} must be positive")));
    }
    let uniform = |stage, sub, lo: f64, hi: f64| {
        let mut g = rng::stream(seed, stage, sub);
        (0..n).map(|_| g.random_range(lo..hi)).collect::<Vec<f64>>()
    };
    let r0 = uniform(PRICES, 0, 10.0, 20.0);
    let favorites = index::sample(&mut rng::stream(seed, FAVORITES, 0), n, m).into_vec();
    let regular = m.div_ceil(2);

    let mut segments = vec![Segment { alpha: alpha0, u0: 1.0, r: r0.clone(), u: uniform(WEIGHTS, 0, 0.0, 1.0) }];
    for i in 1..=m {
        let r = if i <= regular {
            r0.clone()
        } else {
            uniform(PRICES, i as u64, 0.8, 1.0).iter().zip(&r0).map(|(f, p)| f * p).collect()
        };
        let mut u = uniform(WEIGHTS, i as u64, 0.0, 1.0);
        u[favorites[i - 1]] = 1.0;
        segments.push(Segment { alpha: (1.0 - alpha0) / m as f64, u0: u_on0, r, u });
    }
    Ok(Instance::new(n, segments))
}

/// Independent-demand instance on top of [`generate_synthetic`]. Online
/// purchase probabilities are the segment's MNL shares when everything is
/// offered, `u_ij / (u_on0 + sum_k u_ik)`; precedence arcs run forward along a random
/// permutation, each present with probability `2 / n`.
pub fn generate_idm(n: usize, m: usize, alpha0: f64, u_on0: f64, seed: u64) -> Result<IdmInstance> {
    let mut base = generate_synthetic(n, m, alpha0, u_on0, seed)?;
    let theta: Vec<Vec<f64>> = base.segments[1..]
        .iter()
        .map(|s| {
            let w = s.u0 + s.u.iter().sum::<f64>();
            s.u.iter().map(|&u| (u / w).max(1e-6)).collect()
        })
        .collect();
    let mut g = rng::stream(seed, ORDERS, 0);
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut g);
    let p = (2.0 / n as f64).min(1.0);
    let mut precedence = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            if g.random_bool(p) {
                precedence.push((perm[a], perm[b]));
            }
        }
    }
    base.idm = Some(IdmData { theta: theta.clone(), precedence: precedence.clone() });
    Ok(IdmInstance::new(base, theta, precedence))
}

const WIDTH: usize = 6;

/// One random dominance DAG per online segment over `floor(n/4)` sampled
/// products. Each of the first `s - 6` products in a random permutation
/// gets arcs to up to three of its next six neighbours; the first five get
/// at least one. With `s <= 6` the order is empty.
pub fn generate_partial_orders(n: usize, m: usize, seed: u64) -> Vec<PartialOrder> {
    let s = n / 4;
    let l = WIDTH / 2;
    (1..=m)
        .map(|i| {
            let mut g = rng::stream(seed, ORDERS, i as u64);
            let mut perm = index::sample(&mut g, n, s).into_vec();
            perm.shuffle(&mut g);
            let mut arcs = Vec::new();
            for v in 1..=s.saturating_sub(WIDTH) {
                let k = if v < WIDTH { g.random_range(1..=l) } else { g.random_range(0..=l) };
                let mut picks = index::sample(&mut g, WIDTH, k).into_vec();
                picks.sort_unstable();
                // positions v+1..=v+WIDTH, 1-based
                arcs.extend(picks.into_iter().map(|o| (perm[v - 1], perm[v + o])));
            }
            PartialOrder::new(n, arcs).expect("generated arcs are in range")
        })
        .collect()
}
