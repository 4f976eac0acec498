//! Multinomial logit and two-stage Luce primitives. Assortments are sorted
//! lists of 0-based product indices.

use crate::error::{Error, Result};
use crate::instance::{Instance, PartialOrder, Segment};

pub const CC_TOL: f64 = 1e-7;

/// Charnes-Cooper coordinates of one segment's choice: `y0` is the
/// no-purchase probability over `u0`, `y[j]` the purchase probability of
/// `j` over its weight.
#[derive(Clone, Debug, PartialEq)]
pub struct ChoicePoint {
    pub y0: f64,
    pub y: Vec<f64>,
}

impl ChoicePoint {
    /// `u0 y0 + sum u_j y_j - 1`.
    pub fn normalization_residual(&self, seg: &Segment) -> f64 {
        seg.u0 * self.y0 + seg.u.iter().zip(&self.y).map(|(u, y)| u * y).sum::<f64>() - 1.0
    }
}

fn attraction(seg: &Segment, s: &[usize]) -> f64 {
    seg.u0 + s.iter().map(|&j| seg.u[j]).sum::<f64>()
}

pub fn mnl_revenue(seg: &Segment, s: &[usize]) -> f64 {
    if s.is_empty() {
        return 0.0;
    }
    s.iter().map(|&j| seg.r[j] * seg.u[j]).sum::<f64>() / attraction(seg, s)
}

/// Purchase probability of every product when `s` is offered.
pub fn mnl_probabilities(seg: &Segment, s: &[usize]) -> Vec<f64> {
    let mut p = vec![0.0; seg.u.len()];
    let total = attraction(seg, s);
    for &j in s {
        p[j] = seg.u[j] / total;
    }
    p
}

pub fn cc_transform(seg: &Segment, s: &[usize]) -> ChoicePoint {
    let y0 = 1.0 / attraction(seg, s);
    let mut y = vec![0.0; seg.u.len()];
    for &j in s {
        y[j] = y0;
    }
    ChoicePoint { y0, y }
}

/// Recover the assortment behind a vertex point.
pub fn cc_inverse(p: &ChoicePoint, tol: f64) -> Result<Vec<usize>> {
    let mut s = Vec::new();
    for (j, &yj) in p.y.iter().enumerate() {
        if yj >= p.y0 - tol {
            s.push(j);
        } else if yj > tol {
            return Err(Error::Precondition(format!("non-vertex point: y[{}] = {yj} with y0 = {}", j + 1, p.y0)));
        }
    }
    Ok(s)
}

/// Drop every product of `s` that some other member of `s` dominates,
/// directly or through a chain of arcs.
pub fn undominated(order: &PartialOrder, s: &[usize]) -> Vec<usize> {
    s.iter().copied().filter(|&j| !s.iter().any(|&k| k != j && order.dominates(k, j))).collect()
}

pub fn cover_relations(order: &PartialOrder) -> Vec<(usize, usize)> {
    order.covers().to_vec()
}

pub fn minimal_elements(order: &PartialOrder) -> Vec<usize> {
    order.minimal().to_vec()
}

/// What segment `i` actually sees when `s` is offered to it.
pub fn consideration_set(inst: &Instance, i: usize, s: &[usize]) -> Vec<usize> {
    match inst.order(i) {
        Some(o) => undominated(o, s),
        None => s.to_vec(),
    }
}

/// Expected revenue of segment `i` under its own choice model.
pub fn segment_revenue(inst: &Instance, i: usize, s: &[usize]) -> f64 {
    mnl_revenue(&inst.segments[i], &consideration_set(inst, i, s))
}

/// `sum_i alpha_i R_i(S_i)` with `sets[0]` offline and `sets[i]` online.
pub fn total_revenue(inst: &Instance, sets: &[Vec<usize>]) -> f64 {
    sets.iter().enumerate().map(|(i, s)| inst.segments[i].alpha * segment_revenue(inst, i, s)).sum()
}
