//! Separation of the lower (`Under`) and upper (`Over`) linking inequalities
//! between `x_j` and a segment's choice point, one sort per point.
//!
//! With `U(S) = u0 + sum_{t in S} u_t` and `T = S + j`, the rows are
//!
//! ```text
//! Under:  U(T) y_j + sum_{t not in T} u_t y_t         >= x_j
//! Over:   U(T) y_j + sum_{t in S} u_t (y_t - y0)      <= x_j
//! ```
//!
//! Divided by `U(T)` these are the usual forms with `alpha(T) = 1/U(T)`;
//! `Cut::violation` is measured in that divided form.

use crate::formulations::VarMap;
use crate::instance::Segment;
use crate::lp::{Row, Sense};

/// Cuts violated by no more than this are not reported.
pub const CUT_TOL: f64 = 1e-7;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CutKind {
    Under,
    Over,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Cut {
    pub segment: usize,
    pub product: usize,
    /// Sorted, never contains `product`.
    pub set: Vec<usize>,
    pub kind: CutKind,
    pub violation: f64,
}

impl Cut {
    pub fn key(&self) -> (usize, usize, CutKind, &[usize]) {
        (self.segment, self.product, self.kind, &self.set)
    }
}

/// `U(S + j) * (rhs - y_j)` for Under and `U(S + j) * (y_j - rhs)` for Over.
pub fn scaled_violation(seg: &Segment, kind: CutKind, j: usize, set: &[usize], xj: f64, y0: f64, y: &[f64]) -> f64 {
    let big_u = seg.u0 + seg.u[j] + set.iter().map(|&t| seg.u[t]).sum::<f64>();
    match kind {
        CutKind::Under => {
            let mut inside = vec![false; y.len()];
            inside[j] = true;
            for &t in set {
                inside[t] = true;
            }
            let outside: f64 = (0..y.len()).filter(|&t| !inside[t]).map(|t| seg.u[t] * y[t]).sum();
            xj - big_u * y[j] - outside
        }
        CutKind::Over => big_u * y[j] + set.iter().map(|&t| seg.u[t] * (y[t] - y0)).sum::<f64>() - xj,
    }
}

/// Violation in the divided form; negative when the point satisfies the row.
pub fn violation(seg: &Segment, kind: CutKind, j: usize, set: &[usize], xj: f64, y0: f64, y: &[f64]) -> f64 {
    let big_u = seg.u0 + seg.u[j] + set.iter().map(|&t| seg.u[t]).sum::<f64>();
    scaled_violation(seg, kind, j, set, xj, y0, y) / big_u
}

/// One segment's point with products sorted by `y` descending, ties by
/// index, and prefix sums of `u` and `u y` along that order.
pub struct SortedPoint<'a> {
    seg: &'a Segment,
    y0: f64,
    y: &'a [f64],
    order: Vec<usize>,
    pos: Vec<usize>,
    pre_u: Vec<f64>,
    pre_uy: Vec<f64>,
    total_uy: f64,
}

impl<'a> SortedPoint<'a> {
    pub fn new(seg: &'a Segment, y0: f64, y: &'a [f64]) -> SortedPoint<'a> {
        let n = y.len();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| y[b].total_cmp(&y[a]).then(a.cmp(&b)));
        let mut pos = vec![0; n];
        let mut pre_u = vec![0.0; n + 1];
        let mut pre_uy = vec![0.0; n + 1];
        for (k, &t) in order.iter().enumerate() {
            pos[t] = k;
            pre_u[k + 1] = pre_u[k] + seg.u[t];
            pre_uy[k + 1] = pre_uy[k] + seg.u[t] * y[t];
        }
        let total_uy = pre_uy[n];
        SortedPoint { seg, y0, y, order, pos, pre_u, pre_uy, total_uy }
    }

    /// Longest prefix of the order, skipping `j`, whose values are `>= level`.
    /// Returns the prefix length and the sums of `u` and `u y` over it.
    fn prefix(&self, j: usize, level: f64) -> (usize, f64, f64) {
        let len = self.order.partition_point(|&t| self.y[t] >= level);
        let (mut su, mut suy) = (self.pre_u[len], self.pre_uy[len]);
        if self.pos[j] < len {
            su -= self.seg.u[j];
            suy -= self.seg.u[j] * self.y[j];
        }
        (len, su, suy)
    }

    fn set(&self, j: usize, len: usize) -> Vec<usize> {
        let mut s: Vec<usize> = self.order[..len].iter().copied().filter(|&t| t != j).collect();
        s.sort_unstable();
        s
    }

    fn finish(&self, i: usize, j: usize, kind: CutKind, len: usize, xj: f64) -> Option<Cut> {
        let set = self.set(j, len);
        let v = violation(self.seg, kind, j, &set, xj, self.y0, self.y);
        (v > CUT_TOL).then_some(Cut { segment: i, product: j, set, kind, violation: v })
    }

    /// The lower row at `S* = {t != j : y_t >= y_j}`, if violated.
    pub fn under(&self, i: usize, j: usize, xj: f64) -> Option<Cut> {
        let seg = self.seg;
        let yj = self.y[j];
        let (len, su, suy) = self.prefix(j, yj);
        let big_u = seg.u0 + seg.u[j] + su;
        let outside = self.total_uy - seg.u[j] * yj - suy;
        let scaled = xj - big_u * yj - outside;
        if scaled / big_u <= CUT_TOL * 0.5 {
            return None;
        }
        self.finish(i, j, CutKind::Under, len, xj)
    }

    /// The upper row at `T* = {t != j : y_t >= y0 - y_j}`, if violated.
    pub fn over(&self, i: usize, j: usize, xj: f64) -> Option<Cut> {
        let seg = self.seg;
        let yj = self.y[j];
        let (len, su, suy) = self.prefix(j, self.y0 - yj);
        let big_u = seg.u0 + seg.u[j] + su;
        let scaled = big_u * yj + suy - su * self.y0 - xj;
        if scaled / big_u <= CUT_TOL * 0.5 {
            return None;
        }
        self.finish(i, j, CutKind::Over, len, xj)
    }
}

pub fn separate_under(i: usize, seg: &Segment, j: usize, xj: f64, y0: f64, y: &[f64]) -> Option<Cut> {
    SortedPoint::new(seg, y0, y).under(i, j, xj)
}

pub fn separate_over(i: usize, seg: &Segment, j: usize, xj: f64, y0: f64, y: &[f64]) -> Option<Cut> {
    SortedPoint::new(seg, y0, y).over(i, j, xj)
}

/// Every violated cut of one segment, sharing a single sort. Lower rows are
/// only sought when `under` is set.
pub fn separate_segment(i: usize, seg: &Segment, x: &[f64], y0: f64, y: &[f64], under: bool) -> Vec<Cut> {
    let sp = SortedPoint::new(seg, y0, y);
    let mut cuts = Vec::new();
    for (j, &xj) in x.iter().enumerate() {
        if under {
            cuts.extend(sp.under(i, j, xj));
        }
        cuts.extend(sp.over(i, j, xj));
    }
    cuts
}

/// The cut as a model row in the scaled form above.
pub fn cut_to_row(cut: &Cut, seg: &Segment, vm: &VarMap) -> Row {
    let i = cut.segment;
    let j = cut.product;
    let y = &vm.y[i];
    let big_u = seg.u0 + seg.u[j] + cut.set.iter().map(|&t| seg.u[t]).sum::<f64>();
    let mut coeffs = vec![(y[j], big_u), (vm.x[j], -1.0)];
    let tag = match cut.kind {
        CutKind::Under => {
            let mut inside = vec![false; y.len()];
            inside[j] = true;
            for &t in &cut.set {
                inside[t] = true;
            }
            coeffs.extend((0..y.len()).filter(|&t| !inside[t]).map(|t| (y[t], seg.u[t])));
            "under"
        }
        CutKind::Over => {
            let su: f64 = cut.set.iter().map(|&t| seg.u[t]).sum();
            coeffs.extend(cut.set.iter().map(|&t| (y[t], seg.u[t])));
            if !cut.set.is_empty() {
                coeffs.push((vm.y0[i], -su));
            }
            "over"
        }
    };
    coeffs.sort_by_key(|c| c.0);
    let sense = if cut.kind == CutKind::Under { Sense::Ge } else { Sense::Le };
    let set: Vec<String> = cut.set.iter().map(|t| (t + 1).to_string()).collect();
    Row::new(format!("{tag}{i}_{}_{}", j + 1, set.join("_")), coeffs, sense, 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::{LinearModel, VarKind};

    fn seg() -> Segment {
        Segment { alpha: 1.0, u0: 1.0, r: vec![1.0, 1.0], u: vec![1.0, 2.0] }
    }

    #[test]
    fn lower_cut_at_the_red_point() {
        let cut = separate_under(0, &seg(), 0, 0.95, 0.35, &[0.25, 0.20]).unwrap();
        assert!(cut.set.is_empty());
        assert!((cut.violation - 0.025).abs() < 1e-12);
        // the other candidate set is satisfied
        assert!(violation(&seg(), CutKind::Under, 0, &[1], 0.95, 0.35, &[0.25, 0.20]) < 0.0);
    }

    #[test]
    fn upper_cut_absent_at_the_red_point() {
        assert!(separate_over(0, &seg(), 0, 0.95, 0.35, &[0.25, 0.20]).is_none());
        let v = violation(&seg(), CutKind::Over, 0, &[1], 0.95, 0.35, &[0.25, 0.20]);
        assert!((v + (0.3125 - 0.25)).abs() < 1e-12);
    }

    #[test]
    fn zero_x_means_no_lower_cut() {
        assert!(separate_under(0, &seg(), 0, 0.0, 0.35, &[0.25, 0.20]).is_none());
    }

    #[test]
    fn full_y_with_zero_x_violates_upper() {
        let cut = separate_over(0, &seg(), 0, 0.0, 0.4, &[0.4, 0.1]).unwrap();
        assert_eq!(cut.kind, CutKind::Over);
        assert!(cut.violation > 0.0);
    }

    #[test]
    fn vertex_points_are_clean() {
        let s = seg();
        for set in [vec![], vec![0], vec![1], vec![0, 1]] {
            let p = crate::choice::cc_transform(&s, &set);
            let x: Vec<f64> = (0..2).map(|j| f64::from(set.contains(&j) as u8)).collect();
            assert!(separate_segment(0, &s, &x, p.y0, &p.y, true).is_empty());
        }
    }

    fn tiny_varmap() -> (LinearModel, VarMap) {
        let mut m = LinearModel::new();
        let x = (0..2).map(|j| m.add_var(format!("x{j}"), 0.0, 1.0, VarKind::Binary, 0.0)).collect();
        let y0 = m.add_var("y0", 0.0, 1.0, VarKind::Continuous, 0.0);
        let y = (0..2).map(|j| m.add_var(format!("y{j}"), 0.0, 1.0, VarKind::Continuous, 0.0)).collect();
        (m, VarMap { x, y0: vec![y0], y: vec![y], z: vec![None], xs: vec![] })
    }

    #[test]
    fn rows_match_cleared_forms() {
        let (_, vm) = tiny_varmap();
        let s = seg();
        let under = Cut { segment: 0, product: 0, set: vec![], kind: CutKind::Under, violation: 0.0 };
        let row = cut_to_row(&under, &s, &vm);
        // 2 y1 + 2 y2 - x1 >= 0
        assert_eq!(row.coeffs, vec![(vm.x[0], -1.0), (vm.y[0][0], 2.0), (vm.y[0][1], 2.0)]);
        assert_eq!((row.sense, row.rhs), (Sense::Ge, 0.0));
        let full = Cut { segment: 0, product: 0, set: vec![1], kind: CutKind::Under, violation: 0.0 };
        // U(N) y_j >= x_j
        let row = cut_to_row(&full, &s, &vm);
        assert_eq!(row.coeffs, vec![(vm.x[0], -1.0), (vm.y[0][0], 4.0)]);
        let over = Cut { segment: 0, product: 1, set: vec![], kind: CutKind::Over, violation: 0.0 };
        // U({j}) y_j <= x_j
        let row = cut_to_row(&over, &s, &vm);
        assert_eq!(row.coeffs, vec![(vm.x[1], -1.0), (vm.y[0][1], 3.0)]);
        assert_eq!(row.sense, Sense::Le);
    }
}
