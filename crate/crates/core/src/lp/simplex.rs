//! Bounded-variable revised simplex.
//!
//! Every row `a_i x` gets a logical `s_i = a_i x` whose bounds encode the row
//! sense, so the slack basis is always available. The dual simplex (dual
//! steepest edge, bound-flipping ratio test) does the bulk of the work: fresh
//! solves, warm starts after row additions and bound changes during branching.
//! A primal simplex cleans up whatever dual infeasibility is left, e.g. after
//! artificial bounds on unbounded columns are dropped.

use std::time::Instant;

use super::lu::{LuFactor, SparseCol};
use super::{LinearModel, Sense, FEAS_TOL};

const DUAL_TOL: f64 = 1e-9;
const PIV_TOL: f64 = 1e-9;
const REFACTOR_EVERY: usize = 100;
const ART_BIG: f64 = 1e6;
const ART_LIMIT: f64 = 1e13;
const NONE: usize = usize::MAX;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    NumericalFailure,
    TimeLimit,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BasisStatus {
    Basic,
    AtLower,
    AtUpper,
    Free,
}

/// Status of every variable and every row logical; enough to warm start.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Basis {
    pub vars: Vec<BasisStatus>,
    pub rows: Vec<BasisStatus>,
}

#[derive(Clone, Debug)]
pub struct LpResult {
    pub status: LpStatus,
    pub x: Vec<f64>,
    pub objective: f64,
    pub basis: Basis,
    pub iterations: usize,
}

/// Solve the continuous relaxation of `model` (integrality is ignored).
///
/// A basis from an earlier solve of a model with fewer rows is accepted; the
/// logicals of the new rows start basic, so the old basis stays dual feasible.
pub fn solve_lp(model: &LinearModel, warm: Option<&Basis>) -> LpResult {
    let mut s = Simplex::new(model);
    if let Some(b) = warm {
        s.load_basis(b);
    }
    let status = s.solve();
    s.result(status)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum St {
    Basic,
    Lower,
    Upper,
    Free,
}

enum Outcome {
    Optimal,
    Infeasible,
    Unbounded,
    TimeLimit,
    Numerical,
}

pub(crate) struct Simplex {
    m: usize,
    n: usize,
    col_start: Vec<usize>,
    col_idx: Vec<usize>,
    col_val: Vec<f64>,
    row_start: Vec<usize>,
    row_idx: Vec<usize>,
    row_val: Vec<f64>,
    unit_idx: Vec<usize>,
    cost: Vec<f64>,
    lb: Vec<f64>,
    ub: Vec<f64>,
    x: Vec<f64>,
    state: Vec<St>,
    art: Vec<bool>,
    head: Vec<usize>,
    pos: Vec<usize>,
    d: Vec<f64>,
    dse: Vec<f64>,
    lu: LuFactor,
    stale: bool,
    empty_infeasible: bool,
    pub iters: usize,
    pub deadline: Option<Instant>,
    degenerate: usize,
    bland: bool,
    work: Vec<f64>,
    scratch: Vec<f64>,
    col: Vec<f64>,
    rho: Vec<f64>,
    tau: Vec<f64>,
    alpha: Vec<f64>,
    touched: Vec<usize>,
    in_touched: Vec<bool>,
}

impl Simplex {
    pub fn new(model: &LinearModel) -> Simplex {
        let n = model.num_vars();
        let m = model.num_rows();
        let mut counts = vec![0usize; n];
        let mut row_start = Vec::with_capacity(m + 1);
        let mut row_idx = Vec::new();
        let mut row_val = Vec::new();
        row_start.push(0);
        let mut lb = Vec::with_capacity(n + m);
        let mut ub = Vec::with_capacity(n + m);
        let mut cost = Vec::with_capacity(n + m);
        for v in model.vars() {
            lb.push(v.lb);
            ub.push(v.ub);
            cost.push(-v.obj);
        }
        let mut empty_infeasible = false;
        for r in model.rows() {
            for &(v, a) in &r.coeffs {
                row_idx.push(v.0);
                row_val.push(a);
                counts[v.0] += 1;
            }
            row_start.push(row_idx.len());
            let (l, u) = match r.sense {
                Sense::Le => (f64::NEG_INFINITY, r.rhs),
                Sense::Ge => (r.rhs, f64::INFINITY),
                Sense::Eq => (r.rhs, r.rhs),
            };
            if r.coeffs.is_empty() && (l > FEAS_TOL || u < -FEAS_TOL) {
                empty_infeasible = true;
            }
            lb.push(l);
            ub.push(u);
            cost.push(0.0);
        }
        let mut col_start = vec![0usize; n + 1];
        for j in 0..n {
            col_start[j + 1] = col_start[j] + counts[j];
        }
        let mut fill = col_start.clone();
        let mut col_idx = vec![0usize; row_idx.len()];
        let mut col_val = vec![0.0; row_idx.len()];
        for i in 0..m {
            for k in row_start[i]..row_start[i + 1] {
                let j = row_idx[k];
                col_idx[fill[j]] = i;
                col_val[fill[j]] = row_val[k];
                fill[j] += 1;
            }
        }
        let mut s = Simplex {
            m,
            n,
            col_start,
            col_idx,
            col_val,
            row_start,
            row_idx,
            row_val,
            unit_idx: (0..m).collect(),
            cost,
            lb,
            ub,
            x: vec![0.0; n + m],
            state: vec![St::Lower; n + m],
            art: vec![false; n + m],
            head: vec![0; m],
            pos: vec![NONE; n + m],
            d: vec![0.0; n + m],
            dse: vec![1.0; m],
            lu: LuFactor::default(),
            stale: true,
            empty_infeasible,
            iters: 0,
            deadline: None,
            degenerate: 0,
            bland: false,
            work: vec![0.0; m],
            scratch: vec![0.0; m],
            col: vec![0.0; m],
            rho: vec![0.0; m],
            tau: vec![0.0; m],
            alpha: vec![0.0; n + m],
            touched: Vec::new(),
            in_touched: vec![false; n + m],
        };
        s.slack_basis();
        s
    }

    fn slack_basis(&mut self) {
        for j in 0..self.n {
            self.pos[j] = NONE;
            self.art[j] = false;
            self.set_nonbasic_default(j);
        }
        for i in 0..self.m {
            let j = self.n + i;
            self.state[j] = St::Basic;
            self.art[j] = false;
            self.head[i] = j;
            self.pos[j] = i;
        }
        self.dse.iter_mut().for_each(|w| *w = 1.0);
        self.stale = true;
    }

    fn set_nonbasic_default(&mut self, j: usize) {
        if self.lb[j].is_finite() {
            self.state[j] = St::Lower;
            self.x[j] = self.lb[j];
        } else if self.ub[j].is_finite() {
            self.state[j] = St::Upper;
            self.x[j] = self.ub[j];
        } else {
            self.state[j] = St::Free;
            self.x[j] = 0.0;
        }
    }

    pub fn load_basis(&mut self, b: &Basis) {
        let basics = b.vars.iter().chain(&b.rows).filter(|s| **s == BasisStatus::Basic).count()
            + self.m.saturating_sub(b.rows.len());
        if b.vars.len() != self.n || b.rows.len() > self.m || basics != self.m {
            self.slack_basis();
            return;
        }
        let mut p = 0;
        for j in 0..self.n + self.m {
            let st = if j < self.n {
                b.vars[j]
            } else {
                b.rows.get(j - self.n).copied().unwrap_or(BasisStatus::Basic)
            };
            self.art[j] = false;
            match st {
                BasisStatus::Basic => {
                    self.state[j] = St::Basic;
                    self.head[p] = j;
                    self.pos[j] = p;
                    p += 1;
                }
                BasisStatus::AtLower if self.lb[j].is_finite() => {
                    self.pos[j] = NONE;
                    self.state[j] = St::Lower;
                    self.x[j] = self.lb[j];
                }
                BasisStatus::AtUpper if self.ub[j].is_finite() => {
                    self.pos[j] = NONE;
                    self.state[j] = St::Upper;
                    self.x[j] = self.ub[j];
                }
                _ => {
                    self.pos[j] = NONE;
                    self.set_nonbasic_default(j);
                }
            }
        }
        self.dse.iter_mut().for_each(|w| *w = 1.0);
        self.stale = true;
    }

    /// Change the bounds of structural variable `j`. The basis is kept.
    pub fn set_bounds(&mut self, j: usize, lb: f64, ub: f64) {
        self.lb[j] = lb;
        self.ub[j] = ub;
        if self.state[j] != St::Basic {
            self.art[j] = false;
            match self.state[j] {
                St::Upper if ub.is_finite() => self.x[j] = ub,
                St::Lower if lb.is_finite() => self.x[j] = lb,
                _ => self.set_nonbasic_default(j),
            }
        }
        self.stale = true;
    }

    pub fn basis(&self) -> Basis {
        let status = |j: usize| match self.state[j] {
            St::Basic => BasisStatus::Basic,
            _ if self.x[j] == self.lb[j] => BasisStatus::AtLower,
            _ if self.x[j] == self.ub[j] => BasisStatus::AtUpper,
            _ => BasisStatus::Free,
        };
        Basis {
            vars: (0..self.n).map(status).collect(),
            rows: (self.n..self.n + self.m).map(status).collect(),
        }
    }

    pub fn x(&self) -> &[f64] {
        &self.x[..self.n]
    }

    pub fn objective(&self) -> f64 {
        -(0..self.n).map(|j| self.cost[j] * self.x[j]).sum::<f64>()
    }

    pub fn result(&self, status: LpStatus) -> LpResult {
        LpResult {
            status,
            x: self.x[..self.n].to_vec(),
            objective: self.objective(),
            basis: self.basis(),
            iterations: self.iters,
        }
    }

    fn feas_tol(bound: f64) -> f64 {
        FEAS_TOL * (1.0 + bound.abs())
    }

    fn timed_out(&self) -> bool {
        matches!(self.deadline, Some(t) if Instant::now() >= t)
    }

    fn refactor(&mut self) {
        let neg_one = [-1.0];
        let (lu, replaced) = {
            let cols: Vec<SparseCol> = self
                .head
                .iter()
                .map(|&j| {
                    if j < self.n {
                        let r = self.col_start[j]..self.col_start[j + 1];
                        SparseCol { idx: &self.col_idx[r.clone()], val: &self.col_val[r] }
                    } else {
                        let i = j - self.n;
                        SparseCol { idx: &self.unit_idx[i..i + 1], val: &neg_one }
                    }
                })
                .collect();
            LuFactor::factorize(self.m, &cols)
        };
        self.lu = lu;
        for (p, i) in replaced {
            let out = self.head[p];
            self.pos[out] = NONE;
            self.set_nonbasic_default(out);
            let j = self.n + i;
            self.head[p] = j;
            self.pos[j] = p;
            self.state[j] = St::Basic;
            self.art[j] = false;
            self.dse[p] = 1.0;
        }
        self.compute_primal();
        self.compute_duals();
        self.stale = false;
    }

    /// Add `scale * A_j` to the row-indexed vector `v`.
    fn scatter_col(&self, j: usize, scale: f64, v: &mut [f64]) {
        if j < self.n {
            for k in self.col_start[j]..self.col_start[j + 1] {
                v[self.col_idx[k]] += scale * self.col_val[k];
            }
        } else {
            v[j - self.n] -= scale;
        }
    }

    fn compute_primal(&mut self) {
        let mut rhs = std::mem::take(&mut self.work);
        rhs.iter_mut().for_each(|v| *v = 0.0);
        for j in 0..self.n + self.m {
            if self.state[j] != St::Basic && self.x[j] != 0.0 {
                self.scatter_col(j, -self.x[j], &mut rhs);
            }
        }
        self.lu.ftran(&mut rhs, &mut self.scratch);
        for p in 0..self.m {
            self.x[self.head[p]] = rhs[p];
        }
        self.work = rhs;
    }

    fn compute_duals(&mut self) {
        let mut pi = std::mem::take(&mut self.work);
        for p in 0..self.m {
            pi[p] = self.cost[self.head[p]];
        }
        self.lu.btran(&mut pi, &mut self.scratch);
        for j in 0..self.n {
            let mut dj = self.cost[j];
            for k in self.col_start[j]..self.col_start[j + 1] {
                dj -= pi[self.col_idx[k]] * self.col_val[k];
            }
            self.d[j] = dj;
        }
        for i in 0..self.m {
            self.d[self.n + i] = pi[i];
        }
        for p in 0..self.m {
            self.d[self.head[p]] = 0.0;
        }
        self.work = pi;
    }

    fn is_fixed(&self, j: usize) -> bool {
        self.lb[j] == self.ub[j]
    }

    /// Move nonbasic columns to the bound their reduced cost asks for; unbounded
    /// directions get an artificial bound. Returns true if any value moved.
    fn make_dual_feasible(&mut self) -> bool {
        let mut moved = false;
        for j in 0..self.n + self.m {
            if self.state[j] == St::Basic {
                continue;
            }
            let old = self.x[j];
            let dj = self.d[j];
            if self.is_fixed(j) {
                self.state[j] = St::Lower;
                self.x[j] = self.lb[j];
                self.art[j] = false;
            } else if dj > DUAL_TOL {
                if self.state[j] != St::Lower {
                    if self.lb[j].is_finite() {
                        self.x[j] = self.lb[j];
                        self.art[j] = false;
                    } else {
                        let base = if self.ub[j].is_finite() { self.ub[j].min(0.0) } else { 0.0 };
                        self.x[j] = base - ART_BIG;
                        self.art[j] = true;
                    }
                    self.state[j] = St::Lower;
                }
            } else if dj < -DUAL_TOL && self.state[j] != St::Upper {
                if self.ub[j].is_finite() {
                    self.x[j] = self.ub[j];
                    self.art[j] = false;
                } else {
                    let base = if self.lb[j].is_finite() { self.lb[j].max(0.0) } else { 0.0 };
                    self.x[j] = base + ART_BIG;
                    self.art[j] = true;
                }
                self.state[j] = St::Upper;
            }
            moved |= self.x[j] != old;
        }
        moved
    }

    fn max_dual_infeasibility(&self) -> f64 {
        let mut worst = 0.0f64;
        for j in 0..self.n + self.m {
            if self.state[j] == St::Basic || self.is_fixed(j) {
                continue;
            }
            let dj = self.d[j];
            if dj < 0.0 && self.x[j] < self.ub[j] {
                worst = worst.max(-dj);
            }
            if dj > 0.0 && self.x[j] > self.lb[j] {
                worst = worst.max(dj);
            }
        }
        worst
    }

    fn max_primal_infeasibility(&self) -> f64 {
        let mut worst = 0.0f64;
        for j in 0..self.n + self.m {
            let v = self.x[j];
            let lo = (self.lb[j] - v) / (1.0 + self.lb[j].abs().min(1e30));
            let hi = (v - self.ub[j]) / (1.0 + self.ub[j].abs().min(1e30));
            worst = worst.max(lo).max(hi);
        }
        worst
    }

    /// Drop all artificial bounds; the affected columns keep their values.
    fn drop_artificial(&mut self) -> bool {
        let mut any = false;
        for j in 0..self.n + self.m {
            if self.art[j] {
                self.art[j] = false;
                if self.state[j] != St::Basic {
                    self.state[j] = St::Free;
                }
                any = true;
            }
        }
        any
    }

    pub fn solve(&mut self) -> LpStatus {
        if self.empty_infeasible {
            return LpStatus::Infeasible;
        }
        self.degenerate = 0;
        self.bland = false;
        for _ in 0..4 {
            self.refactor();
            if self.make_dual_feasible() {
                self.compute_primal();
            }
            match self.dual() {
                Outcome::Optimal => {}
                Outcome::Infeasible => return LpStatus::Infeasible,
                Outcome::TimeLimit => return LpStatus::TimeLimit,
                Outcome::Unbounded | Outcome::Numerical => {
                    self.slack_basis();
                    continue;
                }
            }
            let had_art = self.drop_artificial();
            if had_art || self.max_dual_infeasibility() > DUAL_TOL {
                match self.primal() {
                    Outcome::Optimal => {}
                    Outcome::Unbounded => return LpStatus::Unbounded,
                    Outcome::TimeLimit => return LpStatus::TimeLimit,
                    Outcome::Infeasible | Outcome::Numerical => continue,
                }
            }
            self.refactor();
            if self.max_primal_infeasibility() <= FEAS_TOL
                && self.max_dual_infeasibility() <= 10.0 * DUAL_TOL
            {
                return LpStatus::Optimal;
            }
        }
        LpStatus::NumericalFailure
    }

    fn choose_leaving(&self) -> Option<(usize, f64, f64)> {
        let mut best: Option<(usize, f64, f64)> = None;
        let mut best_score = 0.0;
        for p in 0..self.m {
            let j = self.head[p];
            let v = self.x[j];
            let (target, s, infeas) = if v < self.lb[j] - Self::feas_tol(self.lb[j]) {
                (self.lb[j], -1.0, self.lb[j] - v)
            } else if v > self.ub[j] + Self::feas_tol(self.ub[j]) {
                (self.ub[j], 1.0, v - self.ub[j])
            } else {
                continue;
            };
            if self.bland {
                if best.map_or(true, |(q, _, _)| j < self.head[q]) {
                    best = Some((p, target, s));
                }
                continue;
            }
            let score = infeas * infeas / self.dse[p];
            if score > best_score {
                best_score = score;
                best = Some((p, target, s));
            }
        }
        best
    }

    fn clear_alpha(&mut self) {
        for &j in &self.touched {
            self.alpha[j] = 0.0;
            self.in_touched[j] = false;
        }
        self.touched.clear();
    }

    /// Row `r` of `B^-1 [A | -I]` over nonbasic columns, from `rho = B^-T e_r`.
    fn compute_pivot_row(&mut self) {
        for i in 0..self.m {
            let ri = self.rho[i];
            if ri == 0.0 {
                continue;
            }
            for k in self.row_start[i]..self.row_start[i + 1] {
                let j = self.row_idx[k];
                if self.state[j] == St::Basic {
                    continue;
                }
                if !self.in_touched[j] {
                    self.in_touched[j] = true;
                    self.touched.push(j);
                }
                self.alpha[j] += ri * self.row_val[k];
            }
            let j = self.n + i;
            if self.state[j] != St::Basic {
                if !self.in_touched[j] {
                    self.in_touched[j] = true;
                    self.touched.push(j);
                }
                self.alpha[j] = -ri;
            }
        }
    }

    /// Bound-flipping ratio test. Returns the entering column, the dual step
    /// and the boxed columns to flip.
    fn dual_ratio(&self, s: f64, delta: f64) -> Option<(usize, f64, Vec<usize>)> {
        let mut cands: Vec<(f64, f64, usize)> = Vec::new();
        for &j in &self.touched {
            if self.is_fixed(j) {
                continue;
            }
            let at = s * self.alpha[j];
            if at.abs() <= PIV_TOL {
                continue;
            }
            let dj = self.d[j];
            let ratio = match self.state[j] {
                St::Lower if at > 0.0 => dj.max(0.0) / at,
                St::Upper if at < 0.0 => (-dj).max(0.0) / -at,
                St::Free => dj.abs() / at.abs(),
                _ => continue,
            };
            cands.push((ratio, at.abs(), j));
        }
        if cands.is_empty() {
            return None;
        }
        if self.bland {
            let tmin = cands.iter().map(|c| c.0).fold(f64::INFINITY, f64::min);
            let (ratio, _, j) = *cands
                .iter()
                .filter(|c| c.0 <= tmin + 1e-12)
                .min_by_key(|c| c.2)
                .unwrap();
            return Some((j, ratio, Vec::new()));
        }
        cands.sort_by(|a, b| a.0.total_cmp(&b.0).then(b.1.total_cmp(&a.1)).then(a.2.cmp(&b.2)));
        let mut slope = delta;
        let mut k = 0;
        while k < cands.len() {
            let (_, absat, j) = cands[k];
            let boxed = self.lb[j].is_finite() && self.ub[j].is_finite() && self.state[j] != St::Free;
            if boxed {
                let next = slope - absat * (self.ub[j] - self.lb[j]);
                if next > FEAS_TOL {
                    slope = next;
                    k += 1;
                    continue;
                }
            }
            break;
        }
        if k == cands.len() {
            return None;
        }
        let rest = &cands[k..];
        let tmax = rest
            .iter()
            .map(|&(_, absat, j)| (self.d[j].abs() + DUAL_TOL) / absat)
            .fold(f64::INFINITY, f64::min);
        let mut pick = rest[0];
        for &c in rest {
            if c.0 <= tmax && c.1 > pick.1 {
                pick = c;
            }
        }
        let flips = cands[..k].iter().map(|c| c.2).collect();
        Some((pick.2, pick.0, flips))
    }

    /// When the ratio test finds nothing, an artificial bound may be what
    /// blocks the row; push such bounds further out. Returns true if any moved.
    fn extend_artificial(&mut self, s: f64) -> bool {
        let mut moved = false;
        for idx in 0..self.touched.len() {
            let j = self.touched[idx];
            if !self.art[j] {
                continue;
            }
            let at = s * self.alpha[j];
            let grow = match self.state[j] {
                St::Lower if at < -PIV_TOL => -1.0,
                St::Upper if at > PIV_TOL => 1.0,
                _ => continue,
            };
            let next = self.x[j] + grow * 99.0 * self.x[j].abs().max(ART_BIG);
            if next.abs() > ART_LIMIT {
                continue;
            }
            self.x[j] = next;
            moved = true;
        }
        moved
    }

    fn load_column(&mut self, q: usize) {
        self.col.iter_mut().for_each(|v| *v = 0.0);
        let mut col = std::mem::take(&mut self.col);
        self.scatter_col(q, 1.0, &mut col);
        self.lu.ftran(&mut col, &mut self.scratch);
        self.col = col;
    }

    fn iteration_budget_spent(&self) -> bool {
        self.iters > 5_000_000
    }

    fn note_progress(&mut self, gain: f64) {
        if gain > 1e-12 {
            self.degenerate = 0;
        } else {
            self.degenerate += 1;
            if self.degenerate > 50 * (self.m + self.n) {
                self.bland = true;
            }
        }
    }

    fn dual(&mut self) -> Outcome {
        let mut retries = 0;
        loop {
            if self.stale || self.lu.num_etas() >= REFACTOR_EVERY {
                self.refactor();
            }
            if self.timed_out() {
                return Outcome::TimeLimit;
            }
            if self.iteration_budget_spent() {
                return Outcome::Numerical;
            }
            let Some((r, target, s)) = self.choose_leaving() else {
                return Outcome::Optimal;
            };
            let leaving = self.head[r];
            let delta = (self.x[leaving] - target).abs();
            self.rho.iter_mut().for_each(|v| *v = 0.0);
            self.rho[r] = 1.0;
            self.lu.btran(&mut self.rho, &mut self.scratch);
            self.compute_pivot_row();
            let Some((q, t, flips)) = self.dual_ratio(s, delta) else {
                let moved = self.extend_artificial(s);
                self.clear_alpha();
                if moved {
                    self.compute_primal();
                    continue;
                }
                return Outcome::Infeasible;
            };
            self.load_column(q);
            let arq = self.col[r];
            if arq.abs() < PIV_TOL || (arq - self.alpha[q]).abs() > 1e-7 * (1.0 + arq.abs()) {
                self.clear_alpha();
                retries += 1;
                if retries > 10 {
                    return Outcome::Numerical;
                }
                self.stale = true;
                continue;
            }
            self.tau.copy_from_slice(&self.rho);
            let rho_norm2: f64 = self.rho.iter().map(|v| v * v).sum();
            let mut tau = std::mem::take(&mut self.tau);
            self.lu.ftran(&mut tau, &mut self.scratch);
            self.tau = tau;

            for &j in &self.touched {
                self.d[j] -= t * s * self.alpha[j];
            }
            self.clear_alpha();
            self.d[q] = 0.0;
            self.d[leaving] = -s * t;

            if !flips.is_empty() {
                let mut w = std::mem::take(&mut self.work);
                w.iter_mut().for_each(|v| *v = 0.0);
                for &j in &flips {
                    let (to, st) = if self.state[j] == St::Lower {
                        (self.ub[j], St::Upper)
                    } else {
                        (self.lb[j], St::Lower)
                    };
                    let dx = to - self.x[j];
                    self.x[j] = to;
                    self.state[j] = st;
                    self.art[j] = false;
                    self.scatter_col(j, dx, &mut w);
                }
                self.lu.ftran(&mut w, &mut self.scratch);
                for p in 0..self.m {
                    self.x[self.head[p]] -= w[p];
                }
                self.work = w;
            }

            let theta = (self.x[leaving] - target) / arq;
            for p in 0..self.m {
                let c = self.col[p];
                if c != 0.0 {
                    self.x[self.head[p]] -= c * theta;
                }
            }
            self.x[q] += theta;
            self.x[leaving] = target;
            self.state[leaving] = if s > 0.0 { St::Upper } else { St::Lower };
            self.art[leaving] = false;
            self.pos[leaving] = NONE;
            self.head[r] = q;
            self.pos[q] = r;
            self.state[q] = St::Basic;
            self.art[q] = false;

            for p in 0..self.m {
                let c = self.col[p];
                if p == r || c == 0.0 {
                    continue;
                }
                let ratio = c / arq;
                let w = self.dse[p] - 2.0 * ratio * self.tau[p] + ratio * ratio * rho_norm2;
                self.dse[p] = w.max(1e-8);
            }
            self.dse[r] = (rho_norm2 / (arq * arq)).max(1e-8);
            let col = std::mem::take(&mut self.col);
            self.lu.push_eta(r, &col);
            self.col = col;
            self.iters += 1;
            self.note_progress(t * delta);
        }
    }

    fn primal(&mut self) -> Outcome {
        let mut retries = 0;
        self.stale = true;
        loop {
            if self.stale || self.lu.num_etas() >= REFACTOR_EVERY {
                self.refactor();
            } else {
                self.compute_duals();
            }
            if self.timed_out() {
                return Outcome::TimeLimit;
            }
            if self.iteration_budget_spent() {
                return Outcome::Numerical;
            }
            let mut q = NONE;
            let mut dir = 0.0;
            let mut best = 0.0;
            for j in 0..self.n + self.m {
                if self.state[j] == St::Basic || self.is_fixed(j) {
                    continue;
                }
                let dj = self.d[j];
                let (score, dj_dir) = if dj < -DUAL_TOL && self.x[j] < self.ub[j] {
                    (-dj, 1.0)
                } else if dj > DUAL_TOL && self.x[j] > self.lb[j] {
                    (dj, -1.0)
                } else {
                    continue;
                };
                if self.bland {
                    if q == NONE {
                        q = j;
                        dir = dj_dir;
                    }
                } else if score > best {
                    best = score;
                    q = j;
                    dir = dj_dir;
                }
            }
            if q == NONE {
                return Outcome::Optimal;
            }
            self.load_column(q);
            let own = if dir > 0.0 { self.ub[q] - self.x[q] } else { self.x[q] - self.lb[q] };
            let mut tmax = own;
            for p in 0..self.m {
                let g = -dir * self.col[p];
                if g.abs() <= PIV_TOL {
                    continue;
                }
                let j = self.head[p];
                if g < 0.0 && self.lb[j].is_finite() {
                    tmax = tmax.min((self.x[j] - self.lb[j] + Self::feas_tol(self.lb[j])) / -g);
                } else if g > 0.0 && self.ub[j].is_finite() {
                    tmax = tmax.min((self.ub[j] - self.x[j] + Self::feas_tol(self.ub[j])) / g);
                }
            }
            if tmax.is_infinite() {
                return Outcome::Unbounded;
            }
            let mut leave = NONE;
            let mut leave_g = 0.0;
            let mut step = own;
            for p in 0..self.m {
                let g = -dir * self.col[p];
                if g.abs() <= PIV_TOL {
                    continue;
                }
                let j = self.head[p];
                let ratio = if g < 0.0 && self.lb[j].is_finite() {
                    (self.x[j] - self.lb[j]).max(0.0) / -g
                } else if g > 0.0 && self.ub[j].is_finite() {
                    (self.ub[j] - self.x[j]).max(0.0) / g
                } else {
                    continue;
                };
                if ratio > tmax {
                    continue;
                }
                let better = if self.bland {
                    leave == NONE || j < self.head[leave]
                } else {
                    g.abs() > leave_g
                };
                if better {
                    leave = p;
                    leave_g = g.abs();
                    step = ratio;
                }
            }
            let before = self.objective_min();
            if leave == NONE || own <= step {
                // bound flip of the entering column
                let step = own;
                for p in 0..self.m {
                    let c = self.col[p];
                    if c != 0.0 {
                        self.x[self.head[p]] -= c * dir * step;
                    }
                }
                if dir > 0.0 {
                    self.x[q] = self.ub[q];
                    self.state[q] = St::Upper;
                } else {
                    self.x[q] = self.lb[q];
                    self.state[q] = St::Lower;
                }
                self.iters += 1;
                let gain = before - self.objective_min();
                self.note_progress(gain);
                continue;
            }
            let arq = self.col[leave];
            if arq.abs() < PIV_TOL {
                retries += 1;
                if retries > 10 {
                    return Outcome::Numerical;
                }
                self.stale = true;
                continue;
            }
            for p in 0..self.m {
                let c = self.col[p];
                if c != 0.0 {
                    self.x[self.head[p]] -= c * dir * step;
                }
            }
            self.x[q] += dir * step;
            let j = self.head[leave];
            let g = -dir * arq;
            if g < 0.0 {
                self.x[j] = self.lb[j];
                self.state[j] = St::Lower;
            } else {
                self.x[j] = self.ub[j];
                self.state[j] = St::Upper;
            }
            self.pos[j] = NONE;
            self.head[leave] = q;
            self.pos[q] = leave;
            self.state[q] = St::Basic;
            let col = std::mem::take(&mut self.col);
            self.lu.push_eta(leave, &col);
            self.col = col;
            self.dse[leave] = 1.0;
            self.iters += 1;
            let gain = before - self.objective_min();
            self.note_progress(gain);
        }
    }

    fn objective_min(&self) -> f64 {
        (0..self.n).map(|j| self.cost[j] * self.x[j]).sum()
    }
}
