//! Exact solving: cut rounds on the base formulation, then branch and bound
//! seeded by the improved revenue-ordered heuristic.

use std::collections::HashSet;
use std::fmt;
use std::time::Instant;

use serde::Serialize;

use crate::choice::{cc_inverse, cc_transform, consideration_set, mnl_probabilities, total_revenue, undominated};
use crate::error::{Error, Result};
use crate::formulations::{build_ch0, build_cons_mnl_lp, build_milp_bigm, ch4_gap, ch4_tangent, Hull, VarMap};
use crate::heuristics;
use crate::instance::{Instance, OfflineConstraint};
use crate::lp::{solve_lp, solve_mip_with, Basis, LinearModel, LpStatus, MipOptions, MipStatus, INT_TOL};
use crate::separation::{cut_to_row, separate_segment, CutKind, CUT_TOL};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Method {
    Ch(usize),
    Milp,
    TwoStepRo,
    ImprovedRo,
    Oracle,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Method::Ch(k) => write!(f, "CH-{k}"),
            Method::Milp => write!(f, "MILP"),
            Method::TwoStepRo => write!(f, "RO"),
            Method::ImprovedRo => write!(f, "IRO"),
            Method::Oracle => write!(f, "oracle"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum SolveStatus {
    Optimal,
    /// A limit stopped branch and bound; `SolveStats::gap` is honest.
    Feasible,
    Heuristic,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct SolveStats {
    pub rounds: usize,
    pub cuts: usize,
    pub tangents: usize,
    /// Relaxation value of CH-0, CH-1, ... up to the last round.
    pub relaxation: Vec<f64>,
    pub bound: f64,
    pub gap: f64,
    pub nodes: usize,
    pub lp_iterations: usize,
    pub time_s: f64,
}

#[derive(Clone, Debug)]
pub struct QapSolution {
    pub offline: Vec<usize>,
    /// `online[i - 1]` is offered to segment `i`.
    pub online: Vec<Vec<usize>>,
    /// Purchase probability per segment (offline first) and product.
    pub probabilities: Vec<Vec<f64>>,
    pub objective: f64,
    pub method: Method,
    pub status: SolveStatus,
    pub stats: SolveStats,
}

impl QapSolution {
    /// Build from offered sets. Two-stage Luce segments store the
    /// consideration set, which yields the same revenue.
    pub fn from_sets(inst: &Instance, offline: Vec<usize>, online: Vec<Vec<usize>>, method: Method) -> QapSolution {
        let online: Vec<Vec<usize>> =
            online.into_iter().enumerate().map(|(k, s)| consideration_set(inst, k + 1, &s)).collect();
        let sets: Vec<Vec<usize>> = std::iter::once(offline.clone()).chain(online.iter().cloned()).collect();
        let probabilities = sets.iter().zip(&inst.segments).map(|(s, seg)| mnl_probabilities(seg, s)).collect();
        let objective = total_revenue(inst, &sets);
        let status = match method {
            Method::TwoStepRo | Method::ImprovedRo => SolveStatus::Heuristic,
            _ => SolveStatus::Optimal,
        };
        QapSolution { offline, online, probabilities, objective, method, status, stats: SolveStats::default() }
    }

    pub fn sets(&self) -> Vec<Vec<usize>> {
        std::iter::once(self.offline.clone()).chain(self.online.iter().cloned()).collect()
    }

    /// Linkage, offline feasibility, consideration-set fixed points and the
    /// objective identity.
    pub fn check(&self, inst: &Instance) -> Result<()> {
        let bad = |m: String| Err(Error::Solve(m));
        if self.online.len() != inst.m() {
            return bad(format!("{} online sets for {} segments", self.online.len(), inst.m()));
        }
        for (k, s) in self.online.iter().enumerate() {
            if let Some(j) = s.iter().find(|j| !self.offline.contains(j)) {
                return bad(format!("segment {} is offered product {} outside the offline set", k + 1, j + 1));
            }
            if let Some(o) = inst.order(k + 1) {
                if undominated(o, s) != *s {
                    return bad(format!("segment {} set is not its own consideration set", k + 1));
                }
            }
        }
        if !offline_feasible(inst, &self.offline) {
            return bad("offline set violates the offline constraint".into());
        }
        let recomputed = total_revenue(inst, &self.sets());
        if (recomputed - self.objective).abs() > 1e-9 * self.objective.abs().max(1.0) {
            return bad(format!("objective {} but sets are worth {recomputed}", self.objective));
        }
        Ok(())
    }
}

#[derive(Serialize)]
struct SolutionDoc<'a> {
    method: String,
    status: SolveStatus,
    objective: f64,
    offline: Vec<usize>,
    online: Vec<Vec<usize>>,
    probabilities: &'a [Vec<f64>],
    stats: &'a SolveStats,
}

fn one_based(s: &[usize]) -> Vec<usize> {
    s.iter().map(|j| j + 1).collect()
}

impl QapSolution {
    /// JSON document with 1-based product ids.
    pub fn to_json(&self) -> String {
        let doc = SolutionDoc {
            method: self.method.to_string(),
            status: self.status,
            objective: self.objective,
            offline: one_based(&self.offline),
            online: self.online.iter().map(|s| one_based(s)).collect(),
            probabilities: &self.probabilities,
            stats: &self.stats,
        };
        serde_json::to_string_pretty(&doc).expect("solution serializes")
    }

    pub const CSV_HEADER: [&'static str; 9] =
        ["instance", "method", "obj", "bound", "gap", "nodes", "cuts", "rounds", "time_s"];

    pub fn csv_record(&self, instance: &str) -> [String; 9] {
        let bound = if self.status == SolveStatus::Heuristic { f64::NAN } else { self.stats.bound };
        [
            instance.to_string(),
            self.method.to_string(),
            format!("{:.9}", self.objective),
            format!("{bound:.9}"),
            format!("{:.6e}", self.stats.gap),
            self.stats.nodes.to_string(),
            self.stats.cuts.to_string(),
            self.stats.rounds.to_string(),
            format!("{:.4}", self.stats.time_s),
        ]
    }
}

pub fn offline_feasible(inst: &Instance, s: &[usize]) -> bool {
    match &inst.offline_constraint {
        OfflineConstraint::Unconstrained => true,
        OfflineConstraint::Cardinality(k) => s.len() <= *k,
        OfflineConstraint::Linear { a, b } => {
            a.iter().zip(b).all(|(row, &rhs)| s.iter().map(|&j| row[j]).sum::<f64>() <= rhs + 1e-9)
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct RoundStats {
    pub relaxation: Vec<f64>,
    pub cuts_per_round: Vec<usize>,
    pub tangents: usize,
    pub basis: Option<Basis>,
}

/// Run `k` separation rounds on the continuous relaxation, adding every
/// violated lower cut of the offline segment, every violated upper cut of
/// every segment, and a tangent wherever the no-purchase bound is cut off.
/// Stops early when a round finds nothing.
pub fn cutting_plane_rounds(model: &mut LinearModel, vm: &VarMap, inst: &Instance, k: usize) -> Result<RoundStats> {
    let mut stats = RoundStats::default();
    let mut seen: HashSet<(usize, usize, CutKind, Vec<usize>)> = HashSet::new();
    let mut warm: Option<Basis> = None;
    for round in 0..=k {
        let r = solve_lp(model, warm.as_ref());
        if r.status != LpStatus::Optimal {
            return Err(Error::Solve(format!("relaxation in round {round} ended {:?}", r.status)));
        }
        if let Some(&last) = stats.relaxation.last() {
            // numerical noise only; a real increase would mean a wrong cut
            debug_assert!(r.objective <= last + 1e-7 * last.abs().max(1.0));
        }
        stats.relaxation.push(r.objective);
        warm = Some(r.basis);
        if round == k {
            break;
        }
        let x = vm.x_values(&r.x);
        let mut rows = Vec::new();
        for (i, seg) in inst.segments.iter().enumerate() {
            let p = vm.point(i, &r.x);
            for cut in separate_segment(i, seg, &x, p.y0, &p.y, i == 0) {
                let key = (cut.segment, cut.product, cut.kind, cut.set.clone());
                if seen.insert(key) {
                    rows.push(cut_to_row(&cut, seg, vm));
                }
            }
            let (w, gap) = ch4_gap(seg, &x, p.y0);
            if gap > CUT_TOL {
                rows.push(ch4_tangent(i, seg, vm, w, 2 + stats.tangents));
                stats.tangents += 1;
            }
        }
        stats.cuts_per_round.push(rows.len());
        if rows.is_empty() {
            break;
        }
        model.add_rows(rows)?;
    }
    stats.basis = warm;
    Ok(stats)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Formulation {
    Ch,
    Milp,
}

#[derive(Clone, Debug)]
pub struct SolveOptions {
    pub formulation: Formulation,
    pub k: usize,
    pub mip: MipOptions,
    /// Seed branch and bound with the improved revenue-ordered solution.
    pub warm_start: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { formulation: Formulation::Ch, k: 2, mip: MipOptions::default(), warm_start: true }
    }
}

/// Full model point for given offline and considered online sets.
fn model_point(inst: &Instance, vm: &VarMap, nvars: usize, offline: &[usize], online: &[Vec<usize>]) -> Vec<f64> {
    let mut v = vec![0.0; nvars];
    for &j in offline {
        v[vm.x[j].0] = 1.0;
    }
    for (i, seg) in inst.segments.iter().enumerate() {
        let s = if i == 0 { offline } else { &online[i - 1] };
        let p = cc_transform(seg, s);
        v[vm.y0[i].0] = p.y0;
        for (var, y) in vm.y[i].iter().zip(&p.y) {
            v[var.0] = *y;
        }
        if let (Some(z), Some(o)) = (&vm.z[i], inst.order(i)) {
            for &a in s {
                v[z[a].0] = p.y0;
                for b in o.dominated_by(a) {
                    v[z[b].0] = p.y0;
                }
            }
        }
        if let Some(xs) = vm.xs.get(i) {
            for &j in s {
                v[xs[j].0] = 1.0;
            }
        }
    }
    v
}

/// Offered sets behind an integral offline vector: each online segment
/// gets its best subset of the offline set.
pub fn extract_assortments(inst: &Instance, x: &[f64]) -> Result<(Vec<usize>, Vec<Vec<usize>>)> {
    if let Some(j) = x.iter().position(|v| (v - v.round()).abs() > INT_TOL) {
        return Err(Error::Precondition(format!("x[{}] = {} is not integral", j + 1, x[j])));
    }
    let offline: Vec<usize> = (0..inst.n).filter(|&j| x[j] >= 0.5).collect();
    let online = (1..inst.segments.len()).map(|i| best_online(inst, i, &offline)).collect::<Result<Vec<_>>>()?;
    Ok((offline, online))
}

fn best_online(inst: &Instance, i: usize, offline: &[usize]) -> Result<Vec<usize>> {
    let seg = &inst.segments[i];
    let Some(order) = inst.order(i) else {
        return Ok(heuristics::best_prefix(seg, offline).0);
    };
    let (mut model, vm) = build_cons_mnl_lp(seg, Hull::Chain(order))?;
    for j in 0..inst.n {
        if !offline.contains(&j) {
            model.set_bounds(vm.y[0][j], 0.0, 0.0);
        }
    }
    let r = solve_lp(&model, None);
    if r.status != LpStatus::Optimal {
        return Err(Error::Solve(format!("online extraction for segment {i} ended {:?}", r.status)));
    }
    let p = vm.point(0, &r.x);
    let s = cc_inverse(&p, 1e-7 * p.y0.max(1.0)).unwrap_or_else(|_| {
        // a degenerate optimal face; any vertex on it is optimal, so round
        // and keep the better of the rounded set and the heuristic scan
        let rounded = undominated(order, &(0..inst.n).filter(|&j| p.y[j] >= 0.5 * p.y0).collect::<Vec<_>>());
        let scan = heuristics::best_luce_prefix(seg, order, offline).0;
        if crate::choice::mnl_revenue(seg, &rounded) >= crate::choice::mnl_revenue(seg, &scan) {
            rounded
        } else {
            scan
        }
    });
    Ok(undominated(order, &s))
}

/// Cheap feasible completion of a fractional offline vector, used as the
/// branch-and-bound primal heuristic.
fn round_offline(inst: &Instance, x: &[f64]) -> Option<Vec<usize>> {
    let mut s: Vec<usize> = (0..inst.n).filter(|&j| x[j] >= 0.5).collect();
    if let OfflineConstraint::Cardinality(k) = inst.offline_constraint {
        if s.len() > k {
            s.sort_by(|&a, &b| x[b].total_cmp(&x[a]).then(a.cmp(&b)));
            s.truncate(k);
            s.sort_unstable();
        }
    }
    offline_feasible(inst, &s).then_some(s)
}

fn quick_online(inst: &Instance, offline: &[usize]) -> Vec<Vec<usize>> {
    (1..inst.segments.len())
        .map(|i| match inst.order(i) {
            None => heuristics::best_prefix(&inst.segments[i], offline).0,
            Some(o) => heuristics::best_luce_prefix(&inst.segments[i], o, offline).0,
        })
        .collect()
}

pub fn solve_qap(inst: &Instance, opts: &SolveOptions) -> Result<QapSolution> {
    let start = Instant::now();
    let (mut model, vm) = match opts.formulation {
        Formulation::Ch => build_ch0(inst)?,
        Formulation::Milp => build_milp_bigm(inst)?,
    };
    let mut stats = SolveStats::default();
    if opts.formulation == Formulation::Ch {
        let rounds = cutting_plane_rounds(&mut model, &vm, inst, opts.k)?;
        stats.rounds = rounds.cuts_per_round.len();
        stats.cuts = rounds.cuts_per_round.iter().sum::<usize>() - rounds.tangents;
        stats.tangents = rounds.tangents;
        stats.relaxation = rounds.relaxation;
    }
    let nvars = model.num_vars();
    let mut mip = opts.mip.clone();
    if opts.warm_start && mip.incumbent.is_none() {
        if let Ok(h) = heuristics::improved_ro(inst) {
            mip.incumbent = Some(model_point(inst, &vm, nvars, &h.offline, &h.online));
        }
    }
    let mut heuristic = |xbar: &[f64]| {
        let x: Vec<f64> = vm.x.iter().map(|v| xbar[v.0]).collect();
        let offline = round_offline(inst, &x)?;
        let online = quick_online(inst, &offline);
        Some(model_point(inst, &vm, nvars, &offline, &online))
    };
    let r = solve_mip_with(&model, &mip, &mut heuristic);
    let status = match r.status {
        MipStatus::Optimal => SolveStatus::Optimal,
        MipStatus::Feasible => SolveStatus::Feasible,
        MipStatus::Infeasible => return Err(Error::Solve("formulation is infeasible".into())),
        MipStatus::Unbounded => return Err(Error::Solve("formulation is unbounded".into())),
        MipStatus::NoSolution => return Err(Error::Solve("limit reached before any feasible assortment".into())),
    };
    let sol_x = r.x.expect("feasible MIP result carries a point");
    let x = vm.x_values(&sol_x);
    let (offline, online) = extract_assortments(inst, &x)?;
    let method = match opts.formulation {
        Formulation::Ch => Method::Ch(opts.k),
        Formulation::Milp => Method::Milp,
    };
    let mut sol = QapSolution::from_sets(inst, offline, online, method);
    if sol.objective < r.objective - 1e-6 * r.objective.abs().max(1.0) {
        return Err(Error::Solve(format!(
            "extracted assortments are worth {} but the model reports {}",
            sol.objective, r.objective
        )));
    }
    sol.status = status;
    stats.bound = r.bound.max(sol.objective);
    stats.gap = ((stats.bound - sol.objective) / sol.objective.abs().max(1.0)).max(0.0);
    stats.nodes = r.nodes;
    stats.lp_iterations = r.lp_iterations;
    stats.time_s = start.elapsed().as_secs_f64();
    sol.stats = stats;
    Ok(sol)
}
