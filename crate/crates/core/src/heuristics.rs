//! Revenue-ordered heuristics.

use crate::choice::{cc_inverse, mnl_revenue, undominated};
use crate::error::{Error, Result};
use crate::formulations::{build_cons_mnl_lp, Hull};
use crate::instance::{Instance, OfflineConstraint, PartialOrder, Segment};
use crate::lp::{solve_lp, LpStatus};
use crate::solver::{Method, QapSolution};

/// `candidates` sorted by the segment's revenue, highest first; ties keep
/// the lower index first.
pub fn revenue_order(seg: &Segment, candidates: &[usize]) -> Vec<usize> {
    let mut v = candidates.to_vec();
    v.sort_by(|&a, &b| seg.r[b].total_cmp(&seg.r[a]).then(a.cmp(&b)));
    v
}

/// Best revenue-ordered prefix of `candidates` by full scan (optimal for
/// MNL). Ties go to the longer prefix; the empty set wins only when every
/// prefix earns nothing.
pub fn best_prefix(seg: &Segment, candidates: &[usize]) -> (Vec<usize>, f64) {
    let sorted = revenue_order(seg, candidates);
    let (mut best, mut len) = (0.0, 0);
    let (mut num, mut den) = (0.0, seg.u0);
    for (k, &j) in sorted.iter().enumerate() {
        num += seg.r[j] * seg.u[j];
        den += seg.u[j];
        let v = num / den;
        if v > best || (v == best && v > 0.0) {
            best = v;
            len = k + 1;
        }
    }
    let mut s = sorted[..len].to_vec();
    s.sort_unstable();
    (s, best)
}

/// Online scan used inside the improved heuristic: extend the prefix while
/// revenue does not drop, stop at the first decrease.
fn early_stop_prefix(seg: &Segment, candidates: &[usize]) -> (Vec<usize>, f64) {
    let sorted = revenue_order(seg, candidates);
    let (mut best, mut len) = (0.0, 0);
    let (mut num, mut den) = (0.0, seg.u0);
    for (k, &j) in sorted.iter().enumerate() {
        num += seg.r[j] * seg.u[j];
        den += seg.u[j];
        if num / den < best {
            break;
        }
        best = num / den;
        len = k + 1;
    }
    let mut s = sorted[..len].to_vec();
    s.sort_unstable();
    (s, best)
}

/// Best revenue-ordered prefix for a two-stage Luce segment, each prefix
/// valued after removing dominated products. Returns the consideration set.
pub fn best_luce_prefix(seg: &Segment, order: &PartialOrder, candidates: &[usize]) -> (Vec<usize>, f64) {
    let sorted = revenue_order(seg, candidates);
    let (mut best_set, mut best) = (Vec::new(), 0.0);
    for k in 1..=sorted.len() {
        let mut prefix = sorted[..k].to_vec();
        prefix.sort_unstable();
        let c = undominated(order, &prefix);
        let v = mnl_revenue(seg, &c);
        if v > best {
            best = v;
            best_set = c;
        }
    }
    (best_set, best)
}

/// Weighted online revenue given the offline set, with the chosen sets.
fn enum_online(inst: &Instance, offline: &[usize]) -> (f64, Vec<Vec<usize>>) {
    let mut total = 0.0;
    let mut sets = Vec::with_capacity(inst.m());
    for i in 1..inst.segments.len() {
        let seg = &inst.segments[i];
        let (s, z) = match inst.order(i) {
            None => early_stop_prefix(seg, offline),
            Some(o) => best_luce_prefix(seg, o, offline),
        };
        total += seg.alpha * z;
        sets.push(s);
    }
    (total, sets)
}

/// Optimal offline set under a cardinality limit, from the hull LP.
fn cardinality_offline(seg: &Segment, k: usize) -> Result<Vec<usize>> {
    let (model, vm) = build_cons_mnl_lp(seg, Hull::Cardinality(k))?;
    let r = solve_lp(&model, None);
    if r.status != LpStatus::Optimal {
        return Err(Error::Solve(format!("cardinality LP ended {:?}", r.status)));
    }
    let p = vm.point(0, &r.x);
    Ok(cc_inverse(&p, 1e-7 * p.y0.max(1.0)).unwrap_or_else(|_| {
        let mut s: Vec<usize> = (0..seg.u.len()).filter(|&j| p.y[j] > 1e-9).collect();
        s.sort_by(|&a, &b| p.y[b].total_cmp(&p.y[a]).then(a.cmp(&b)));
        s.truncate(k);
        s.sort_unstable();
        s
    }))
}

fn offline_step(inst: &Instance) -> Result<Option<Vec<usize>>> {
    match &inst.offline_constraint {
        OfflineConstraint::Unconstrained => Ok(None),
        OfflineConstraint::Cardinality(k) => cardinality_offline(&inst.segments[0], *k).map(Some),
        OfflineConstraint::Linear { .. } => {
            Err(Error::Unsupported("revenue-ordered heuristics support only cardinality limits".into()))
        }
    }
}

/// Best offline assortment alone, then each online segment restricted to it.
pub fn two_step_ro(inst: &Instance) -> Result<QapSolution> {
    let seg0 = &inst.segments[0];
    let all: Vec<usize> = (0..inst.n).collect();
    let offline = match offline_step(inst)? {
        Some(s) => s,
        None => best_prefix(seg0, &all).0,
    };
    let online = (1..inst.segments.len())
        .map(|i| match inst.order(i) {
            None => best_prefix(&inst.segments[i], &offline).0,
            Some(o) => best_luce_prefix(&inst.segments[i], o, &offline).0,
        })
        .collect();
    Ok(QapSolution::from_sets(inst, offline, online, Method::TwoStepRo))
}

/// Scan offline revenue-ordered prefixes, valuing each together with the
/// online segments' best responses, and keep the best prefix.
pub fn improved_ro(inst: &Instance) -> Result<QapSolution> {
    let seg0 = &inst.segments[0];
    if let Some(offline) = offline_step(inst)? {
        let (_, online) = enum_online(inst, &offline);
        return Ok(QapSolution::from_sets(inst, offline, online, Method::ImprovedRo));
    }
    let sorted = revenue_order(seg0, &(0..inst.n).collect::<Vec<_>>());
    let mut best: Option<(f64, Vec<usize>)> = None;
    for k in 1..=sorted.len() {
        let mut prefix = sorted[..k].to_vec();
        prefix.sort_unstable();
        let z = seg0.alpha * mnl_revenue(seg0, &prefix) + enum_online(inst, &prefix).0;
        if best.as_ref().is_none_or(|(b, _)| z > *b) {
            best = Some((z, prefix));
        }
    }
    let offline = best.map(|b| b.1).unwrap_or_default();
    let (_, online) = enum_online(inst, &offline);
    Ok(QapSolution::from_sets(inst, offline, online, Method::ImprovedRo))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::samples;

    #[test]
    fn two_step_on_samples() {
        let a = two_step_ro(&samples::ro_gap()).unwrap();
        assert!((a.objective - 7.94).abs() < 5e-3, "{}", a.objective);
        assert_eq!(a.sets(), vec![vec![0], vec![0], vec![0]]);
        let b = two_step_ro(&samples::improved_ro_gap()).unwrap();
        assert!((b.objective - 15.528).abs() < 1e-3, "{}", b.objective);
    }

    #[test]
    fn improved_on_second_sample() {
        let s = improved_ro(&samples::improved_ro_gap()).unwrap();
        assert!((s.objective - 15.722).abs() < 1e-3, "{}", s.objective);
        assert_eq!(s.sets(), vec![vec![0, 1, 2], vec![2], vec![0, 1, 2]]);
        s.check(&samples::improved_ro_gap()).unwrap();
    }

    #[test]
    fn improved_never_below_two_step() {
        for inst in [samples::ro_gap(), samples::improved_ro_gap()] {
            assert!(improved_ro(&inst).unwrap().objective >= two_step_ro(&inst).unwrap().objective - 1e-12);
        }
    }

    #[test]
    fn prefix_scans() {
        let seg = Segment { alpha: 1.0, u0: 1.0, r: vec![10.0, 9.0, 8.0], u: vec![100.0, 100.0, 1.0] };
        assert_eq!(best_prefix(&seg, &[0, 1, 2]).0, vec![0]);
        assert_eq!(best_prefix(&seg, &[]).0, Vec::<usize>::new());
        let zero = Segment { r: vec![0.0; 3], ..seg };
        assert_eq!(best_prefix(&zero, &[0, 1, 2]), (vec![], 0.0));
    }

    #[test]
    fn linear_constraint_is_unsupported() {
        let inst = samples::ro_gap().with_constraint(OfflineConstraint::Linear { a: vec![vec![1.0; 3]], b: vec![1.0] });
        assert!(matches!(improved_ro(&inst), Err(Error::Unsupported(_))));
        assert!(matches!(two_step_ro(&inst), Err(Error::Unsupported(_))));
    }

    #[test]
    fn cardinality_uses_constrained_offline() {
        let inst = samples::improved_ro_gap().with_constraint(OfflineConstraint::Cardinality(1));
        let s = improved_ro(&inst).unwrap();
        assert_eq!(s.offline, vec![0]);
    }
}
