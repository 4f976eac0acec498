//! Exhaustive enumeration for small instances. Used as ground truth.

use crate::choice::{mnl_revenue, undominated};
use crate::error::{Error, Result};
use crate::instance::{IdmInstance, Instance, PartialOrder, Segment};
use crate::solver::{offline_feasible, Method, QapSolution};

pub const MAX_QAP_PRODUCTS: usize = 12;
pub const MAX_CONS_PRODUCTS: usize = 15;

fn members(mask: usize, n: usize) -> Vec<usize> {
    (0..n).filter(|j| mask >> j & 1 == 1).collect()
}

/// `a` beats `b` on revenue, or ties and is lexicographically smaller.
fn better(a: (f64, &[usize]), b: (f64, &[usize])) -> bool {
    a.0 > b.0 || (a.0 == b.0 && a.1 < b.1)
}

/// For every mask `S`, the best subset of `S` for this segment (after
/// dropping dominated products when an order is given). Dynamic program
/// over subsets: the best subset of `S` is `S` itself or the best subset of
/// some `S - j`.
fn best_subsets(seg: &Segment, order: Option<&PartialOrder>, n: usize) -> Vec<(f64, Vec<usize>)> {
    let mut table: Vec<(f64, Vec<usize>)> = Vec::with_capacity(1 << n);
    for mask in 0..1usize << n {
        let s = members(mask, n);
        let own = match order {
            Some(o) => undominated(o, &s),
            None => s.clone(),
        };
        let mut best = (mnl_revenue(seg, &own), own);
        for &j in &s {
            let (v, set) = &table[mask & !(1 << j)];
            if better((*v, set), (best.0, &best.1)) {
                best = (*v, set.clone());
            }
        }
        table.push(best);
    }
    table
}

/// Optimal assortments by enumerating every feasible offline set. Ties go
/// to the lexicographically smallest offline set, then the smallest online
/// sets.
pub fn brute_force_qap(inst: &Instance) -> Result<QapSolution> {
    let n = inst.n;
    if n > MAX_QAP_PRODUCTS {
        return Err(Error::Precondition(format!("enumeration supports at most {MAX_QAP_PRODUCTS} products, got {n}")));
    }
    let tables: Vec<_> =
        (1..inst.segments.len()).map(|i| best_subsets(&inst.segments[i], inst.order(i), n)).collect();
    let seg0 = &inst.segments[0];
    let mut best: Option<(f64, Vec<usize>, usize)> = None;
    for mask in 0..1usize << n {
        let s = members(mask, n);
        if !offline_feasible(inst, &s) {
            continue;
        }
        let v = seg0.alpha * mnl_revenue(seg0, &s)
            + tables.iter().zip(&inst.segments[1..]).map(|(t, seg)| seg.alpha * t[mask].0).sum::<f64>();
        if best.as_ref().is_none_or(|(b, bs, _)| better((v, &s), (*b, bs))) {
            best = Some((v, s, mask));
        }
    }
    let (_, offline, mask) = best.ok_or_else(|| Error::Solve("no feasible offline assortment".into()))?;
    let online = tables.iter().map(|t| t[mask].1.clone()).collect();
    Ok(QapSolution::from_sets(inst, offline, online, Method::Oracle))
}

#[derive(Clone, Copy, Debug)]
pub enum ConsConstraint<'a> {
    None,
    Cardinality(usize),
    /// Offer antichains of the order only.
    Chain(&'a PartialOrder),
}

/// Best single-segment assortment under a constraint, by enumeration.
pub fn brute_force_cons_mnl(seg: &Segment, c: ConsConstraint<'_>) -> Result<(Vec<usize>, f64)> {
    let n = seg.u.len();
    if n > MAX_CONS_PRODUCTS {
        return Err(Error::Precondition(format!("enumeration supports at most {MAX_CONS_PRODUCTS} products, got {n}")));
    }
    let mut best = (Vec::new(), 0.0);
    for mask in 1..1usize << n {
        let s = members(mask, n);
        let ok = match c {
            ConsConstraint::None => true,
            ConsConstraint::Cardinality(k) => s.len() <= k,
            ConsConstraint::Chain(o) => undominated(o, &s) == s,
        };
        if !ok {
            continue;
        }
        let v = mnl_revenue(seg, &s);
        if better((v, &s), (best.1, &best.0)) {
            best = (s, v);
        }
    }
    Ok(best)
}

/// Best precedence-closed offline set of an independent-demand instance
/// and its value; online segments take every offered product.
pub fn brute_force_idm(idm: &IdmInstance) -> Result<(Vec<usize>, f64)> {
    let n = idm.base.n;
    if n > MAX_CONS_PRODUCTS {
        return Err(Error::Precondition(format!("enumeration supports at most {MAX_CONS_PRODUCTS} products, got {n}")));
    }
    let seg0 = &idm.base.segments[0];
    let mut best = (Vec::new(), f64::NEG_INFINITY);
    for mask in 0..1usize << n {
        if idm.precedence.iter().any(|&(j, k)| mask >> k & 1 == 1 && mask >> j & 1 == 0) {
            continue;
        }
        let s = members(mask, n);
        let online: f64 = idm.base.segments[1..]
            .iter()
            .zip(&idm.theta)
            .map(|(seg, t)| seg.alpha * s.iter().map(|&j| seg.r[j] * t[j]).sum::<f64>())
            .sum();
        let v = seg0.alpha * mnl_revenue(seg0, &s) + online;
        if better((v, &s), (best.1, &best.0)) {
            best = (s, v);
        }
    }
    Ok(best)
}
