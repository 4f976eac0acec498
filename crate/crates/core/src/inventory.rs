//! Fluid inventory targets and the make-to-stock Monte Carlo simulation.

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::rng;
use crate::solver::QapSolution;

pub const DEFAULT_PATHS: usize = 1000;
pub const DEFAULT_UNIT_COST: f64 = 1.0;

/// Probability that an arriving customer buys each product.
pub fn purchase_probabilities(inst: &Instance, sol: &QapSolution) -> Vec<f64> {
    let mut beta = vec![0.0; inst.n];
    for (seg, p) in inst.segments.iter().zip(&sol.probabilities) {
        for (b, q) in beta.iter_mut().zip(p) {
            *b += seg.alpha * q;
        }
    }
    beta
}

/// `sum_i alpha_i r_ij`, the priority for rounding up.
pub fn weighted_prices(inst: &Instance) -> Vec<f64> {
    (0..inst.n).map(|j| inst.segments.iter().map(|s| s.alpha * s.r[j]).sum()).collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct InventoryPlan {
    /// Expected demand `T * beta_j`.
    pub demand: Vec<f64>,
    pub order: Vec<u64>,
    pub delta: u64,
    /// Round-ups that did not fit in the offline assortment.
    pub shortfall: u64,
}

/// Snap values within floating noise of an integer onto it.
fn snap(v: f64) -> f64 {
    if (v - v.round()).abs() <= 1e-9 * v.abs().max(1.0) {
        v.round()
    } else {
        v
    }
}

pub fn round_inventory(inst: &Instance, sol: &QapSolution, t: u64) -> Result<InventoryPlan> {
    if t == 0 {
        return Err(Error::Precondition("the horizon must have at least one period".into()));
    }
    let demand: Vec<f64> = purchase_probabilities(inst, sol).iter().map(|b| t as f64 * b).collect();
    Ok(round_demand(&demand, &weighted_prices(inst), &sol.offline))
}

/// Round `demand` so the total equals its rounded-up sum, giving the extra
/// units to the offered products with the highest weighted price.
pub fn round_demand(demand: &[f64], price: &[f64], offered: &[usize]) -> InventoryPlan {
    let q: Vec<f64> = demand.iter().map(|&v| snap(v)).collect();
    let floors: u64 = q.iter().map(|v| v.floor() as u64).sum();
    let total = snap(q.iter().sum::<f64>()).ceil() as u64;
    let delta = total - floors;
    let mut ranked: Vec<usize> = offered.to_vec();
    ranked.sort_by(|&a, &b| price[b].total_cmp(&price[a]).then(a.cmp(&b)));
    let mut order: Vec<u64> = q.iter().map(|v| v.floor() as u64).collect();
    let up = (delta as usize).min(ranked.len());
    for &j in &ranked[..up] {
        order[j] = q[j].ceil() as u64;
    }
    let shortfall = delta - up as u64;
    InventoryPlan { demand: q, order, delta, shortfall }
}

#[derive(Clone, Debug, Serialize)]
pub struct SimulationReport {
    pub periods: u64,
    pub paths: usize,
    pub seed: u64,
    pub v_fluid: f64,
    pub v_sim_mean: f64,
    pub v_sim_se: f64,
    pub path_values: Vec<f64>,
    pub gap: f64,
}

impl SimulationReport {
    pub const CSV_HEADER: [&'static str; 7] = ["instance", "T", "paths", "V_fluid", "V_sim_mean", "V_sim_se", "gap_pct"];

    pub fn csv_record(&self, instance: &str) -> [String; 7] {
        [
            instance.to_string(),
            self.periods.to_string(),
            self.paths.to_string(),
            format!("{:.6}", self.v_fluid),
            format!("{:.6}", self.v_sim_mean),
            format!("{:.6}", self.v_sim_se),
            format!("{:.4}", 100.0 * self.gap),
        ]
    }
}

#[derive(Clone, Debug)]
pub struct PathOutcome {
    pub value: f64,
    pub sold: Vec<u64>,
}

/// One sample path: `periods` arrivals against stock `order`, paying
/// `cost` per stocked unit up front and `r_ij + c_j` per sale.
pub fn simulate_path(
    inst: &Instance,
    sets: &[Vec<usize>],
    order: &[u64],
    periods: u64,
    cost: &[f64],
    rng: &mut impl Rng,
) -> PathOutcome {
    let mut stock = order.to_vec();
    let mut sold = vec![0u64; inst.n];
    let mut value = -order.iter().zip(cost).map(|(&q, c)| q as f64 * c).sum::<f64>();
    let mut weights = Vec::new();
    for _ in 0..periods {
        let mut a = rng.random::<f64>();
        let i = inst
            .segments
            .iter()
            .position(|s| {
                a -= s.alpha;
                a < 0.0
            })
            .unwrap_or(inst.segments.len() - 1);
        let seg = &inst.segments[i];
        weights.clear();
        let mut total = seg.u0;
        for &j in &sets[i] {
            if stock[j] > 0 {
                weights.push(j);
                total += seg.u[j];
            }
        }
        let mut d = rng.random::<f64>() * total - seg.u0;
        if d < 0.0 {
            continue;
        }
        for &j in &weights {
            d -= seg.u[j];
            if d < 0.0 || j == *weights.last().unwrap() {
                stock[j] -= 1;
                sold[j] += 1;
                value += seg.r[j] + cost[j];
                break;
            }
        }
    }
    PathOutcome { value, sold }
}

pub fn simulate(
    inst: &Instance,
    sol: &QapSolution,
    order: &[u64],
    periods: u64,
    paths: usize,
    cost: &[f64],
    seed: u64,
) -> Result<SimulationReport> {
    if paths == 0 {
        return Err(Error::Precondition("at least one sample path is required".into()));
    }
    if cost.len() != inst.n || cost.iter().any(|&c| !(c >= 0.0 && c.is_finite())) {
        return Err(Error::Precondition("unit costs must be nonnegative, one per product".into()));
    }
    let sets = sol.sets();
    let path_values: Vec<f64> = (0..paths)
        .map(|l| simulate_path(inst, &sets, order, periods, cost, &mut rng::stream(seed, rng::DEMAND, l as u64)).value)
        .collect();
    let mean = path_values.iter().sum::<f64>() / paths as f64;
    let var = if paths > 1 {
        path_values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (paths - 1) as f64
    } else {
        0.0
    };
    let v_fluid = periods as f64 * sol.objective;
    let gap = if v_fluid != 0.0 { (v_fluid - mean) / v_fluid } else { 0.0 };
    Ok(SimulationReport {
        periods,
        paths,
        seed,
        v_fluid,
        v_sim_mean: mean,
        v_sim_se: (var / paths as f64).sqrt(),
        path_values,
        gap,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{samples, Segment};
    use crate::solver::Method;

    fn one_product() -> (Instance, QapSolution) {
        let inst = Instance::new(1, vec![Segment { alpha: 1.0, u0: 1.0, r: vec![10.0], u: vec![1.0] }]);
        let sol = QapSolution::from_sets(&inst, vec![0], vec![], Method::Oracle);
        (inst, sol)
    }

    #[test]
    fn beta_single_product() {
        let (inst, sol) = one_product();
        assert_eq!(purchase_probabilities(&inst, &sol), vec![0.5]);
        let empty = QapSolution::from_sets(&inst, vec![], vec![], Method::Oracle);
        assert_eq!(purchase_probabilities(&inst, &empty), vec![0.0]);
    }

    #[test]
    fn beta_on_first_sample() {
        let inst = samples::ro_gap();
        let sol = QapSolution::from_sets(&inst, vec![0, 2], vec![vec![0, 2], vec![0]], Method::Oracle);
        let beta = purchase_probabilities(&inst, &sol);
        // offline {1,3}: 100/102, 1/102; segment 1 {1,3}: 1/102, 100/102; segment 2 {1}: 100/101
        let want = [
            0.4 * 100.0 / 102.0 + 0.4 / 102.0 + 0.2 * 100.0 / 101.0,
            0.0,
            0.4 / 102.0 + 0.4 * 100.0 / 102.0,
        ];
        for (b, w) in beta.iter().zip(want) {
            assert!((b - w).abs() < 1e-12);
        }
        assert!(beta.iter().sum::<f64>() < 1.0);
    }

    #[test]
    fn rounding_walkthroughs() {
        let p = round_demand(&[1.0], &[1.0], &[0]);
        assert_eq!((p.delta, p.order.clone()), (0, vec![1]));
        let p = round_demand(&[0.6, 0.6], &[5.0, 7.0], &[0, 1]);
        assert_eq!((p.delta, p.order.clone()), (2, vec![1, 1]));
        let p = round_demand(&[0.6, 0.7], &[7.0, 5.0], &[0, 1]);
        assert_eq!((p.delta, p.order.clone()), (2, vec![1, 1]));
        let p = round_demand(&[0.3, 0.3, 0.3], &[1.0, 3.0, 2.0], &[0, 1, 2]);
        assert_eq!((p.delta, p.order.clone()), (1, vec![0, 1, 0]));
        let p = round_demand(&[1.0000000000001, 2.0], &[1.0, 1.0], &[0, 1]);
        assert_eq!((p.delta, p.order.clone()), (0, vec![1, 2]));
    }

    #[test]
    fn shortfall_is_reported() {
        let p = round_demand(&[0.5, 0.5, 0.5], &[1.0; 3], &[0]);
        assert_eq!((p.delta, p.shortfall), (2, 1));
        assert_eq!(p.order, vec![1, 0, 0]);
    }

    #[test]
    fn no_stock_means_no_revenue() {
        let inst = samples::ro_gap();
        let sol = QapSolution::from_sets(&inst, vec![0, 2], vec![vec![0, 2], vec![0]], Method::Oracle);
        let r = simulate(&inst, &sol, &[0, 0, 0], 50, 20, &[1.0; 3], 1).unwrap();
        assert!(r.path_values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn single_period_expectation() {
        let (inst, sol) = one_product();
        let r = simulate(&inst, &sol, &[1], 1, 10_000, &[0.0], 9).unwrap();
        assert!((r.v_fluid - 5.0).abs() < 1e-12);
        assert!((r.v_sim_mean - 5.0).abs() <= 3.0 * r.v_sim_se, "{} ± {}", r.v_sim_mean, r.v_sim_se);
        let again = simulate(&inst, &sol, &[1], 1, 10_000, &[0.0], 9).unwrap();
        assert_eq!(r.path_values, again.path_values);
    }
}
