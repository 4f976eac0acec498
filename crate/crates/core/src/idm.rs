//! Offline MNL with independent online demand: an LP solved by lazy lower
//! cuts, and the randomized rounding that turns its optimum into offline
//! assortments.

use rand::Rng;
use serde::Serialize;

use crate::choice::mnl_revenue;
use crate::error::{Error, Result};
use crate::formulations::build_idm_lp;
use crate::instance::{IdmInstance, PartialOrder};
use crate::lp::{solve_lp, Basis, LpStatus};
use crate::rng;
use crate::separation::{cut_to_row, separate_under};

/// Lower-cut tightness required of a point before rounding.
pub const TIGHT_TOL: f64 = 1e-6;

#[derive(Clone, Debug, Serialize)]
pub struct IdmSolution {
    pub x: Vec<f64>,
    pub y0: f64,
    pub y: Vec<f64>,
    pub objective: f64,
    pub rounds: usize,
    pub cuts: usize,
}

/// Online value of product `j` per unit of `x_j`.
fn online_weight(idm: &IdmInstance, j: usize) -> f64 {
    idm.base.segments[1..].iter().zip(&idm.theta).map(|(s, t)| s.alpha * s.r[j] * t[j]).sum()
}

/// Right-hand side of the tightest lower cut for `j`: the largest `x_j`
/// the point supports.
fn x_cap(idm: &IdmInstance, j: usize, y: &[f64]) -> f64 {
    let seg = &idm.base.segments[0];
    let mut cap = seg.u0 * y[j];
    for (t, (&u, &yt)) in seg.u.iter().zip(y).enumerate() {
        cap += u * if yt >= y[j] || t == j { y[j] } else { yt };
    }
    cap
}

pub fn solve_qap_idm(idm: &IdmInstance) -> Result<IdmSolution> {
    let (mut model, vm) = build_idm_lp(idm)?;
    let seg = &idm.base.segments[0];
    let n = idm.base.n;
    let mut warm: Option<Basis> = None;
    let mut cuts = 0;
    for round in 0..=10 * n.max(1) {
        let r = solve_lp(&model, warm.as_ref());
        if r.status != LpStatus::Optimal {
            return Err(Error::Solve(format!("independent-demand LP ended {:?}", r.status)));
        }
        let x = vm.x_values(&r.x);
        let p = vm.point(0, &r.x);
        let rows: Vec<_> = (0..n)
            .filter_map(|j| separate_under(0, seg, j, x[j], p.y0, &p.y))
            .map(|c| cut_to_row(&c, seg, &vm))
            .collect();
        if rows.is_empty() {
            // products worth nothing online may sit below their cap; lift
            // them so every lower cut is tight, which leaves the value as is
            let x = (0..n)
                .map(|j| if online_weight(idm, j) == 0.0 { x_cap(idm, j, &p.y) } else { x[j] })
                .collect();
            return Ok(IdmSolution { x, y0: p.y0, y: p.y, objective: r.objective, rounds: round, cuts });
        }
        cuts += rows.len();
        model.add_rows(rows)?;
        warm = Some(r.basis);
    }
    Err(Error::Solve(format!("lower-cut loop did not converge in {} rounds", 10 * n.max(1))))
}

/// Nested assortments `C_0 ⊆ ... ⊆ C_n` with their probabilities.
#[derive(Clone, Debug, Serialize)]
pub struct RoundingDistribution {
    pub sets: Vec<Vec<usize>>,
    pub lambda: Vec<f64>,
    #[serde(skip)]
    pub source: IdmSolution,
}

/// Products by decreasing `y`, never placing a product before one that must
/// precede it. Among available products the largest `y` goes first, ties
/// to the lower index; this is the plain decreasing order whenever `y`
/// respects the precedence arcs.
fn precedence_sorted(n: usize, y: &[f64], precedence: &[(usize, usize)]) -> Vec<usize> {
    let mut indeg = vec![0usize; n];
    let mut succ = vec![Vec::new(); n];
    for &(j, k) in precedence {
        indeg[k] += 1;
        succ[j].push(k);
    }
    let mut avail: Vec<usize> = (0..n).filter(|&j| indeg[j] == 0).collect();
    let mut out = Vec::with_capacity(n);
    while !avail.is_empty() {
        let (pos, _) = avail
            .iter()
            .enumerate()
            .max_by(|(_, &a), (_, &b)| y[a].total_cmp(&y[b]).then(b.cmp(&a)))
            .expect("nonempty");
        let j = avail.swap_remove(pos);
        out.push(j);
        for &k in &succ[j] {
            indeg[k] -= 1;
            if indeg[k] == 0 {
                avail.push(k);
            }
        }
    }
    out
}

pub fn build_rounding(idm: &IdmInstance, sol: &IdmSolution) -> Result<RoundingDistribution> {
    let n = idm.base.n;
    let seg = &idm.base.segments[0];
    for j in 0..n {
        let cap = x_cap(idm, j, &sol.y);
        if (cap - sol.x[j]).abs() > TIGHT_TOL {
            return Err(Error::Precondition(format!(
                "point not LP-optimal: product {} has x = {} but its tightest lower cut allows {cap}",
                j + 1,
                sol.x[j]
            )));
        }
    }
    let sigma = precedence_sorted(n, &sol.y, &idm.precedence);
    if sigma.len() != n {
        return Err(Error::InvalidInstance("precedence arcs are cyclic".into()));
    }
    let mut sets = vec![Vec::new()];
    let mut lambda = Vec::with_capacity(n + 1);
    let first = sigma.first().map_or(0.0, |&j| sol.y[j]);
    lambda.push(seg.u0 * (sol.y0 - first));
    let mut weight = seg.u0;
    for k in 0..n {
        let j = sigma[k];
        weight += seg.u[j];
        let next = sigma.get(k + 1).map_or(0.0, |&t| sol.y[t]);
        lambda.push(weight * (sol.y[j] - next));
        let mut c = sets[k].clone();
        c.push(j);
        c.sort_unstable();
        sets.push(c);
    }
    if let Some(l) = lambda.iter().find(|&&l| l < -1e-9) {
        return Err(Error::Precondition(format!("negative rounding weight {l}")));
    }
    for l in &mut lambda {
        *l = l.max(0.0);
    }
    Ok(RoundingDistribution { sets, lambda, source: sol.clone() })
}

impl RoundingDistribution {
    /// Probability that each product is offered.
    pub fn marginals(&self, n: usize) -> Vec<f64> {
        let mut p = vec![0.0; n];
        for (c, &l) in self.sets.iter().zip(&self.lambda) {
            for &j in c {
                p[j] += l;
            }
        }
        p
    }

    /// Expected revenue, summed exactly over the support.
    pub fn expected_revenue(&self, idm: &IdmInstance) -> f64 {
        let seg = &idm.base.segments[0];
        self.sets
            .iter()
            .zip(&self.lambda)
            .map(|(c, &l)| {
                let online: f64 = c.iter().map(|&j| online_weight(idm, j)).sum();
                l * (seg.alpha * mnl_revenue(seg, c) + online)
            })
            .sum()
    }

    /// Largest deviation among: total mass, marginals against `x`, and the
    /// mixed choice point against `(y0, y)`.
    pub fn max_residual(&self, idm: &IdmInstance) -> f64 {
        let n = idm.base.n;
        let seg = &idm.base.segments[0];
        let mut worst = (self.lambda.iter().sum::<f64>() - 1.0).abs();
        for (p, x) in self.marginals(n).iter().zip(&self.source.x) {
            worst = worst.max((p - x).abs());
        }
        let mut y0 = 0.0;
        let mut y = vec![0.0; n];
        for (c, &l) in self.sets.iter().zip(&self.lambda) {
            let p = crate::choice::cc_transform(seg, c);
            y0 += l * p.y0;
            for j in 0..n {
                y[j] += l * p.y[j];
            }
        }
        worst = worst.max((y0 - self.source.y0).abs());
        for (a, b) in y.iter().zip(&self.source.y) {
            worst = worst.max((a - b).abs());
        }
        worst
    }

    /// JSON list of `[set, probability]` pairs, 1-based ids.
    pub fn to_json(&self) -> String {
        let pairs: Vec<(Vec<usize>, f64)> = self
            .sets
            .iter()
            .zip(&self.lambda)
            .map(|(c, &l)| (c.iter().map(|j| j + 1).collect(), l))
            .collect();
        serde_json::to_string_pretty(&pairs).expect("distribution serializes")
    }

    fn draw(&self, rng: &mut impl Rng) -> &[usize] {
        let mut u = rng.random::<f64>() * self.lambda.iter().sum::<f64>();
        for (c, &l) in self.sets.iter().zip(&self.lambda) {
            if u < l {
                return c;
            }
            u -= l;
        }
        let last = self.lambda.iter().rposition(|&l| l > 0.0).unwrap_or(0);
        &self.sets[last]
    }
}

pub fn sample_assortment(dist: &RoundingDistribution, seed: u64) -> Vec<usize> {
    dist.draw(&mut rng::stream(seed, rng::ROUNDING, 0)).to_vec()
}

/// `count` independent draws from one stream.
pub fn sample_many(dist: &RoundingDistribution, seed: u64, count: usize) -> Vec<Vec<usize>> {
    let mut r = rng::stream(seed, rng::ROUNDING, 0);
    (0..count).map(|_| dist.draw(&mut r).to_vec()).collect()
}

/// Whether `s` contains every product required by the products it holds.
pub fn precedence_closed(s: &[usize], precedence: &[(usize, usize)]) -> bool {
    precedence.iter().all(|&(j, k)| !s.contains(&k) || s.contains(&j))
}

/// Same check through a partial order: closed under "must precede".
pub fn order_closed(s: &[usize], order: &PartialOrder) -> bool {
    precedence_closed(s, order.arcs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{Instance, Segment};

    fn seg(alpha: f64, r: Vec<f64>, u: Vec<f64>) -> Segment {
        Segment { alpha, u0: 1.0, r, u }
    }

    #[test]
    fn single_product() {
        let base = Instance::new(1, vec![seg(0.5, vec![10.0], vec![1.0]), seg(0.5, vec![10.0], vec![1.0])]);
        let idm = IdmInstance::new(base, vec![vec![0.3]], vec![]);
        let sol = solve_qap_idm(&idm).unwrap();
        assert!((sol.objective - 4.0).abs() < 1e-9);
        assert!((sol.x[0] - 1.0).abs() < 1e-9);
        let d = build_rounding(&idm, &sol).unwrap();
        assert!((d.expected_revenue(&idm) - 4.0).abs() < 1e-9);
        assert_eq!(sample_assortment(&d, 7), vec![0]);
    }

    #[test]
    fn precedence_forces_a_companion() {
        // product 2 earns online, product 1 must come with it and earns little
        let base = Instance::new(
            2,
            vec![seg(0.5, vec![1.0, 1.0], vec![1.0, 1.0]), seg(0.5, vec![0.0, 20.0], vec![1.0, 1.0])],
        );
        let idm = IdmInstance::new(base, vec![vec![0.5, 0.5]], vec![(0, 1)]);
        let sol = solve_qap_idm(&idm).unwrap();
        // candidates: {} = 0, {1} = 0.25, {1,2} = 0.5 * 2/3 + 0.5 * 10
        let best = 0.5 * 2.0 / 3.0 + 5.0;
        assert!((sol.objective - best).abs() < 1e-9, "{}", sol.objective);
        assert!(sol.x[0] >= sol.x[1] - 1e-9);
        let d = build_rounding(&idm, &sol).unwrap();
        for s in sample_many(&d, 3, 200) {
            assert!(precedence_closed(&s, &idm.precedence));
        }
    }

    #[test]
    fn vertex_point_is_degenerate() {
        let base = Instance::new(
            3,
            vec![seg(0.6, vec![5.0, 4.0, 3.0], vec![1.0, 2.0, 3.0]), seg(0.4, vec![1.0, 1.0, 1.0], vec![1.0; 3])],
        );
        let idm = IdmInstance::new(base, vec![vec![0.2; 3]], vec![]);
        let s = vec![0, 2];
        let p = crate::choice::cc_transform(&idm.base.segments[0], &s);
        let sol = IdmSolution { x: vec![1.0, 0.0, 1.0], y0: p.y0, y: p.y, objective: 0.0, rounds: 0, cuts: 0 };
        let d = build_rounding(&idm, &sol).unwrap();
        for (c, &l) in d.sets.iter().zip(&d.lambda) {
            assert!(if *c == s { (l - 1.0).abs() < 1e-12 } else { l.abs() < 1e-12 });
        }
        assert!(d.max_residual(&idm) < 1e-12);
    }

    #[test]
    fn slack_point_is_refused() {
        let base = Instance::new(1, vec![seg(0.5, vec![10.0], vec![1.0]), seg(0.5, vec![10.0], vec![1.0])]);
        let idm = IdmInstance::new(base, vec![vec![0.3]], vec![]);
        let sol = IdmSolution { x: vec![0.5], y0: 0.5, y: vec![0.5], objective: 0.0, rounds: 0, cuts: 0 };
        let e = build_rounding(&idm, &sol).unwrap_err();
        assert!(e.to_string().contains("point not LP-optimal"));
    }

    #[test]
    fn ties_respect_precedence() {
        assert_eq!(precedence_sorted(3, &[0.2, 0.2, 0.2], &[(2, 0)]), vec![1, 2, 0]);
        assert_eq!(precedence_sorted(3, &[0.1, 0.3, 0.2], &[]), vec![1, 2, 0]);
    }
}
