//! Model builders. All models maximize expected revenue and share the
//! variable layout recorded in [`VarMap`].

use crate::choice::ChoicePoint;
use crate::error::{Error, Result};
use crate::instance::{validate, IdmInstance, Instance, OfflineConstraint, PartialOrder, Segment};
use crate::lp::{LinearModel, Row, Sense, VarId, VarKind};

#[derive(Clone, Debug, Default)]
pub struct VarMap {
    /// Offline indicators; the binaries of every formulation except the
    /// independent-demand LP, where they are continuous.
    pub x: Vec<VarId>,
    pub y0: Vec<VarId>,
    pub y: Vec<Vec<VarId>>,
    /// Chain auxiliaries for two-stage Luce segments.
    pub z: Vec<Option<Vec<VarId>>>,
    /// Per-segment indicators of the big-M model; `xs[0]` repeats `x`.
    pub xs: Vec<Vec<VarId>>,
}

impl VarMap {
    pub fn x_values(&self, sol: &[f64]) -> Vec<f64> {
        self.x.iter().map(|v| sol[v.0]).collect()
    }

    pub fn point(&self, i: usize, sol: &[f64]) -> ChoicePoint {
        ChoicePoint { y0: sol[self.y0[i].0], y: self.y[i].iter().map(|v| sol[v.0]).collect() }
    }
}

fn alpha_of(seg: &Segment, total: f64) -> f64 {
    1.0 / (seg.u0 + total)
}

fn check(inst: &Instance) -> Result<()> {
    let v = validate(inst);
    if v.is_empty() {
        Ok(())
    } else {
        Err(Error::InvalidInstance(v.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")))
    }
}

/// Add `y0`, `y` (and `z` when an order is given) for one segment with
/// objective weight `weight * r_j u_j`, plus the normalization row.
fn add_segment(
    model: &mut LinearModel,
    vm: &mut VarMap,
    seg: &Segment,
    weight: f64,
    order: Option<&PartialOrder>,
) -> Result<usize> {
    let i = vm.y0.len();
    let n = seg.u.len();
    let total: f64 = seg.u.iter().sum();
    let y0 = model.add_var(format!("y{i}_0"), alpha_of(seg, total), 1.0 / seg.u0, VarKind::Continuous, 0.0);
    let y: Vec<VarId> = (0..n)
        .map(|j| {
            model.add_var(format!("y{i}_{}", j + 1), 0.0, 1.0 / seg.u0, VarKind::Continuous, weight * seg.r[j] * seg.u[j])
        })
        .collect();
    let mut coeffs = vec![(y0, seg.u0)];
    coeffs.extend(y.iter().zip(&seg.u).map(|(&v, &u)| (v, u)));
    model.add_row(format!("norm{i}"), coeffs, Sense::Eq, 1.0)?;
    vm.y0.push(y0);
    vm.y.push(y);
    match order {
        None => {
            for j in 0..n {
                model.add_row(format!("box{i}_{}", j + 1), vec![(vm.y[i][j], 1.0), (y0, -1.0)], Sense::Le, 0.0)?;
            }
            vm.z.push(None);
        }
        Some(o) => {
            let z = (0..n)
                .map(|j| model.add_var(format!("z{i}_{}", j + 1), 0.0, 1.0 / seg.u0, VarKind::Continuous, 0.0))
                .collect();
            vm.z.push(Some(z));
            model.add_rows(build_chain_constraints(i, o, vm))?;
        }
    }
    Ok(i)
}

/// Extended formulation of the chain polytope, homogenized by `y_i0`.
/// With `a` dominating `b`: `z_a <= z_b <= y0` for comparable pairs,
/// `y_b <= z_b - z_a` for covers and `y_a = z_a` for undominated `a`.
/// At an antichain `S`, `z / y0` is the indicator of `S` and everything it
/// dominates. The `z` variables of segment `i` must already exist.
pub fn build_chain_constraints(i: usize, order: &PartialOrder, vm: &VarMap) -> Vec<Row> {
    let z = vm.z[i].as_ref().expect("segment has chain variables");
    let y = &vm.y[i];
    let y0 = vm.y0[i];
    let n = order.n();
    let mut rows = Vec::new();
    for b in 0..n {
        rows.push(Row::new(format!("zcap{i}_{}", b + 1), vec![(z[b], 1.0), (y0, -1.0)], Sense::Le, 0.0));
    }
    for a in 0..n {
        for b in order.dominated_by(a) {
            rows.push(Row::new(format!("zord{i}_{}_{}", a + 1, b + 1), vec![(z[a], 1.0), (z[b], -1.0)], Sense::Le, 0.0));
        }
    }
    for &(a, b) in order.covers() {
        rows.push(Row::new(
            format!("cover{i}_{}_{}", a + 1, b + 1),
            vec![(y[b], 1.0), (z[b], -1.0), (z[a], 1.0)],
            Sense::Le,
            0.0,
        ));
    }
    for &a in order.minimal() {
        rows.push(Row::new(format!("min{i}_{}", a + 1), vec![(y[a], 1.0), (z[a], -1.0)], Sense::Eq, 0.0));
    }
    rows
}

fn add_offline_rows(model: &mut LinearModel, vm: &VarMap, c: &OfflineConstraint) -> Result<()> {
    let n = vm.x.len();
    let y0 = vm.y0[0];
    let (a, b) = match c {
        OfflineConstraint::Unconstrained => return Ok(()),
        OfflineConstraint::Cardinality(k) => (vec![vec![1.0; n]], vec![*k as f64]),
        OfflineConstraint::Linear { a, b } => (a.clone(), b.clone()),
    };
    for (r, (row, &rhs)) in a.iter().zip(&b).enumerate() {
        let xs = vm.x.iter().zip(row).map(|(&v, &c)| (v, c)).collect();
        model.add_row(format!("off{r}"), xs, Sense::Le, rhs)?;
        let mut ys: Vec<(VarId, f64)> = vm.y[0].iter().zip(row).map(|(&v, &c)| (v, c)).collect();
        ys.push((y0, -rhs));
        model.add_row(format!("offy{r}"), ys, Sense::Le, 0.0)?;
    }
    Ok(())
}

/// Supporting line of `y_i0 >= 1 / w` at `w = wbar`, where
/// `w = u_i0 + sum_j u_ij x_j`.
pub fn ch4_tangent(i: usize, seg: &Segment, vm: &VarMap, wbar: f64, tag: usize) -> Row {
    let w2 = wbar * wbar;
    let mut coeffs = vec![(vm.y0[i], 1.0)];
    coeffs.extend(vm.x.iter().zip(&seg.u).map(|(&v, &u)| (v, u / w2)));
    Row::new(format!("tan{i}_{tag}"), coeffs, Sense::Ge, 2.0 / wbar - seg.u0 / w2)
}

/// `(w, 1/w - y0)` at a relaxation point.
pub fn ch4_gap(seg: &Segment, x: &[f64], y0: f64) -> (f64, f64) {
    let w = seg.u0 + seg.u.iter().zip(x).map(|(u, x)| u * x).sum::<f64>();
    (w, 1.0 / w - y0)
}

/// The base formulation: hull rows per segment, the strengthened McCormick
/// rows linking `x` with every segment, and two tangents of the
/// no-purchase probability bound per segment. Segments with a partial order
/// get chain rows instead of the plain box.
pub fn build_ch0(inst: &Instance) -> Result<(LinearModel, VarMap)> {
    check(inst)?;
    let n = inst.n;
    let mut model = LinearModel::new();
    let mut vm = VarMap {
        x: (0..n).map(|j| model.add_var(format!("x{}", j + 1), 0.0, 1.0, VarKind::Binary, 0.0)).collect(),
        ..VarMap::default()
    };
    for (i, seg) in inst.segments.iter().enumerate() {
        add_segment(&mut model, &mut vm, seg, seg.alpha, inst.order(i))?;
    }
    add_offline_rows(&mut model, &vm, &inst.offline_constraint)?;

    for (i, seg) in inst.segments.iter().enumerate() {
        let total: f64 = seg.u.iter().sum();
        let (y0, y) = (vm.y0[i], &vm.y[i]);
        for j in 0..n {
            let (x, yj) = (vm.x[j], y[j]);
            let p = j + 1;
            if i == 0 {
                let a_all = alpha_of(seg, total);
                let a_none = 1.0 / seg.u0;
                model.add_row(format!("mcl{i}_{p}"), vec![(yj, 1.0), (x, -a_all)], Sense::Ge, 0.0)?;
                model.add_row(format!("mcl0{i}_{p}"), vec![(yj, 1.0), (x, -a_none), (y0, -1.0)], Sense::Ge, -a_none)?;
            }
            let a_one = alpha_of(seg, seg.u[j]);
            let a_rest = alpha_of(seg, total - seg.u[j]);
            model.add_row(format!("mcu{i}_{p}"), vec![(yj, 1.0), (x, -a_one)], Sense::Le, 0.0)?;
            model.add_row(format!("mcu0{i}_{p}"), vec![(yj, 1.0), (x, -a_rest), (y0, -1.0)], Sense::Le, -a_rest)?;
        }
        model.add_rows([ch4_tangent(i, seg, &vm, seg.u0, 0), ch4_tangent(i, seg, &vm, seg.u0 + total, 1)])?;
    }
    Ok((model, vm))
}

/// Linearized big-M model with one binary per segment and product.
pub fn build_milp_bigm(inst: &Instance) -> Result<(LinearModel, VarMap)> {
    check(inst)?;
    let n = inst.n;
    let mut model = LinearModel::new();
    let mut vm = VarMap::default();
    for (i, seg) in inst.segments.iter().enumerate() {
        add_segment(&mut model, &mut vm, seg, seg.alpha, inst.order(i))?;
        let xs: Vec<VarId> =
            (0..n).map(|j| model.add_var(format!("x{i}_{}", j + 1), 0.0, 1.0, VarKind::Binary, 0.0)).collect();
        for j in 0..n {
            let (y0, yj, x) = (vm.y0[i], vm.y[i][j], xs[j]);
            model.add_row(format!("bm{i}_{}", j + 1), vec![(yj, seg.u0), (x, -1.0)], Sense::Le, 0.0)?;
            model.add_row(format!("bmc{i}_{}", j + 1), vec![(y0, seg.u0), (yj, -seg.u0), (x, 1.0)], Sense::Le, 1.0)?;
            if i > 0 {
                model.add_row(format!("link{i}_{}", j + 1), vec![(vm.xs[0][j], 1.0), (x, -1.0)], Sense::Ge, 0.0)?;
            }
        }
        vm.xs.push(xs);
    }
    vm.x = vm.xs[0].clone();
    if let OfflineConstraint::Linear { .. } | OfflineConstraint::Cardinality(_) = inst.offline_constraint {
        add_offline_rows(&mut model, &vm, &inst.offline_constraint)?;
    }
    Ok((model, vm))
}

/// Convex hull of a single segment's feasible sets, in `x` space.
#[derive(Clone, Copy, Debug)]
pub enum Hull<'a> {
    Unconstrained,
    Cardinality(usize),
    Chain(&'a PartialOrder),
    /// `a x <= b`; only exact when the system describes an integral polytope.
    Rows { a: &'a [Vec<f64>], b: &'a [f64] },
}

/// Single-segment revenue maximization as an LP over the homogenized hull.
pub fn build_cons_mnl_lp(seg: &Segment, hull: Hull<'_>) -> Result<(LinearModel, VarMap)> {
    let mut model = LinearModel::new();
    let mut vm = VarMap::default();
    let order = match hull {
        Hull::Chain(o) => Some(o),
        _ => None,
    };
    add_segment(&mut model, &mut vm, seg, 1.0, order)?;
    let (a, b): (Vec<Vec<f64>>, Vec<f64>) = match hull {
        Hull::Cardinality(k) => (vec![vec![1.0; seg.u.len()]], vec![k as f64]),
        Hull::Rows { a, b } => (a.to_vec(), b.to_vec()),
        _ => (Vec::new(), Vec::new()),
    };
    for (r, (row, &rhs)) in a.iter().zip(&b).enumerate() {
        let mut coeffs: Vec<(VarId, f64)> = vm.y[0].iter().zip(row).map(|(&v, &c)| (v, c)).collect();
        coeffs.push((vm.y0[0], -rhs));
        model.add_row(format!("hull{r}"), coeffs, Sense::Le, 0.0)?;
    }
    Ok((model, vm))
}

/// Base LP of the independent-demand variant: continuous offline `x`,
/// offline MNL hull, precedence rows and the two sparse lower linking rows
/// per product. The rest of the lower family is added lazily.
pub fn build_idm_lp(idm: &IdmInstance) -> Result<(LinearModel, VarMap)> {
    let problems = idm.validate();
    if !problems.is_empty() {
        return Err(Error::InvalidInstance(problems.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")));
    }
    let inst = &idm.base;
    if inst.has_orders() {
        return Err(Error::Unsupported("independent demand ignores partial orders; remove them".into()));
    }
    if inst.offline_constraint != OfflineConstraint::Unconstrained {
        return Err(Error::Unsupported("independent demand with offline constraints is not supported".into()));
    }
    if inst.segments.iter().flat_map(|s| &s.r).any(|&r| r < 0.0) {
        return Err(Error::Precondition("independent-demand LP needs nonnegative revenues".into()));
    }
    let n = inst.n;
    let seg = &inst.segments[0];
    let mut model = LinearModel::new();
    let mut vm = VarMap::default();
    vm.x = (0..n)
        .map(|j| {
            let obj: f64 = inst.segments[1..].iter().zip(&idm.theta).map(|(s, t)| s.alpha * s.r[j] * t[j]).sum();
            model.add_var(format!("x{}", j + 1), 0.0, f64::INFINITY, VarKind::Continuous, obj)
        })
        .collect();
    add_segment(&mut model, &mut vm, seg, seg.alpha, None)?;
    let total: f64 = seg.u.iter().sum();
    let (y0, y) = (vm.y0[0], vm.y[0].clone());
    for &(j, k) in &idm.precedence {
        model.add_row(format!("prec_{}_{}", j + 1, k + 1), vec![(y[j], 1.0), (y[k], -1.0)], Sense::Ge, 0.0)?;
    }
    let a_none = 1.0 / seg.u0;
    for j in 0..n {
        let x = vm.x[j];
        model.add_row(format!("mcl0_{}", j + 1), vec![(y[j], 1.0), (x, -alpha_of(seg, total))], Sense::Ge, 0.0)?;
        model.add_row(format!("mcl00_{}", j + 1), vec![(y[j], 1.0), (x, -a_none), (y0, -1.0)], Sense::Ge, -a_none)?;
    }
    Ok((model, vm))
}
