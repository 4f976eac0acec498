//! The sort-based oracle against exhaustive enumeration of the cut family.

use proptest::prelude::*;
use qap_core::choice::cc_transform;
use qap_core::lp::{solve_lp, LinearModel, LpStatus, Sense, VarId, VarKind};
use qap_core::separation::{scaled_violation, separate_segment, violation, CutKind, SortedPoint, CUT_TOL};
use qap_core::Segment;

#[derive(Clone, Debug)]
struct Point {
    seg: Segment,
    x: Vec<f64>,
    y0: f64,
    y: Vec<f64>,
}

fn fraction() -> impl Strategy<Value = f64> {
    // a discrete branch produces exact ties in y
    prop_oneof![0.0f64..=1.0, prop::sample::select(vec![0.0, 0.25, 0.5, 1.0])]
}

fn point(max_n: usize) -> impl Strategy<Value = Point> {
    (1..=max_n).prop_flat_map(|n| {
        (
            0.2f64..5.0,
            prop::collection::vec(prop_oneof![0.0f64..4.0, Just(1.0)], n),
            prop::collection::vec(fraction(), n),
            prop::collection::vec(fraction(), n),
        )
            .prop_map(|(u0, u, t, x)| {
                let y0 = 1.0 / (u0 + u.iter().zip(&t).map(|(a, b)| a * b).sum::<f64>());
                let y = t.iter().map(|f| f * y0).collect();
                Point { seg: Segment { alpha: 1.0, u0, r: vec![0.0; u.len()], u }, x, y0, y }
            })
    })
}

fn subsets_without(n: usize, j: usize) -> impl Iterator<Item = Vec<usize>> {
    (0u32..(1 << n)).filter(move |m| m >> j & 1 == 0).map(move |m| (0..n).filter(|t| m >> t & 1 == 1).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn returned_cut_maximizes_the_cleared_violation(p in point(10)) {
        let n = p.y.len();
        let sp = SortedPoint::new(&p.seg, p.y0, &p.y);
        let big_n = p.seg.u0 + p.seg.u.iter().sum::<f64>();
        for j in 0..n {
            for kind in [CutKind::Under, CutKind::Over] {
                let (best, best_raw) = subsets_without(n, j)
                    .map(|s| (
                        scaled_violation(&p.seg, kind, j, &s, p.x[j], p.y0, &p.y),
                        violation(&p.seg, kind, j, &s, p.x[j], p.y0, &p.y),
                    ))
                    .fold((f64::NEG_INFINITY, f64::NEG_INFINITY), |a, b| (a.0.max(b.0), a.1.max(b.1)));
                let got = match kind {
                    CutKind::Under => sp.under(0, j, p.x[j]),
                    CutKind::Over => sp.over(0, j, p.x[j]),
                };
                match got {
                    Some(c) => {
                        let v = scaled_violation(&p.seg, kind, j, &c.set, p.x[j], p.y0, &p.y);
                        prop_assert!((v - best).abs() <= 1e-9, "{kind:?} j={j}: {v} vs {best}");
                        prop_assert!(c.violation > CUT_TOL && c.violation <= best_raw + 1e-12);
                        prop_assert!(!c.set.contains(&j));
                    }
                    None => {
                        prop_assert!(best <= CUT_TOL * big_n + 1e-9, "{kind:?} j={j}: missed {best}");
                    }
                }
            }
        }
    }

    #[test]
    fn emitted_cuts_hold_at_every_vertex(p in point(9)) {
        let n = p.y.len();
        let cuts = separate_segment(0, &p.seg, &p.x, p.y0, &p.y, true);
        for c in &cuts {
            for m in 0u32..(1 << n) {
                let s: Vec<usize> = (0..n).filter(|t| m >> t & 1 == 1).collect();
                let v = cc_transform(&p.seg, &s);
                let xj = f64::from(m >> c.product & 1);
                prop_assert!(violation(&p.seg, c.kind, c.product, &c.set, xj, v.y0, &v.y) <= 1e-12);
            }
        }
    }
}

/// Rows of every Under and Over inequality for product `j`, as
/// (coefficients on (x_j, y0, y), sense) with zero right-hand side.
fn all_rows(seg: &Segment, j: usize) -> Vec<(Vec<f64>, Sense)> {
    let n = seg.u.len();
    let mut rows = Vec::new();
    for s in subsets_without(n, j) {
        for kind in [CutKind::Under, CutKind::Over] {
            // violation is affine in the point; recover coefficients by evaluation
            let f = |xj: f64, y0: f64, y: &[f64]| scaled_violation(seg, kind, j, &s, xj, y0, y);
            let zero = vec![0.0; n];
            let c0 = f(0.0, 0.0, &zero);
            let mut a = vec![f(1.0, 0.0, &zero) - c0, f(0.0, 1.0, &zero) - c0];
            for t in 0..n {
                let mut e = zero.clone();
                e[t] = 1.0;
                a.push(f(0.0, 0.0, &e) - c0);
            }
            rows.push((a, Sense::Le));
        }
    }
    rows
}

fn in_hull(seg: &Segment, j: usize, pt: &[f64]) -> bool {
    let n = seg.u.len();
    let mut m = LinearModel::new();
    let mut lams = Vec::new();
    let mut verts = Vec::new();
    for mask in 0u32..(1 << n) {
        let s: Vec<usize> = (0..n).filter(|t| mask >> t & 1 == 1).collect();
        let v = cc_transform(seg, &s);
        let mut coords = vec![f64::from(mask >> j & 1), v.y0];
        coords.extend(v.y);
        verts.push(coords);
        lams.push(m.add_var(format!("l{mask}"), 0.0, f64::INFINITY, VarKind::Continuous, 0.0));
    }
    m.add_row("sum", lams.iter().map(|&l| (l, 1.0)).collect(), Sense::Eq, 1.0).unwrap();
    for (k, &target) in pt.iter().enumerate() {
        let coeffs: Vec<(VarId, f64)> = lams.iter().zip(&verts).map(|(&l, v)| (l, v[k])).collect();
        m.add_row(format!("c{k}"), coeffs, Sense::Eq, target).unwrap();
    }
    solve_lp(&m, None).status == LpStatus::Optimal
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    /// Start inside the hull, walk in a random direction that keeps the
    /// normalization, and stop at the first Under/Over/box row. The stopping
    /// point must still be a convex combination of vertices.
    #[test]
    fn inequalities_describe_the_hull(
        p in point(4),
        weights in prop::collection::vec(0.0f64..1.0, 16),
        dir in prop::collection::vec(-1.0f64..1.0, 6),
        jpick in 0usize..4,
    ) {
        let seg = &p.seg;
        let n = seg.u.len();
        let j = jpick % n;
        let mut start = vec![0.0; n + 2];
        let total: f64 = weights[..1 << n].iter().sum::<f64>().max(1e-9);
        for mask in 0u32..(1 << n) {
            let s: Vec<usize> = (0..n).filter(|t| mask >> t & 1 == 1).collect();
            let v = cc_transform(seg, &s);
            let w = weights[mask as usize] / total;
            start[0] += w * f64::from(mask >> j & 1);
            start[1] += w * v.y0;
            for t in 0..n {
                start[2 + t] += w * v.y[t];
            }
        }
        prop_assume!(weights[..1 << n].iter().sum::<f64>() > 1e-6);
        // project the direction onto u0 d0 + sum u_t d_t = 0
        let mut d: Vec<f64> = dir[..n + 2].to_vec();
        let mut normal = vec![0.0, seg.u0];
        normal.extend(&seg.u);
        let nn: f64 = normal.iter().map(|a| a * a).sum();
        let dot: f64 = d.iter().zip(&normal).map(|(a, b)| a * b).sum();
        for (dk, nk) in d.iter_mut().zip(&normal) {
            *dk -= dot / nn * nk;
        }
        let mut rows = all_rows(seg, j);
        // box: -x <= 0, x <= 1, -y_t <= 0, y_t - y0 <= 0
        let unit = |k: usize, a: f64| { let mut v = vec![0.0; n + 2]; v[k] = a; v };
        rows.push((unit(0, -1.0), Sense::Le));
        for t in 0..n {
            rows.push((unit(2 + t, -1.0), Sense::Le));
            let mut r = unit(2 + t, 1.0);
            r[1] = -1.0;
            rows.push((r, Sense::Le));
        }
        let mut step = f64::INFINITY;
        if d[0] > 0.0 {
            step = (1.0 - start[0]) / d[0];
        }
        for (a, _) in &rows {
            let ad: f64 = a.iter().zip(&d).map(|(p, q)| p * q).sum();
            let slack: f64 = -a.iter().zip(&start).map(|(p, q)| p * q).sum::<f64>();
            if ad > 1e-12 {
                step = step.min(slack.max(0.0) / ad);
            }
        }
        prop_assume!(step.is_finite());
        let end: Vec<f64> = start.iter().zip(&d).map(|(s, dk)| s + step * dk).collect();
        prop_assert!(in_hull(seg, j, &end), "boundary point {end:?} outside hull");
    }
}
