//! JSON instance files. Product ids are 1-based on disk and 0-based in memory.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{IdmData, Instance, OfflineConstraint, PartialOrder, Segment};
use crate::error::{Error, Result};

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceDoc {
    n: usize,
    segments: Vec<SegmentDoc>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    orders: Vec<OrderDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    offline_constraint: Option<ConstraintDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    idm: Option<IdmDoc>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SegmentDoc {
    alpha: f64,
    u0: f64,
    r: Vec<f64>,
    u: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct OrderDoc {
    segment: usize,
    arcs: Vec<[usize; 2]>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConstraintDoc {
    #[serde(rename = "type")]
    kind: ConstraintKind,
    #[serde(rename = "K", default, skip_serializing_if = "Option::is_none")]
    k: Option<usize>,
    #[serde(rename = "A", default, skip_serializing_if = "Option::is_none")]
    a: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    b: Option<Vec<f64>>,
}

#[derive(Serialize, Deserialize, Clone, Copy)]
#[serde(rename_all = "lowercase")]
enum ConstraintKind {
    None,
    Cardinality,
    Linear,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct IdmDoc {
    theta: Vec<Vec<f64>>,
    precedence: Vec<[usize; 2]>,
}

fn schema(path: &Path, message: String) -> Error {
    Error::Parse { path: path.to_path_buf(), message }
}

fn arcs_from(path: &Path, n: usize, field: &str, arcs: &[[usize; 2]]) -> Result<Vec<(usize, usize)>> {
    arcs.iter()
        .enumerate()
        .map(|(k, &[a, b])| {
            if a == 0 || b == 0 || a > n || b > n {
                Err(schema(path, format!("{field}[{k}]: product id outside 1..={n}")))
            } else {
                Ok((a - 1, b - 1))
            }
        })
        .collect()
}

fn from_doc(doc: InstanceDoc, path: &Path) -> Result<Instance> {
    let n = doc.n;
    for (i, s) in doc.segments.iter().enumerate() {
        if s.r.len() != n || s.u.len() != n {
            return Err(schema(path, format!("segments[{i}]: r and u must have length n = {n}")));
        }
    }
    let segments: Vec<Segment> =
        doc.segments.into_iter().map(|s| Segment { alpha: s.alpha, u0: s.u0, r: s.r, u: s.u }).collect();
    let mut inst = Instance::new(n, segments);
    for (k, o) in doc.orders.iter().enumerate() {
        if o.segment == 0 || o.segment > inst.m() {
            return Err(schema(path, format!("orders[{k}].segment: must lie in 1..={}", inst.m())));
        }
        if inst.orders[o.segment].is_some() {
            return Err(schema(path, format!("orders[{k}].segment: duplicate order for segment {}", o.segment)));
        }
        let arcs = arcs_from(path, n, &format!("orders[{k}].arcs"), &o.arcs)?;
        inst.orders[o.segment] = Some(PartialOrder::new(n, arcs)?);
    }
    if let Some(c) = doc.offline_constraint {
        inst.offline_constraint = match (c.kind, c.k, c.a, c.b) {
            (ConstraintKind::None, None, None, None) => OfflineConstraint::Unconstrained,
            (ConstraintKind::Cardinality, Some(k), None, None) => OfflineConstraint::Cardinality(k),
            (ConstraintKind::Linear, None, Some(a), Some(b)) => OfflineConstraint::Linear { a, b },
            _ => {
                return Err(schema(
                    path,
                    "offline_constraint: \"cardinality\" takes K, \"linear\" takes A and b, \"none\" takes nothing"
                        .into(),
                ))
            }
        };
    }
    if let Some(idm) = doc.idm {
        let precedence = arcs_from(path, n, "idm.precedence", &idm.precedence)?;
        inst.idm = Some(IdmData { theta: idm.theta, precedence });
    }
    Ok(inst)
}

fn to_doc(inst: &Instance) -> InstanceDoc {
    let one_based = |arcs: &[(usize, usize)]| arcs.iter().map(|&(a, b)| [a + 1, b + 1]).collect();
    InstanceDoc {
        n: inst.n,
        segments: inst
            .segments
            .iter()
            .map(|s| SegmentDoc { alpha: s.alpha, u0: s.u0, r: s.r.clone(), u: s.u.clone() })
            .collect(),
        orders: inst
            .orders
            .iter()
            .enumerate()
            .filter_map(|(i, o)| o.as_ref().map(|o| OrderDoc { segment: i, arcs: one_based(o.arcs()) }))
            .collect(),
        offline_constraint: match &inst.offline_constraint {
            OfflineConstraint::Unconstrained => None,
            OfflineConstraint::Cardinality(k) => {
                Some(ConstraintDoc { kind: ConstraintKind::Cardinality, k: Some(*k), a: None, b: None })
            }
            OfflineConstraint::Linear { a, b } => Some(ConstraintDoc {
                kind: ConstraintKind::Linear,
                k: None,
                a: Some(a.clone()),
                b: Some(b.clone()),
            }),
        },
        idm: inst.idm.as_ref().map(|d| IdmDoc { theta: d.theta.clone(), precedence: one_based(&d.precedence) }),
    }
}

/// Parse an instance document. `origin` is only used in error messages.
pub fn from_json_str(text: &str, origin: &Path) -> Result<Instance> {
    let doc: InstanceDoc = serde_json::from_str(text).map_err(|e| schema(origin, e.to_string()))?;
    from_doc(doc, origin)
}

pub fn to_json_string(inst: &Instance) -> String {
    serde_json::to_string_pretty(&to_doc(inst)).expect("instance documents always serialize")
}

pub fn read_instance(path: impl AsRef<Path>) -> Result<Instance> {
    let path = path.as_ref();
    from_json_str(&fs::read_to_string(path)?, path)
}

pub fn write_instance(inst: &Instance, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, to_json_string(inst) + "\n")?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{generate_partial_orders, generate_synthetic, samples};

    fn parse(s: &str) -> Result<Instance> {
        from_json_str(s, Path::new("test.json"))
    }

    #[test]
    fn round_trip_sample() {
        let inst = samples::ro_gap();
        assert_eq!(parse(&to_json_string(&inst)).unwrap(), inst);
    }

    #[test]
    fn round_trip_keeps_full_precision() {
        let mut inst = generate_synthetic(12, 3, 0.37, 5.0, 3).unwrap().with_orders(generate_partial_orders(12, 3, 3));
        inst.offline_constraint = OfflineConstraint::Linear { a: vec![vec![0.1; 12]], b: vec![1.0 / 3.0] };
        inst.idm = Some(IdmData { theta: vec![vec![std::f64::consts::PI / 10.0; 12]; 3], precedence: vec![(0, 11)] });
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("i.json");
        write_instance(&inst, &path).unwrap();
        assert_eq!(read_instance(&path).unwrap(), inst);
    }

    #[test]
    fn missing_alpha_is_a_located_error() {
        let e = parse(r#"{"n":1,"segments":[{"u0":1,"r":[1],"u":[1]}]}"#).unwrap_err();
        let msg = e.to_string();
        assert!(msg.contains("alpha") && msg.contains("line"), "{msg}");
    }

    #[test]
    fn unknown_fields_are_rejected() {
        assert!(parse(r#"{"n":1,"segments":[],"colour":1}"#).is_err());
    }

    #[test]
    fn out_of_range_arc() {
        let doc = r#"{"n":2,"segments":[{"alpha":0.5,"u0":1,"r":[1,1],"u":[1,1]},{"alpha":0.5,"u0":1,"r":[1,1],"u":[1,1]}],
                     "orders":[{"segment":1,"arcs":[[1,3]]}]}"#;
        let msg = parse(doc).unwrap_err().to_string();
        assert!(msg.contains("orders[0].arcs[0]"), "{msg}");
    }

    #[test]
    fn constraint_variants() {
        let base = r#"{"n":1,"segments":[{"alpha":1,"u0":1,"r":[1],"u":[1]}],"offline_constraint":"#;
        let card = parse(&format!(r#"{base}{{"type":"cardinality","K":1}}}}"#)).unwrap();
        assert_eq!(card.offline_constraint, OfflineConstraint::Cardinality(1));
        assert!(parse(&format!(r#"{base}{{"type":"cardinality"}}}}"#)).is_err());
        assert!(parse(&format!(r#"{base}{{"type":"weird"}}}}"#)).is_err());
        let none = parse(&format!(r#"{base}{{"type":"none"}}}}"#)).unwrap();
        assert_eq!(none.offline_constraint, OfflineConstraint::Unconstrained);
    }
}
