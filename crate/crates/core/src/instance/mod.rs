//! Problem data: segments, partial orders, the offline constraint, and the
//! optional independent-demand block.

mod generate;
mod json;
mod order;
pub mod samples;

use std::fmt;

pub use generate::{generate_idm, generate_partial_orders, generate_synthetic};
pub use json::{from_json_str, read_instance, to_json_string, write_instance};
pub use order::PartialOrder;

/// One consumer segment. Index 0 of `Instance::segments` is the offline
/// segment; the rest are online.
#[derive(Clone, Debug, PartialEq)]
pub struct Segment {
    pub alpha: f64,
    /// Preference weight of the no-purchase option.
    pub u0: f64,
    pub r: Vec<f64>,
    pub u: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Default)]
pub enum OfflineConstraint {
    #[default]
    Unconstrained,
    Cardinality(usize),
    /// `a x <= b` over the offline indicator vector.
    Linear { a: Vec<Vec<f64>>, b: Vec<f64> },
}

/// Purchase probabilities and precedence arcs for the independent-demand
/// variant. `theta[i - 1]` belongs to online segment `i`.
#[derive(Clone, Debug, PartialEq)]
pub struct IdmData {
    pub theta: Vec<Vec<f64>>,
    /// `(j, k)` requires `x_j >= x_k` offline.
    pub precedence: Vec<(usize, usize)>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Instance {
    pub n: usize,
    pub segments: Vec<Segment>,
    /// Indexed like `segments`; a `Some` entry switches that online segment
    /// to the two-stage Luce model. Entry 0 stays `None`.
    pub orders: Vec<Option<PartialOrder>>,
    pub offline_constraint: OfflineConstraint,
    pub idm: Option<IdmData>,
}

impl Instance {
    pub fn new(n: usize, segments: Vec<Segment>) -> Instance {
        let orders = vec![None; segments.len()];
        Instance { n, segments, orders, offline_constraint: OfflineConstraint::Unconstrained, idm: None }
    }

    /// Number of online segments.
    pub fn m(&self) -> usize {
        self.segments.len().saturating_sub(1)
    }

    pub fn order(&self, i: usize) -> Option<&PartialOrder> {
        self.orders.get(i).and_then(Option::as_ref)
    }

    pub fn has_orders(&self) -> bool {
        self.orders.iter().any(Option::is_some)
    }

    pub fn with_orders(mut self, orders: Vec<PartialOrder>) -> Instance {
        self.orders = std::iter::once(None).chain(orders.into_iter().map(Some)).collect();
        self.orders.resize(self.segments.len(), None);
        self
    }

    pub fn with_constraint(mut self, c: OfflineConstraint) -> Instance {
        self.offline_constraint = c;
        self
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub field: String,
    pub rule: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.rule)
    }
}

pub const ALPHA_SUM_TOL: f64 = 1e-12;

/// Every broken invariant, in a stable order. An empty list means the
/// instance is safe to hand to the solvers.
pub fn validate(inst: &Instance) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut bad = |field: String, rule: &str| out.push(Violation { field, rule: rule.to_string() });
    let n = inst.n;
    if inst.segments.is_empty() {
        bad("segments".into(), "offline segment missing");
    }
    for (i, s) in inst.segments.iter().enumerate() {
        if !(s.alpha.is_finite() && s.alpha >= 0.0) {
            bad(format!("segments[{i}].alpha"), "arrival probability must be nonnegative");
        }
        if !(s.u0.is_finite() && s.u0 > 0.0) {
            bad(format!("segments[{i}].u0"), "no-purchase weight must be positive");
        }
        if s.r.len() != n {
            bad(format!("segments[{i}].r"), "length must equal n");
        }
        if s.u.len() != n {
            bad(format!("segments[{i}].u"), "length must equal n");
        }
        if s.r.iter().any(|v| !v.is_finite()) {
            bad(format!("segments[{i}].r"), "revenues must be finite");
        }
        if s.u.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            bad(format!("segments[{i}].u"), "weights must be nonnegative");
        }
    }
    let total: f64 = inst.segments.iter().map(|s| s.alpha).sum();
    if !inst.segments.is_empty() && (total - 1.0).abs() > ALPHA_SUM_TOL {
        bad("segments[*].alpha".into(), "arrival probabilities sum ≠ 1");
    }
    if inst.orders.len() != inst.segments.len() {
        bad("orders".into(), "one entry per segment required");
    }
    if inst.order(0).is_some() {
        bad("orders[0]".into(), "offline segment cannot use a partial order");
    }
    for (i, o) in inst.orders.iter().enumerate() {
        if let Some(o) = o {
            if o.n() != n {
                bad(format!("orders[{i}]"), "order size must equal n");
            } else if !o.is_acyclic() {
                bad(format!("orders[{i}]"), "partial order cyclic");
            }
        }
    }
    match &inst.offline_constraint {
        OfflineConstraint::Unconstrained => {}
        OfflineConstraint::Cardinality(k) => {
            if *k == 0 || *k > n {
                bad("offline_constraint.K".into(), "cardinality must lie in 1..=n");
            }
        }
        OfflineConstraint::Linear { a, b } => {
            if a.len() != b.len() {
                bad("offline_constraint".into(), "A and b must have the same number of rows");
            }
            if a.iter().any(|row| row.len() != n) {
                bad("offline_constraint.A".into(), "rows must have length n");
            }
            if a.iter().flatten().chain(b).any(|v| !v.is_finite()) {
                bad("offline_constraint".into(), "coefficients must be finite");
            }
        }
    }
    if let Some(idm) = &inst.idm {
        if idm.theta.len() != inst.m() || idm.theta.iter().any(|t| t.len() != n) {
            bad("idm.theta".into(), "must be m rows of length n");
        }
        if idm.theta.iter().flatten().any(|v| !(v.is_finite() && *v > 0.0)) {
            bad("idm.theta".into(), "purchase probabilities must be positive");
        }
        if idm.precedence.iter().any(|&(j, k)| j >= n || k >= n || j == k) {
            bad("idm.precedence".into(), "arcs must join two distinct products");
        } else if !PartialOrder::new(n, idm.precedence.clone()).is_ok_and(|p| p.is_acyclic()) {
            bad("idm.precedence".into(), "cycle forces its products to be offered together");
        }
    }
    out
}

/// The independent-demand view of an instance: MNL offline segment plus
/// fixed purchase probabilities online.
#[derive(Clone, Debug, PartialEq)]
pub struct IdmInstance {
    pub base: Instance,
    pub theta: Vec<Vec<f64>>,
    pub precedence: Vec<(usize, usize)>,
}

impl IdmInstance {
    pub fn new(base: Instance, theta: Vec<Vec<f64>>, precedence: Vec<(usize, usize)>) -> IdmInstance {
        IdmInstance { base, theta, precedence }
    }

    pub fn from_instance(inst: &Instance) -> crate::Result<IdmInstance> {
        let idm = inst
            .idm
            .as_ref()
            .ok_or_else(|| crate::Error::InvalidInstance("instance has no idm block".into()))?;
        Ok(IdmInstance { base: inst.clone(), theta: idm.theta.clone(), precedence: idm.precedence.clone() })
    }

    pub fn validate(&self) -> Vec<Violation> {
        let mut inst = self.base.clone();
        inst.idm = Some(IdmData { theta: self.theta.clone(), precedence: self.precedence.clone() });
        validate(&inst)
    }
}
