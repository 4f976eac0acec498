//! Linear and mixed-binary models, a bounded revised simplex and a
//! best-bound branch-and-bound on top of it.

mod lpformat;
mod lu;
mod mip;
mod simplex;

pub use lpformat::write_lp;
pub use mip::{solve_mip, solve_mip_with, MipOptions, MipResult, MipStatus};
pub use simplex::{solve_lp, Basis, BasisStatus, LpResult, LpStatus};

use crate::error::{Error, Result};

/// Primal feasibility tolerance, applied relative to `1 + |rhs|`.
pub const FEAS_TOL: f64 = 1e-9;
/// A binary value within this distance of 0 or 1 counts as integral.
pub const INT_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarId(pub usize);

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RowId(pub usize);

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VarKind {
    Continuous,
    Binary,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

#[derive(Clone, Debug)]
pub struct Variable {
    pub name: String,
    pub lb: f64,
    pub ub: f64,
    pub kind: VarKind,
    pub obj: f64,
}

#[derive(Clone, Debug)]
pub struct Row {
    pub name: String,
    pub coeffs: Vec<(VarId, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

impl Row {
    pub fn new(name: impl Into<String>, coeffs: Vec<(VarId, f64)>, sense: Sense, rhs: f64) -> Row {
        Row { name: name.into(), coeffs, sense, rhs }
    }

    pub fn activity(&self, x: &[f64]) -> f64 {
        self.coeffs.iter().map(|&(v, a)| a * x[v.0]).sum()
    }

    /// Amount by which `x` violates the row (0 when satisfied).
    pub fn violation(&self, x: &[f64]) -> f64 {
        let act = self.activity(x);
        match self.sense {
            Sense::Le => (act - self.rhs).max(0.0),
            Sense::Ge => (self.rhs - act).max(0.0),
            Sense::Eq => (act - self.rhs).abs(),
        }
    }
}

/// A maximization model over bounded variables and sparse rows.
#[derive(Clone, Debug, Default)]
pub struct LinearModel {
    vars: Vec<Variable>,
    rows: Vec<Row>,
}

impl LinearModel {
    pub fn new() -> LinearModel {
        LinearModel::default()
    }

    pub fn add_var(&mut self, name: impl Into<String>, lb: f64, ub: f64, kind: VarKind, obj: f64) -> VarId {
        let (lb, ub) = match kind {
            VarKind::Binary => (lb.max(0.0), ub.min(1.0)),
            VarKind::Continuous => (lb, ub),
        };
        assert!(lb <= ub, "variable bounds out of order");
        self.vars.push(Variable { name: name.into(), lb, ub, kind, obj });
        VarId(self.vars.len() - 1)
    }

    pub fn add_row(
        &mut self,
        name: impl Into<String>,
        coeffs: Vec<(VarId, f64)>,
        sense: Sense,
        rhs: f64,
    ) -> Result<RowId> {
        let row = self.normalize(Row::new(name, coeffs, sense, rhs))?;
        self.rows.push(row);
        Ok(RowId(self.rows.len() - 1))
    }

    /// Append rows; nothing is added if any row is malformed.
    pub fn add_rows(&mut self, rows: impl IntoIterator<Item = Row>) -> Result<Vec<RowId>> {
        let rows = rows.into_iter().map(|r| self.normalize(r)).collect::<Result<Vec<_>>>()?;
        let first = self.rows.len();
        self.rows.extend(rows);
        Ok((first..self.rows.len()).map(RowId).collect())
    }

    fn normalize(&self, mut row: Row) -> Result<Row> {
        if !row.rhs.is_finite() {
            return Err(Error::Model(format!("row {} has non-finite rhs", row.name)));
        }
        for &(v, a) in &row.coeffs {
            if v.0 >= self.vars.len() {
                return Err(Error::UnknownVariable(v.0));
            }
            if !a.is_finite() {
                return Err(Error::Model(format!("row {} has a non-finite coefficient", row.name)));
            }
        }
        row.coeffs.sort_by_key(|&(v, _)| v);
        let mut merged: Vec<(VarId, f64)> = Vec::with_capacity(row.coeffs.len());
        for (v, a) in row.coeffs {
            match merged.last_mut() {
                Some(last) if last.0 == v => last.1 += a,
                _ => merged.push((v, a)),
            }
        }
        merged.retain(|&(_, a)| a != 0.0);
        row.coeffs = merged;
        Ok(row)
    }

    pub fn set_bounds(&mut self, v: VarId, lb: f64, ub: f64) {
        assert!(lb <= ub, "variable bounds out of order");
        self.vars[v.0].lb = lb;
        self.vars[v.0].ub = ub;
    }

    pub fn set_obj(&mut self, v: VarId, c: f64) {
        self.vars[v.0].obj = c;
    }

    pub fn var(&self, v: VarId) -> &Variable {
        &self.vars[v.0]
    }

    pub fn vars(&self) -> &[Variable] {
        &self.vars
    }

    pub fn rows(&self) -> &[Row] {
        &self.rows
    }

    pub fn num_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn binaries(&self) -> impl Iterator<Item = VarId> + '_ {
        self.vars
            .iter()
            .enumerate()
            .filter(|(_, v)| v.kind == VarKind::Binary)
            .map(|(j, _)| VarId(j))
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.vars.iter().zip(x).map(|(v, &xj)| v.obj * xj).sum()
    }

    /// Largest row or bound violation of `x`, each scaled by `1 + |rhs|`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let mut worst = 0.0f64;
        for r in &self.rows {
            worst = worst.max(r.violation(x) / (1.0 + r.rhs.abs()));
        }
        for (v, &xj) in self.vars.iter().zip(x) {
            worst = worst.max(v.lb - xj).max(xj - v.ub);
        }
        worst
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rows_are_merged_and_checked() {
        let mut m = LinearModel::new();
        let a = m.add_var("a", 0.0, 1.0, VarKind::Continuous, 1.0);
        let b = m.add_var("b", 0.0, 1.0, VarKind::Continuous, 1.0);
        m.add_row("r", vec![(b, 1.0), (a, 2.0), (b, -1.0)], Sense::Le, 1.0).unwrap();
        assert_eq!(m.rows()[0].coeffs, vec![(a, 2.0)]);
        assert!(matches!(
            m.add_row("bad", vec![(VarId(7), 1.0)], Sense::Le, 1.0),
            Err(Error::UnknownVariable(7))
        ));
        assert_eq!(m.num_rows(), 1);
    }

    #[test]
    fn binary_bounds_are_clamped() {
        let mut m = LinearModel::new();
        let x = m.add_var("x", -5.0, 5.0, VarKind::Binary, 0.0);
        assert_eq!((m.var(x).lb, m.var(x).ub), (0.0, 1.0));
    }
}
