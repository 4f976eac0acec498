//! Writer for the CPLEX LP text format, for cross-checking with other solvers.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::io::{self, Write};

use super::{LinearModel, Sense, VarKind};

fn valid_name(s: &str) -> bool {
    const EXTRA: &str = "!\"#$%&()/,.;?@_`'{}|~";
    !s.is_empty()
        && s.len() <= 255
        && !s.starts_with(|c: char| c.is_ascii_digit() || c == '.' || c == 'e' || c == 'E')
        && s.chars().all(|c| c.is_ascii_alphanumeric() || EXTRA.contains(c))
}

fn unique_names<'a>(names: impl Iterator<Item = &'a str>, prefix: &str) -> Vec<String> {
    let mut seen = BTreeSet::new();
    names
        .enumerate()
        .map(|(k, s)| {
            let name = if valid_name(s) && !seen.contains(s) { s.to_string() } else { format!("{prefix}{k}") };
            seen.insert(name.clone());
            name
        })
        .collect()
}

fn term(out: &mut String, first: bool, a: f64, name: &str) {
    if a < 0.0 {
        let _ = write!(out, " - {} {}", -a, name);
    } else if first {
        let _ = write!(out, " {} {}", a, name);
    } else {
        let _ = write!(out, " + {} {}", a, name);
    }
}

/// Write `model` in LP format. Invalid or duplicate names are replaced by
/// `v<index>` / `r<index>`.
pub fn write_lp<W: Write>(model: &LinearModel, mut w: W) -> io::Result<()> {
    let vn = unique_names(model.vars().iter().map(|v| v.name.as_str()), "v");
    let rn = unique_names(model.rows().iter().map(|r| r.name.as_str()), "r");
    let mut out = String::new();
    out.push_str("Maximize\n obj:");
    let mut first = true;
    for (j, v) in model.vars().iter().enumerate() {
        if v.obj != 0.0 {
            term(&mut out, first, v.obj, &vn[j]);
            first = false;
        }
    }
    if first {
        let _ = write!(out, " 0 {}", vn.first().map(String::as_str).unwrap_or("dummy"));
    }
    out.push_str("\nSubject To\n");
    for (i, r) in model.rows().iter().enumerate() {
        let _ = write!(out, " {}:", rn[i]);
        if r.coeffs.is_empty() {
            let _ = write!(out, " 0 {}", vn.first().map(String::as_str).unwrap_or("dummy"));
        }
        for (k, &(v, a)) in r.coeffs.iter().enumerate() {
            term(&mut out, k == 0, a, &vn[v.0]);
        }
        let op = match r.sense {
            Sense::Le => "<=",
            Sense::Ge => ">=",
            Sense::Eq => "=",
        };
        let _ = writeln!(out, " {} {}", op, r.rhs);
    }
    out.push_str("Bounds\n");
    for (j, v) in model.vars().iter().enumerate() {
        if v.kind == VarKind::Binary && v.lb == 0.0 && v.ub == 1.0 {
            continue;
        }
        match (v.lb.is_finite(), v.ub.is_finite()) {
            (false, false) => {
                let _ = writeln!(out, " {} free", vn[j]);
            }
            (true, true) if v.lb == v.ub => {
                let _ = writeln!(out, " {} = {}", vn[j], v.lb);
            }
            (true, true) => {
                let _ = writeln!(out, " {} <= {} <= {}", v.lb, vn[j], v.ub);
            }
            (true, false) => {
                if v.lb != 0.0 {
                    let _ = writeln!(out, " {} >= {}", vn[j], v.lb);
                }
            }
            (false, true) => {
                let _ = writeln!(out, " -inf <= {} <= {}", vn[j], v.ub);
            }
        }
    }
    let bins: Vec<&str> = model
        .vars()
        .iter()
        .enumerate()
        .filter(|(_, v)| v.kind == VarKind::Binary)
        .map(|(j, _)| vn[j].as_str())
        .collect();
    if !bins.is_empty() {
        out.push_str("Binaries\n");
        for b in bins {
            let _ = writeln!(out, " {b}");
        }
    }
    out.push_str("End\n");
    w.write_all(out.as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn writes_all_sections() {
        let mut m = LinearModel::new();
        let x = m.add_var("x_1", 0.0, 1.0, VarKind::Binary, 2.0);
        let y = m.add_var("y[1]", 0.0, f64::INFINITY, VarKind::Continuous, -1.5);
        m.add_row("c", vec![(x, 1.0), (y, -2.0)], Sense::Ge, 0.25).unwrap();
        let mut buf = Vec::new();
        write_lp(&m, &mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert!(s.contains("Maximize\n obj: 2 x_1 - 1.5 v1"));
        assert!(s.contains(" c: 1 x_1 - 2 v1 >= 0.25"));
        assert!(s.contains("Binaries\n x_1\n"));
        assert!(s.ends_with("End\n"));
    }
}
