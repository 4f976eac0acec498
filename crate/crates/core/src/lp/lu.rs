//! Sparse LU factorization of a simplex basis with product-form updates.
//!
//! Columns are factored left to right (Gilbert-Peierls) with threshold partial
//! pivoting. Between refactorizations each basis change appends one eta column.

const PIVOT_THRESHOLD: f64 = 0.1;
const SINGULAR_TOL: f64 = 1e-11;
const DROP_TOL: f64 = 1e-14;

/// One sparse basis column: row indices and values.
pub(crate) struct SparseCol<'a> {
    pub idx: &'a [usize],
    pub val: &'a [f64],
}

#[derive(Clone, Default)]
pub(crate) struct LuFactor {
    m: usize,
    prow: Vec<usize>,
    pcol: Vec<usize>,
    l_start: Vec<usize>,
    l_idx: Vec<usize>,
    l_val: Vec<f64>,
    u_start: Vec<usize>,
    u_idx: Vec<usize>,
    u_val: Vec<f64>,
    u_diag: Vec<f64>,
    eta_pos: Vec<usize>,
    eta_piv: Vec<f64>,
    eta_start: Vec<usize>,
    eta_idx: Vec<usize>,
    eta_val: Vec<f64>,
}

impl LuFactor {
    /// Factor the basis whose column at position `p` is `cols[p]`.
    ///
    /// Returns the factor together with the list of `(position, row)` pairs for
    /// dependent columns; each such position has been replaced by the unit
    /// column `-e_row` (the logical of `row`).
    pub fn factorize(m: usize, cols: &[SparseCol<'_>]) -> (LuFactor, Vec<(usize, usize)>) {
        assert_eq!(cols.len(), m);
        let mut f = LuFactor {
            m,
            l_start: vec![0],
            u_start: vec![0],
            eta_start: vec![0],
            ..Default::default()
        };
        let mut row_count = vec![0usize; m];
        for c in cols {
            for &i in c.idx {
                row_count[i] += 1;
            }
        }
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by_key(|&p| (cols[p].idx.len(), p));

        let mut step_of_row = vec![usize::MAX; m];
        let mut w = vec![0.0; m];
        let mut mark = vec![false; m];
        let mut nz: Vec<usize> = Vec::new();
        let mut visited = vec![false; m];
        let mut steps: Vec<usize> = Vec::new();
        let mut stack: Vec<usize> = Vec::new();
        let mut singular = Vec::new();

        for &p in &order {
            let col = &cols[p];
            for (&i, &v) in col.idx.iter().zip(col.val) {
                if !mark[i] {
                    mark[i] = true;
                    nz.push(i);
                }
                w[i] += v;
            }
            // Reach of the column through the L graph built so far.
            for &i in col.idx {
                let s = step_of_row[i];
                if s != usize::MAX && !visited[s] {
                    visited[s] = true;
                    stack.push(s);
                }
            }
            while let Some(s) = stack.pop() {
                steps.push(s);
                for &i in &f.l_idx[f.l_start[s]..f.l_start[s + 1]] {
                    let t = step_of_row[i];
                    if t != usize::MAX && !visited[t] {
                        visited[t] = true;
                        stack.push(t);
                    }
                }
            }
            steps.sort_unstable();
            for &s in &steps {
                visited[s] = false;
                let v = w[f.prow[s]];
                if v == 0.0 {
                    continue;
                }
                for k in f.l_start[s]..f.l_start[s + 1] {
                    let i = f.l_idx[k];
                    if !mark[i] {
                        mark[i] = true;
                        nz.push(i);
                    }
                    w[i] -= f.l_val[k] * v;
                }
            }
            steps.clear();

            let mut maxabs = 0.0f64;
            for &i in &nz {
                if step_of_row[i] == usize::MAX {
                    maxabs = maxabs.max(w[i].abs());
                }
            }
            if maxabs < SINGULAR_TOL {
                singular.push(p);
                for &i in &nz {
                    w[i] = 0.0;
                    mark[i] = false;
                }
                nz.clear();
                continue;
            }
            let mut piv_row = usize::MAX;
            for &i in &nz {
                if step_of_row[i] != usize::MAX || w[i].abs() < PIVOT_THRESHOLD * maxabs {
                    continue;
                }
                if piv_row == usize::MAX
                    || (row_count[i], i) < (row_count[piv_row], piv_row)
                {
                    piv_row = i;
                }
            }
            let k = f.prow.len();
            let piv = w[piv_row];
            for &i in &nz {
                let v = w[i];
                if i == piv_row || v.abs() <= DROP_TOL {
                    continue;
                }
                let s = step_of_row[i];
                if s != usize::MAX {
                    f.u_idx.push(s);
                    f.u_val.push(v);
                } else {
                    f.l_idx.push(i);
                    f.l_val.push(v / piv);
                }
            }
            for &i in &nz {
                w[i] = 0.0;
                mark[i] = false;
            }
            nz.clear();
            f.prow.push(piv_row);
            f.pcol.push(p);
            f.u_diag.push(piv);
            f.l_start.push(f.l_idx.len());
            f.u_start.push(f.u_idx.len());
            step_of_row[piv_row] = k;
        }

        let mut replaced = Vec::new();
        if !singular.is_empty() {
            let free_rows: Vec<usize> = (0..m).filter(|&i| step_of_row[i] == usize::MAX).collect();
            debug_assert_eq!(free_rows.len(), singular.len());
            singular.sort_unstable();
            for (&p, &i) in singular.iter().zip(&free_rows) {
                let k = f.prow.len();
                f.prow.push(i);
                f.pcol.push(p);
                f.u_diag.push(-1.0);
                f.l_start.push(f.l_idx.len());
                f.u_start.push(f.u_idx.len());
                step_of_row[i] = k;
                replaced.push((p, i));
            }
        }
        (f, replaced)
    }

    pub fn num_etas(&self) -> usize {
        self.eta_pos.len()
    }

    /// Solve `B w = b` in place. `b` is indexed by row on entry and by basis
    /// position on exit.
    pub fn ftran(&self, b: &mut [f64], scratch: &mut [f64]) {
        let m = self.m;
        for k in 0..m {
            let v = b[self.prow[k]];
            if v == 0.0 {
                continue;
            }
            for t in self.l_start[k]..self.l_start[k + 1] {
                b[self.l_idx[t]] -= self.l_val[t] * v;
            }
        }
        for k in (0..m).rev() {
            let r = self.prow[k];
            let z = b[r] / self.u_diag[k];
            b[r] = z;
            if z == 0.0 {
                continue;
            }
            for t in self.u_start[k]..self.u_start[k + 1] {
                b[self.prow[self.u_idx[t]]] -= self.u_val[t] * z;
            }
        }
        for k in 0..m {
            scratch[self.pcol[k]] = b[self.prow[k]];
        }
        b.copy_from_slice(&scratch[..m]);
        for e in 0..self.eta_pos.len() {
            let r = self.eta_pos[e];
            let wr = b[r] / self.eta_piv[e];
            b[r] = wr;
            if wr == 0.0 {
                continue;
            }
            for t in self.eta_start[e]..self.eta_start[e + 1] {
                b[self.eta_idx[t]] -= self.eta_val[t] * wr;
            }
        }
    }

    /// Solve `B^T v = c` in place. `c` is indexed by basis position on entry
    /// and by row on exit.
    pub fn btran(&self, c: &mut [f64], scratch: &mut [f64]) {
        let m = self.m;
        for e in (0..self.eta_pos.len()).rev() {
            let r = self.eta_pos[e];
            let mut s = c[r];
            for t in self.eta_start[e]..self.eta_start[e + 1] {
                s -= self.eta_val[t] * c[self.eta_idx[t]];
            }
            c[r] = s / self.eta_piv[e];
        }
        // U^T t = Q^T c, t stored by step in scratch
        for k in 0..m {
            let mut s = c[self.pcol[k]];
            for t in self.u_start[k]..self.u_start[k + 1] {
                s -= self.u_val[t] * scratch[self.u_idx[t]];
            }
            scratch[k] = s / self.u_diag[k];
        }
        for k in (0..m).rev() {
            let mut s = scratch[k];
            for t in self.l_start[k]..self.l_start[k + 1] {
                s -= self.l_val[t] * c[self.l_idx[t]];
            }
            c[self.prow[k]] = s;
        }
    }

    /// Record the replacement of the basis column at `pos` by a column whose
    /// FTRAN image (position indexed) is `alpha`.
    pub fn push_eta(&mut self, pos: usize, alpha: &[f64]) {
        self.eta_pos.push(pos);
        self.eta_piv.push(alpha[pos]);
        for (i, &a) in alpha.iter().enumerate() {
            if i != pos && a.abs() > DROP_TOL {
                self.eta_idx.push(i);
                self.eta_val.push(a);
            }
        }
        self.eta_start.push(self.eta_idx.len());
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dense_mul(cols: &[(Vec<usize>, Vec<f64>)], w: &[f64], m: usize) -> Vec<f64> {
        let mut out = vec![0.0; m];
        for (p, (idx, val)) in cols.iter().enumerate() {
            for (&i, &v) in idx.iter().zip(val) {
                out[i] += v * w[p];
            }
        }
        out
    }

    fn factor(cols: &[(Vec<usize>, Vec<f64>)]) -> (LuFactor, Vec<(usize, usize)>) {
        let sc: Vec<SparseCol> = cols.iter().map(|(i, v)| SparseCol { idx: i, val: v }).collect();
        LuFactor::factorize(cols.len(), &sc)
    }

    #[test]
    fn solves_small_system() {
        let cols = vec![
            (vec![0, 1], vec![2.0, 1.0]),
            (vec![0, 2], vec![1.0, 3.0]),
            (vec![1, 2], vec![4.0, -1.0]),
        ];
        let (f, rep) = factor(&cols);
        assert!(rep.is_empty());
        let b = vec![1.0, 2.0, 3.0];
        let mut w = b.clone();
        let mut scratch = vec![0.0; 3];
        f.ftran(&mut w, &mut scratch);
        let back = dense_mul(&cols, &w, 3);
        for i in 0..3 {
            assert!((back[i] - b[i]).abs() < 1e-12);
        }
        // B^T v = c
        let c = vec![0.5, -1.0, 2.0];
        let mut v = c.clone();
        f.btran(&mut v, &mut scratch);
        for (p, (idx, val)) in cols.iter().enumerate() {
            let s: f64 = idx.iter().zip(val).map(|(&i, &a)| a * v[i]).sum();
            assert!((s - c[p]).abs() < 1e-12);
        }
    }

    #[test]
    fn singular_column_replaced_by_logical() {
        let cols = vec![
            (vec![0, 1], vec![1.0, 1.0]),
            (vec![0, 1], vec![2.0, 2.0]),
            (vec![2], vec![1.0]),
        ];
        let (_, rep) = factor(&cols);
        assert_eq!(rep.len(), 1);
    }

    #[test]
    fn eta_update_matches_refactor() {
        let mut cols = vec![
            (vec![0, 1], vec![2.0, 1.0]),
            (vec![0, 2], vec![1.0, 3.0]),
            (vec![1, 2], vec![4.0, -1.0]),
        ];
        let (mut f, _) = factor(&cols);
        let mut scratch = vec![0.0; 3];
        let newcol = (vec![0, 1, 2], vec![1.0, 1.0, 1.0]);
        let mut a = vec![1.0, 1.0, 1.0];
        f.ftran(&mut a, &mut scratch);
        f.push_eta(1, &a);
        cols[1] = newcol;
        let b = vec![3.0, -2.0, 0.25];
        let mut w = b.clone();
        f.ftran(&mut w, &mut scratch);
        let back = dense_mul(&cols, &w, 3);
        for i in 0..3 {
            assert!((back[i] - b[i]).abs() < 1e-12);
        }
        let c = vec![1.0, 2.0, 3.0];
        let mut v = c.clone();
        f.btran(&mut v, &mut scratch);
        for (p, (idx, val)) in cols.iter().enumerate() {
            let s: f64 = idx.iter().zip(val).map(|(&i, &a)| a * v[i]).sum();
            assert!((s - c[p]).abs() < 1e-12);
        }
    }
}
