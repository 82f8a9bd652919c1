//! Up-looking sparse Cholesky factorization `P A P^T = L L^T`.
//!
//! Row `k` of `L` is a sparse triangular solve whose pattern is the set of
//! nodes reached from the entries of column `k` in the elimination tree.

use super::csr::relative_residual;
use super::ordering::{invert_permutation, Ordering};
use super::{CsrMatrix, TripletBuilder};
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct SparseCholesky {
    n: usize,
    /// Columns of `L`, diagonal first.
    ptr: Vec<usize>,
    idx: Vec<usize>,
    val: Vec<f64>,
    /// `perm[k]`: original index at position `k`.
    perm: Vec<usize>,
}

const NONE: usize = usize::MAX;

impl SparseCholesky {
    /// Factor a symmetric positive definite matrix. Only the upper triangle
    /// of the permuted matrix is read, so `a` must be symmetric.
    pub fn factor(a: &CsrMatrix, ordering: Ordering) -> Result<Self> {
        let n = a.nrows();
        if a.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: a.ncols(),
            });
        }
        let perm = ordering.permutation(a);
        let pinv = invert_permutation(&perm);

        // Upper triangle of the permuted matrix, stored by columns
        // (row `j` of `c` lists column `j`).
        let mut builder = TripletBuilder::with_capacity(n, n, a.nnz());
        for i in 0..n {
            let (cols, vals) = a.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                let (pi, pj) = (pinv[i], pinv[j]);
                if pi <= pj {
                    builder.push(pj, pi, v);
                }
            }
        }
        let c = builder.into_csr();

        let parent = etree(&c);
        let mut columns: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        let mut x = vec![0.0; n];
        let mut mark = vec![NONE; n];
        let mut pattern = Vec::new();
        let mut path = Vec::new();

        for k in 0..n {
            pattern.clear();
            mark[k] = k;
            let (rows, vals) = c.row(k);
            let mut d = 0.0;
            for (&i, &v) in rows.iter().zip(vals) {
                if i == k {
                    d = v;
                    continue;
                }
                x[i] = v;
                let mut j = i;
                path.clear();
                while j != NONE && mark[j] != k {
                    path.push(j);
                    mark[j] = k;
                    j = parent[j];
                }
                pattern.extend(path.drain(..).rev());
            }
            // Ancestors appear after their descendants within each path; a
            // global topological order follows from sorting by index.
            pattern.sort_unstable();

            for &i in &pattern {
                let col = &columns[i];
                let lki = x[i] / col[0].1;
                x[i] = 0.0;
                for &(r, v) in &col[1..] {
                    x[r] -= v * lki;
                }
                d -= lki * lki;
                columns[i].push((k, lki));
            }
            if !(d > 0.0) {
                return Err(Error::NotPositiveDefinite { pivot: k });
            }
            columns[k].push((k, d.sqrt()));
        }

        let nnz = columns.iter().map(Vec::len).sum();
        let mut ptr = Vec::with_capacity(n + 1);
        let mut idx = Vec::with_capacity(nnz);
        let mut val = Vec::with_capacity(nnz);
        ptr.push(0);
        for col in columns {
            for (r, v) in col {
                idx.push(r);
                val.push(v);
            }
            ptr.push(idx.len());
        }
        Ok(Self {
            n,
            ptr,
            idx,
            val,
            perm,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn factor_nnz(&self) -> usize {
        self.idx.len()
    }

    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        if b.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: b.len(),
            });
        }
        let mut y: Vec<f64> = self.perm.iter().map(|&i| b[i]).collect();
        for j in 0..self.n {
            let (s, e) = (self.ptr[j], self.ptr[j + 1]);
            y[j] /= self.val[s];
            let yj = y[j];
            for p in s + 1..e {
                y[self.idx[p]] -= self.val[p] * yj;
            }
        }
        for j in (0..self.n).rev() {
            let (s, e) = (self.ptr[j], self.ptr[j + 1]);
            let mut yj = y[j];
            for p in s + 1..e {
                yj -= self.val[p] * y[self.idx[p]];
            }
            y[j] = yj / self.val[s];
        }
        let mut x = vec![0.0; self.n];
        for (k, &i) in self.perm.iter().enumerate() {
            x[i] = y[k];
        }
        Ok(x)
    }

    /// Solve and report the relative residual against `a`.
    pub fn solve_checked(&self, a: &CsrMatrix, b: &[f64]) -> Result<(Vec<f64>, f64)> {
        let x = self.solve(b)?;
        let res = relative_residual(a, &x, b)?;
        Ok((x, res))
    }
}

/// Elimination tree of a symmetric matrix given its upper triangle by columns.
fn etree(c: &CsrMatrix) -> Vec<usize> {
    let n = c.nrows();
    let mut parent = vec![NONE; n];
    let mut ancestor = vec![NONE; n];
    for k in 0..n {
        let (rows, _) = c.row(k);
        for &start in rows {
            let mut i = start;
            while i != NONE && i < k {
                let next = ancestor[i];
                ancestor[i] = k;
                if next == NONE {
                    parent[i] = k;
                }
                i = next;
            }
        }
    }
    parent
}
