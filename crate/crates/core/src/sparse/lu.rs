//! Left-looking sparse LU (Gilbert-Peierls) with threshold partial pivoting.
//!
//! Factors `P A Q = L U` column by column. Each column of `L` and `U` comes
//! from a sparse triangular solve whose pattern is the reach of the column in
//! the graph of the partial `L`.

use super::csr::relative_residual;
use super::ordering::{is_permutation, Ordering};
use super::CsrMatrix;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LuOptions {
    pub ordering: Ordering,
    /// The diagonal entry is kept as pivot when it is at least this fraction
    /// of the largest candidate in its column.
    pub pivot_threshold: f64,
}

impl Default for LuOptions {
    fn default() -> Self {
        Self {
            ordering: Ordering::Auto,
            pivot_threshold: 0.1,
        }
    }
}

/// Column-compressed factor storage.
#[derive(Debug, Clone, Default)]
struct Csc {
    ptr: Vec<usize>,
    idx: Vec<usize>,
    val: Vec<f64>,
}

impl Csc {
    fn with_capacity(n: usize, nnz: usize) -> Self {
        let mut ptr = Vec::with_capacity(n + 1);
        ptr.push(0);
        Self {
            ptr,
            idx: Vec::with_capacity(nnz),
            val: Vec::with_capacity(nnz),
        }
    }

    #[inline]
    fn push(&mut self, i: usize, v: f64) {
        self.idx.push(i);
        self.val.push(v);
    }

    #[inline]
    fn close_column(&mut self) {
        self.ptr.push(self.idx.len());
    }
}

/// Sparse LU factors of a square matrix.
#[derive(Debug, Clone)]
pub struct SparseLu {
    n: usize,
    /// Unit lower factor; the diagonal 1 is stored first in each column.
    l: Csc,
    /// Upper factor; the diagonal is stored last in each column.
    u: Csc,
    /// `pinv[i]`: pivot position of original row `i`.
    pinv: Vec<usize>,
    /// `q[k]`: original column eliminated at step `k`.
    q: Vec<usize>,
}

impl SparseLu {
    pub fn factor(a: &CsrMatrix, options: &LuOptions) -> Result<Self> {
        let q = options.ordering.permutation(a);
        Self::factor_with_permutation(a, q, options.pivot_threshold)
    }

    pub fn factor_with_permutation(a: &CsrMatrix, q: Vec<usize>, tol: f64) -> Result<Self> {
        let n = a.nrows();
        if a.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: a.ncols(),
            });
        }
        if q.len() != n || !is_permutation(&q) {
            return Err(Error::Solver("column ordering is not a permutation".into()));
        }
        // Rows of the transpose are the columns of `a`.
        let cols = a.transpose();
        let guess = 4 * a.nnz() + n;
        let mut l = Csc::with_capacity(n, guess);
        let mut u = Csc::with_capacity(n, guess);
        const NONE: usize = usize::MAX;
        let mut pinv = vec![NONE; n];
        let mut x = vec![0.0; n];
        let mut xi = vec![0usize; n];
        let mut stack = vec![0usize; n];
        let mut pstack = vec![0usize; n];
        let mut visited = vec![NONE; n];

        for k in 0..n {
            let col = q[k];
            let (rows, vals) = cols.row(col);

            // Reach of the column pattern in the graph of L, in topological order.
            let mut top = n;
            for &start in rows {
                if visited[start] == k {
                    continue;
                }
                let mut head = 0usize;
                stack[0] = start;
                while head != NONE {
                    let j = stack[head];
                    let jnew = pinv[j];
                    if visited[j] != k {
                        visited[j] = k;
                        pstack[head] = if jnew == NONE { 0 } else { l.ptr[jnew] };
                    }
                    let end = if jnew == NONE { 0 } else { l.ptr[jnew + 1] };
                    let mut done = true;
                    let mut p = pstack[head];
                    while p < end {
                        let i = l.idx[p];
                        if visited[i] != k {
                            pstack[head] = p + 1;
                            head += 1;
                            stack[head] = i;
                            done = false;
                            break;
                        }
                        p += 1;
                    }
                    if done {
                        head = head.wrapping_sub(1);
                        top -= 1;
                        xi[top] = j;
                    }
                }
            }

            // Sparse triangular solve x = L \ A(:, col).
            for &i in &xi[top..] {
                x[i] = 0.0;
            }
            let mut col_max: f64 = 0.0;
            for (&i, &v) in rows.iter().zip(vals) {
                x[i] = v;
                col_max = col_max.max(v.abs());
            }
            for &j in &xi[top..] {
                let jnew = pinv[j];
                if jnew == NONE {
                    continue;
                }
                let xj = x[j];
                if xj == 0.0 {
                    continue;
                }
                for p in l.ptr[jnew] + 1..l.ptr[jnew + 1] {
                    x[l.idx[p]] -= l.val[p] * xj;
                }
            }

            // Pivot search among rows that are not yet pivotal.
            let mut ipiv = NONE;
            let mut best = -1.0;
            for &i in &xi[top..] {
                if pinv[i] == NONE {
                    let a = x[i].abs();
                    if a > best {
                        best = a;
                        ipiv = i;
                    }
                } else {
                    u.push(pinv[i], x[i]);
                }
            }
            if ipiv == NONE || !(best > 16.0 * f64::EPSILON * col_max) {
                return Err(Error::Singular { pivot: k });
            }
            if pinv[col] == NONE && x[col].abs() >= best * tol {
                ipiv = col;
            }
            let pivot = x[ipiv];
            u.push(k, pivot);
            u.close_column();
            pinv[ipiv] = k;
            l.push(ipiv, 1.0);
            for &i in &xi[top..] {
                if pinv[i] == NONE {
                    l.push(i, x[i] / pivot);
                }
                x[i] = 0.0;
            }
            l.close_column();
        }

        for i in l.idx.iter_mut() {
            *i = pinv[*i];
        }
        Ok(Self { n, l, u, pinv, q })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Stored entries of `L` and `U`, diagonals included.
    pub fn factor_nnz(&self) -> usize {
        self.l.idx.len() + self.u.idx.len()
    }

    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        if b.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: b.len(),
            });
        }
        let mut y = vec![0.0; self.n];
        for (i, &bi) in b.iter().enumerate() {
            y[self.pinv[i]] = bi;
        }
        for j in 0..self.n {
            let yj = y[j];
            if yj != 0.0 {
                for p in self.l.ptr[j] + 1..self.l.ptr[j + 1] {
                    y[self.l.idx[p]] -= self.l.val[p] * yj;
                }
            }
        }
        for j in (0..self.n).rev() {
            let last = self.u.ptr[j + 1] - 1;
            y[j] /= self.u.val[last];
            let yj = y[j];
            if yj != 0.0 {
                for p in self.u.ptr[j]..last {
                    y[self.u.idx[p]] -= self.u.val[p] * yj;
                }
            }
        }
        let mut x = vec![0.0; self.n];
        for (k, &c) in self.q.iter().enumerate() {
            x[c] = y[k];
        }
        Ok(x)
    }

    pub fn solve_many(&self, rhs: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        rhs.iter().map(|b| self.solve(b)).collect()
    }

    /// Solve, then apply up to `steps` rounds of iterative refinement against
    /// `a`. Returns the solution and its relative residual.
    pub fn solve_refined(&self, a: &CsrMatrix, b: &[f64], steps: usize) -> Result<(Vec<f64>, f64)> {
        let mut x = self.solve(b)?;
        let mut res = relative_residual(a, &x, b)?;
        for _ in 0..steps {
            if res < 1e-15 {
                break;
            }
            let ax = a.mul_vec(&x)?;
            let r: Vec<f64> = b.iter().zip(&ax).map(|(p, q)| p - q).collect();
            let dx = self.solve(&r)?;
            let trial: Vec<f64> = x.iter().zip(&dx).map(|(p, q)| p + q).collect();
            let trial_res = relative_residual(a, &trial, b)?;
            if trial_res >= res {
                break;
            }
            x = trial;
            res = trial_res;
        }
        Ok((x, res))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dense_solve(a: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
        let n = b.len();
        let mut m: Vec<Vec<f64>> = a.to_vec();
        let mut x = b.to_vec();
        for k in 0..n {
            let p = (k..n)
                .max_by(|&i, &j| m[i][k].abs().total_cmp(&m[j][k].abs()))
                .unwrap();
            m.swap(k, p);
            x.swap(k, p);
            for i in k + 1..n {
                let f = m[i][k] / m[k][k];
                for j in k..n {
                    m[i][j] -= f * m[k][j];
                }
                x[i] -= f * x[k];
            }
        }
        for k in (0..n).rev() {
            let s: f64 = (k + 1..n).map(|j| m[k][j] * x[j]).sum();
            x[k] = (x[k] - s) / m[k][k];
        }
        x
    }

    #[test]
    fn identity_and_swap() {
        let lu = SparseLu::factor(&CsrMatrix::identity(5), &LuOptions::default()).unwrap();
        assert_eq!(lu.solve(&[1.0, 2.0, 3.0, 4.0, 5.0]).unwrap(), vec![1.0, 2.0, 3.0, 4.0, 5.0]);

        let swap = CsrMatrix::from_dense(&[vec![0.0, 1.0], vec![1.0, 0.0]]);
        let lu = SparseLu::factor(&swap, &LuOptions::default()).unwrap();
        assert_eq!(lu.solve(&[3.0, 7.0]).unwrap(), vec![7.0, 3.0]);
    }

    #[test]
    fn singular_reports_pivot() {
        let a = CsrMatrix::from_dense(&[vec![1.0, 1.0], vec![1.0, 1.0]]);
        match SparseLu::factor(&a, &LuOptions::default()) {
            Err(Error::Singular { pivot }) => assert_eq!(pivot, 1),
            other => panic!("expected singular error, got {other:?}"),
        }
        let empty_col = CsrMatrix::from_dense(&[vec![1.0, 0.0], vec![2.0, 0.0]]);
        assert!(matches!(
            SparseLu::factor(&empty_col, &LuOptions::default()),
            Err(Error::Singular { pivot: 1 })
        ));
    }

    #[test]
    fn matches_dense_elimination_on_unsymmetric_matrix() {
        let n = 30;
        let mut rows = vec![vec![0.0; n]; n];
        let mut seed = 12345u64;
        let mut rnd = || {
            seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((seed >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        for i in 0..n {
            for j in 0..n {
                if (i * 7 + j * 3) % 5 == 0 || i == j {
                    rows[i][j] = rnd();
                }
            }
            rows[i][(i + 1) % n] += 0.1;
        }
        let a = CsrMatrix::from_dense(&rows);
        let b: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
        let want = dense_solve(&rows, &b);
        for ordering in [Ordering::Natural, Ordering::NestedDissection] {
            let lu = SparseLu::factor(&a, &LuOptions { ordering, pivot_threshold: 0.1 }).unwrap();
            let got = lu.solve(&b).unwrap();
            for (g, w) in got.iter().zip(&want) {
                assert!((g - w).abs() < 1e-9 * (1.0 + w.abs()), "{g} vs {w}");
            }
        }
    }

    #[test]
    fn zero_rhs_gives_zero() {
        let a = CsrMatrix::from_dense(&[vec![2.0, 1.0], vec![1.0, 3.0]]);
        let lu = SparseLu::factor(&a, &LuOptions::default()).unwrap();
        assert_eq!(lu.solve(&[0.0, 0.0]).unwrap(), vec![0.0, 0.0]);
        assert!(lu.solve(&[1.0]).is_err());
    }
}
