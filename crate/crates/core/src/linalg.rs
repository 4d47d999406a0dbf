//! Compressed sparse rows and the Krylov iterations used by the solvers.

use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct CsrMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl CsrMatrix {
    /// Build from per-row entry lists; duplicate columns are summed.
    pub fn from_rows(rows: Vec<Vec<(usize, f64)>>) -> Self {
        let n = rows.len();
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for mut row in rows {
            row.sort_by_key(|&(c, _)| c);
            let mut last: Option<usize> = None;
            for (c, v) in row {
                if last == Some(c) {
                    *vals.last_mut().unwrap() += v;
                } else {
                    cols.push(c);
                    vals.push(v);
                    last = Some(c);
                }
            }
            row_ptr.push(cols.len());
        }
        Self {
            n,
            row_ptr,
            cols,
            vals,
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn mul_into(&self, x: &[f64], y: &mut [f64]) {
        for (row, out) in y.iter_mut().enumerate() {
            let (lo, hi) = (self.row_ptr[row], self.row_ptr[row + 1]);
            *out = self.cols[lo..hi]
                .iter()
                .zip(&self.vals[lo..hi])
                .map(|(&c, &v)| v * x[c])
                .sum();
        }
    }

    pub fn mul(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        self.mul_into(x, &mut y);
        y
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        let (lo, hi) = (self.row_ptr[row], self.row_ptr[row + 1]);
        self.cols[lo..hi]
            .binary_search(&col)
            .map(|k| self.vals[lo + k])
            .unwrap_or(0.0)
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    /// Largest |A_ij - A_ji| over stored entries.
    pub fn asymmetry(&self) -> f64 {
        let mut worst = 0.0f64;
        for row in 0..self.n {
            for k in self.row_ptr[row]..self.row_ptr[row + 1] {
                let col = self.cols[k];
                worst = worst.max((self.vals[k] - self.get(col, row)).abs());
            }
        }
        worst
    }
}

#[derive(Clone, Copy, Debug)]
pub struct KrylovOptions {
    /// Relative residual target ||b - Ax|| <= rel_tol * ||b||.
    pub rel_tol: f64,
    pub max_iter: usize,
}

impl Default for KrylovOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            max_iter: 20_000,
        }
    }
}

#[derive(Clone, Debug)]
pub struct KrylovOutcome {
    pub x: Vec<f64>,
    pub iterations: usize,
    pub relative_residual: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn jacobi(diag: &[f64]) -> Result<Vec<f64>> {
    diag.iter()
        .enumerate()
        .map(|(i, &d)| {
            if d == 0.0 || !d.is_finite() {
                Err(Error::LinearSolver(format!("zero or non-finite diagonal at row {i}")))
            } else {
                Ok(1.0 / d)
            }
        })
        .collect()
}

/// Jacobi-preconditioned conjugate gradients; `a` must be symmetric positive
/// definite.
pub fn conjugate_gradient(a: &CsrMatrix, b: &[f64], opts: KrylovOptions) -> Result<KrylovOutcome> {
    let n = a.dim();
    let inv_diag = jacobi(&a.diagonal())?;
    let b_norm = norm(b);
    let mut x = vec![0.0; n];
    if b_norm == 0.0 {
        return Ok(KrylovOutcome {
            x,
            iterations: 0,
            relative_residual: 0.0,
        });
    }
    let mut r = b.to_vec();
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(ri, di)| ri * di).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];
    for it in 0..opts.max_iter {
        let rel = norm(&r) / b_norm;
        if rel <= opts.rel_tol {
            return Ok(KrylovOutcome {
                x,
                iterations: it,
                relative_residual: rel,
            });
        }
        a.mul_into(&p, &mut ap);
        let pap = dot(&p, &ap);
        if pap <= 0.0 {
            return Err(Error::LinearSolver(
                "matrix is not positive definite along a search direction".into(),
            ));
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(Error::LinearSolver(format!(
        "CG did not reach {:e} in {} iterations (relative residual {:e})",
        opts.rel_tol,
        opts.max_iter,
        norm(&r) / b_norm
    )))
}

/// Right-preconditioned BiCGSTAB with a Jacobi preconditioner, for the
/// nearly-symmetric Newton systems.
pub fn bicgstab(a: &CsrMatrix, b: &[f64], opts: KrylovOptions) -> Result<KrylovOutcome> {
    let n = a.dim();
    let inv_diag = jacobi(&a.diagonal())?;
    let b_norm = norm(b);
    let mut x = vec![0.0; n];
    if b_norm == 0.0 {
        return Ok(KrylovOutcome {
            x,
            iterations: 0,
            relative_residual: 0.0,
        });
    }
    let precondition = |v: &[f64]| -> Vec<f64> { v.iter().zip(&inv_diag).map(|(a, d)| a * d).collect() };

    let mut r = b.to_vec();
    let r_hat = r.clone();
    let mut rho = 1.0;
    let mut alpha = 1.0;
    let mut omega = 1.0;
    let mut v = vec![0.0; n];
    let mut p = vec![0.0; n];
    let mut s = vec![0.0; n];
    let mut t = vec![0.0; n];

    for it in 0..opts.max_iter {
        let rel = norm(&r) / b_norm;
        if rel <= opts.rel_tol {
            return Ok(KrylovOutcome {
                x,
                iterations: it,
                relative_residual: rel,
            });
        }
        let rho_new = dot(&r_hat, &r);
        if rho_new.abs() < 1e-300 {
            return Err(Error::LinearSolver("BiCGSTAB breakdown (rho = 0)".into()));
        }
        let beta = (rho_new / rho) * (alpha / omega);
        rho = rho_new;
        for i in 0..n {
            p[i] = r[i] + beta * (p[i] - omega * v[i]);
        }
        let p_hat = precondition(&p);
        a.mul_into(&p_hat, &mut v);
        let denom = dot(&r_hat, &v);
        if denom.abs() < 1e-300 {
            return Err(Error::LinearSolver("BiCGSTAB breakdown (r_hat . v = 0)".into()));
        }
        alpha = rho / denom;
        for i in 0..n {
            s[i] = r[i] - alpha * v[i];
        }
        if norm(&s) / b_norm <= opts.rel_tol {
            for i in 0..n {
                x[i] += alpha * p_hat[i];
            }
            return Ok(KrylovOutcome {
                x,
                iterations: it + 1,
                relative_residual: norm(&s) / b_norm,
            });
        }
        let s_hat = precondition(&s);
        a.mul_into(&s_hat, &mut t);
        let tt = dot(&t, &t);
        if tt == 0.0 {
            return Err(Error::LinearSolver("BiCGSTAB breakdown (t = 0)".into()));
        }
        omega = dot(&t, &s) / tt;
        for i in 0..n {
            x[i] += alpha * p_hat[i] + omega * s_hat[i];
            r[i] = s[i] - omega * t[i];
        }
        if omega == 0.0 {
            return Err(Error::LinearSolver("BiCGSTAB breakdown (omega = 0)".into()));
        }
    }
    // One last look before giving up: the true residual may already be fine.
    let ax = a.mul(&x);
    let rel = norm(&b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect::<Vec<_>>()) / b_norm;
    Err(Error::LinearSolver(format!(
        "BiCGSTAB did not reach {:e} in {} iterations (relative residual {:e})",
        opts.rel_tol, opts.max_iter, rel
    )))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplace_1d(n: usize) -> CsrMatrix {
        let rows = (0..n)
            .map(|i| {
                let mut row = vec![(i, 2.0)];
                if i > 0 {
                    row.push((i - 1, -1.0));
                }
                if i + 1 < n {
                    row.push((i + 1, -1.0));
                }
                row
            })
            .collect();
        CsrMatrix::from_rows(rows)
    }

    #[test]
    fn duplicates_are_summed() {
        let a = CsrMatrix::from_rows(vec![vec![(0, 1.0), (0, 2.0)], vec![(1, 4.0), (0, -1.0)]]);
        assert_eq!(a.get(0, 0), 3.0);
        assert_eq!(a.get(1, 0), -1.0);
        assert_eq!(a.nnz(), 3);
        assert_eq!(a.asymmetry(), 1.0);
    }

    #[test]
    fn cg_solves_tridiagonal() {
        let a = laplace_1d(50);
        let x_true: Vec<f64> = (0..50).map(|i| (i as f64 * 0.3).sin()).collect();
        let b = a.mul(&x_true);
        let out = conjugate_gradient(&a, &b, KrylovOptions::default()).unwrap();
        for (x, y) in out.x.iter().zip(&x_true) {
            assert!((x - y).abs() < 1e-8);
        }
    }

    #[test]
    fn bicgstab_solves_nonsymmetric() {
        let n = 40;
        let rows = (0..n)
            .map(|i| {
                let mut row = vec![(i, 3.0)];
                if i > 0 {
                    row.push((i - 1, -1.4));
                }
                if i + 1 < n {
                    row.push((i + 1, -0.6));
                }
                row
            })
            .collect();
        let a = CsrMatrix::from_rows(rows);
        let x_true: Vec<f64> = (0..n).map(|i| 1.0 + i as f64 / n as f64).collect();
        let b = a.mul(&x_true);
        let out = bicgstab(&a, &b, KrylovOptions::default()).unwrap();
        for (x, y) in out.x.iter().zip(&x_true) {
            assert!((x - y).abs() < 1e-8);
        }
    }
}
