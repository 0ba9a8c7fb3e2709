//! Sparse symmetric matrices and preconditioned conjugate gradients.

use crate::error::{Error, Result};
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

/// Compressed sparse rows.
#[derive(Debug, Clone)]
pub struct Csr {
    pub n: usize,
    pub row_ptr: Vec<usize>,
    pub cols: Vec<usize>,
    pub vals: Vec<f64>,
}

/// Accumulates (row, col, value) triplets, summing duplicates.
#[derive(Debug, Default)]
pub struct Triplets {
    n: usize,
    rows: Vec<Vec<(usize, f64)>>,
}

impl Triplets {
    pub fn new(n: usize) -> Triplets {
        Triplets { n, rows: vec![Vec::new(); n] }
    }

    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let row = &mut self.rows[i];
        if let Some(e) = row.iter_mut().find(|e| e.0 == j) {
            e.1 += v;
        } else {
            row.push((j, v));
        }
    }

    pub fn build(mut self) -> Csr {
        let mut row_ptr = Vec::with_capacity(self.n + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for row in self.rows.iter_mut() {
            row.sort_by_key(|e| e.0);
            for &(j, v) in row.iter() {
                cols.push(j);
                vals.push(v);
            }
            row_ptr.push(cols.len());
        }
        Csr { n: self.n, row_ptr, cols, vals }
    }
}

impl Csr {
    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        for i in 0..self.n {
            let mut s = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                s += self.vals[k] * x[self.cols[k]];
            }
            y[i] = s;
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n)
            .map(|i| {
                (self.row_ptr[i]..self.row_ptr[i + 1])
                    .find(|&k| self.cols[k] == i)
                    .map(|k| self.vals[k])
                    .unwrap_or(0.0)
            })
            .collect()
    }
}

/// Incomplete Cholesky IC(0) factor stored on the lower pattern of the matrix.
#[derive(Debug, Clone)]
pub struct Ic0 {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
    diag_pos: Vec<usize>,
}

impl Ic0 {
    /// Falls back to a diagonal shift when a pivot turns non-positive.
    pub fn new(a: &Csr) -> Ic0 {
        let mut shift = 0.0;
        loop {
            if let Some(f) = Ic0::try_factor(a, shift) {
                return f;
            }
            shift = if shift == 0.0 { 1e-3 } else { shift * 10.0 };
        }
    }

    fn try_factor(a: &Csr, shift: f64) -> Option<Ic0> {
        let n = a.n;
        let mut row_ptr = vec![0usize; n + 1];
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        let mut diag_pos = vec![0usize; n];
        for i in 0..n {
            for k in a.row_ptr[i]..a.row_ptr[i + 1] {
                let j = a.cols[k];
                if j <= i {
                    cols.push(j);
                    let mut v = a.vals[k];
                    if j == i {
                        v *= 1.0 + shift;
                        diag_pos[i] = cols.len() - 1;
                    }
                    vals.push(v);
                }
            }
            row_ptr[i + 1] = cols.len();
        }
        // row-oriented IC(0): L[i][j] = (a_ij − Σ_k L_ik L_jk)/L_jj
        for i in 0..n {
            for kk in row_ptr[i]..row_ptr[i + 1] {
                let j = cols[kk];
                // sparse dot of rows i and j over columns < j
                let mut s = vals[kk];
                let (mut p, pe) = (row_ptr[i], kk);
                let (mut q, qe) = (row_ptr[j], diag_pos[j]);
                while p < pe && q < qe {
                    match cols[p].cmp(&cols[q]) {
                        core::cmp::Ordering::Less => p += 1,
                        core::cmp::Ordering::Greater => q += 1,
                        core::cmp::Ordering::Equal => {
                            s -= vals[p] * vals[q];
                            p += 1;
                            q += 1;
                        }
                    }
                }
                if j == i {
                    if !(s > 0.0) {
                        return None;
                    }
                    vals[kk] = crate::math::sqrt(s);
                } else {
                    vals[kk] = s / vals[diag_pos[j]];
                }
            }
        }
        Some(Ic0 { n, row_ptr, cols, vals, diag_pos })
    }

    /// z = (L Lᵀ)^{-1} r
    pub fn solve(&self, r: &[f64], z: &mut [f64]) {
        let n = self.n;
        for i in 0..n {
            let mut s = r[i];
            for k in self.row_ptr[i]..self.diag_pos[i] {
                s -= self.vals[k] * z[self.cols[k]];
            }
            z[i] = s / self.vals[self.diag_pos[i]];
        }
        for i in (0..n).rev() {
            z[i] /= self.vals[self.diag_pos[i]];
            let zi = z[i];
            for k in self.row_ptr[i]..self.diag_pos[i] {
                z[self.cols[k]] -= self.vals[k] * zi;
            }
        }
    }
}

/// Preconditioned CG for SPD `a`. Returns the iteration count.
pub fn pcg(a: &Csr, b: &[f64], x: &mut [f64], rel_tol: f64, max_iter: usize) -> Result<usize> {
    let n = a.n;
    let pre = Ic0::new(a);
    let mut r = vec![0.0; n];
    a.matvec(x, &mut r);
    for i in 0..n {
        r[i] = b[i] - r[i];
    }
    let bnorm = crate::math::sqrt(dot(b, b)).max(1e-300);
    let mut z = vec![0.0; n];
    pre.solve(&r, &mut z);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];
    for it in 0..max_iter {
        if crate::math::sqrt(dot(&r, &r)) <= rel_tol * bnorm {
            return Ok(it);
        }
        a.matvec(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            return Err(Error::NonConvergence(format!("CG breakdown, pᵀAp = {pap:e}")));
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        pre.solve(&r, &mut z);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    if crate::math::sqrt(dot(&r, &r)) <= rel_tol * bnorm * 100.0 {
        return Ok(max_iter);
    }
    Err(Error::NonConvergence(format!("CG did not reach {rel_tol:e} in {max_iter} iterations")))
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Solve a tridiagonal system in place (Thomas algorithm); `a` sub, `b` main, `c` super.
pub fn tridiag(a: &[f64], b: &[f64], c: &[f64], d: &mut [f64]) -> Result<()> {
    let n = b.len();
    let mut cp = vec![0.0; n];
    let mut beta = b[0];
    if beta == 0.0 {
        return Err(Error::Degenerate("zero pivot in tridiagonal solve".into()));
    }
    d[0] /= beta;
    for i in 1..n {
        cp[i - 1] = c[i - 1] / beta;
        beta = b[i] - a[i] * cp[i - 1];
        if beta == 0.0 {
            return Err(Error::Degenerate("zero pivot in tridiagonal solve".into()));
        }
        d[i] = (d[i] - a[i] * d[i - 1]) / beta;
    }
    for i in (0..n - 1).rev() {
        d[i] -= cp[i] * d[i + 1];
    }
    Ok(())
}
