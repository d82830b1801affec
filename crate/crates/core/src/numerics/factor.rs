use crate::error::{Error, Result};

/// Dense Cholesky factor `A = L L^T` stored row-major in the lower triangle.
#[derive(Debug, Clone)]
pub struct Cholesky {
    n: usize,
    l: Vec<f64>,
}

impl Cholesky {
    /// Factors a symmetric positive definite matrix given row-major (only the
    /// lower triangle is read).
    pub fn factor(n: usize, mut a: Vec<f64>) -> Result<Self> {
        debug_assert_eq!(a.len(), n * n);
        for i in 0..n {
            let (done, rest) = a.split_at_mut(i * n);
            let row_i = &mut rest[..n];
            for j in 0..i {
                let row_j = &done[j * n..j * n + j + 1];
                let s = row_i[j] - dot_prefix(&row_i[..j], &row_j[..j]);
                row_i[j] = s / row_j[j];
            }
            let d = row_i[i] - dot_prefix(&row_i[..i], &row_i[..i]);
            if !(d > 0.0) || !d.is_finite() {
                return Err(Error::Numerical(format!("matrix not positive definite at pivot {i}")));
            }
            row_i[i] = d.sqrt();
        }
        Ok(Self { n, l: a })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Solves `A x = b` in place.
    pub fn solve_in_place(&self, b: &mut [f64]) {
        let n = self.n;
        let l = &self.l;
        for i in 0..n {
            let s = b[i] - dot_prefix(&l[i * n..i * n + i], &b[..i]);
            b[i] = s / l[i * n + i];
        }
        for i in (0..n).rev() {
            let s = b[i] / l[i * n + i];
            b[i] = s;
            for k in 0..i {
                b[k] -= l[i * n + k] * s;
            }
        }
    }
}

/// Dot product with four independent accumulators so the loop vectorizes.
#[inline]
fn dot_prefix(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len().min(b.len());
    let (a, b) = (&a[..n], &b[..n]);
    let mut acc = [0.0; 4];
    let (ca, cb) = (a.chunks_exact(4), b.chunks_exact(4));
    let (ra, rb) = (ca.remainder(), cb.remainder());
    for (x, y) in ca.zip(cb) {
        for k in 0..4 {
            acc[k] += x[k] * y[k];
        }
    }
    let tail: f64 = ra.iter().zip(rb).map(|(x, y)| x * y).sum();
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

/// `L D L^T` factorization without pivoting, valid for quasi-definite
/// matrices `[[H, B^T], [B, -G]]` with `H`, `G` positive definite.
#[derive(Debug, Clone)]
pub struct QuasiDefiniteLdl {
    n: usize,
    l: Vec<f64>,
    d: Vec<f64>,
}

impl QuasiDefiniteLdl {
    pub fn factor(n: usize, mut a: Vec<f64>) -> Result<Self> {
        debug_assert_eq!(a.len(), n * n);
        let mut d = vec![0.0; n];
        // Column-oriented: a[i*n+j] for i>j holds L_ij * d_j during the sweep.
        let mut w = vec![0.0; n];
        for j in 0..n {
            for k in 0..j {
                w[k] = a[j * n + k] * d[k];
            }
            let dj = a[j * n + j] - dot_prefix(&a[j * n..j * n + j], &w[..j]);
            if dj.abs() < 1e-300 || !dj.is_finite() {
                return Err(Error::Numerical(format!("zero pivot at {j} in LDL^T")));
            }
            d[j] = dj;
            for i in (j + 1)..n {
                let s = a[i * n + j] - dot_prefix(&a[i * n..i * n + j], &w[..j]);
                a[i * n + j] = s / dj;
            }
        }
        Ok(Self { n, l: a, d })
    }

    pub fn solve_in_place(&self, b: &mut [f64]) {
        let n = self.n;
        let l = &self.l;
        for i in 0..n {
            b[i] -= dot_prefix(&l[i * n..i * n + i], &b[..i]);
        }
        for i in 0..n {
            b[i] /= self.d[i];
        }
        for i in (0..n).rev() {
            let s = b[i];
            for k in 0..i {
                b[k] -= l[i * n + k] * s;
            }
        }
    }
}
