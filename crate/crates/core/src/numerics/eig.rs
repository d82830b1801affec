use super::DenseMatrix;
use crate::error::{invalid, Result};

/// Eigendecomposition `A = Q diag(eigenvalues) Q^T` of a symmetric matrix.
#[derive(Debug, Clone)]
pub struct SymEigDecomp {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// Column `k` is the eigenvector for `eigenvalues[k]`.
    pub eigenvectors: DenseMatrix,
}

impl SymEigDecomp {
    pub fn reconstruct(&self) -> DenseMatrix {
        let q = &self.eigenvectors;
        DenseMatrix::from_factors(q, &self.eigenvalues, q)
    }
}

/// Symmetric eigendecomposition by cyclic Jacobi rotations.
///
/// The input is symmetrized as `(A + A^T)/2` before iterating. Eigenvectors are
/// sign-normalized so that their largest-magnitude entry (lowest index on ties)
/// is positive, which makes the output deterministic.
pub fn sym_eig(a: &DenseMatrix) -> Result<SymEigDecomp> {
    let n = a.rows();
    if a.cols() != n {
        return invalid("sym_eig needs a square matrix");
    }
    if !a.is_finite() {
        return invalid("sym_eig: non-finite entries");
    }
    let scale = a.frobenius_norm().max(1.0);
    if a.asymmetry() > 1e-9 * scale {
        return invalid("sym_eig: matrix is not symmetric");
    }
    let mut m = a.clone();
    for i in 0..n {
        for j in 0..i {
            let avg = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = avg;
            m[(j, i)] = avg;
        }
    }
    let mut q = DenseMatrix::identity(n);
    let total_sq = m.frobenius_norm().powi(2);
    for _sweep in 0..100 {
        let mut off = 0.0;
        for i in 0..n {
            for j in 0..i {
                off += 2.0 * m[(i, j)] * m[(i, j)];
            }
        }
        if off <= 1e-30 * total_sq || off == 0.0 {
            break;
        }
        for p in 0..n {
            for r in (p + 1)..n {
                let apr = m[(p, r)];
                if apr.abs() <= 1e-300 {
                    continue;
                }
                let app = m[(p, p)];
                let arr = m[(r, r)];
                let theta = (arr - app) / (2.0 * apr);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[(k, p)];
                    let mkr = m[(k, r)];
                    m[(k, p)] = c * mkp - s * mkr;
                    m[(k, r)] = s * mkp + c * mkr;
                }
                for k in 0..n {
                    let mpk = m[(p, k)];
                    let mrk = m[(r, k)];
                    m[(p, k)] = c * mpk - s * mrk;
                    m[(r, k)] = s * mpk + c * mrk;
                }
                m[(p, r)] = 0.0;
                m[(r, p)] = 0.0;
                for k in 0..n {
                    let qkp = q[(k, p)];
                    let qkr = q[(k, r)];
                    q[(k, p)] = c * qkp - s * qkr;
                    q[(k, r)] = s * qkp + c * qkr;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(i, i)].total_cmp(&m[(j, j)]).then(i.cmp(&j)));
    let eigenvalues: Vec<f64> = order.iter().map(|&i| m[(i, i)]).collect();
    let mut vecs = DenseMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let col = q.column(src);
        let sign = sign_of_dominant(&col);
        for i in 0..n {
            vecs[(i, dst)] = sign * col[i];
        }
    }
    Ok(SymEigDecomp { eigenvalues, eigenvectors: vecs })
}

pub(crate) fn sign_of_dominant(v: &[f64]) -> f64 {
    let mut best = 0.0f64;
    let mut sign = 1.0;
    for &x in v {
        if x.abs() > best * (1.0 + 1e-12) {
            best = x.abs();
            sign = if x < 0.0 { -1.0 } else { 1.0 };
        }
    }
    sign
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_has_unit_eigenvalues() {
        let d = sym_eig(&DenseMatrix::identity(2)).unwrap();
        assert_eq!(d.eigenvalues, vec![1.0, 1.0]);
    }

    #[test]
    fn diagonal_matrix_keeps_axes() {
        let d = sym_eig(&DenseMatrix::from_diag(&[3.0, -1.0])).unwrap();
        assert_eq!(d.eigenvalues, vec![-1.0, 3.0]);
        assert_eq!(d.eigenvectors.column(0), vec![0.0, 1.0]);
        assert_eq!(d.eigenvectors.column(1), vec![1.0, 0.0]);
    }

    #[test]
    fn two_by_two_characteristic_polynomial() {
        // det([[2-l,1],[1,2-l]]) = (2-l)^2 - 1 = 0  =>  l in {1, 3}
        let a = DenseMatrix::from_rows(&[&[2.0, 1.0], &[1.0, 2.0]]);
        let d = sym_eig(&a).unwrap();
        assert!((d.eigenvalues[0] - 1.0).abs() < 1e-14);
        assert!((d.eigenvalues[1] - 3.0).abs() < 1e-14);
    }

    #[test]
    fn rejects_non_finite_and_asymmetric() {
        let a = DenseMatrix::from_rows(&[&[f64::NAN, 0.0], &[0.0, 1.0]]);
        assert!(sym_eig(&a).is_err());
        let b = DenseMatrix::from_rows(&[&[1.0, 1.0], &[0.0, 1.0]]);
        assert!(sym_eig(&b).is_err());
    }
}
