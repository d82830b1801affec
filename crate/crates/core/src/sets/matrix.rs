use super::{bound_rows, ConvexPart, Restriction};
use crate::conic::ConeKind;
use crate::error::{invalid, Result};
use crate::model::{AffineExpr, ConicConstraint};
use crate::numerics::{svd, sym_eig, DenseMatrix};

fn as_matrix(z: &[f64], m: usize, n: usize) -> Result<DenseMatrix> {
    DenseMatrix::new(m, n, z.to_vec())
}

/// Clips every singular value into `[1, alpha]`. The zero matrix maps to
/// the identity block.
pub fn project_bounded_sv(z: &DenseMatrix, alpha: f64) -> Result<DenseMatrix> {
    if z.max_abs() == 0.0 {
        let mut out = DenseMatrix::zeros(z.rows(), z.cols());
        for i in 0..z.rows().min(z.cols()) {
            out[(i, i)] = 1.0;
        }
        return Ok(out);
    }
    let d = svd(z)?;
    let s: Vec<f64> = d.singular_values.iter().map(|s| s.clamp(1.0, alpha)).collect();
    Ok(DenseMatrix::from_factors(&d.u, &s, &d.v))
}

/// Keeps the `k` largest singular values, each clipped at `M`.
pub fn project_rank(z: &DenseMatrix, k: usize, bound: f64) -> Result<DenseMatrix> {
    let d = svd(z)?;
    let s: Vec<f64> =
        d.singular_values.iter().enumerate().map(|(i, &s)| if i < k { s.min(bound) } else { 0.0 }).collect();
    Ok(DenseMatrix::from_factors(&d.u, &s, &d.v))
}

/// Symmetrizes, then keeps the `k` largest eigenvalues clipped into `[0, M]`.
pub fn project_sym_lowrank_psd(z: &DenseMatrix, k: usize, bound: f64) -> Result<DenseMatrix> {
    let n = z.rows();
    if z.cols() != n {
        return invalid("symmetric low-rank projection needs a square matrix");
    }
    let mut sym = DenseMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            sym[(i, j)] = 0.5 * (z[(i, j)] + z[(j, i)]);
        }
    }
    let e = sym_eig(&sym)?;
    let lam: Vec<f64> =
        e.eigenvalues.iter().enumerate().map(|(i, &l)| if i + k >= n { l.clamp(0.0, bound) } else { 0.0 }).collect();
    let out = DenseMatrix::from_factors(&e.eigenvectors, &lam, &e.eigenvectors);
    // exact symmetry
    let mut res = out.clone();
    for i in 0..n {
        for j in 0..n {
            res[(i, j)] = 0.5 * (out[(i, j)] + out[(j, i)]);
        }
    }
    Ok(res)
}

pub(super) fn bounded_sv(z: &[f64], m: usize, n: usize, alpha: f64) -> Result<Vec<f64>> {
    Ok(project_bounded_sv(&as_matrix(z, m, n)?, alpha)?.into_vec())
}

pub(super) fn rank(z: &[f64], m: usize, n: usize, k: usize, bound: f64) -> Result<Vec<f64>> {
    Ok(project_rank(&as_matrix(z, m, n)?, k, bound)?.into_vec())
}

pub(super) fn sym_lowrank_psd(z: &[f64], n: usize, k: usize, bound: f64) -> Result<Vec<f64>> {
    Ok(project_sym_lowrank_psd(&as_matrix(z, n, n)?, k, bound)?.into_vec())
}

fn frobenius(d: usize, radius: f64) -> ConicConstraint {
    ConicConstraint::soc(AffineExpr::constant(radius), (0..d).map(AffineExpr::var).collect())
}

/// `||Z||_F <= bound sqrt(count)` and `|Z_ij| <= bound`.
pub(super) fn frobenius_box_relax(m: usize, n: usize, bound: f64, count: f64) -> ConvexPart {
    ConvexPart {
        constraints: vec![bound_rows(0..m * n, -bound, bound), frobenius(m * n, bound * count.sqrt())],
        num_aux: 0,
    }
}

pub(super) fn sym_lowrank_relax(n: usize, k: usize, bound: f64) -> ConvexPart {
    let diag = bound_rows((0..n).map(|i| i * n + i), 0.0, bound);
    let off = bound_rows((0..n * n).filter(|&p| p / n != p % n), -bound, bound);
    let mut a = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let row = a.len() / 2;
            a.push((row, i * n + j, 1.0));
            a.push((row, j * n + i, -1.0));
        }
    }
    let rows = n * (n - 1) / 2;
    let mut constraints = vec![diag, off, frobenius(n * n, bound * (k as f64).sqrt())];
    if rows > 0 {
        constraints.push(ConicConstraint::new(ConeKind::Zero, a, vec![0.0; rows]));
    }
    ConvexPart { constraints, num_aux: 0 }
}

/// `Z = sum_k s_k u_k v_k'` with `s` auxiliary in `[lo, hi]`.
fn factor_span(u: &DenseMatrix, v: &DenseMatrix, cols: &[usize], lo: f64, hi: f64) -> Restriction {
    let (m, n) = (u.rows(), v.rows());
    let d = m * n;
    let mut a = Vec::new();
    for i in 0..m {
        for j in 0..n {
            let row = i * n + j;
            a.push((row, row, 1.0));
            for (t, &c) in cols.iter().enumerate() {
                let w = u[(i, c)] * v[(j, c)];
                if w != 0.0 {
                    a.push((row, d + t, -w));
                }
            }
        }
    }
    let span = ConicConstraint::new(ConeKind::Zero, a, vec![0.0; d]);
    Restriction {
        fixed: Vec::new(),
        constraints: vec![span, bound_rows(d..d + cols.len(), lo, hi)],
        num_aux: cols.len(),
    }
}

pub(super) fn bounded_sv_restrict(z: &[f64], m: usize, n: usize, alpha: f64) -> Result<Restriction> {
    if alpha == 1.0 {
        return Ok(Restriction::point(z));
    }
    let d = svd(&as_matrix(z, m, n)?)?;
    let cols: Vec<usize> = (0..m.min(n)).collect();
    Ok(factor_span(&d.u, &d.v, &cols, 1.0, alpha))
}

pub(super) fn rank_restrict(z: &[f64], m: usize, n: usize, k: usize, bound: f64) -> Result<Restriction> {
    let d = svd(&as_matrix(z, m, n)?)?;
    let cols: Vec<usize> = (0..k).collect();
    Ok(factor_span(&d.u, &d.v, &cols, -bound, bound))
}

pub(super) fn sym_lowrank_restrict(z: &[f64], n: usize, k: usize, bound: f64) -> Result<Restriction> {
    let mut sym = as_matrix(z, n, n)?;
    for i in 0..n {
        for j in 0..i {
            let avg = 0.5 * (sym[(i, j)] + sym[(j, i)]);
            sym[(i, j)] = avg;
            sym[(j, i)] = avg;
        }
    }
    let e = sym_eig(&sym)?;
    let cols: Vec<usize> = (n - k..n).collect();
    Ok(factor_span(&e.eigenvectors, &e.eigenvectors, &cols, 0.0, bound))
}
