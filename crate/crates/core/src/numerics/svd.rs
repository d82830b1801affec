use super::eig::sign_of_dominant;
use super::{dot, norm2, DenseMatrix};
use crate::error::{invalid, Result};

/// Thin singular value decomposition `Z = U diag(singular_values) V^T`.
///
/// For an `m x n` input with `p = min(m, n)`, `u` is `m x p`, `v` is `n x p`
/// and both have orthonormal columns, including columns belonging to zero
/// singular values.
#[derive(Debug, Clone)]
pub struct SvdDecomp {
    pub u: DenseMatrix,
    /// Nonnegative, descending.
    pub singular_values: Vec<f64>,
    pub v: DenseMatrix,
}

impl SvdDecomp {
    pub fn reconstruct(&self) -> DenseMatrix {
        DenseMatrix::from_factors(&self.u, &self.singular_values, &self.v)
    }
}

/// One-sided (Hestenes) Jacobi SVD.
pub fn svd(z: &DenseMatrix) -> Result<SvdDecomp> {
    if !z.is_finite() {
        return invalid("svd: non-finite entries");
    }
    if z.rows() < z.cols() {
        let t = svd_tall(&z.transpose());
        return Ok(SvdDecomp { u: t.v, singular_values: t.singular_values, v: t.u });
    }
    Ok(svd_tall(z))
}

fn svd_tall(z: &DenseMatrix) -> SvdDecomp {
    let m = z.rows();
    let n = z.cols();
    // Work column-wise: cols[j] is column j of the evolving matrix.
    let mut cols: Vec<Vec<f64>> = (0..n).map(|j| z.column(j)).collect();
    let mut vcols: Vec<Vec<f64>> = (0..n)
        .map(|j| {
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            e
        })
        .collect();
    for _sweep in 0..80 {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let alpha = dot(&cols[p], &cols[p]);
                let beta = dot(&cols[q], &cols[q]);
                let gamma = dot(&cols[p], &cols[q]);
                if gamma == 0.0 || gamma.abs() <= 1e-15 * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = if zeta == 0.0 { 1.0 } else { zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt()) };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate(&mut cols, p, q, c, s);
                rotate(&mut vcols, p, q, c, s);
            }
        }
        if !rotated {
            break;
        }
    }
    let mut sv: Vec<(f64, usize)> = cols.iter().enumerate().map(|(j, c)| (norm2(c), j)).collect();
    sv.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    let smax = sv.first().map_or(0.0, |s| s.0);
    let tiny = 1e-13 * smax.max(f64::MIN_POSITIVE);
    let mut u_cols: Vec<Vec<f64>> = Vec::with_capacity(n);
    let mut v_out: Vec<Vec<f64>> = Vec::with_capacity(n);
    let mut sigma = Vec::with_capacity(n);
    let mut pending = Vec::new();
    for &(s, j) in &sv {
        let mut vj = vcols[j].clone();
        if s > tiny {
            let mut uj: Vec<f64> = cols[j].iter().map(|x| x / s).collect();
            let sign = sign_of_dominant(&uj);
            uj.iter_mut().for_each(|x| *x *= sign);
            vj.iter_mut().for_each(|x| *x *= sign);
            u_cols.push(uj);
        } else {
            pending.push(u_cols.len());
            u_cols.push(Vec::new());
        }
        v_out.push(vj);
        sigma.push(s);
    }
    // Complete the left basis for (numerically) zero singular values.
    for &slot in &pending {
        let mut e = 0;
        loop {
            let mut cand = vec![0.0; m];
            cand[e] = 1.0;
            for other in u_cols.iter().filter(|c| !c.is_empty()) {
                let proj = dot(&cand, other);
                cand.iter_mut().zip(other).for_each(|(c, o)| *c -= proj * o);
            }
            let nrm = norm2(&cand);
            e += 1;
            if nrm > 1e-6 {
                cand.iter_mut().for_each(|c| *c /= nrm);
                u_cols[slot] = cand;
                break;
            }
            assert!(e < m, "basis completion failed");
        }
    }
    let mut u = DenseMatrix::zeros(m, n);
    let mut v = DenseMatrix::zeros(n, n);
    for k in 0..n {
        for i in 0..m {
            u[(i, k)] = u_cols[k][i];
        }
        for i in 0..n {
            v[(i, k)] = v_out[k][i];
        }
    }
    SvdDecomp { u, singular_values: sigma, v }
}

fn rotate(cols: &mut [Vec<f64>], p: usize, q: usize, c: f64, s: f64) {
    let (lo, hi) = cols.split_at_mut(q);
    let a = &mut lo[p];
    let b = &mut hi[0];
    for (x, y) in a.iter_mut().zip(b.iter_mut()) {
        let xp = *x;
        let yq = *y;
        *x = c * xp - s * yq;
        *y = s * xp + c * yq;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_singular_values() {
        let d = svd(&DenseMatrix::from_diag(&[3.0, 1.0])).unwrap();
        assert_eq!(d.singular_values, vec![3.0, 1.0]);
    }

    #[test]
    fn zero_matrix() {
        let d = svd(&DenseMatrix::zeros(2, 2)).unwrap();
        assert_eq!(d.singular_values, vec![0.0, 0.0]);
        let utu = d.u.transpose().matmul(&d.u);
        assert!(utu.sub(&DenseMatrix::identity(2)).max_abs() < 1e-12);
    }

    #[test]
    fn singular_values_from_gram_matrix() {
        // Z^T Z = diag(1, 4)  =>  sigma = (2, 1)
        let z = DenseMatrix::from_rows(&[&[0.0, 2.0], &[1.0, 0.0]]);
        let d = svd(&z).unwrap();
        assert!((d.singular_values[0] - 2.0).abs() < 1e-14);
        assert!((d.singular_values[1] - 1.0).abs() < 1e-14);
        assert!(d.reconstruct().sub(&z).max_abs() < 1e-14);
    }

    #[test]
    fn wide_matrix() {
        let z = DenseMatrix::from_rows(&[&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0]]);
        let d = svd(&z).unwrap();
        assert_eq!(d.u.rows(), 2);
        assert_eq!(d.v.rows(), 3);
        assert!(d.reconstruct().sub(&z).max_abs() < 1e-12);
    }
}
