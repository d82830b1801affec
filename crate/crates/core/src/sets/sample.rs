use rand::seq::index::sample;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use super::assignment::tour_matrix;
use super::{Kind, SetInstance};
use crate::numerics::{svd, sym_eig, DenseMatrix};

fn normals<R: Rng + ?Sized>(rng: &mut R, len: usize) -> Vec<f64> {
    (0..len).map(|_| StandardNormal.sample(rng)).collect()
}

fn uniform<R: Rng + ?Sized>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    if hi > lo {
        rng.random_range(lo..=hi)
    } else {
        lo
    }
}

/// Random `m x n` matrix with prescribed singular values on a random basis;
/// `sv` may be shorter than `min(m, n)`.
fn with_singular_values<R: Rng + ?Sized>(rng: &mut R, m: usize, n: usize, sv: &[f64]) -> Vec<f64> {
    let g = DenseMatrix::new(m, n, normals(rng, m * n)).expect("shape");
    let d = svd(&g).expect("finite");
    let mut s = vec![0.0; d.singular_values.len()];
    s[..sv.len()].copy_from_slice(sv);
    DenseMatrix::from_factors(&d.u, &s, &d.v).into_vec()
}

impl SetInstance {
    /// Draws a member of the set. The distribution is not uniform; it is
    /// meant to cover the set for testing.
    pub fn sample_member<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        match &self.kind {
            Kind::Boolean(n) => (0..*n).map(|_| f64::from(u8::from(rng.random_bool(0.5)))).collect(),
            Kind::Finite { values, n } => (0..*n).map(|_| values[rng.random_range(0..values.len())]).collect(),
            Kind::Integer { n, bound } => {
                let b = *bound as i64;
                (0..*n).map(|_| rng.random_range(-b..=b) as f64).collect()
            }
            Kind::Choose { n, k } => {
                let mut z = vec![0.0; *n];
                sample(rng, *n, *k).into_iter().for_each(|i| z[i] = 1.0);
                z
            }
            Kind::Card { n, k, bound } => {
                let s = rng.random_range(0..=*k);
                let mut z = vec![0.0; *n];
                for i in sample(rng, *n, s) {
                    z[i] = uniform(rng, -bound, *bound);
                }
                z
            }
            Kind::Quadratic(q) => {
                let (lo, hi) = q.levels();
                let d = normals(rng, self.dim);
                let t = uniform(rng, lo, hi);
                q.along(&d, t)
            }
            Kind::Annulus { n, r, outer } => {
                let d = normals(rng, *n);
                let norm = d.iter().map(|x| x * x).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
                let rad = uniform(rng, *r, *outer);
                d.iter().map(|x| x * rad / norm).collect()
            }
            Kind::BoxComplement { n, a, b } => {
                let mut z: Vec<f64> = (0..*n).map(|_| uniform(rng, -b, *b)).collect();
                let i = rng.random_range(0..*n);
                let s = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
                z[i] = s * uniform(rng, *a, *b);
                z
            }
            Kind::BoundedSv { m, n, alpha } => {
                let sv: Vec<f64> = (0..*m.min(n)).map(|_| uniform(rng, 1.0, *alpha)).collect();
                with_singular_values(rng, *m, *n, &sv)
            }
            Kind::Rank { m, n, k, bound } => {
                let r = rng.random_range(0..=*k);
                let sv: Vec<f64> = (0..r).map(|_| uniform(rng, 0.0, *bound)).collect();
                with_singular_values(rng, *m, *n, &sv)
            }
            Kind::SymLowRankPsd { n, k, bound } => {
                let g = normals(rng, n * n);
                let mut s = DenseMatrix::zeros(*n, *n);
                for i in 0..*n {
                    for j in 0..*n {
                        s[(i, j)] = 0.5 * (g[i * n + j] + g[j * n + i]);
                    }
                }
                let e = sym_eig(&s).expect("finite");
                let r = rng.random_range(0..=*k);
                let mut lam = vec![0.0; *n];
                for l in lam.iter_mut().take(r) {
                    *l = uniform(rng, 0.0, *bound);
                }
                let q = &e.eigenvectors;
                let out = DenseMatrix::from_factors(q, &lam, q);
                // exact symmetry
                let mut z = out.into_vec();
                for i in 0..*n {
                    for j in 0..i {
                        let v = 0.5 * (z[i * n + j] + z[j * n + i]);
                        z[i * n + j] = v;
                        z[j * n + i] = v;
                    }
                }
                z
            }
            Kind::Assign { m, n } => {
                let mut rows: Vec<usize> = (0..*m).collect();
                rows.shuffle(rng);
                let mut z = vec![0.0; m * n];
                for (j, &i) in rows.iter().take(*n).enumerate() {
                    z[i * n + j] = 1.0;
                }
                z
            }
            Kind::Cycle(n) => {
                let mut tour: Vec<usize> = (0..*n).collect();
                tour.shuffle(rng);
                tour_matrix(&tour)
            }
            Kind::Box { lower, upper } => lower.iter().zip(upper).map(|(l, u)| uniform(rng, *l, *u)).collect(),
            Kind::Product(parts) => parts.iter().flat_map(|p| p.sample_member(rng)).collect(),
            Kind::Union(parts) => parts[rng.random_range(0..parts.len())].sample_member(rng),
        }
    }
}
