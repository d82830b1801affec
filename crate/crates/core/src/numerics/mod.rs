//! Dense and sparse linear algebra plus cone primitives.
//!
//! Everything here is a pure function of its inputs. Matrix sizes in this
//! crate stay in the hundreds, so dense factorizations are used throughout.

mod cone;
mod dense;
mod eig;
mod factor;
mod sparse;
mod svd;

pub use cone::{nonneg_project, soc_project, soc_project_in_place};
pub use dense::DenseMatrix;
pub use eig::{sym_eig, SymEigDecomp};
pub use factor::{Cholesky, QuasiDefiniteLdl};
pub use sparse::{CsrMatrix, Triplet};
pub use svd::{svd, SvdDecomp};

/// Euclidean norm.
pub fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Infinity norm; zero for empty input.
pub fn norm_inf(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Squared Euclidean distance.
pub fn dist2_sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}
