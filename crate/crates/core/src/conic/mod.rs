//! Embedded first-order solver for convex quadratic cone programs
//!
//! ```text
//! minimize    (1/2) v'Pv + q'v
//! subject to  Av + s = b,  s in K
//! ```
//!
//! where `K` is a product of zero cones, nonnegative orthants and
//! second-order cones. Second-order blocks are laid out `[t, u_1, .., u_k]`
//! meaning `||u||_2 <= t`.
//!
//! The solver is an operator-splitting method with Ruiz equilibration,
//! over-relaxation and a deterministic adaptive step size, followed by an
//! active-set polish for problems whose conic blocks are polyhedral at the
//! solution. Infeasibility and unboundedness are detected from successive
//! iterate differences and reported with certificates.

mod admm;
mod polish;
mod scaling;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::numerics::{dot, norm_inf, soc_project_in_place, CsrMatrix};

pub use admm::{detect_infeasibility, solve_cone_qp, solve_cone_qp_with};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConeKind {
    Zero,
    #[serde(rename = "nonneg")]
    NonNeg,
    Soc,
}

/// One block of the cone product.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConeBlock {
    pub kind: ConeKind,
    pub dim: usize,
}

impl ConeBlock {
    pub fn new(kind: ConeKind, dim: usize) -> Self {
        Self { kind, dim }
    }
}

/// Standard-form cone program. `p` holds the full symmetric matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConeProgram {
    pub p: CsrMatrix,
    pub q: Vec<f64>,
    pub a: CsrMatrix,
    pub b: Vec<f64>,
    pub cones: Vec<ConeBlock>,
}

impl ConeProgram {
    pub fn new(p: CsrMatrix, q: Vec<f64>, a: CsrMatrix, b: Vec<f64>, cones: Vec<ConeBlock>) -> Result<Self> {
        let cp = Self { p, q, a, b, cones };
        cp.validate()?;
        Ok(cp)
    }

    pub fn num_vars(&self) -> usize {
        self.q.len()
    }

    pub fn num_rows(&self) -> usize {
        self.b.len()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.q.len();
        if self.p.rows() != n || self.p.cols() != n {
            return invalid(format!("P is {}x{}, expected {n}x{n}", self.p.rows(), self.p.cols()));
        }
        if self.a.cols() != n || self.a.rows() != self.b.len() {
            return invalid("A dimensions do not match q and b");
        }
        let total: usize = self.cones.iter().map(|c| c.dim).sum();
        if total != self.b.len() {
            return invalid(format!("cone dims sum to {total}, but there are {} rows", self.b.len()));
        }
        if self.cones.iter().any(|c| c.kind == ConeKind::Soc && c.dim == 0) {
            return invalid("second-order cone of dimension zero");
        }
        if !self.p.is_finite() || !self.a.is_finite() || !all_finite(&self.q) || !all_finite(&self.b) {
            return invalid("non-finite problem data");
        }
        Ok(())
    }

    /// `(1/2) v'Pv + q'v`.
    pub fn objective(&self, v: &[f64]) -> f64 {
        0.5 * dot(v, &self.p.apply(v)) + dot(&self.q, v)
    }
}

fn all_finite(v: &[f64]) -> bool {
    v.iter().all(|x| x.is_finite())
}

/// Projects `v` onto the cone product in place.
pub fn project_cone(cones: &[ConeBlock], v: &mut [f64]) {
    let mut off = 0;
    for c in cones {
        let block = &mut v[off..off + c.dim];
        match c.kind {
            ConeKind::Zero => block.iter_mut().for_each(|x| *x = 0.0),
            ConeKind::NonNeg => block.iter_mut().for_each(|x| *x = x.max(0.0)),
            ConeKind::Soc => soc_project_in_place(block),
        }
        off += c.dim;
    }
}

/// Projects `v` onto the dual cone product in place.
pub fn project_dual_cone(cones: &[ConeBlock], v: &mut [f64]) {
    let mut off = 0;
    for c in cones {
        let block = &mut v[off..off + c.dim];
        match c.kind {
            ConeKind::Zero => {}
            ConeKind::NonNeg => block.iter_mut().for_each(|x| *x = x.max(0.0)),
            ConeKind::Soc => soc_project_in_place(block),
        }
        off += c.dim;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    Unbounded,
    MaxIters,
}

#[derive(Debug, Clone)]
pub struct ConicSolution {
    pub status: SolveStatus,
    pub v: Vec<f64>,
    pub y: Vec<f64>,
    pub s: Vec<f64>,
    pub primal_res: f64,
    pub dual_res: f64,
    pub gap: f64,
    pub objective: f64,
    pub iterations: usize,
    pub polished: bool,
    /// Farkas certificate (`A'y = 0`, `y` in `K*`, `b'y < 0`) when infeasible,
    /// or a recession direction when unbounded. Normalized to unit inf-norm.
    pub certificate: Option<Vec<f64>>,
}

#[derive(Debug, Clone)]
pub struct SolverSettings {
    pub eps: f64,
    pub eps_infeasible: f64,
    pub max_iter: usize,
    pub alpha: f64,
    pub sigma: f64,
    pub rho: f64,
    pub rho_eq_scale: f64,
    pub adapt_interval: usize,
    pub check_interval: usize,
    pub scaling_iters: usize,
    pub polish: bool,
    pub static_reg: f64,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            eps: 1e-6,
            eps_infeasible: 1e-6,
            max_iter: 50_000,
            alpha: 1.6,
            sigma: 1e-6,
            rho: 0.1,
            rho_eq_scale: 1e3,
            adapt_interval: 25,
            check_interval: 5,
            scaling_iters: 10,
            polish: true,
            static_reg: 1e-9,
        }
    }
}

/// Relative KKT residuals of a candidate solution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KktResiduals {
    /// `||Av + s - b||_inf / max(1, ||b||_inf)`
    pub primal: f64,
    /// `||Pv + q + A'y||_inf / max(1, ||q||_inf, ||Pv||_inf, ||A'y||_inf)`
    pub dual: f64,
    /// `|v'Pv + q'v + b'y| / max(1, |primal obj|, |dual obj|)`
    pub gap: f64,
}

impl KktResiduals {
    pub fn max(&self) -> f64 {
        self.primal.max(self.dual).max(self.gap)
    }
}

/// Recomputes the relative KKT residuals of `(v, s, y)` from scratch.
pub fn check_kkt(cp: &ConeProgram, sol: &ConicSolution) -> KktResiduals {
    kkt_residuals(cp, &sol.v, &sol.s, &sol.y)
}

pub(crate) fn kkt_residuals(cp: &ConeProgram, v: &[f64], s: &[f64], y: &[f64]) -> KktResiduals {
    let av = cp.a.apply(v);
    let pv = cp.p.apply(v);
    let aty = cp.a.apply_t(y);
    let rp: f64 = av.iter().zip(s).zip(&cp.b).fold(0.0, |m, ((a, s), b)| m.max((a + s - b).abs()));
    let rd: f64 = pv.iter().zip(&cp.q).zip(&aty).fold(0.0, |m, ((p, q), a)| m.max((p + q + a).abs()));
    let vpv = dot(v, &pv);
    let pobj = 0.5 * vpv + dot(&cp.q, v);
    let dobj = -0.5 * vpv - dot(&cp.b, y);
    let primal = rp / norm_inf(&cp.b).max(1.0);
    let dual = rd / norm_inf(&cp.q).max(norm_inf(&pv)).max(norm_inf(&aty)).max(1.0);
    let gap = (pobj - dobj).abs() / pobj.abs().max(dobj.abs()).max(1.0);
    KktResiduals { primal, dual, gap }
}
