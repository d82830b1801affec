//! Problem data, compilation to cone programs, and merit evaluation.
//!
//! A [`Problem`] is a convex quadratic objective over a flat variable vector,
//! a list of affine-in-cone constraints `A v + b in K`, and nonconvex atoms
//! pinning slices of `v` to sets from [`crate::sets`].

mod compile;
mod json;

use serde::{Deserialize, Serialize};

use crate::conic::ConeKind;
use crate::error::{invalid, Result};
use crate::numerics::{dot, norm2, Cholesky, CsrMatrix, Triplet};
use crate::sets::SetInstance;

pub use compile::{compile, compile_polish, PolishProgram};
pub use json::ProblemJson;

/// Default merit weight on the residual.
pub const DEFAULT_LAMBDA: f64 = 1e4;
/// Per-row violation below which a constraint counts as satisfied.
pub const FEAS_TOL: f64 = 1e-6;

/// `(1/2) v'Pv + q'v + r0` with `P` stored as a full symmetric matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticForm {
    pub p: CsrMatrix,
    pub q: Vec<f64>,
    pub r0: f64,
}

impl QuadraticForm {
    pub fn zero(n: usize) -> Self {
        Self { p: CsrMatrix::zeros(n, n), q: vec![0.0; n], r0: 0.0 }
    }

    pub fn linear(q: Vec<f64>) -> Self {
        let n = q.len();
        Self { p: CsrMatrix::zeros(n, n), q, r0: 0.0 }
    }

    /// Builds the form from `P` triplets; duplicates are summed.
    pub fn new(n: usize, p: &[Triplet], q: Vec<f64>, r0: f64) -> Self {
        Self { p: CsrMatrix::from_triplets(n, n, p), q, r0 }
    }

    pub fn dim(&self) -> usize {
        self.q.len()
    }

    pub fn eval(&self, v: &[f64]) -> f64 {
        0.5 * dot(v, &self.p.apply(v)) + dot(&self.q, v) + self.r0
    }
}

/// Affine scalar expression `sum_j c_j v_j + constant`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct AffineExpr {
    pub terms: Vec<(usize, f64)>,
    pub constant: f64,
}

impl AffineExpr {
    pub fn new(terms: Vec<(usize, f64)>, constant: f64) -> Self {
        Self { terms, constant }
    }

    pub fn constant(c: f64) -> Self {
        Self { terms: Vec::new(), constant: c }
    }

    pub fn var(j: usize) -> Self {
        Self { terms: vec![(j, 1.0)], constant: 0.0 }
    }
}

/// Constraint `A v + b in K` where `K` is a single cone of dimension `b.len()`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConicConstraint {
    #[serde(rename = "type")]
    pub kind: ConeKind,
    #[serde(rename = "A")]
    pub a: Vec<Triplet>,
    pub b: Vec<f64>,
}

impl ConicConstraint {
    pub fn new(kind: ConeKind, a: Vec<Triplet>, b: Vec<f64>) -> Self {
        Self { kind, a, b }
    }

    pub fn from_exprs(kind: ConeKind, exprs: &[AffineExpr]) -> Self {
        let mut a = Vec::new();
        let mut b = Vec::with_capacity(exprs.len());
        for (i, e) in exprs.iter().enumerate() {
            a.extend(e.terms.iter().map(|&(j, c)| (i, j, c)));
            b.push(e.constant);
        }
        Self { kind, a, b }
    }

    /// `sum c_j v_j <= rhs`.
    pub fn le(terms: &[(usize, f64)], rhs: f64) -> Self {
        let neg = terms.iter().map(|&(j, c)| (0, j, -c)).collect();
        Self::new(ConeKind::NonNeg, neg, vec![rhs])
    }

    /// `sum c_j v_j >= rhs`.
    pub fn ge(terms: &[(usize, f64)], rhs: f64) -> Self {
        Self::new(ConeKind::NonNeg, terms.iter().map(|&(j, c)| (0, j, c)).collect(), vec![-rhs])
    }

    /// `sum c_j v_j = rhs`.
    pub fn eq(terms: &[(usize, f64)], rhs: f64) -> Self {
        Self::new(ConeKind::Zero, terms.iter().map(|&(j, c)| (0, j, c)).collect(), vec![-rhs])
    }

    /// `||u||_2 <= t`.
    pub fn soc(t: AffineExpr, u: Vec<AffineExpr>) -> Self {
        let mut exprs = Vec::with_capacity(u.len() + 1);
        exprs.push(t);
        exprs.extend(u);
        Self::from_exprs(ConeKind::Soc, &exprs)
    }

    pub fn rows(&self) -> usize {
        self.b.len()
    }

    /// Largest column referenced, if any.
    pub fn max_index(&self) -> Option<usize> {
        self.a.iter().map(|t| t.1).max()
    }

    /// `A v + b`.
    pub fn eval(&self, v: &[f64]) -> Vec<f64> {
        let mut out = self.b.clone();
        for &(i, j, c) in &self.a {
            out[i] += c * v[j];
        }
        out
    }

    /// Exact violation: sum of row violations for linear cones, `(||u|| - t)+`
    /// for a second-order cone.
    pub fn violation(&self, v: &[f64]) -> f64 {
        self.violation_with_tol(v, 0.0)
    }

    /// Like [`Self::violation`] but ignores per-row violations `<= tol`.
    pub fn violation_with_tol(&self, v: &[f64], tol: f64) -> f64 {
        let e = self.eval(v);
        let keep = |x: f64| if x > tol { x } else { 0.0 };
        match self.kind {
            ConeKind::Zero => e.iter().map(|x| keep(x.abs())).sum(),
            ConeKind::NonNeg => e.iter().map(|x| keep(-x)).sum(),
            ConeKind::Soc => match e.split_first() {
                Some((t, u)) => keep(norm2(u) - t),
                None => 0.0,
            },
        }
    }

    fn validate(&self, n: usize) -> Result<()> {
        let m = self.b.len();
        if self.kind == ConeKind::Soc && m == 0 {
            return invalid("empty second-order cone constraint");
        }
        for &(i, j, c) in &self.a {
            if i >= m || j >= n {
                return invalid(format!("constraint entry ({i},{j}) out of range ({m} rows, {n} vars)"));
            }
            if !c.is_finite() {
                return invalid("non-finite constraint coefficient");
            }
        }
        if self.b.iter().any(|x| !x.is_finite()) {
            return invalid("non-finite constraint offset");
        }
        Ok(())
    }
}

/// A slice of the variable vector constrained to a nonconvex set.
#[derive(Debug, Clone)]
pub struct NonconvexAtom {
    pub set: SetInstance,
    pub indices: Vec<usize>,
}

impl NonconvexAtom {
    pub fn new(set: SetInstance, indices: Vec<usize>) -> Self {
        Self { set, indices }
    }

    pub fn gather(&self, v: &[f64]) -> Vec<f64> {
        self.indices.iter().map(|&i| v[i]).collect()
    }

    pub fn scatter(&self, z: &[f64], v: &mut [f64]) {
        for (&i, &x) in self.indices.iter().zip(z) {
            v[i] = x;
        }
    }
}

#[derive(Debug, Clone)]
pub struct Problem {
    num_vars: usize,
    objective: QuadraticForm,
    constraints: Vec<ConicConstraint>,
    atoms: Vec<NonconvexAtom>,
}

impl Problem {
    pub fn new(
        num_vars: usize,
        objective: QuadraticForm,
        constraints: Vec<ConicConstraint>,
        atoms: Vec<NonconvexAtom>,
    ) -> Result<Self> {
        let p = Self { num_vars, objective, constraints, atoms };
        p.validate()?;
        Ok(p)
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn objective_form(&self) -> &QuadraticForm {
        &self.objective
    }

    pub fn constraints(&self) -> &[ConicConstraint] {
        &self.constraints
    }

    pub fn atoms(&self) -> &[NonconvexAtom] {
        &self.atoms
    }

    /// Total dimension of all atoms.
    pub fn atom_dim(&self) -> usize {
        self.atoms.iter().map(|a| a.indices.len()).sum()
    }

    fn validate(&self) -> Result<()> {
        let n = self.num_vars;
        let f = &self.objective;
        if f.q.len() != n || f.p.rows() != n || f.p.cols() != n {
            return invalid("objective dimension does not match the variable count");
        }
        if !f.p.is_finite() || f.q.iter().any(|x| !x.is_finite()) || !f.r0.is_finite() {
            return invalid("non-finite objective data");
        }
        check_psd(&f.p)?;
        for c in &self.constraints {
            c.validate(n)?;
        }
        let mut owner = vec![false; n];
        for atom in &self.atoms {
            if atom.indices.len() != atom.set.dim() {
                return invalid(format!(
                    "atom has {} indices but its set has dimension {}",
                    atom.indices.len(),
                    atom.set.dim()
                ));
            }
            for &i in &atom.indices {
                if i >= n {
                    return invalid(format!("atom index {i} out of range"));
                }
                if owner[i] {
                    return invalid(format!("variable {i} belongs to more than one atom"));
                }
                owner[i] = true;
            }
        }
        Ok(())
    }

    pub fn objective(&self, v: &[f64]) -> f64 {
        self.objective.eval(v)
    }

    /// Collects the atom coordinates of `v` in atom order.
    pub fn gather_atoms(&self, v: &[f64]) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.atom_dim());
        for a in &self.atoms {
            out.extend(a.indices.iter().map(|&i| v[i]));
        }
        out
    }

    /// Writes atom coordinates `z` (atom order) into `v`.
    pub fn scatter_atoms(&self, z: &[f64], v: &mut [f64]) {
        let mut off = 0;
        for a in &self.atoms {
            let d = a.indices.len();
            a.scatter(&z[off..off + d], v);
            off += d;
        }
    }

    /// Projects atom coordinates `z` (atom order) onto each atom's set.
    pub fn project_atoms(&self, z: &[f64]) -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(z.len());
        let mut off = 0;
        for a in &self.atoms {
            let d = a.indices.len();
            out.extend(a.set.project(&z[off..off + d])?);
            off += d;
        }
        Ok(out)
    }
}

fn check_psd(p: &CsrMatrix) -> Result<()> {
    let n = p.rows();
    if n == 0 || p.nnz() == 0 {
        return Ok(());
    }
    let dense = p.to_dense();
    let scale = dense.max_abs().max(1.0);
    if dense.asymmetry() > 1e-8 * scale {
        return invalid("objective matrix P is not symmetric");
    }
    let mut a = dense.into_vec();
    for i in 0..n {
        a[i * n + i] += 1e-8 * scale;
    }
    Cholesky::factor(n, a).map_err(|_| crate::Error::InvalidInput("objective matrix P is not PSD".into()))?;
    Ok(())
}

/// Exact constraint residual: zero iff every constraint holds.
pub fn residual_eval(p: &Problem, v: &[f64]) -> f64 {
    p.constraints.iter().map(|c| c.violation(v)).fold(0.0, |a, b| a + b)
}

/// `objective(v) + lambda * residual(v)`.
pub fn merit_eval(p: &Problem, v: &[f64], lambda: f64) -> f64 {
    p.objective(v) + lambda * residual_eval(p, v)
}

/// A full variable vector with cached objective, residual and merit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub v: Vec<f64>,
    pub objective_value: f64,
    /// Residual with per-row violations up to [`FEAS_TOL`] treated as zero.
    pub residual: f64,
    pub merit: f64,
}

impl Candidate {
    pub fn evaluate(p: &Problem, v: Vec<f64>, lambda: f64) -> Self {
        let objective_value = p.objective(&v);
        let residual = p.constraints.iter().map(|c| c.violation_with_tol(&v, FEAS_TOL)).fold(0.0, |a, b| a + b);
        Self { v, objective_value, residual, merit: objective_value + lambda * residual }
    }

    pub fn is_feasible(&self) -> bool {
        self.residual == 0.0
    }
}
