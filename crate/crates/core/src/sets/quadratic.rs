use super::{bound_rows, ConvexPart, Restriction};
use crate::error::{invalid, Error, Result};
use crate::model::{AffineExpr, ConicConstraint};
use crate::numerics::{norm2, sym_eig, DenseMatrix, SymEigDecomp, Triplet};

const BISECT_STEPS: usize = 200;

/// `{z : alpha <= z'Az + 2b'z <= beta}`, stored in centered eigen-coordinates
/// `w = Q'(z - c)` with `c = -A^{-1} b`, where the constraint reads
/// `lo <= sum lambda_i w_i^2 <= hi`.
#[derive(Debug, Clone)]
pub(crate) struct QuadraticSet {
    eig: SymEigDecomp,
    center: Vec<f64>,
    lo: f64,
    hi: f64,
}

impl QuadraticSet {
    pub fn new(a: &[Triplet], b: &[f64], alpha: f64, beta: f64) -> Result<Self> {
        let n = b.len();
        if n == 0 {
            return invalid("quadratic set needs n >= 1");
        }
        let mut m = DenseMatrix::zeros(n, n);
        for &(i, j, v) in a {
            if i >= n || j >= n {
                return invalid("quadratic set matrix entry out of range");
            }
            m[(i, j)] += v;
        }
        Self::from_dense(&m, b, alpha, beta)
    }

    pub fn from_dense(a: &DenseMatrix, b: &[f64], alpha: f64, beta: f64) -> Result<Self> {
        let n = b.len();
        if a.rows() != n || a.cols() != n {
            return invalid("quadratic set matrix has the wrong shape");
        }
        if !alpha.is_finite() || !beta.is_finite() || b.iter().any(|x| !x.is_finite()) {
            return invalid("quadratic set parameters must be finite");
        }
        let eig = sym_eig(a)?;
        let lmax = eig.eigenvalues[n - 1];
        if !(eig.eigenvalues[0] > 1e-12 * lmax.max(1.0)) {
            return invalid("quadratic set matrix must be positive definite");
        }
        let qb = eig.eigenvectors.transpose().matvec(b);
        let offset: f64 = qb.iter().zip(&eig.eigenvalues).map(|(x, l)| x * x / l).sum();
        let scaled: Vec<f64> = qb.iter().zip(&eig.eigenvalues).map(|(x, l)| -x / l).collect();
        let center = eig.eigenvectors.matvec(&scaled);
        let (lo, hi) = (alpha + offset, beta + offset);
        let tol = 1e-9 * offset.abs().max(1.0);
        if beta < alpha || lo < -tol {
            return invalid("quadratic set needs beta >= alpha >= -b'A^{-1}b");
        }
        Ok(Self { eig, center, lo: lo.max(0.0), hi: hi.max(0.0) })
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    fn whiten(&self, z: &[f64]) -> Vec<f64> {
        let y: Vec<f64> = z.iter().zip(&self.center).map(|(a, c)| a - c).collect();
        self.eig.eigenvectors.transpose().matvec(&y)
    }

    fn unwhiten(&self, w: &[f64]) -> Vec<f64> {
        let y = self.eig.eigenvectors.matvec(w);
        y.iter().zip(&self.center).map(|(a, c)| a + c).collect()
    }

    fn level(&self, w: &[f64]) -> f64 {
        w.iter().zip(&self.eig.eigenvalues).map(|(x, l)| l * x * x).sum()
    }

    /// Member on the level set `t` along direction `d` (in eigen-coordinates).
    pub fn along(&self, d: &[f64], t: f64) -> Vec<f64> {
        let g = self.level(d);
        let s = if g > 0.0 { (t / g).sqrt() } else { 0.0 };
        self.unwhiten(&d.iter().map(|x| x * s).collect::<Vec<_>>())
    }

    /// Bounds on `sum lambda_i w_i^2`.
    pub fn levels(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    pub fn project(&self, z: &[f64]) -> Result<Vec<f64>> {
        let w = self.whiten(z);
        let g = self.level(&w);
        if g >= self.lo && g <= self.hi {
            return Ok(z.to_vec());
        }
        let lam = &self.eig.eigenvalues;
        let (mut wp, target) = if g > self.hi {
            if self.hi == 0.0 {
                return Ok(self.center.clone());
            }
            let shrink = |mu: f64| -> Vec<f64> { w.iter().zip(lam).map(|(x, l)| x / (1.0 + mu * l)).collect() };
            let mut hi_mu = 1.0 / lam[0];
            let mut doublings = 0;
            while self.level(&shrink(hi_mu)) > self.hi {
                hi_mu *= 2.0;
                doublings += 1;
                if doublings > 2000 {
                    return Err(Error::Numerical("quadratic projection: no bracket".into()));
                }
            }
            let mu = bisect(0.0, hi_mu, |mu| self.level(&shrink(mu)) > self.hi)?;
            (shrink(mu), self.hi)
        } else {
            (self.grow(&w)?, self.lo)
        };
        let gp = self.level(&wp);
        if gp > 0.0 {
            let s = (target / gp).sqrt();
            wp.iter_mut().for_each(|x| *x *= s);
        }
        Ok(self.unwhiten(&wp))
    }

    /// Nearest point with level at least `lo` from a point below it.
    fn grow(&self, w: &[f64]) -> Result<Vec<f64>> {
        let lam = &self.eig.eigenvalues;
        let n = w.len();
        let lmax = lam[n - 1];
        let top: Vec<bool> = lam.iter().map(|&l| l >= lmax * (1.0 - 1e-12)).collect();
        let expand = |mu: f64| -> Vec<f64> {
            w.iter().zip(lam).map(|(&x, &l)| if x == 0.0 { 0.0 } else { x / (1.0 - mu * l) }).collect()
        };
        let pole = 1.0 / lmax;
        let top_mass: f64 = (0..n).filter(|&i| top[i]).map(|i| w[i] * w[i]).sum();
        if top_mass == 0.0 {
            let limit = expand(pole);
            let h_lim: f64 = (0..n).filter(|&i| !top[i]).map(|i| lam[i] * limit[i] * limit[i]).sum();
            if h_lim < self.lo {
                let mut out: Vec<f64> = (0..n).map(|i| if top[i] { 0.0 } else { limit[i] }).collect();
                let j = (0..n).find(|&i| top[i]).expect("nonempty top eigenspace");
                out[j] = ((self.lo - h_lim) / lmax).sqrt();
                return Ok(out);
            }
        }
        let mu = bisect(0.0, pole, |mu| {
            let v = expand(mu);
            v.iter().all(|x| x.is_finite()) && self.level(&v) < self.lo
        })?;
        let v = expand(mu);
        if v.iter().all(|x| x.is_finite()) {
            Ok(v)
        } else {
            Err(Error::Numerical("quadratic projection: multiplier at the pole".into()))
        }
    }

    fn ellipsoid(&self) -> ConicConstraint {
        let n = self.dim();
        let q = &self.eig.eigenvectors;
        let u = (0..n)
            .map(|i| {
                let s = self.eig.eigenvalues[i].sqrt();
                let terms: Vec<(usize, f64)> = (0..n).map(|j| (j, s * q[(j, i)])).collect();
                let c = -(0..n).map(|j| s * q[(j, i)] * self.center[j]).sum::<f64>();
                AffineExpr::new(terms, c)
            })
            .collect();
        ConicConstraint::soc(AffineExpr::constant(self.hi.sqrt()), u)
    }

    pub fn relax(&self) -> ConvexPart {
        ConvexPart { constraints: vec![self.ellipsoid()], num_aux: 0 }
    }

    pub fn restrict(&self, z: &[f64]) -> Restriction {
        if self.lo <= 1e-12 * self.hi.max(1.0) {
            return Restriction { fixed: Vec::new(), constraints: vec![self.ellipsoid()], num_aux: 0 };
        }
        let w = self.whiten(z);
        let na = self.level(&w).sqrt();
        if na == 0.0 || self.lo == self.hi {
            return Restriction::point(z);
        }
        // <z - c, z~ - c>_A >= sqrt(lo) ||z~ - c||_A, normalized by ||z~ - c||_A
        let lw: Vec<f64> = w.iter().zip(&self.eig.eigenvalues).map(|(x, l)| l * x / na).collect();
        let g = self.eig.eigenvectors.matvec(&lw);
        let terms: Vec<(usize, f64)> = g.iter().copied().enumerate().collect();
        let c = -g.iter().zip(&self.center).map(|(a, b)| a * b).sum::<f64>() - self.lo.sqrt();
        let cut = ConicConstraint::from_exprs(crate::conic::ConeKind::NonNeg, &[AffineExpr::new(terms, c)]);
        Restriction { fixed: Vec::new(), constraints: vec![cut, self.ellipsoid()], num_aux: 0 }
    }

    pub fn box_bound(&self) -> f64 {
        let n = self.dim();
        let q = &self.eig.eigenvectors;
        (0..n)
            .map(|i| {
                let inv_ii: f64 = (0..n).map(|k| q[(i, k)] * q[(i, k)] / self.eig.eigenvalues[k]).sum();
                self.center[i].abs() + (self.hi * inv_ii).sqrt()
            })
            .fold(0.0, f64::max)
            * (1.0 + 1e-12)
    }
}

/// Finds the boundary of a monotone predicate on `[lo, hi]` (`pred(lo)` true,
/// `pred(hi)` false) and returns the first point where it is false.
fn bisect(mut lo: f64, mut hi: f64, pred: impl Fn(f64) -> bool) -> Result<f64> {
    for _ in 0..BISECT_STEPS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if pred(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if hi - lo > 1e-9 * hi.abs().max(1.0) {
        return Err(Error::Numerical("bisection did not converge".into()));
    }
    Ok(hi)
}

/// Projection onto `{z : alpha <= z'Az + 2b'z <= beta}` for positive definite `A`.
pub fn project_quadratic(a: &DenseMatrix, b: &[f64], alpha: f64, beta: f64, z: &[f64]) -> Result<Vec<f64>> {
    if z.len() != b.len() {
        return invalid("point has the wrong dimension");
    }
    QuadraticSet::from_dense(a, b, alpha, beta)?.project(z)
}

/// Radial projection onto `{z : r <= ||z|| <= R}`; the origin maps to `r e_1`.
pub fn project_annulus(z: &[f64], r: f64, outer: f64) -> Vec<f64> {
    let nz = norm2(z);
    if nz > outer {
        z.iter().map(|x| x * outer / nz).collect()
    } else if nz < r {
        if nz == 0.0 {
            let mut out = vec![0.0; z.len()];
            out[0] = r;
            out
        } else {
            z.iter().map(|x| x * r / nz).collect()
        }
    } else {
        z.to_vec()
    }
}

pub(super) fn ball_part(n: usize, radius: f64) -> ConvexPart {
    let u = (0..n).map(AffineExpr::var).collect();
    ConvexPart { constraints: vec![ConicConstraint::soc(AffineExpr::constant(radius), u)], num_aux: 0 }
}

pub(super) fn annulus_restrict(z: &[f64], n: usize, r: f64, outer: f64) -> Restriction {
    let ball = ball_part(n, outer).constraints;
    if r == 0.0 {
        return Restriction { fixed: Vec::new(), constraints: ball, num_aux: 0 };
    }
    let nz = norm2(z);
    if r == outer || nz == 0.0 {
        return Restriction::point(z);
    }
    let terms: Vec<(usize, f64)> = z.iter().map(|x| x / nz).enumerate().collect();
    let mut constraints = vec![ConicConstraint::ge(&terms, r)];
    constraints.extend(ball);
    Restriction { fixed: Vec::new(), constraints, num_aux: 0 }
}

fn argmax_abs(z: &[f64]) -> usize {
    let mut best = 0;
    for i in 1..z.len() {
        if z[i].abs() > z[best].abs() {
            best = i;
        }
    }
    best
}

fn sign(x: f64) -> f64 {
    if x < 0.0 {
        -1.0
    } else {
        1.0
    }
}

/// Projection onto `{z : a <= ||z||_inf <= b}`: clip to `[-b, b]`, then if
/// no entry reaches magnitude `a`, raise the largest one (ties to the lowest
/// index, sign of zero taken positive).
pub fn project_box_complement(z: &[f64], a: f64, b: f64) -> Vec<f64> {
    let mut out: Vec<f64> = z.iter().map(|x| x.clamp(-b, b)).collect();
    let i = argmax_abs(&out);
    if out[i].abs() < a {
        out[i] = sign(out[i]) * a;
    }
    out
}

fn face(n: usize, i: usize, s: f64, a: f64, b: f64) -> Restriction {
    Restriction {
        fixed: Vec::new(),
        constraints: vec![ConicConstraint::ge(&[(i, s)], a), bound_rows(0..n, -b, b)],
        num_aux: 0,
    }
}

pub(super) fn box_complement_restrict(z: &[f64], n: usize, a: f64, b: f64) -> Restriction {
    let i = argmax_abs(z);
    face(n, i, sign(z[i]), a, b)
}

pub(super) fn box_complement_pieces(n: usize, a: f64, b: f64) -> Vec<Restriction> {
    (0..n).flat_map(|i| [face(n, i, 1.0, a, b), face(n, i, -1.0, a, b)]).collect()
}
