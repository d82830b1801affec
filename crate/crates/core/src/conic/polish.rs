use super::scaling::Scaled;
use super::{project_cone, project_dual_cone, ConeBlock, ConeKind};
use crate::numerics::{norm_inf, QuasiDefiniteLdl};

/// Largest reduced KKT system factored densely during polishing.
const MAX_DIM: usize = 1000;
const REFINE_STEPS: usize = 3;

/// Guesses the active set from an approximate solution and solves the
/// resulting equality-constrained QP exactly. Returns scaled `(x, s, y)`.
pub(super) fn polish(
    sc: &Scaled,
    cones: &[ConeBlock],
    x: &[f64],
    s: &[f64],
    y: &[f64],
    delta: f64,
) -> Option<(Vec<f64>, Vec<f64>, Vec<f64>)> {
    let n = x.len();
    let m = s.len();
    let mut active = Vec::new();
    let mut off = 0;
    let ynorm = norm_inf(y).max(1e-12);
    for cone in cones {
        let r = off..off + cone.dim;
        match cone.kind {
            ConeKind::Zero => active.extend(r),
            ConeKind::NonNeg => active.extend(r.filter(|&i| y[i] > s[i])),
            ConeKind::Soc => {
                let yb = norm_inf(&y[r.clone()]);
                let sb = norm_inf(&s[r.clone()]);
                if yb <= 1e-9 * ynorm.max(1.0) {
                    // constraint inactive
                } else if sb <= 1e-9 * yb.max(1.0) {
                    active.extend(r);
                } else {
                    return None;
                }
            }
        }
        off += cone.dim;
    }
    let k = active.len();
    let dim = n + k;
    if dim == 0 || dim > MAX_DIM {
        return None;
    }

    let mut kkt = vec![0.0; dim * dim];
    for i in 0..n {
        let (cols, vals) = sc.p.row(i);
        for (&j, &v) in cols.iter().zip(vals) {
            kkt[i * dim + j] += v;
        }
        kkt[i * dim + i] += delta;
    }
    for (r, &i) in active.iter().enumerate() {
        let (cols, vals) = sc.a.row(i);
        for (&j, &v) in cols.iter().zip(vals) {
            kkt[(n + r) * dim + j] += v;
            kkt[j * dim + n + r] += v;
        }
        kkt[(n + r) * dim + n + r] -= delta;
    }
    let ldl = QuasiDefiniteLdl::factor(dim, kkt).ok()?;

    let mut rhs = vec![0.0; dim];
    for j in 0..n {
        rhs[j] = -sc.q[j];
    }
    for (r, &i) in active.iter().enumerate() {
        rhs[n + r] = sc.b[i];
    }
    let mut sol = rhs.clone();
    ldl.solve_in_place(&mut sol);
    for _ in 0..REFINE_STEPS {
        let mut res = residual(sc, &active, &sol, &rhs);
        if norm_inf(&res) < 1e-14 {
            break;
        }
        ldl.solve_in_place(&mut res);
        sol.iter_mut().zip(&res).for_each(|(a, d)| *a += d);
    }
    if sol.iter().any(|v| !v.is_finite()) {
        return None;
    }

    let xp = sol[..n].to_vec();
    let mut yp = vec![0.0; m];
    for (r, &i) in active.iter().enumerate() {
        yp[i] = sol[n + r];
    }
    project_dual_cone(cones, &mut yp);
    let ax = sc.a.apply(&xp);
    let mut sp: Vec<f64> = sc.b.iter().zip(&ax).map(|(b, a)| b - a).collect();
    project_cone(cones, &mut sp);
    Some((xp, sp, yp))
}

/// Residual of the unregularized KKT system `[P A'; A 0] sol = rhs`.
fn residual(sc: &Scaled, active: &[usize], sol: &[f64], rhs: &[f64]) -> Vec<f64> {
    let n = sc.q.len();
    let (x, ya) = sol.split_at(n);
    let mut out = rhs.to_vec();
    let px = sc.p.apply(x);
    for j in 0..n {
        out[j] -= px[j];
    }
    for (r, &i) in active.iter().enumerate() {
        let (cols, vals) = sc.a.row(i);
        let mut ax = 0.0;
        for (&j, &v) in cols.iter().zip(vals) {
            out[j] -= v * ya[r];
            ax += v * x[j];
        }
        out[n + r] -= ax;
    }
    out
}
