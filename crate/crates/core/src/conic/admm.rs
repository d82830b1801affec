use log::debug;

use super::polish::polish;
use super::scaling::{equilibrate, Scaled};
use super::{
    kkt_residuals, project_cone, project_dual_cone, ConeKind, ConeProgram, ConicSolution, SolveStatus, SolverSettings,
};
use crate::error::{invalid, Result};
use crate::numerics::{dot, norm_inf, Cholesky};

const RHO_MIN: f64 = 1e-6;
const RHO_MAX: f64 = 1e6;
const MAX_POLISH_TRIES: usize = 4;
/// Consecutive checks a certificate must survive before it is reported.
const CERT_CONFIRMATIONS: usize = 2;

/// Solves a cone program with default settings.
pub fn solve_cone_qp(cp: &ConeProgram, warm_start: Option<(&[f64], &[f64])>) -> Result<ConicSolution> {
    solve_cone_qp_with(cp, warm_start, &SolverSettings::default())
}

/// Returns a Farkas certificate when the solver proves `cp` infeasible.
pub fn detect_infeasibility(cp: &ConeProgram) -> Result<Option<Vec<f64>>> {
    let sol = solve_cone_qp(cp, None)?;
    Ok(match sol.status {
        SolveStatus::Infeasible => sol.certificate,
        _ => None,
    })
}

fn rho_vector(cp: &ConeProgram, rho: f64, st: &SolverSettings) -> Vec<f64> {
    let mut out = Vec::with_capacity(cp.num_rows());
    for c in &cp.cones {
        let r = if c.kind == ConeKind::Zero { rho * st.rho_eq_scale } else { rho };
        out.extend(std::iter::repeat_n(r, c.dim));
    }
    out
}

/// Factors `P + sigma I + A' diag(rho) A`.
fn factor_kkt(sc: &Scaled, sigma: f64, rho: &[f64]) -> Result<Cholesky> {
    let n = sc.q.len();
    let mut k = vec![0.0; n * n];
    for i in 0..n {
        let (cols, vals) = sc.p.row(i);
        for (&j, &v) in cols.iter().zip(vals) {
            if j <= i {
                k[i * n + j] += v;
            }
        }
        k[i * n + i] += sigma;
    }
    for (r, &rho_r) in rho.iter().enumerate() {
        let (cols, vals) = sc.a.row(r);
        for (a, (&j, &vj)) in cols.iter().zip(vals).enumerate() {
            for (&l, &vl) in cols[..=a].iter().zip(&vals[..=a]) {
                let (hi, lo) = if j >= l { (j, l) } else { (l, j) };
                k[hi * n + lo] += rho_r * vj * vl;
            }
        }
    }
    Cholesky::factor(n, k)
}

struct Iterate {
    x: Vec<f64>,
    s: Vec<f64>,
    y: Vec<f64>,
}

struct Unscaled {
    v: Vec<f64>,
    s: Vec<f64>,
    y: Vec<f64>,
}

fn unscale(sc: &Scaled, it: &Iterate) -> Unscaled {
    Unscaled { v: sc.unscale_x(&it.x), s: sc.unscale_s(&it.s), y: sc.unscale_y(&it.y) }
}

fn finish(cp: &ConeProgram, u: Unscaled, status: SolveStatus, iterations: usize, polished: bool) -> ConicSolution {
    let r = kkt_residuals(cp, &u.v, &u.s, &u.y);
    ConicSolution {
        status,
        objective: cp.objective(&u.v),
        v: u.v,
        y: u.y,
        s: u.s,
        primal_res: r.primal,
        dual_res: r.dual,
        gap: r.gap,
        iterations,
        polished,
        certificate: None,
    }
}

/// Solves a cone program with explicit settings and an optional `(v, y)`
/// warm start.
pub fn solve_cone_qp_with(
    cp: &ConeProgram,
    warm_start: Option<(&[f64], &[f64])>,
    st: &SolverSettings,
) -> Result<ConicSolution> {
    cp.validate()?;
    let n = cp.num_vars();
    let m = cp.num_rows();
    let sc = equilibrate(cp, st.scaling_iters);

    let mut it = match warm_start {
        Some((v, y)) => {
            if v.len() != n || y.len() != m {
                return invalid("warm start has the wrong length");
            }
            if v.iter().chain(y).any(|x| !x.is_finite()) {
                return invalid("non-finite warm start");
            }
            let av = cp.a.apply(v);
            let mut s: Vec<f64> = cp.b.iter().zip(&av).map(|(b, a)| b - a).collect();
            project_cone(&cp.cones, &mut s);
            Iterate { x: sc.scale_x(v), s: sc.scale_s(&s), y: sc.scale_y(y) }
        }
        None => Iterate { x: vec![0.0; n], s: vec![0.0; m], y: vec![0.0; m] },
    };

    let mut rho = st.rho;
    let mut rho_v = rho_vector(cp, rho, st);
    let mut chol = factor_kkt(&sc, st.sigma, &rho_v)?;

    let mut best: Option<(f64, Iterate)> = None;
    let mut polish_tries = 0;
    let mut polish_threshold = 1e-3;
    let mut pinf_hits = 0;
    let mut dinf_hits = 0;
    let mut x_prev = it.x.clone();
    let mut y_prev = it.y.clone();

    let mut rhs = vec![0.0; n];
    let mut tmp = vec![0.0; m];
    let mut ax = vec![0.0; m];
    let mut s_hat = vec![0.0; m];

    for k in 0..=st.max_iter {
        if k % st.check_interval == 0 || k == st.max_iter {
            let u = unscale(&sc, &it);
            let r = kkt_residuals(cp, &u.v, &u.s, &u.y);
            let score = r.max();
            if score <= st.eps {
                debug!("conic: converged in {k} iterations");
                return Ok(finish(cp, u, SolveStatus::Optimal, k, false));
            }
            if score.is_finite() && best.as_ref().is_none_or(|(b, _)| score < *b) {
                best = Some((score, Iterate { x: it.x.clone(), s: it.s.clone(), y: it.y.clone() }));
            }
            if st.polish && score <= polish_threshold && polish_tries < MAX_POLISH_TRIES {
                polish_tries += 1;
                polish_threshold = score * 0.1;
                if let Some((xp, sp, yp)) = polish(&sc, &cp.cones, &it.x, &it.s, &it.y, st.static_reg) {
                    let pu = unscale(&sc, &Iterate { x: xp, s: sp, y: yp });
                    let pr = kkt_residuals(cp, &pu.v, &pu.s, &pu.y);
                    if pr.max() <= st.eps {
                        debug!("conic: polished after {k} iterations");
                        return Ok(finish(cp, pu, SolveStatus::Optimal, k, true));
                    }
                }
            }
            if k > 0 {
                let dy: Vec<f64> = sc.unscale_y(&it.y.iter().zip(&y_prev).map(|(a, b)| a - b).collect::<Vec<_>>());
                match primal_certificate(cp, &dy, st.eps_infeasible) {
                    Some(cert) => {
                        pinf_hits += 1;
                        if pinf_hits >= CERT_CONFIRMATIONS {
                            let mut sol = finish(cp, u, SolveStatus::Infeasible, k, false);
                            sol.certificate = Some(cert);
                            return Ok(sol);
                        }
                    }
                    None => pinf_hits = 0,
                }
                let dx = sc.unscale_x(&it.x.iter().zip(&x_prev).map(|(a, b)| a - b).collect::<Vec<_>>());
                match dual_certificate(cp, &dx, st.eps_infeasible) {
                    Some(cert) => {
                        dinf_hits += 1;
                        if dinf_hits >= CERT_CONFIRMATIONS {
                            let u = unscale(&sc, &it);
                            let mut sol = finish(cp, u, SolveStatus::Unbounded, k, false);
                            sol.certificate = Some(cert);
                            return Ok(sol);
                        }
                    }
                    None => dinf_hits = 0,
                }
            }
            if k == st.max_iter {
                break;
            }
        }

        if k > 0 && k % st.adapt_interval == 0 {
            let new_rho = adapted_rho(&sc, &it, rho);
            if new_rho > 5.0 * rho || new_rho < 0.2 * rho {
                rho = new_rho;
                rho_v = rho_vector(cp, rho, st);
                chol = factor_kkt(&sc, st.sigma, &rho_v)?;
            }
        }

        x_prev.copy_from_slice(&it.x);
        y_prev.copy_from_slice(&it.y);

        for i in 0..m {
            tmp[i] = rho_v[i] * (sc.b[i] - it.s[i]) - it.y[i];
        }
        sc.a.mul_t_vec(&tmp, &mut rhs);
        for j in 0..n {
            rhs[j] += st.sigma * it.x[j] - sc.q[j];
        }
        chol.solve_in_place(&mut rhs);
        sc.a.mul_vec(&rhs, &mut ax);
        let alpha = st.alpha;
        for j in 0..n {
            it.x[j] = alpha * rhs[j] + (1.0 - alpha) * it.x[j];
        }
        for i in 0..m {
            s_hat[i] = alpha * (sc.b[i] - ax[i]) + (1.0 - alpha) * it.s[i];
            it.s[i] = s_hat[i] - it.y[i] / rho_v[i];
        }
        project_cone(&cp.cones, &mut it.s);
        for i in 0..m {
            it.y[i] += rho_v[i] * (it.s[i] - s_hat[i]);
        }
    }

    let (_, b) = best.expect("at least one residual check");
    let u = unscale(&sc, &b);
    debug!("conic: iteration cap reached");
    Ok(finish(cp, u, SolveStatus::MaxIters, st.max_iter, false))
}

fn adapted_rho(sc: &Scaled, it: &Iterate, rho: f64) -> f64 {
    let ax = sc.a.apply(&it.x);
    let px = sc.p.apply(&it.x);
    let aty = sc.a.apply_t(&it.y);
    let rp = ax.iter().zip(&it.s).zip(&sc.b).fold(0.0f64, |m, ((a, s), b)| m.max((a + s - b).abs()));
    let rd = px.iter().zip(&sc.q).zip(&aty).fold(0.0f64, |m, ((p, q), a)| m.max((p + q + a).abs()));
    let np = rp / norm_inf(&ax).max(norm_inf(&it.s)).max(1e-10);
    let nd = rd / norm_inf(&px).max(norm_inf(&aty)).max(norm_inf(&sc.q)).max(1e-10);
    (rho * (np / nd.max(1e-12)).sqrt()).clamp(RHO_MIN, RHO_MAX)
}

/// Checks `A'dy = 0`, `dy` in `K*`, `b'dy < 0` up to `eps * ||dy||`.
fn primal_certificate(cp: &ConeProgram, dy: &[f64], eps: f64) -> Option<Vec<f64>> {
    let ny = norm_inf(dy);
    if !(ny > 1e-12) || !ny.is_finite() {
        return None;
    }
    let mut y: Vec<f64> = dy.iter().map(|v| v / ny).collect();
    if dot(&cp.b, &y) >= -eps {
        return None;
    }
    let mut proj = y.clone();
    project_dual_cone(&cp.cones, &mut proj);
    let dist = y.iter().zip(&proj).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    if dist > eps {
        return None;
    }
    y = proj;
    if norm_inf(&cp.a.apply_t(&y)) > eps || dot(&cp.b, &y) >= -eps {
        return None;
    }
    Some(y)
}

/// Checks `P dx = 0`, `-A dx` in `K`, `q'dx < 0` up to `eps * ||dx||`.
fn dual_certificate(cp: &ConeProgram, dx: &[f64], eps: f64) -> Option<Vec<f64>> {
    let nx = norm_inf(dx);
    if !(nx > 1e-12) || !nx.is_finite() {
        return None;
    }
    let x: Vec<f64> = dx.iter().map(|v| v / nx).collect();
    if dot(&cp.q, &x) >= -eps || norm_inf(&cp.p.apply(&x)) > eps {
        return None;
    }
    let w: Vec<f64> = cp.a.apply(&x).iter().map(|v| -v).collect();
    let mut proj = w.clone();
    project_cone(&cp.cones, &mut proj);
    let dist = w.iter().zip(&proj).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    if dist > eps {
        return None;
    }
    Some(x)
}
