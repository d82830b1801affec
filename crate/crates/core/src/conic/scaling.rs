use super::{ConeKind, ConeProgram};
use crate::numerics::{norm_inf, CsrMatrix};

const MIN_NORM: f64 = 1e-4;
const MAX_NORM: f64 = 1e4;

/// Equilibrated copy of a cone program: `P~ = c D P D`, `q~ = c D q`,
/// `A~ = E A D`, `b~ = E b`.
pub(super) struct Scaled {
    pub p: CsrMatrix,
    pub q: Vec<f64>,
    pub a: CsrMatrix,
    pub b: Vec<f64>,
    pub d: Vec<f64>,
    pub e: Vec<f64>,
    pub c: f64,
}

fn clamp_norm(x: f64) -> f64 {
    if x < MIN_NORM {
        1.0
    } else {
        x.min(MAX_NORM)
    }
}

pub(super) fn equilibrate(cp: &ConeProgram, iters: usize) -> Scaled {
    let n = cp.num_vars();
    let m = cp.num_rows();
    let mut p = cp.p.clone();
    let mut a = cp.a.clone();
    let mut q = cp.q.clone();
    let mut d = vec![1.0; n];
    let mut e = vec![1.0; m];

    for _ in 0..iters {
        let pc = p.col_inf_norms();
        let ac = a.col_inf_norms();
        let dd: Vec<f64> = (0..n).map(|j| 1.0 / clamp_norm(pc[j].max(ac[j])).sqrt()).collect();
        let mut de: Vec<f64> = a.row_inf_norms().iter().map(|&r| 1.0 / clamp_norm(r).sqrt()).collect();
        // second-order cones are only invariant under uniform scaling
        let mut off = 0;
        for cone in &cp.cones {
            if cone.kind == ConeKind::Soc && cone.dim > 1 {
                let blk = &mut de[off..off + cone.dim];
                let mean = blk.iter().sum::<f64>() / cone.dim as f64;
                blk.iter_mut().for_each(|x| *x = mean);
            }
            off += cone.dim;
        }
        p.scale(&dd, &dd);
        a.scale(&de, &dd);
        for j in 0..n {
            q[j] *= dd[j];
            d[j] *= dd[j];
        }
        for i in 0..m {
            e[i] *= de[i];
        }
    }

    let pc = p.col_inf_norms();
    let mean_p = if n > 0 { pc.iter().sum::<f64>() / n as f64 } else { 0.0 };
    let c = 1.0 / clamp_norm(mean_p.max(norm_inf(&q)));
    let ones = vec![1.0; n];
    let cv = vec![c; n];
    p.scale(&cv, &ones);
    q.iter_mut().for_each(|x| *x *= c);
    let b = cp.b.iter().zip(&e).map(|(b, e)| b * e).collect();
    Scaled { p, q, a, b, d, e, c }
}

impl Scaled {
    pub fn unscale_x(&self, x: &[f64]) -> Vec<f64> {
        x.iter().zip(&self.d).map(|(x, d)| x * d).collect()
    }

    pub fn unscale_s(&self, s: &[f64]) -> Vec<f64> {
        s.iter().zip(&self.e).map(|(s, e)| s / e).collect()
    }

    pub fn unscale_y(&self, y: &[f64]) -> Vec<f64> {
        y.iter().zip(&self.e).map(|(y, e)| y * e / self.c).collect()
    }

    pub fn scale_x(&self, v: &[f64]) -> Vec<f64> {
        v.iter().zip(&self.d).map(|(v, d)| v / d).collect()
    }

    pub fn scale_s(&self, s: &[f64]) -> Vec<f64> {
        s.iter().zip(&self.e).map(|(s, e)| s * e).collect()
    }

    pub fn scale_y(&self, y: &[f64]) -> Vec<f64> {
        y.iter().zip(&self.e).map(|(y, e)| y * self.c / e).collect()
    }
}
