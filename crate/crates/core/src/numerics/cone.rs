use super::norm2;

/// Euclidean projection of `(v, t)` onto the second-order cone `{(u, s) : ||u||_2 <= s}`.
pub fn soc_project(v: &[f64], t: f64) -> (Vec<f64>, f64) {
    let mut out = Vec::with_capacity(v.len() + 1);
    out.push(t);
    out.extend_from_slice(v);
    soc_project_in_place(&mut out);
    let s = out[0];
    out.remove(0);
    (out, s)
}

/// Projects a block laid out as `[t, v_1, .., v_k]` onto the second-order cone in place.
pub fn soc_project_in_place(block: &mut [f64]) {
    if block.is_empty() {
        return;
    }
    let t = block[0];
    let nv = norm2(&block[1..]);
    if nv <= t {
        return;
    }
    if nv <= -t {
        block.iter_mut().for_each(|x| *x = 0.0);
        return;
    }
    let a = 0.5 * (nv + t);
    let scale = a / nv;
    block[0] = a;
    block[1..].iter_mut().for_each(|x| *x *= scale);
}

pub fn nonneg_project(v: &mut [f64]) {
    v.iter_mut().for_each(|x| *x = x.max(0.0));
}
