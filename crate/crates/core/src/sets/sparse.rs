use super::combinatorics::combinations;
use super::{bound_rows, ConvexPart, Restriction};
use crate::conic::ConeKind;
use crate::model::ConicConstraint;

/// Indices sorted by decreasing key, ties to the lower index.
fn ranked(z: &[f64], key: impl Fn(f64) -> f64) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..z.len()).collect();
    idx.sort_by(|&i, &j| key(z[j]).total_cmp(&key(z[i])).then(i.cmp(&j)));
    idx
}

/// Sets the `k` largest entries to one (ties to the lower index).
pub fn project_choose(z: &[f64], k: usize) -> Vec<f64> {
    let mut out = vec![0.0; z.len()];
    for &i in ranked(z, |x| x).iter().take(k) {
        out[i] = 1.0;
    }
    out
}

/// Keeps the `k` entries of largest magnitude (ties to the lower index),
/// clipped to `[-M, M]`, and zeros the rest.
pub fn project_card(z: &[f64], k: usize, bound: f64) -> Vec<f64> {
    let mut out = vec![0.0; z.len()];
    for &i in ranked(z, f64::abs).iter().take(k) {
        out[i] = z[i].clamp(-bound, bound);
    }
    out
}

pub(super) fn choose_relax(n: usize, k: usize) -> ConvexPart {
    let sum: Vec<(usize, f64)> = (0..n).map(|j| (j, 1.0)).collect();
    ConvexPart { constraints: vec![bound_rows(0..n, 0.0, 1.0), ConicConstraint::eq(&sum, k as f64)], num_aux: 0 }
}

pub(super) fn choose_neighbors(z: &[f64]) -> Vec<Vec<f64>> {
    let mut out = Vec::new();
    for i in 0..z.len().saturating_sub(1) {
        if z[i] != z[i + 1] {
            let mut y = z.to_vec();
            y.swap(i, i + 1);
            out.push(y);
        }
    }
    out
}

/// `||z||_1 <= kM`, `||z||_inf <= M`. Small `n` lists every sign pattern of
/// the 1-norm; larger `n` lifts it with one auxiliary per coordinate.
pub(super) fn card_relax(n: usize, k: usize, bound: f64) -> ConvexPart {
    let mut constraints = vec![bound_rows(0..n, -bound, bound)];
    if k >= n {
        return ConvexPart { constraints, num_aux: 0 };
    }
    let l1 = k as f64 * bound;
    if (1usize << n.min(63)) <= 2 * n + 1 {
        let mut a = Vec::new();
        let mut b = Vec::new();
        for signs in 0..(1usize << n) {
            let row = b.len();
            for j in 0..n {
                let s = if signs >> (n - 1 - j) & 1 == 1 { -1.0 } else { 1.0 };
                a.push((row, j, -s));
            }
            b.push(l1);
        }
        constraints.push(ConicConstraint::new(ConeKind::NonNeg, a, b));
        return ConvexPart { constraints, num_aux: 0 };
    }
    let mut a = Vec::new();
    let mut b = Vec::new();
    for j in 0..n {
        let t = n + j;
        // t_j - z_j >= 0 and t_j + z_j >= 0
        a.extend([(b.len(), t, 1.0), (b.len(), j, -1.0)]);
        b.push(0.0);
        a.extend([(b.len(), t, 1.0), (b.len(), j, 1.0)]);
        b.push(0.0);
    }
    let row = b.len();
    a.extend((0..n).map(|j| (row, n + j, -1.0)));
    b.push(l1);
    constraints.push(ConicConstraint::new(ConeKind::NonNeg, a, b));
    ConvexPart { constraints, num_aux: n }
}

fn support_restriction(n: usize, support: &[usize], bound: f64) -> Restriction {
    let mut on = vec![false; n];
    support.iter().for_each(|&i| on[i] = true);
    let fixed = (0..n).filter(|&i| !on[i]).map(|i| (i, 0.0)).collect();
    let constraints =
        if support.is_empty() { Vec::new() } else { vec![bound_rows(support.iter().copied(), -bound, bound)] };
    Restriction { fixed, constraints, num_aux: 0 }
}

/// Same sparsity pattern, entries in `[-M, M]`. When `z` has fewer than `k`
/// nonzeros the pattern is padded with the next-largest indices.
pub(super) fn card_restrict(z: &[f64], n: usize, k: usize, bound: f64) -> Restriction {
    let mut support: Vec<usize> = ranked(z, f64::abs).into_iter().take(k).collect();
    support.sort_unstable();
    support_restriction(n, &support, bound)
}

/// Moves each nonzero value to an adjacent zero position.
pub(super) fn card_neighbors(z: &[f64]) -> Vec<Vec<f64>> {
    let n = z.len();
    let mut out = Vec::new();
    for i in 0..n {
        if z[i] == 0.0 {
            continue;
        }
        for j in [i.wrapping_sub(1), i + 1] {
            if j < n && z[j] == 0.0 {
                let mut y = z.to_vec();
                y[j] = z[i];
                y[i] = 0.0;
                out.push(y);
            }
        }
    }
    out
}

pub(super) fn card_pieces(n: usize, k: usize, bound: f64) -> Vec<Restriction> {
    combinations(n, k).iter().map(|s| support_restriction(n, s, bound)).collect()
}
