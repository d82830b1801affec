use super::{bound_rows, ConvexPart};
use crate::conic::ConeKind;
use crate::model::ConicConstraint;

/// Rounds each entry to 0 or 1; exactly one half goes to 0.
pub fn project_boolean(z: &[f64]) -> Vec<f64> {
    z.iter().map(|&x| if x > 0.5 { 1.0 } else { 0.0 }).collect()
}

/// Nearest element of a sorted, nonempty value list; ties go to the smaller.
pub fn project_finite(values: &[f64], z: f64) -> f64 {
    let i = values.partition_point(|&v| v < z);
    if i == 0 {
        return values[0];
    }
    if i == values.len() {
        return values[i - 1];
    }
    let (lo, hi) = (values[i - 1], values[i]);
    if hi - z < z - lo {
        hi
    } else {
        lo
    }
}

/// Clips to `[-floor(M), floor(M)]` and rounds half away from zero.
pub fn project_integer(z: &[f64], bound: f64) -> Vec<f64> {
    let m = bound.floor();
    z.iter().map(|&x| x.clamp(-m, m).round()).collect()
}

pub(super) fn box_part(n: usize, lo: f64, hi: f64) -> ConvexPart {
    ConvexPart { constraints: vec![bound_rows(0..n, lo, hi)], num_aux: 0 }
}

pub(super) fn box_part_vec(lower: &[f64], upper: &[f64]) -> ConvexPart {
    let mut a = Vec::new();
    let mut b = Vec::new();
    for (j, (&l, &u)) in lower.iter().zip(upper).enumerate() {
        a.push((b.len(), j, 1.0));
        b.push(-l);
        a.push((b.len(), j, -1.0));
        b.push(u);
    }
    ConvexPart { constraints: vec![ConicConstraint::new(ConeKind::NonNeg, a, b)], num_aux: 0 }
}

pub(super) fn boolean_neighbors(z: &[f64]) -> Vec<Vec<f64>> {
    (0..z.len())
        .map(|i| {
            let mut y = z.to_vec();
            y[i] = 1.0 - y[i];
            y
        })
        .collect()
}

/// Each coordinate moved to the adjacent smaller or larger value.
pub(super) fn finite_neighbors(values: &[f64], z: &[f64]) -> Vec<Vec<f64>> {
    let mut out = Vec::new();
    for i in 0..z.len() {
        let pos = values.partition_point(|&v| v < z[i]);
        if pos > 0 {
            let mut y = z.to_vec();
            y[i] = values[pos - 1];
            out.push(y);
        }
        if pos + 1 < values.len() {
            let mut y = z.to_vec();
            y[i] = values[pos + 1];
            out.push(y);
        }
    }
    out
}

pub(super) fn integer_neighbors(bound: f64, z: &[f64]) -> Vec<Vec<f64>> {
    let mut out = Vec::new();
    for i in 0..z.len() {
        for step in [-1.0, 1.0] {
            let v = z[i] + step;
            if v.abs() <= bound {
                let mut y = z.to_vec();
                y[i] = v;
                out.push(y);
            }
        }
    }
    out
}
