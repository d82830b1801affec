use super::{remap, ConvexPart, Restriction, SetInstance};
use crate::conic::ConeKind;
use crate::error::Result;
use crate::model::ConicConstraint;
use crate::numerics::dist2_sq;

fn offsets(parts: &[SetInstance]) -> Vec<usize> {
    let mut out = Vec::with_capacity(parts.len());
    let mut off = 0;
    for p in parts {
        out.push(off);
        off += p.dim();
    }
    out
}

pub(super) fn project_product(parts: &[SetInstance], z: &[f64]) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(z.len());
    for (p, off) in parts.iter().zip(offsets(parts)) {
        out.extend(p.project(&z[off..off + p.dim()])?);
    }
    Ok(out)
}

/// Closest per-part projection (ties to the first part) and its part index.
pub(super) fn project_union(parts: &[SetInstance], z: &[f64]) -> Result<(Vec<f64>, usize)> {
    let mut best: Option<(f64, Vec<f64>, usize)> = None;
    for (i, p) in parts.iter().enumerate() {
        let y = p.project(z)?;
        let d = dist2_sq(&y, z);
        if best.as_ref().is_none_or(|b| d < b.0) {
            best = Some((d, y, i));
        }
    }
    let (_, y, i) = best.expect("nonempty union");
    Ok((y, i))
}

/// Merges per-part constraint systems placed side by side.
fn combine(parts: &[SetInstance], pieces: &[&Restriction]) -> Restriction {
    let total: usize = parts.iter().map(|p| p.dim()).sum();
    let mut out = Restriction::default();
    let mut aux = total;
    for ((p, off), r) in parts.iter().zip(offsets(parts)).zip(pieces) {
        let s = r.shifted(p.dim(), off, aux);
        out.fixed.extend(s.fixed);
        out.constraints.extend(s.constraints);
        aux += r.num_aux;
        out.num_aux += r.num_aux;
    }
    out
}

pub(super) fn product_relax(parts: &[SetInstance]) -> ConvexPart {
    let relaxed: Vec<Restriction> = parts
        .iter()
        .map(|p| {
            let c = p.relax();
            Restriction { fixed: Vec::new(), constraints: c.constraints, num_aux: c.num_aux }
        })
        .collect();
    let r = combine(parts, &relaxed.iter().collect::<Vec<_>>());
    ConvexPart { constraints: r.constraints, num_aux: r.num_aux }
}

pub(super) fn product_restrict(parts: &[SetInstance], z: &[f64]) -> Result<Restriction> {
    let mut rs = Vec::with_capacity(parts.len());
    for (p, off) in parts.iter().zip(offsets(parts)) {
        rs.push(p.restrict_at(&z[off..off + p.dim()])?);
    }
    Ok(combine(parts, &rs.iter().collect::<Vec<_>>()))
}

pub(super) fn product_neighbors(parts: &[SetInstance], z: &[f64]) -> Result<Vec<Vec<f64>>> {
    let mut out = Vec::new();
    for (p, off) in parts.iter().zip(offsets(parts)) {
        let d = p.dim();
        for y in p.neighbors(&z[off..off + d])? {
            let mut v = z.to_vec();
            v[off..off + d].copy_from_slice(&y);
            out.push(v);
        }
    }
    Ok(out)
}

pub(super) fn product_pieces(parts: &[SetInstance], limit: u128) -> Result<Vec<Restriction>> {
    let lists = parts.iter().map(|p| p.pieces(limit).map(|x| x.expect("counted"))).collect::<Result<Vec<_>>>()?;
    let mut idx = vec![0usize; parts.len()];
    let mut out = Vec::new();
    loop {
        let chosen: Vec<&Restriction> = idx.iter().zip(&lists).map(|(&i, l)| &l[i]).collect();
        out.push(combine(parts, &chosen));
        let mut k = parts.len();
        loop {
            if k == 0 {
                return Ok(out);
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < lists[k].len() {
                break;
            }
            idx[k] = 0;
        }
    }
}

/// Perspective relaxation: `z = sum x_i`, `sum s_i = 1`, `s >= 0`, each
/// `x_i` in `s_i` times the part relaxation, and `||x_i||_inf <= M_i s_i`.
/// Auxiliaries per part are laid out as `[x_i, s_i, part auxiliaries]`.
pub(super) fn union_relax(parts: &[SetInstance]) -> ConvexPart {
    let d = parts[0].dim();
    let relaxed: Vec<ConvexPart> = parts.iter().map(|p| p.relax()).collect();
    let mut bases = Vec::with_capacity(parts.len());
    let mut next = d;
    for r in &relaxed {
        bases.push(next);
        next += d + 1 + r.num_aux;
    }
    let num_aux = next - d;

    let mut sum_a = Vec::new();
    for j in 0..d {
        sum_a.push((j, j, 1.0));
        for &base in &bases {
            sum_a.push((j, base + j, -1.0));
        }
    }
    let mut constraints = vec![ConicConstraint::new(ConeKind::Zero, sum_a, vec![0.0; d])];
    let weights: Vec<(usize, f64)> = bases.iter().map(|&b| (b + d, 1.0)).collect();
    constraints.push(ConicConstraint::eq(&weights, 1.0));
    let mut nonneg_a = Vec::new();
    let mut row = 0;
    for (i, &base) in bases.iter().enumerate() {
        let s = base + d;
        nonneg_a.push((row, s, 1.0));
        row += 1;
        let m = parts[i].box_bound();
        for j in 0..d {
            nonneg_a.extend([(row, s, m), (row, base + j, -1.0)]);
            row += 1;
            nonneg_a.extend([(row, s, m), (row, base + j, 1.0)]);
            row += 1;
        }
    }
    constraints.push(ConicConstraint::new(ConeKind::NonNeg, nonneg_a, vec![0.0; row]));
    for (r, &base) in relaxed.iter().zip(&bases) {
        let s = base + d;
        for c in &r.constraints {
            let mut h = remap(c, d, base, base + d + 1);
            for (i, &bi) in c.b.iter().enumerate() {
                if bi != 0.0 {
                    h.a.push((i, s, bi));
                }
            }
            h.b = vec![0.0; c.b.len()];
            constraints.push(h);
        }
    }
    ConvexPart { constraints, num_aux }
}
