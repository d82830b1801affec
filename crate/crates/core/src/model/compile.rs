use std::collections::BTreeMap;

use super::{ConicConstraint, Problem, QuadraticForm};
use crate::conic::{ConeBlock, ConeKind, ConeProgram};
use crate::error::{invalid, Result};
use crate::numerics::{CsrMatrix, Triplet};
use crate::sets::{ConvexPart, Restriction};

/// One affine row over program columns: `sum c_j x_j + constant`.
type Row = (Vec<(usize, f64)>, f64);

/// Incremental cone-program builder. Constraints are added as `A x + b in K`.
struct Builder {
    p: Vec<Triplet>,
    q: Vec<f64>,
    a: Vec<Triplet>,
    b: Vec<f64>,
    cones: Vec<ConeBlock>,
}

impl Builder {
    fn new(n: usize) -> Self {
        Self { p: Vec::new(), q: vec![0.0; n], a: Vec::new(), b: Vec::new(), cones: Vec::new() }
    }

    fn add_vars(&mut self, k: usize) -> usize {
        let off = self.q.len();
        self.q.resize(off + k, 0.0);
        off
    }

    fn push(&mut self, kind: ConeKind, rows: Vec<Row>) {
        if rows.is_empty() {
            return;
        }
        let base = self.b.len();
        let dim = rows.len();
        for (r, (terms, c)) in rows.into_iter().enumerate() {
            for (j, v) in terms {
                self.a.push((base + r, j, -v));
            }
            self.b.push(c);
        }
        self.cones.push(ConeBlock::new(kind, dim));
    }

    fn push_mapped(&mut self, c: &ConicConstraint, map: impl Fn(usize) -> usize) {
        self.push(c.kind, rows_of(c, map));
    }

    fn build(self) -> Result<ConeProgram> {
        let n = self.q.len();
        let m = self.b.len();
        ConeProgram::new(
            CsrMatrix::from_triplets(n, n, &self.p),
            self.q,
            CsrMatrix::from_triplets(m, n, &self.a),
            self.b,
            self.cones,
        )
    }
}

/// Rows of `c` with columns renamed by `map`.
fn rows_of(c: &ConicConstraint, map: impl Fn(usize) -> usize) -> Vec<Row> {
    let mut rows: Vec<Row> = c.b.iter().map(|&b| (Vec::new(), b)).collect();
    for &(i, j, v) in &c.a {
        rows[i].0.push((map(j), v));
    }
    rows
}

fn push_part(bld: &mut Builder, part: &ConvexPart, indices: &[usize]) {
    let d = indices.len();
    let aux = bld.add_vars(part.num_aux);
    for c in &part.constraints {
        bld.push_mapped(c, |j| if j < d { indices[j] } else { aux + j - d });
    }
}

/// Compiles the convex part of `p`, optionally with each atom replaced by its
/// relaxation, plus extra constraints and an extra quadratic term over the
/// problem variables. Auxiliary columns follow the problem variables.
pub fn compile(
    p: &Problem,
    relax_atoms: bool,
    extra_constraints: &[ConicConstraint],
    extra_quadratic: Option<&QuadraticForm>,
) -> Result<ConeProgram> {
    let n = p.num_vars();
    if extra_constraints.iter().any(|c| c.max_index().is_some_and(|j| j >= n) || c.validate(n).is_err()) {
        return invalid("extra constraint references a column outside the problem");
    }
    if extra_quadratic.is_some_and(|f| f.dim() != n) {
        return invalid("extra quadratic has the wrong dimension");
    }
    let mut bld = Builder::new(n);
    bld.p = p.objective.p.triplets();
    bld.q.copy_from_slice(&p.objective.q);
    if let Some(f) = extra_quadratic {
        bld.p.extend(f.p.triplets());
        for (a, b) in bld.q.iter_mut().zip(&f.q) {
            *a += b;
        }
    }
    for c in &p.constraints {
        bld.push_mapped(c, |j| j);
    }
    if relax_atoms {
        for atom in &p.atoms {
            push_part(&mut bld, &atom.set.relax(), &atom.indices);
        }
    }
    for c in extra_constraints {
        bld.push_mapped(c, |j| j);
    }
    bld.build()
}

/// Polishing program: problem constraints softened by slacks priced at
/// `lambda`, atoms confined to restrictions, fixed coordinates eliminated.
#[derive(Debug, Clone)]
pub struct PolishProgram {
    pub program: ConeProgram,
    /// Objective terms that do not depend on the program columns.
    pub constant: f64,
    column: Vec<Option<usize>>,
    fixed: Vec<f64>,
}

impl PolishProgram {
    /// Maps a program solution back to the full problem vector.
    pub fn recover(&self, x: &[f64]) -> Vec<f64> {
        self.column.iter().zip(&self.fixed).map(|(c, &f)| c.map_or(f, |j| x[j])).collect()
    }

    /// Problem vector with the free columns at zero.
    pub fn fixed_values(&self) -> &[f64] {
        &self.fixed
    }

    /// Number of problem variables eliminated by fixing.
    pub fn num_fixed(&self) -> usize {
        self.column.iter().filter(|c| c.is_none()).count()
    }
}

/// Builds the polishing program for one restriction per atom.
pub fn compile_polish(p: &Problem, restrictions: &[Restriction], lambda: f64) -> Result<PolishProgram> {
    let n = p.num_vars();
    if restrictions.len() != p.atoms.len() {
        return invalid("need exactly one restriction per atom");
    }
    let mut is_fixed = vec![false; n];
    let mut fixed = vec![0.0; n];
    for (atom, r) in p.atoms.iter().zip(restrictions) {
        for &(j, val) in &r.fixed {
            if j >= atom.indices.len() {
                return invalid("restriction fixes a coordinate outside its atom");
            }
            is_fixed[atom.indices[j]] = true;
            fixed[atom.indices[j]] = val;
        }
    }
    let mut column = vec![None; n];
    let mut nfree = 0;
    for j in 0..n {
        if !is_fixed[j] {
            column[j] = Some(nfree);
            nfree += 1;
        }
    }

    let mut bld = Builder::new(nfree);
    let f = &p.objective;
    let mut constant = f.r0;
    for (i, j, v) in f.p.triplets() {
        match (column[i], column[j]) {
            (Some(ci), Some(cj)) => bld.p.push((ci, cj, v)),
            (Some(ci), None) => bld.q[ci] += 0.5 * v * fixed[j],
            (None, Some(cj)) => bld.q[cj] += 0.5 * v * fixed[i],
            (None, None) => constant += 0.5 * v * fixed[i] * fixed[j],
        }
    }
    for j in 0..n {
        match column[j] {
            Some(c) => bld.q[c] += f.q[j],
            None => constant += f.q[j] * fixed[j],
        }
    }

    for c in &p.constraints {
        let rows = substitute(rows_of(c, |j| j), &column, &fixed);
        if rows.iter().all(|r| r.0.is_empty()) {
            constant += lambda * c.violation(&fixed);
            continue;
        }
        soften(&mut bld, c.kind, rows, lambda);
    }

    for (atom, r) in p.atoms.iter().zip(restrictions) {
        let d = atom.indices.len();
        let aux = bld.add_vars(r.num_aux);
        for c in &r.constraints {
            let rows = rows_of(c, |j| if j < d { atom.indices[j] } else { n + aux + j - d });
            let mut rows = substitute_with_aux(rows, &column, &fixed, n);
            // rows over fixed coordinates hold at the anchor by construction
            match c.kind {
                ConeKind::Soc if rows.iter().all(|r| r.0.is_empty()) => continue,
                ConeKind::Soc => {}
                _ => rows.retain(|r| !r.0.is_empty()),
            }
            bld.push(c.kind, rows);
        }
    }

    Ok(PolishProgram { program: bld.build()?, constant, column, fixed })
}

/// Replaces problem columns by program columns, folding fixed ones into the
/// constant. Duplicate columns within a row are merged.
fn substitute(rows: Vec<Row>, column: &[Option<usize>], fixed: &[f64]) -> Vec<Row> {
    rows.into_iter()
        .map(|(terms, mut c)| {
            let mut acc: BTreeMap<usize, f64> = BTreeMap::new();
            for (j, v) in terms {
                match column[j] {
                    Some(cj) => *acc.entry(cj).or_insert(0.0) += v,
                    None => c += v * fixed[j],
                }
            }
            (acc.into_iter().filter(|&(_, v)| v != 0.0).collect(), c)
        })
        .collect()
}

/// As [`substitute`], but columns `>= n` are auxiliary program columns
/// offset by `n`.
fn substitute_with_aux(rows: Vec<Row>, column: &[Option<usize>], fixed: &[f64], n: usize) -> Vec<Row> {
    rows.into_iter()
        .map(|(terms, mut c)| {
            let mut acc: BTreeMap<usize, f64> = BTreeMap::new();
            for (j, v) in terms {
                if j >= n {
                    *acc.entry(j - n).or_insert(0.0) += v;
                } else {
                    match column[j] {
                        Some(cj) => *acc.entry(cj).or_insert(0.0) += v,
                        None => c += v * fixed[j],
                    }
                }
            }
            (acc.into_iter().filter(|&(_, v)| v != 0.0).collect(), c)
        })
        .collect()
}

/// Adds rows with nonnegative slacks so the cheapest violation costs
/// `lambda` times the residual contribution.
fn soften(bld: &mut Builder, kind: ConeKind, rows: Vec<Row>, lambda: f64) {
    match kind {
        ConeKind::Zero => {
            let k = rows.len();
            let off = bld.add_vars(2 * k);
            let mut eq = Vec::with_capacity(k);
            let mut pos = Vec::with_capacity(2 * k);
            for (r, (mut terms, c)) in rows.into_iter().enumerate() {
                let (sp, sn) = (off + 2 * r, off + 2 * r + 1);
                terms.push((sp, -1.0));
                terms.push((sn, 1.0));
                eq.push((terms, c));
                pos.push((vec![(sp, 1.0)], 0.0));
                pos.push((vec![(sn, 1.0)], 0.0));
                bld.q[sp] = lambda;
                bld.q[sn] = lambda;
            }
            bld.push(ConeKind::Zero, eq);
            bld.push(ConeKind::NonNeg, pos);
        }
        ConeKind::NonNeg => {
            let k = rows.len();
            let off = bld.add_vars(k);
            let mut out = Vec::with_capacity(2 * k);
            for (r, (mut terms, c)) in rows.into_iter().enumerate() {
                terms.push((off + r, 1.0));
                out.push((terms, c));
                bld.q[off + r] = lambda;
            }
            for r in 0..k {
                out.push((vec![(off + r, 1.0)], 0.0));
            }
            bld.push(ConeKind::NonNeg, out);
        }
        ConeKind::Soc => {
            let tau = bld.add_vars(1);
            bld.q[tau] = lambda;
            let mut rows = rows;
            rows[0].0.push((tau, 1.0));
            bld.push(ConeKind::Soc, rows);
            bld.push(ConeKind::NonNeg, vec![(vec![(tau, 1.0)], 0.0)]);
        }
    }
}
