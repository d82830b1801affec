//! Nonconvex sets: projection, convex relaxation, restriction at a point,
//! neighbors and an infinity-norm bound.
//!
//! Matrix-valued sets act on row-major vectorizations (`Z_ij` at `i * n + j`).
//! Constraint columns are local: `0..dim` are the set coordinates and
//! `dim..dim + num_aux` are auxiliary coordinates introduced by the set.

mod assignment;
mod combinatorics;
mod compose;
mod matrix;
mod quadratic;
mod sample;
mod scalar;
mod sparse;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::model::ConicConstraint;
use crate::numerics::{dist2_sq, Triplet};

pub use assignment::{project_assignment, project_cycle_approx};
pub use matrix::{project_bounded_sv, project_rank, project_sym_lowrank_psd};
pub use quadratic::{project_annulus, project_box_complement, project_quadratic};
pub use scalar::{project_boolean, project_finite, project_integer};
pub use sparse::{project_card, project_choose};

use quadratic::QuadraticSet;

fn one() -> usize {
    1
}

/// Serializable set description, tagged by `"type"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum SetDescriptor {
    Boolean {
        n: usize,
    },
    Finite {
        values: Vec<f64>,
        #[serde(default = "one")]
        n: usize,
    },
    Integer {
        n: usize,
        #[serde(rename = "M")]
        bound: f64,
    },
    Choose {
        n: usize,
        k: usize,
    },
    Card {
        n: usize,
        k: usize,
        #[serde(rename = "M")]
        bound: f64,
    },
    /// `{z : alpha <= z'Az + 2b'z <= beta}` with `A` positive definite.
    Quadratic {
        #[serde(rename = "A")]
        a: Vec<Triplet>,
        b: Vec<f64>,
        alpha: f64,
        beta: f64,
    },
    Annulus {
        n: usize,
        r: f64,
        #[serde(rename = "R")]
        outer: f64,
    },
    Sphere {
        n: usize,
        r: f64,
    },
    /// `{z : a <= ||z||_inf <= b}`.
    BoxComplement {
        n: usize,
        a: f64,
        b: f64,
    },
    /// `m x n` matrices with every singular value in `[1, alpha]`.
    BoundedSv {
        m: usize,
        n: usize,
        alpha: f64,
    },
    /// `m x n` matrices of rank at most `k` and spectral norm at most `M`.
    Rank {
        m: usize,
        n: usize,
        k: usize,
        #[serde(rename = "M")]
        bound: f64,
    },
    /// Symmetric PSD `n x n` matrices of rank at most `k`, eigenvalues at most `M`.
    SymLowRankPsd {
        n: usize,
        k: usize,
        #[serde(rename = "M")]
        bound: f64,
    },
    /// `m x n` 0/1 matrices with one 1 per column and at most one per row.
    Assign {
        m: usize,
        n: usize,
    },
    Permute {
        n: usize,
    },
    /// Adjacency matrices of Hamiltonian cycles on `n` nodes.
    Cycle {
        n: usize,
    },
    /// The convex box `lower <= z <= upper`.
    Box {
        lower: Vec<f64>,
        upper: Vec<f64>,
    },
    Product {
        parts: Vec<SetDescriptor>,
    },
    Union {
        parts: Vec<SetDescriptor>,
    },
}

/// Convex constraints in local coordinates.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConvexPart {
    pub constraints: Vec<ConicConstraint>,
    pub num_aux: usize,
}

/// Convex subset of a set containing an anchor point. Coordinates listed in
/// `fixed` are pinned; the remaining ones obey `constraints`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Restriction {
    pub fixed: Vec<(usize, f64)>,
    pub constraints: Vec<ConicConstraint>,
    pub num_aux: usize,
}

impl Restriction {
    /// The trivial restriction `{z}`.
    pub fn point(z: &[f64]) -> Self {
        Self { fixed: z.iter().copied().enumerate().collect(), constraints: Vec::new(), num_aux: 0 }
    }

    pub fn is_point(&self, dim: usize) -> bool {
        self.fixed.len() == dim && self.constraints.is_empty()
    }

    /// Renames local coordinates: set coordinate `j` becomes `offset + j`,
    /// auxiliary `j` becomes `aux_offset + j`.
    fn shifted(&self, dim: usize, offset: usize, aux_offset: usize) -> Self {
        Self {
            fixed: self.fixed.iter().map(|&(j, v)| (offset + j, v)).collect(),
            constraints: self.constraints.iter().map(|c| remap(c, dim, offset, aux_offset)).collect(),
            num_aux: self.num_aux,
        }
    }
}

fn remap(c: &ConicConstraint, dim: usize, offset: usize, aux_offset: usize) -> ConicConstraint {
    let a = c.a.iter().map(|&(i, j, v)| (i, if j < dim { offset + j } else { aux_offset + j - dim }, v)).collect();
    ConicConstraint::new(c.kind, a, c.b.clone())
}

#[derive(Debug, Clone)]
enum Kind {
    Boolean(usize),
    Finite { values: Vec<f64>, n: usize },
    Integer { n: usize, bound: f64 },
    Choose { n: usize, k: usize },
    Card { n: usize, k: usize, bound: f64 },
    Quadratic(Box<QuadraticSet>),
    Annulus { n: usize, r: f64, outer: f64 },
    BoxComplement { n: usize, a: f64, b: f64 },
    BoundedSv { m: usize, n: usize, alpha: f64 },
    Rank { m: usize, n: usize, k: usize, bound: f64 },
    SymLowRankPsd { n: usize, k: usize, bound: f64 },
    Assign { m: usize, n: usize },
    Cycle(usize),
    Box { lower: Vec<f64>, upper: Vec<f64> },
    Product(Vec<SetInstance>),
    Union(Vec<SetInstance>),
}

/// A validated set with any precomputed data it needs.
#[derive(Debug, Clone)]
pub struct SetInstance {
    desc: SetDescriptor,
    kind: Kind,
    dim: usize,
}

fn positive(x: f64, what: &str) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        invalid(format!("{what} must be positive and finite"))
    }
}

fn nonzero(n: usize, what: &str) -> Result<()> {
    if n == 0 {
        invalid(format!("{what} must be at least 1"))
    } else {
        Ok(())
    }
}

impl SetInstance {
    pub fn new(desc: SetDescriptor) -> Result<Self> {
        let (kind, dim) = match &desc {
            SetDescriptor::Boolean { n } => {
                nonzero(*n, "n")?;
                (Kind::Boolean(*n), *n)
            }
            SetDescriptor::Finite { values, n } => {
                nonzero(*n, "n")?;
                if values.is_empty() || values.iter().any(|v| !v.is_finite()) {
                    return invalid("finite set needs at least one finite value");
                }
                let mut v = values.clone();
                v.sort_by(f64::total_cmp);
                v.dedup();
                (Kind::Finite { values: v, n: *n }, *n)
            }
            SetDescriptor::Integer { n, bound } => {
                nonzero(*n, "n")?;
                positive(*bound, "M")?;
                (Kind::Integer { n: *n, bound: bound.floor() }, *n)
            }
            SetDescriptor::Choose { n, k } => {
                nonzero(*k, "k")?;
                if k > n {
                    return invalid("choose needs k <= n");
                }
                (Kind::Choose { n: *n, k: *k }, *n)
            }
            SetDescriptor::Card { n, k, bound } => {
                nonzero(*n, "n")?;
                nonzero(*k, "k")?;
                positive(*bound, "M")?;
                (Kind::Card { n: *n, k: (*k).min(*n), bound: *bound }, *n)
            }
            SetDescriptor::Quadratic { a, b, alpha, beta } => {
                let q = QuadraticSet::new(a, b, *alpha, *beta)?;
                let n = q.dim();
                (Kind::Quadratic(Box::new(q)), n)
            }
            SetDescriptor::Annulus { n, r, outer } => {
                nonzero(*n, "n")?;
                if !(*r >= 0.0 && outer >= r && outer.is_finite()) {
                    return invalid("annulus needs 0 <= r <= R");
                }
                (Kind::Annulus { n: *n, r: *r, outer: *outer }, *n)
            }
            SetDescriptor::Sphere { n, r } => {
                nonzero(*n, "n")?;
                if !(*r >= 0.0 && r.is_finite()) {
                    return invalid("sphere needs r >= 0");
                }
                (Kind::Annulus { n: *n, r: *r, outer: *r }, *n)
            }
            SetDescriptor::BoxComplement { n, a, b } => {
                nonzero(*n, "n")?;
                if !(*a >= 0.0 && b >= a && b.is_finite()) {
                    return invalid("box complement needs 0 <= a <= b");
                }
                (Kind::BoxComplement { n: *n, a: *a, b: *b }, *n)
            }
            SetDescriptor::BoundedSv { m, n, alpha } => {
                nonzero(*m, "m")?;
                nonzero(*n, "n")?;
                if !(*alpha >= 1.0 && alpha.is_finite()) {
                    return invalid("bounded singular values need alpha >= 1");
                }
                (Kind::BoundedSv { m: *m, n: *n, alpha: *alpha }, m * n)
            }
            SetDescriptor::Rank { m, n, k, bound } => {
                nonzero(*m, "m")?;
                nonzero(*n, "n")?;
                nonzero(*k, "k")?;
                positive(*bound, "M")?;
                (Kind::Rank { m: *m, n: *n, k: (*k).min(*m.min(n)), bound: *bound }, m * n)
            }
            SetDescriptor::SymLowRankPsd { n, k, bound } => {
                nonzero(*n, "n")?;
                nonzero(*k, "k")?;
                positive(*bound, "M")?;
                (Kind::SymLowRankPsd { n: *n, k: (*k).min(*n), bound: *bound }, n * n)
            }
            SetDescriptor::Assign { m, n } => {
                nonzero(*n, "n")?;
                if m < n {
                    return invalid("assignment needs m >= n");
                }
                (Kind::Assign { m: *m, n: *n }, m * n)
            }
            SetDescriptor::Permute { n } => {
                nonzero(*n, "n")?;
                (Kind::Assign { m: *n, n: *n }, n * n)
            }
            SetDescriptor::Cycle { n } => {
                if *n < 3 {
                    return invalid("cycle needs n >= 3");
                }
                (Kind::Cycle(*n), n * n)
            }
            SetDescriptor::Box { lower, upper } => {
                if lower.is_empty() || lower.len() != upper.len() {
                    return invalid("box bounds must be nonempty and of equal length");
                }
                if lower.iter().zip(upper).any(|(l, u)| !(l <= u) || !l.is_finite() || !u.is_finite()) {
                    return invalid("box needs finite lower <= upper");
                }
                (Kind::Box { lower: lower.clone(), upper: upper.clone() }, lower.len())
            }
            SetDescriptor::Product { parts } => {
                if parts.is_empty() {
                    return invalid("product needs at least one part");
                }
                let parts = parts.iter().cloned().map(SetInstance::new).collect::<Result<Vec<_>>>()?;
                let d = parts.iter().map(|p| p.dim).sum();
                (Kind::Product(parts), d)
            }
            SetDescriptor::Union { parts } => {
                if parts.is_empty() {
                    return invalid("union needs at least one part");
                }
                let parts = parts.iter().cloned().map(SetInstance::new).collect::<Result<Vec<_>>>()?;
                let d = parts[0].dim;
                if parts.iter().any(|p| p.dim != d) {
                    return invalid("union parts must share a dimension");
                }
                (Kind::Union(parts), d)
            }
        };
        Ok(Self { desc, kind, dim })
    }

    pub fn descriptor(&self) -> &SetDescriptor {
        &self.desc
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    fn check_len(&self, z: &[f64]) -> Result<()> {
        if z.len() != self.dim {
            return invalid(format!("expected a vector of length {}, got {}", self.dim, z.len()));
        }
        if z.iter().any(|x| !x.is_finite()) {
            return invalid("non-finite input to projection");
        }
        Ok(())
    }

    /// Euclidean projection (approximate for cycles).
    pub fn project(&self, z: &[f64]) -> Result<Vec<f64>> {
        self.check_len(z)?;
        Ok(match &self.kind {
            Kind::Boolean(_) => project_boolean(z),
            Kind::Finite { values, .. } => z.iter().map(|&x| project_finite(values, x)).collect(),
            Kind::Integer { bound, .. } => project_integer(z, *bound),
            Kind::Choose { k, .. } => project_choose(z, *k),
            Kind::Card { k, bound, .. } => project_card(z, *k, *bound),
            Kind::Quadratic(q) => q.project(z)?,
            Kind::Annulus { r, outer, .. } => project_annulus(z, *r, *outer),
            Kind::BoxComplement { a, b, .. } => project_box_complement(z, *a, *b),
            Kind::BoundedSv { m, n, alpha } => matrix::bounded_sv(z, *m, *n, *alpha)?,
            Kind::Rank { m, n, k, bound } => matrix::rank(z, *m, *n, *k, *bound)?,
            Kind::SymLowRankPsd { n, k, bound } => matrix::sym_lowrank_psd(z, *n, *k, *bound)?,
            Kind::Assign { m, n } => assignment::assign(z, *m, *n),
            Kind::Cycle(n) => assignment::cycle(z, *n),
            Kind::Box { lower, upper } => {
                z.iter().zip(lower.iter().zip(upper)).map(|(x, (l, u))| x.clamp(*l, *u)).collect()
            }
            Kind::Product(parts) => compose::project_product(parts, z)?,
            Kind::Union(parts) => compose::project_union(parts, z)?.0,
        })
    }

    /// Squared distance from `z` to its projection.
    pub fn dist2_to(&self, z: &[f64]) -> Result<f64> {
        Ok(dist2_sq(z, &self.project(z)?))
    }

    /// Membership test via the projection, up to `tol` in Euclidean distance.
    pub fn contains(&self, z: &[f64], tol: f64) -> bool {
        self.dist2_to(z).is_ok_and(|d| d.sqrt() <= tol)
    }

    /// Constraints implied by membership.
    pub fn relax(&self) -> ConvexPart {
        match &self.kind {
            Kind::Boolean(n) => scalar::box_part(*n, 0.0, 1.0),
            Kind::Finite { values, n } => scalar::box_part(*n, values[0], values[values.len() - 1]),
            Kind::Integer { n, bound } => scalar::box_part(*n, -bound, *bound),
            Kind::Choose { n, k } => sparse::choose_relax(*n, *k),
            Kind::Card { n, k, bound } => sparse::card_relax(*n, *k, *bound),
            Kind::Quadratic(q) => q.relax(),
            Kind::Annulus { n, outer, .. } => quadratic::ball_part(*n, *outer),
            Kind::BoxComplement { n, b, .. } => scalar::box_part(*n, -b, *b),
            Kind::BoundedSv { m, n, alpha } => matrix::frobenius_box_relax(*m, *n, *alpha, (*m.min(n)) as f64),
            Kind::Rank { m, n, k, bound } => matrix::frobenius_box_relax(*m, *n, *bound, *k as f64),
            Kind::SymLowRankPsd { n, k, bound } => matrix::sym_lowrank_relax(*n, *k, *bound),
            Kind::Assign { m, n } => assignment::assign_relax(*m, *n),
            Kind::Cycle(n) => assignment::cycle_relax(*n),
            Kind::Box { lower, upper } => scalar::box_part_vec(lower, upper),
            Kind::Product(parts) => compose::product_relax(parts),
            Kind::Union(parts) => compose::union_relax(parts),
        }
    }

    /// Convex restriction at `z`; `z` is projected first if it is not a member.
    pub fn restrict_at(&self, z: &[f64]) -> Result<Restriction> {
        self.check_len(z)?;
        let anchor = self.project(z)?;
        let z: &[f64] = if dist2_sq(&anchor, z).sqrt() <= 1e-6 { z } else { &anchor };
        Ok(match &self.kind {
            Kind::Boolean(_)
            | Kind::Finite { .. }
            | Kind::Integer { .. }
            | Kind::Choose { .. }
            | Kind::Assign { .. }
            | Kind::Cycle(_) => Restriction::point(z),
            Kind::Card { n, k, bound } => sparse::card_restrict(z, *n, *k, *bound),
            Kind::Quadratic(q) => q.restrict(z),
            Kind::Annulus { n, r, outer } => quadratic::annulus_restrict(z, *n, *r, *outer),
            Kind::BoxComplement { n, a, b } => quadratic::box_complement_restrict(z, *n, *a, *b),
            Kind::BoundedSv { m, n, alpha } => matrix::bounded_sv_restrict(z, *m, *n, *alpha)?,
            Kind::Rank { m, n, k, bound } => matrix::rank_restrict(z, *m, *n, *k, *bound)?,
            Kind::SymLowRankPsd { n, k, bound } => matrix::sym_lowrank_restrict(z, *n, *k, *bound)?,
            Kind::Box { lower, upper } => {
                let part = scalar::box_part_vec(lower, upper);
                Restriction { fixed: Vec::new(), constraints: part.constraints, num_aux: 0 }
            }
            Kind::Product(parts) => compose::product_restrict(parts, z)?,
            Kind::Union(parts) => {
                let i = compose::project_union(parts, z)?.1;
                parts[i].restrict_at(z)?
            }
        })
    }

    /// Members at unit discrete distance from `z`; empty for continuous sets.
    pub fn neighbors(&self, z: &[f64]) -> Result<Vec<Vec<f64>>> {
        self.check_len(z)?;
        let z = self.project(z)?;
        Ok(match &self.kind {
            Kind::Boolean(_) => scalar::boolean_neighbors(&z),
            Kind::Finite { values, .. } => scalar::finite_neighbors(values, &z),
            Kind::Integer { bound, .. } => scalar::integer_neighbors(*bound, &z),
            Kind::Choose { .. } => sparse::choose_neighbors(&z),
            Kind::Card { .. } => sparse::card_neighbors(&z),
            Kind::Assign { m, n } => assignment::assign_neighbors(&z, *m, *n),
            Kind::Cycle(n) => assignment::cycle_neighbors(&z, *n),
            Kind::Product(parts) => compose::product_neighbors(parts, &z)?,
            Kind::Union(parts) => {
                let i = compose::project_union(parts, &z)?.1;
                parts[i].neighbors(&z)?
            }
            _ => Vec::new(),
        })
    }

    /// Bound on `||z||_inf` over the set.
    pub fn box_bound(&self) -> f64 {
        match &self.kind {
            Kind::Boolean(_) | Kind::Choose { .. } | Kind::Assign { .. } | Kind::Cycle(_) => 1.0,
            Kind::Finite { values, .. } => values.iter().fold(0.0f64, |m, v| m.max(v.abs())),
            Kind::Integer { bound, .. } => *bound,
            Kind::Card { bound, .. } | Kind::Rank { bound, .. } | Kind::SymLowRankPsd { bound, .. } => *bound,
            Kind::Quadratic(q) => q.box_bound(),
            Kind::Annulus { outer, .. } => *outer,
            Kind::BoxComplement { b, .. } => *b,
            Kind::BoundedSv { alpha, .. } => *alpha,
            Kind::Box { lower, upper } => lower.iter().chain(upper).fold(0.0f64, |m, v| m.max(v.abs())),
            Kind::Product(parts) | Kind::Union(parts) => parts.iter().fold(0.0f64, |m, p| m.max(p.box_bound())),
        }
    }

    /// True when the set is a finite point set.
    pub fn is_discrete(&self) -> bool {
        match &self.kind {
            Kind::Boolean(_)
            | Kind::Finite { .. }
            | Kind::Integer { .. }
            | Kind::Choose { .. }
            | Kind::Assign { .. }
            | Kind::Cycle(_) => true,
            Kind::Product(parts) | Kind::Union(parts) => parts.iter().all(|p| p.is_discrete()),
            _ => false,
        }
    }

    /// Number of pieces [`Self::pieces`] would return, saturating; `None`
    /// when the set has no finite decomposition into convex pieces.
    pub fn piece_count(&self) -> Option<u128> {
        use combinatorics::{binomial, falling_factorial, saturating_pow};
        match &self.kind {
            Kind::Boolean(n) => Some(saturating_pow(2, *n)),
            Kind::Finite { values, n } => Some(saturating_pow(values.len() as u128, *n)),
            Kind::Integer { n, bound } => Some(saturating_pow(2 * (*bound as u128) + 1, *n)),
            Kind::Choose { n, k } | Kind::Card { n, k, .. } => Some(binomial(*n, *k)),
            Kind::Assign { m, n } => Some(falling_factorial(*m, *n)),
            Kind::Cycle(n) => Some(falling_factorial(n - 1, n - 1) / 2),
            Kind::BoxComplement { n, .. } => Some(2 * *n as u128),
            Kind::Box { .. } => Some(1),
            Kind::Product(parts) => {
                parts.iter().try_fold(1u128, |acc, p| p.piece_count().map(|c| acc.saturating_mul(c)))
            }
            Kind::Union(parts) => parts.iter().try_fold(0u128, |acc, p| p.piece_count().map(|c| acc.saturating_add(c))),
            _ => None,
        }
    }

    /// Decomposes the set into finitely many convex pieces: every member of
    /// a discrete set, supports for cardinality sets, sign/axis faces for box
    /// complements. Refuses when there are more than `limit` pieces.
    pub fn pieces(&self, limit: u128) -> Result<Option<Vec<Restriction>>> {
        let Some(count) = self.piece_count() else {
            return Ok(None);
        };
        if count > limit {
            return Err(Error::BudgetExceeded { count, limit });
        }
        Ok(Some(match &self.kind {
            Kind::Card { n, k, bound } => sparse::card_pieces(*n, *k, *bound),
            Kind::BoxComplement { n, a, b } => quadratic::box_complement_pieces(*n, *a, *b),
            Kind::Box { .. } => vec![self.restrict_at(&self.project(&vec![0.0; self.dim])?)?],
            Kind::Product(parts) => compose::product_pieces(parts, limit)?,
            Kind::Union(parts) => {
                let mut out = Vec::new();
                for p in parts {
                    out.extend(p.pieces(limit)?.expect("counted"));
                }
                out
            }
            _ => self.members()?.iter().map(|z| Restriction::point(z)).collect(),
        }))
    }

    /// All members of a discrete set in lexicographic order.
    fn members(&self) -> Result<Vec<Vec<f64>>> {
        Ok(match &self.kind {
            Kind::Boolean(n) => combinatorics::grid(&[0.0, 1.0], *n),
            Kind::Finite { values, n } => combinatorics::grid(values, *n),
            Kind::Integer { n, bound } => {
                let b = *bound as i64;
                let vals: Vec<f64> = (-b..=b).map(|v| v as f64).collect();
                combinatorics::grid(&vals, *n)
            }
            Kind::Choose { n, k } => combinatorics::combinations(*n, *k)
                .into_iter()
                .map(|c| {
                    let mut z = vec![0.0; *n];
                    c.iter().for_each(|&i| z[i] = 1.0);
                    z
                })
                .collect(),
            Kind::Assign { m, n } => assignment::assign_members(*m, *n),
            Kind::Cycle(n) => assignment::cycle_members(*n),
            _ => return invalid("set is not discrete"),
        })
    }
}

/// Lower/upper bound rows `lo <= z_j <= hi` for each listed coordinate.
pub(crate) fn bound_rows(idx: impl IntoIterator<Item = usize>, lo: f64, hi: f64) -> ConicConstraint {
    let mut a = Vec::new();
    let mut b = Vec::new();
    for j in idx {
        a.push((b.len(), j, 1.0));
        b.push(-lo);
        a.push((b.len(), j, -1.0));
        b.push(hi);
    }
    ConicConstraint::new(crate::conic::ConeKind::NonNeg, a, b)
}
