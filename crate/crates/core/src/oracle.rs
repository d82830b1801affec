//! Exhaustive enumeration over atoms with finitely many convex pieces.
//!
//! Every combination of pieces is polished and the least merit wins; ties go
//! to the combination listed first (last atom varies fastest).

use std::sync::atomic::{AtomicU64, Ordering};

use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::heuristics::Session;
use crate::model::{Candidate, Problem};
use crate::sets::{Restriction, SetDescriptor, SetInstance};

/// Largest number of combinations the oracle will attempt.
pub const MAX_COMBINATIONS: u128 = 10_000_000;

/// Members of a discrete set, or the support patterns (as 0/1 vectors) of a
/// cardinality set, in enumeration order.
pub fn enumerate_members(set: &SetInstance, limit: u128) -> Result<Vec<Vec<f64>>> {
    let card = matches!(set.descriptor(), SetDescriptor::Card { .. });
    if !set.is_discrete() && !card {
        return invalid("set has no finite member list");
    }
    let pieces = set.pieces(limit)?.expect("discrete sets decompose");
    let dim = set.dim();
    Ok(pieces
        .iter()
        .map(|r| {
            if card {
                let mut z = vec![1.0; dim];
                r.fixed.iter().for_each(|&(j, _)| z[j] = 0.0);
                z
            } else {
                let mut z = vec![0.0; dim];
                r.fixed.iter().for_each(|&(j, v)| z[j] = v);
                z
            }
        })
        .collect())
}

/// Convex pieces for every atom of a problem.
#[derive(Debug, Clone)]
pub struct EnumerationPlan {
    pieces: Vec<Vec<Restriction>>,
    count: u128,
}

impl EnumerationPlan {
    pub fn new(p: &Problem, limit: u128) -> Result<Self> {
        let limit = limit.min(MAX_COMBINATIONS);
        let mut count: u128 = 1;
        for a in p.atoms() {
            match a.set.piece_count() {
                Some(c) => count = count.saturating_mul(c),
                None => return invalid("an atom has no finite decomposition into convex pieces"),
            }
        }
        if count > limit {
            return Err(Error::BudgetExceeded { count, limit });
        }
        let pieces = p
            .atoms()
            .iter()
            .map(|a| a.set.pieces(limit).map(|o| o.expect("counted above")))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { pieces, count })
    }

    pub fn count(&self) -> u128 {
        self.count
    }

    pub fn pieces(&self) -> &[Vec<Restriction>] {
        &self.pieces
    }

    /// Restrictions of combination `idx`.
    pub fn combination(&self, mut idx: u128) -> Vec<Restriction> {
        let mut out = vec![Restriction::default(); self.pieces.len()];
        for (slot, list) in out.iter_mut().zip(&self.pieces).rev() {
            let len = list.len() as u128;
            *slot = list[(idx % len) as usize].clone();
            idx /= len;
        }
        out
    }
}

/// Result of an oracle run.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub candidate: Candidate,
    /// Index of the winning combination.
    pub combination: u128,
    /// Convex solves performed; fully pinned combinations need none.
    pub subproblems: u64,
}

/// Exact minimum merit over all piece combinations.
pub fn oracle_solve(p: &Problem, lambda: f64) -> Result<OracleResult> {
    oracle_solve_with(p, lambda, MAX_COMBINATIONS)
}

pub fn oracle_solve_with(p: &Problem, lambda: f64, limit: u128) -> Result<OracleResult> {
    let plan = EnumerationPlan::new(p, limit)?;
    let total = plan.count() as u64;
    let solves = AtomicU64::new(0);
    let best = (0..total)
        .into_par_iter()
        .map(|i| {
            let mut sess = Session::new(p, lambda);
            let out = sess.polish_restricted(&plan.combination(u128::from(i)));
            solves.fetch_add(sess.subproblems(), Ordering::Relaxed);
            out.map(|c| c.map(|c| (i, c)))
        })
        .try_fold(|| None, |acc: Option<(u64, Candidate)>, r| r.map(|item| pick_pair(acc, item)))
        .try_reduce(|| None, |a, b| Ok(pick_pair(a, b)))?;
    match best {
        Some((i, candidate)) => {
            Ok(OracleResult { candidate, combination: u128::from(i), subproblems: solves.into_inner() })
        }
        None => Err(Error::Numerical("every oracle subproblem failed".into())),
    }
}

/// Lower merit wins; equal merits go to the lower index.
fn pick_pair(a: Option<(u64, Candidate)>, b: Option<(u64, Candidate)>) -> Option<(u64, Candidate)> {
    match (a, b) {
        (None, x) | (x, None) => x,
        (Some(a), Some(b)) => {
            if (b.1.merit, b.0) < (a.1.merit, a.0) {
                Some(b)
            } else {
                Some(a)
            }
        }
    }
}
