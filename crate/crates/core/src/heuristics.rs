//! Polishing, relax-round-polish, neighbor search and nonconvex ADMM.
//!
//! Atom coordinates are passed around as one flat vector in atom order (see
//! [`Problem::gather_atoms`]). Every convex solve goes through a [`Session`],
//! which counts it.

use std::collections::HashMap;

use log::{debug, warn};
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::conic::{solve_cone_qp, ConeProgram, ConicSolution, SolveStatus};
use crate::error::{invalid, Error, Result};
use crate::model::{compile, compile_polish, Candidate, Problem, QuadraticForm, DEFAULT_LAMBDA};
use crate::numerics::{dot, norm_inf};
use crate::sets::Restriction;

/// How the ADMM penalty is chosen for each restart.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RhoChoice {
    Fixed(f64),
    /// Drawn once per restart from `[lo, hi)`.
    Uniform {
        lo: f64,
        hi: f64,
    },
}

/// Argument of the projection in the z-update.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AdmmVariant {
    /// `z = Pi(w - z + u)`.
    #[default]
    Paper,
    /// `z = Pi(w + u)`, the textbook scaled form.
    Standard,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeuristicConfig {
    pub lambda: f64,
    pub restarts: usize,
    pub iterations: usize,
    pub rho: RhoChoice,
    pub sigma: f64,
    /// Rounding samples in relax-round-polish.
    pub round_samples: usize,
    pub seed: u64,
    pub variant: AdmmVariant,
    /// Polish calls allowed for the neighbor search after each ADMM step;
    /// also the number of neighbors sampled when a point has more.
    pub neighbor_budget: usize,
    /// Polish calls allowed for a standalone iterative neighbor search.
    pub search_cap: usize,
    pub polish_rounds: usize,
    /// Run restarts on the rayon pool. Results do not depend on this.
    pub parallel: bool,
}

impl Default for HeuristicConfig {
    fn default() -> Self {
        Self {
            lambda: DEFAULT_LAMBDA,
            restarts: 5,
            iterations: 50,
            rho: RhoChoice::Uniform { lo: 0.0, hi: 1.0 },
            sigma: 1.0,
            round_samples: 1,
            seed: 0,
            variant: AdmmVariant::Paper,
            neighbor_budget: 100,
            search_cap: 1000,
            polish_rounds: 50,
            parallel: true,
        }
    }
}

impl HeuristicConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda.is_finite() && self.lambda > 0.0) {
            return invalid("lambda must be positive");
        }
        if !(self.sigma.is_finite() && self.sigma > 0.0) {
            return invalid("sigma must be positive");
        }
        if self.restarts == 0 || self.iterations == 0 || self.round_samples == 0 {
            return invalid("restarts, iterations and round samples must be at least 1");
        }
        if self.neighbor_budget == 0 || self.search_cap == 0 || self.polish_rounds == 0 {
            return invalid("search budgets must be at least 1");
        }
        match self.rho {
            RhoChoice::Fixed(r) if !(r.is_finite() && r > 0.0) => invalid("rho must be positive"),
            RhoChoice::Uniform { lo, hi } if !(lo >= 0.0 && hi > lo && hi.is_finite()) => {
                invalid("rho range must satisfy 0 <= lo < hi")
            }
            _ => Ok(()),
        }
    }
}

/// ADMM iterates over the atom coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct AdmmState {
    pub z: Vec<f64>,
    pub w: Vec<f64>,
    pub u: Vec<f64>,
    pub k: usize,
}

impl AdmmState {
    pub fn new(z0: Vec<f64>) -> Self {
        let q = z0.len();
        Self { z: z0, w: vec![0.0; q], u: vec![0.0; q], k: 0 }
    }

    /// Projection argument for the z-update.
    fn target(&self, variant: AdmmVariant) -> Vec<f64> {
        match variant {
            AdmmVariant::Paper => self.w.iter().zip(&self.z).zip(&self.u).map(|((w, z), u)| w - z + u).collect(),
            AdmmVariant::Standard => self.w.iter().zip(&self.u).map(|(w, u)| w + u).collect(),
        }
    }
}

/// Summary of a heuristic run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    /// Convex programs solved, including trivial ones with every variable fixed.
    pub subproblems: u64,
    /// Optimal value of the relaxation.
    pub lower_bound: f64,
    /// Penalty used by each restart (empty for relax-round-polish).
    pub rhos: Vec<f64>,
    /// Neighbor searches stopped by their polish budget.
    pub truncated_searches: u64,
}

/// Result of an iterative neighbor search.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchResult {
    pub candidate: Candidate,
    /// The polish budget ran out before a local minimum was confirmed.
    pub truncated: bool,
}

/// Shared context for the heuristics on one problem: merit weight, the seed
/// for neighbor sampling, and the count of convex solves.
#[derive(Debug)]
pub struct Session<'a> {
    problem: &'a Problem,
    lambda: f64,
    seed: u64,
    subproblems: u64,
}

impl<'a> Session<'a> {
    pub fn new(problem: &'a Problem, lambda: f64) -> Self {
        Self { problem, lambda, seed: 0, subproblems: 0 }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn problem(&self) -> &'a Problem {
        self.problem
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn subproblems(&self) -> u64 {
        self.subproblems
    }

    fn solve(&mut self, cp: &ConeProgram, warm: Option<(&[f64], &[f64])>) -> Result<ConicSolution> {
        self.subproblems += 1;
        solve_cone_qp(cp, warm)
    }

    fn check_atoms(&self, z: &[f64]) -> Result<()> {
        if z.len() != self.problem.atom_dim() {
            return invalid(format!("expected {} atom coordinates, got {}", self.problem.atom_dim(), z.len()));
        }
        Ok(())
    }

    /// `v` with its atom coordinates replaced by their projection.
    fn snap(&self, mut v: Vec<f64>) -> Result<Vec<f64>> {
        let z = self.problem.project_atoms(&self.problem.gather_atoms(&v))?;
        self.problem.scatter_atoms(&z, &mut v);
        Ok(v)
    }

    /// Minimizes the merit with each atom confined to its restriction at
    /// `z`. `None` when the convex solve fails.
    pub fn polish(&mut self, z: &[f64]) -> Result<Option<Candidate>> {
        self.check_atoms(z)?;
        let p = self.problem;
        let mut restrictions = Vec::with_capacity(p.atoms().len());
        let mut off = 0;
        for a in p.atoms() {
            let d = a.indices.len();
            restrictions.push(a.set.restrict_at(&z[off..off + d])?);
            off += d;
        }
        self.polish_restricted(&restrictions)
    }

    /// Polishes with explicit restrictions, one per atom, in local coordinates.
    pub fn polish_restricted(&mut self, restrictions: &[Restriction]) -> Result<Option<Candidate>> {
        let p = self.problem;
        if restrictions.len() == p.atoms().len() && p.atom_dim() == p.num_vars() {
            // every variable pinned: evaluation only, no convex solve
            let pinned = p.atoms().iter().zip(restrictions).all(|(a, r)| r.is_point(a.indices.len()) && r.num_aux == 0);
            if pinned {
                let mut v = vec![0.0; p.num_vars()];
                for (a, r) in p.atoms().iter().zip(restrictions) {
                    for &(j, x) in &r.fixed {
                        v[a.indices[j]] = x;
                    }
                }
                return Ok(Some(Candidate::evaluate(p, self.snap(v)?, self.lambda)));
            }
        }
        let prog = compile_polish(p, restrictions, self.lambda)?;
        let v = if prog.program.num_vars() == 0 {
            prog.recover(&[])
        } else {
            match self.solve(&prog.program, None) {
                Ok(sol) if matches!(sol.status, SolveStatus::Optimal | SolveStatus::MaxIters) => prog.recover(&sol.v),
                Ok(sol) => {
                    debug!("polish subproblem ended with status {:?}", sol.status);
                    return Ok(None);
                }
                Err(e @ Error::InvalidInput(_)) => return Err(e),
                Err(e) => {
                    debug!("polish subproblem failed: {e}");
                    return Ok(None);
                }
            }
        };
        Ok(Some(Candidate::evaluate(p, self.snap(v)?, self.lambda)))
    }

    /// Polishes repeatedly, re-anchoring at each output, until the atom
    /// coordinates stop moving, the merit stops improving, or `rounds`
    /// polishes have been done.
    pub fn iterated_polish(&mut self, z: &[f64], rounds: usize) -> Result<Option<Candidate>> {
        self.check_atoms(z)?;
        let p = self.problem;
        let mut anchor = p.project_atoms(z)?;
        let Some(mut best) = self.polish(&anchor)? else {
            return Ok(None);
        };
        for _ in 1..rounds {
            let next = p.gather_atoms(&best.v);
            if same_point(&next, &anchor) {
                break;
            }
            match self.polish(&next)? {
                Some(c) if c.merit < best.merit => {
                    best = c;
                    anchor = next;
                }
                _ => break,
            }
        }
        Ok(Some(best))
    }

    /// Neighbors of `z` over all atoms, each differing from `z` in a single
    /// atom. When there are more than `budget`, a deterministic sample of
    /// `budget` of them is returned in their original order.
    pub fn neighbors(&self, z: &[f64], budget: usize) -> Result<Vec<Vec<f64>>> {
        self.check_atoms(z)?;
        let mut out = Vec::new();
        let mut off = 0;
        for a in self.problem.atoms() {
            let d = a.indices.len();
            for nb in a.set.neighbors(&z[off..off + d])? {
                let mut full = z.to_vec();
                full[off..off + d].copy_from_slice(&nb);
                out.push(full);
            }
            off += d;
        }
        if out.len() <= budget {
            return Ok(out);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed ^ fingerprint(z));
        let mut picks = sample(&mut rng, out.len(), budget).into_vec();
        picks.sort_unstable();
        Ok(picks.into_iter().map(|i| std::mem::take(&mut out[i])).collect())
    }

    /// Polishes `z` and up to `budget` of its neighbors; returns the least
    /// merit found.
    pub fn basic_neighbor_search(&mut self, z: &[f64], budget: usize) -> Result<Option<Candidate>> {
        self.check_atoms(z)?;
        let start = self.problem.project_atoms(z)?;
        let mut best: Option<Candidate> = self.polish(&start)?;
        for nb in self.neighbors(&start, budget)? {
            if let Some(c) = self.polish(&nb)? {
                if best.as_ref().is_none_or(|b| c.merit < b.merit) {
                    best = Some(c);
                }
            }
        }
        Ok(best)
    }

    /// Hill climbing over neighbors. The first scan covers `z` and all of its
    /// (sampled) neighbors, exactly as [`Self::basic_neighbor_search`]; after
    /// that the scan restarts from each strictly improving candidate. Stops
    /// at a local minimum or after `cap` polishes.
    pub fn iterative_neighbor_search(&mut self, z: &[f64], budget: usize, cap: usize) -> Result<Option<SearchResult>> {
        self.check_atoms(z)?;
        let p = self.problem;
        let start = p.project_atoms(z)?;
        let mut seen: HashMap<Vec<u64>, Option<Candidate>> = HashMap::new();
        let mut calls = 0usize;
        let mut truncated = false;

        let mut best: Option<Candidate> = None;
        let mut first = vec![start.clone()];
        first.extend(self.neighbors(&start, budget)?);
        for nb in first {
            if calls >= cap {
                truncated = true;
                break;
            }
            if let Some(c) = self.polish_cached(&nb, &mut seen, &mut calls)? {
                if best.as_ref().is_none_or(|b| c.merit < b.merit) {
                    best = Some(c);
                }
            }
        }
        let Some(mut best) = best else {
            return Ok(None);
        };

        'climb: while !truncated {
            let zb = p.gather_atoms(&best.v);
            for nb in self.neighbors(&zb, budget)? {
                if calls >= cap {
                    truncated = true;
                    break 'climb;
                }
                if let Some(c) = self.polish_cached(&nb, &mut seen, &mut calls)? {
                    if improves(c.merit, best.merit) {
                        best = c;
                        continue 'climb;
                    }
                }
            }
            break;
        }
        Ok(Some(SearchResult { candidate: best, truncated }))
    }

    fn polish_cached(
        &mut self,
        z: &[f64],
        seen: &mut HashMap<Vec<u64>, Option<Candidate>>,
        calls: &mut usize,
    ) -> Result<Option<Candidate>> {
        let key: Vec<u64> = z.iter().map(|x| x.to_bits()).collect();
        if let Some(c) = seen.get(&key) {
            return Ok(c.clone());
        }
        *calls += 1;
        let c = self.polish(z)?;
        seen.insert(key, c.clone());
        Ok(c)
    }

    /// Solves the relaxation; returns its optimal value and the problem
    /// variables of its solution.
    pub fn solve_relaxation(&mut self) -> Result<(f64, Vec<f64>)> {
        let p = self.problem;
        let cp = compile(p, true, &[], None)?;
        let sol = self.solve(&cp, None)?;
        match sol.status {
            SolveStatus::Infeasible => return Err(Error::Infeasible),
            SolveStatus::Unbounded => return Err(Error::Unbounded),
            SolveStatus::MaxIters => warn!("relaxation hit the iteration limit; bound is approximate"),
            SolveStatus::Optimal => {}
        }
        // Dual objective -v'Pv/2 - b'y; the smaller of the two objectives keeps
        // solver inaccuracy on the conservative side.
        let pv = cp.p.apply(&sol.v);
        let dual = -0.5 * dot(&sol.v, &pv) - dot(&cp.b, &sol.y) + p.objective_form().r0;
        let v = sol.v[..p.num_vars()].to_vec();
        Ok((p.objective(&v).min(dual), v))
    }
}

fn improves(new: f64, old: f64) -> bool {
    new < old - 1e-12 * old.abs().max(1.0)
}

fn same_point(a: &[f64], b: &[f64]) -> bool {
    let scale = norm_inf(b).max(1.0);
    a.iter().zip(b).all(|(x, y)| (x - y).abs() <= 1e-7 * scale)
}

/// FNV-1a over the bit patterns of `z`.
fn fingerprint(z: &[f64]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for x in z {
        for byte in x.to_bits().to_le_bytes() {
            h ^= u64::from(byte);
            h = h.wrapping_mul(0x0100_0000_01b3);
        }
    }
    h
}

fn gaussian(rng: &mut ChaCha8Rng, sigma: f64, len: usize) -> Vec<f64> {
    let normal = Normal::new(0.0, sigma).expect("sigma validated");
    (0..len).map(|_| normal.sample(rng)).collect()
}

fn better(new: &Candidate, old: &Option<Candidate>) -> bool {
    old.as_ref().is_none_or(|b| new.merit < b.merit)
}

/// Lower bound must not exceed the merit of a feasible candidate beyond
/// the tolerance of the convex solver.
fn check_bound(bound: f64, c: &Candidate) {
    if !c.is_feasible() {
        return;
    }
    let tol = 1e-4 * bound.abs().max(c.merit.abs()).max(1.0);
    if bound > c.merit + tol {
        warn!("relaxation bound {bound} exceeds feasible merit {}", c.merit);
        debug_assert!(bound <= c.merit + tol, "bound {bound} above feasible merit {}", c.merit);
    }
}

/// Point with the atoms of `v` replaced by `z`.
fn with_atoms(p: &Problem, v: &[f64], z: &[f64]) -> Vec<f64> {
    let mut out = v.to_vec();
    p.scatter_atoms(z, &mut out);
    out
}

/// Solves the relaxation, returning its optimal value and solution.
pub fn solve_relaxation(p: &Problem) -> Result<(f64, Vec<f64>)> {
    Session::new(p, DEFAULT_LAMBDA).solve_relaxation()
}

pub fn polish(p: &Problem, z: &[f64], lambda: f64) -> Result<Option<Candidate>> {
    Session::new(p, lambda).polish(z)
}

pub fn iterated_polish(p: &Problem, z: &[f64], lambda: f64) -> Result<Option<Candidate>> {
    Session::new(p, lambda).iterated_polish(z, HeuristicConfig::default().polish_rounds)
}

pub fn basic_neighbor_search(p: &Problem, z: &[f64], lambda: f64) -> Result<Option<Candidate>> {
    Session::new(p, lambda).basic_neighbor_search(z, HeuristicConfig::default().neighbor_budget)
}

pub fn iterative_neighbor_search(p: &Problem, z: &[f64], lambda: f64) -> Result<Option<SearchResult>> {
    let cfg = HeuristicConfig::default();
    Session::new(p, lambda).iterative_neighbor_search(z, cfg.neighbor_budget, cfg.search_cap)
}

/// Relaxes, rounds `round_samples` perturbed copies of the relaxed atoms,
/// and polishes each; returns the least-merit candidate.
pub fn relax_round_polish(p: &Problem, cfg: &HeuristicConfig) -> Result<(Candidate, RunReport)> {
    cfg.validate()?;
    let mut sess = Session::new(p, cfg.lambda).with_seed(cfg.seed);
    let (bound, v_rlx) = sess.solve_relaxation()?;
    let z_rlx = p.gather_atoms(&v_rlx);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut best: Option<Candidate> = None;
    for k in 0..cfg.round_samples {
        let target: Vec<f64> = if k == 0 {
            z_rlx.clone()
        } else {
            z_rlx.iter().zip(gaussian(&mut rng, cfg.sigma, z_rlx.len())).map(|(a, b)| a + b).collect()
        };
        let z = p.project_atoms(&target)?;
        let c = match sess.iterated_polish(&z, cfg.polish_rounds)? {
            Some(c) => c,
            None => Candidate::evaluate(p, with_atoms(p, &v_rlx, &z), cfg.lambda),
        };
        if better(&c, &best) {
            best = Some(c);
        }
    }
    let best = best.expect("at least one sample");
    check_bound(bound, &best);
    let report =
        RunReport { subproblems: sess.subproblems(), lower_bound: bound, rhos: Vec::new(), truncated_searches: 0 };
    Ok((best, report))
}

struct RestartOutcome {
    best: Option<Candidate>,
    subproblems: u64,
    rho: f64,
    truncated: u64,
}

fn run_restart(p: &Problem, cfg: &HeuristicConfig, restart: usize) -> Result<RestartOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(restart as u64);
    let rho = match cfg.rho {
        RhoChoice::Fixed(r) => r,
        RhoChoice::Uniform { lo, hi } => rng.random_range(lo..hi),
    };
    let q = p.atom_dim();
    let z0 = if restart == 0 { vec![0.0; q] } else { gaussian(&mut rng, cfg.sigma, q) };
    let mut state = AdmmState::new(z0);
    let mut sess = Session::new(p, cfg.lambda).with_seed(cfg.seed);
    let mut best: Option<Candidate> = None;
    let mut truncated = 0;
    let mut warm: Option<(Vec<f64>, Vec<f64>)> = None;

    let n = p.num_vars();
    let mut atom_idx = Vec::with_capacity(q);
    for a in p.atoms() {
        atom_idx.extend_from_slice(&a.indices);
    }
    let diag: Vec<_> = atom_idx.iter().map(|&i| (i, i, rho)).collect();

    for k in 0..cfg.iterations {
        // (rho/2)||z - c||^2 with c = z^k - u^k, as a quadratic over all variables.
        let mut lin = vec![0.0; n];
        let mut r0 = 0.0;
        for (j, &i) in atom_idx.iter().enumerate() {
            let c = state.z[j] - state.u[j];
            lin[i] = -rho * c;
            r0 += 0.5 * rho * c * c;
        }
        let prox = QuadraticForm::new(n, &diag, lin, r0);
        let cp = compile(p, true, &[], Some(&prox))?;
        let ws = warm.as_ref().map(|(v, y)| (v.as_slice(), y.as_slice()));
        let sol = sess.solve(&cp, ws)?;
        match sol.status {
            SolveStatus::Infeasible => return Err(Error::Infeasible),
            SolveStatus::Unbounded => return Err(Error::Unbounded),
            SolveStatus::MaxIters => debug!("proximal step {k} hit the iteration limit"),
            SolveStatus::Optimal => {}
        }
        state.w = p.gather_atoms(&sol.v[..n]);
        let z_next = p.project_atoms(&state.target(cfg.variant))?;

        let found = sess.iterative_neighbor_search(&z_next, cfg.neighbor_budget, cfg.neighbor_budget)?;
        let cand = match found {
            Some(r) => {
                truncated += u64::from(r.truncated);
                r.candidate
            }
            None => Candidate::evaluate(p, with_atoms(p, &sol.v[..n], &z_next), cfg.lambda),
        };
        if better(&cand, &best) {
            best = Some(cand);
        }

        for ((u, w), z) in state.u.iter_mut().zip(&state.w).zip(&z_next) {
            *u += w - z;
        }
        state.z = z_next;
        state.k = k + 1;
        warm = Some((sol.v, sol.y));
    }
    Ok(RestartOutcome { best, subproblems: sess.subproblems(), rho, truncated })
}

/// Nonconvex ADMM with neighbor search after every step and random
/// restarts. Restart `r` draws from stream `r` of the seeded generator, so
/// the result does not depend on scheduling.
pub fn nc_admm_solve(p: &Problem, cfg: &HeuristicConfig) -> Result<(Candidate, RunReport)> {
    cfg.validate()?;
    let mut sess = Session::new(p, cfg.lambda);
    let (bound, _) = sess.solve_relaxation()?;
    let outcomes: Vec<Result<RestartOutcome>> = if cfg.parallel {
        (0..cfg.restarts).into_par_iter().map(|r| run_restart(p, cfg, r)).collect()
    } else {
        (0..cfg.restarts).map(|r| run_restart(p, cfg, r)).collect()
    };
    let mut report =
        RunReport { subproblems: sess.subproblems(), lower_bound: bound, rhos: Vec::new(), truncated_searches: 0 };
    let mut best: Option<Candidate> = None;
    for out in outcomes {
        let out = out?;
        report.subproblems += out.subproblems;
        report.rhos.push(out.rho);
        report.truncated_searches += out.truncated;
        if let Some(c) = out.best {
            if better(&c, &best) {
                best = Some(c);
            }
        }
    }
    let best = best.expect("every restart produces a candidate");
    check_bound(bound, &best);
    Ok((best, report))
}

#[cfg(test)]
mod tests;
