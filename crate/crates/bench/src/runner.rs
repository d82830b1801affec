//! Runs one solve method on one instance and records the outcome.

use std::time::Instant;

use ncopt::heuristics::{nc_admm_solve, relax_round_polish, solve_relaxation, HeuristicConfig};
use ncopt::model::{Candidate, Problem};
use ncopt::oracle::oracle_solve;
use ncopt::{Error, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::families::{Instance, InstanceSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Relax,
    RelaxRoundPolish,
    NcAdmm,
    Oracle,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Relax => "relax",
            Method::RelaxRoundPolish => "relax-round-polish",
            Method::NcAdmm => "nc-admm",
            Method::Oracle => "oracle",
        }
    }
}

/// One row of a benchmark report. `merit`, `objective` and `residual` are
/// absent for `relax`, which only produces a bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub instance: String,
    pub family: String,
    pub method: Method,
    pub seed: u64,
    pub spec: InstanceSpec,
    pub config: HeuristicConfig,
    pub merit: Option<f64>,
    pub objective: Option<f64>,
    pub residual: Option<f64>,
    pub bound: Option<f64>,
    pub subproblems: u64,
    pub ms: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solution: Option<Vec<f64>>,
}

impl RunReport {
    /// The report with wall time cleared, for reproducibility checks.
    pub fn timeless(&self) -> Self {
        Self { ms: 0, ..self.clone() }
    }
}

/// Result of a run plus the candidate itself.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub report: RunReport,
    pub candidate: Option<Candidate>,
}

fn solve(p: &Problem, method: Method, cfg: &HeuristicConfig) -> Result<(Option<Candidate>, Option<f64>, u64)> {
    match method {
        Method::Relax => {
            let (bound, _) = solve_relaxation(p)?;
            Ok((None, Some(bound), 1))
        }
        Method::RelaxRoundPolish => {
            let (c, rep) = relax_round_polish(p, cfg)?;
            Ok((Some(c), Some(rep.lower_bound), rep.subproblems))
        }
        Method::NcAdmm => {
            let (c, rep) = nc_admm_solve(p, cfg)?;
            Ok((Some(c), Some(rep.lower_bound), rep.subproblems))
        }
        Method::Oracle => {
            let r = oracle_solve(p, cfg.lambda)?;
            Ok((Some(r.candidate), None, r.subproblems))
        }
    }
}

pub fn run(inst: &Instance, method: Method, cfg: &HeuristicConfig) -> Result<Outcome> {
    let start = Instant::now();
    let (candidate, bound, subproblems) = solve(&inst.problem, method, cfg)?;
    let ms = start.elapsed().as_millis() as u64;
    let report = RunReport {
        instance: inst.spec.id(),
        family: inst.spec.family.name().to_string(),
        method,
        seed: cfg.seed,
        spec: inst.spec.clone(),
        config: cfg.clone(),
        merit: candidate.as_ref().map(|c| c.merit),
        objective: candidate.as_ref().map(|c| c.objective_value),
        residual: candidate.as_ref().map(|c| c.residual),
        bound,
        subproblems,
        ms,
        solution: candidate.as_ref().map(|c| c.v.clone()),
    };
    Ok(Outcome { report, candidate })
}

/// Generates and runs every (spec, method) pair in parallel. Results come
/// back in input order.
pub fn run_batch(specs: &[InstanceSpec], methods: &[Method], cfg: &HeuristicConfig) -> Vec<Result<RunReport>> {
    let jobs: Vec<(&InstanceSpec, Method)> = specs.iter().flat_map(|s| methods.iter().map(move |&m| (s, m))).collect();
    jobs.par_iter()
        .map(|&(spec, method)| {
            let inst = spec.generate()?;
            run(&inst, method, cfg).map(|o| o.report)
        })
        .collect()
}

/// Process exit code for a failed run.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Infeasible | Error::Unbounded => 2,
        Error::Numerical(_) => 3,
        Error::InvalidInput(_) | Error::BudgetExceeded { .. } => 1,
    }
}
