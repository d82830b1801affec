//! Command line front end: `gen`, `run` and `report`.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use ncopt::heuristics::{AdmmVariant, HeuristicConfig, RhoChoice};
use ncopt::model::Problem;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::families::{Family, FamilyData, Instance, InstanceSpec, NamedGraph, Radii};
use crate::report::{self, ReportError};
use crate::runner::{self, Method, RunReport};

/// Default output directory when `--out` is absent. Without it, output goes
/// to stdout.
pub const OUT_DIR_ENV: &str = "NCOPT_BENCH_DIR";

#[derive(Debug, Parser)]
#[command(name = "ncopt-bench", version, about = "Generate benchmark instances, run heuristics, summarize reports")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write one instance (spec, family data and problem) as JSON.
    Gen {
        #[command(flatten)]
        instance: InstanceArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve generated instances and write one report row per method.
    Run {
        #[command(flatten)]
        instance: InstanceArgs,
        /// Instance file written by `gen`; replaces the family flags.
        #[arg(long, conflicts_with = "family")]
        input: Option<PathBuf>,
        /// Comma separated.
        #[arg(long, value_enum, value_delimiter = ',', default_value = "nc-admm")]
        method: Vec<Method>,
        /// Number of instances, seeded `seed, seed+1, ...`.
        #[arg(long, default_value_t = 1)]
        count: u64,
        #[command(flatten)]
        solver: SolverArgs,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Merge JSON reports from `run --format json`.
    Report {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        /// Per-family merit mean and standard deviation instead of rows.
        #[arg(long)]
        aggregate: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    fn ext(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FamilyName {
    Regressor,
    Sat3,
    Circles,
    Tsp,
    Factor,
    Jobs,
    Coverage,
    Graphiso,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VariantArg {
    Paper,
    Standard,
}

#[derive(Debug, Clone, Args)]
pub struct InstanceArgs {
    #[arg(long, value_enum)]
    pub family: Option<FamilyName>,
    /// Main size parameter: m, vars or n depending on the family.
    #[arg(long)]
    pub size: Option<usize>,
    /// Clause to variable ratio (sat3).
    #[arg(long)]
    pub ratio: Option<f64>,
    #[arg(long, value_enum)]
    pub graph: Option<NamedGraph>,
    /// Circle radii: `R` for equal radii or `LO:HI` for uniform draws.
    #[arg(long, value_parser = parse_range)]
    pub radii: Option<Range>,
    /// Set density (coverage).
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Args)]
pub struct SolverArgs {
    #[arg(long, default_value_t = 5)]
    pub restarts: usize,
    #[arg(long, default_value_t = 50)]
    pub iters: usize,
    /// `RHO` for a fixed penalty or `LO:HI` to draw one per restart.
    #[arg(long, value_parser = parse_range, default_value = "0:1")]
    pub rho: Range,
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    #[arg(long, default_value_t = ncopt::model::DEFAULT_LAMBDA)]
    pub lambda: f64,
    #[arg(long, value_enum, default_value_t = VariantArg::Paper)]
    pub admm_variant: VariantArg,
    /// Rounding samples for relax-round-polish.
    #[arg(long, default_value_t = 1)]
    pub round_samples: usize,
}

/// A single value or a `lo:hi` pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Range {
    Value(f64),
    Between(f64, f64),
}

fn parse_range(s: &str) -> Result<Range, String> {
    let num = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("{t:?}: {e}"));
    match s.split_once(':') {
        None => Ok(Range::Value(num(s)?)),
        Some((a, b)) => Ok(Range::Between(num(a)?, num(b)?)),
    }
}

impl InstanceArgs {
    pub fn family(&self) -> Result<Family, CliError> {
        let name = self.family.ok_or_else(|| CliError::Usage("--family is required".into()))?;
        Ok(match name {
            FamilyName::Regressor => Family::Regressor { m: self.size.unwrap_or(20) },
            FamilyName::Sat3 => Family::Sat3 { vars: self.size.unwrap_or(40), ratio: self.ratio.unwrap_or(3.0) },
            FamilyName::Circles => Family::Circles {
                n: self.size.unwrap_or(5),
                radii: match self.radii.unwrap_or(Range::Value(0.5)) {
                    Range::Value(r) => Radii::Equal(r),
                    Range::Between(lo, hi) => Radii::Uniform { lo, hi },
                },
            },
            FamilyName::Tsp => Family::Tsp { n: self.size.unwrap_or(8) },
            FamilyName::Factor => Family::Factor { n: self.size.unwrap_or(6) },
            FamilyName::Jobs => Family::Jobs { n: self.size.unwrap_or(50) },
            FamilyName::Coverage => Family::Coverage { n: self.size.unwrap_or(30), p: self.p.unwrap_or(0.1) },
            FamilyName::Graphiso => Family::Graphiso { graph: self.graph.unwrap_or(NamedGraph::Petersen) },
        })
    }
}

impl SolverArgs {
    pub fn config(&self, seed: u64) -> Result<HeuristicConfig, CliError> {
        let cfg = HeuristicConfig {
            lambda: self.lambda,
            restarts: self.restarts,
            iterations: self.iters,
            rho: match self.rho {
                Range::Value(r) => RhoChoice::Fixed(r),
                Range::Between(lo, hi) => RhoChoice::Uniform { lo, hi },
            },
            sigma: self.sigma,
            round_samples: self.round_samples,
            seed,
            variant: match self.admm_variant {
                VariantArg::Paper => AdmmVariant::Paper,
                VariantArg::Standard => AdmmVariant::Standard,
            },
            ..HeuristicConfig::default()
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

/// On-disk form of a generated instance. `problem` follows the model's
/// problem JSON schema.
#[derive(Debug, Serialize, Deserialize)]
pub struct InstanceFile {
    pub spec: InstanceSpec,
    pub data: FamilyData,
    pub problem: serde_json::Value,
}

impl InstanceFile {
    pub fn from_instance(inst: &Instance) -> Result<Self, CliError> {
        Ok(Self {
            spec: inst.spec.clone(),
            data: inst.data.clone(),
            problem: serde_json::from_str(&inst.problem.to_json())?,
        })
    }

    pub fn into_instance(self) -> Result<Instance, CliError> {
        let problem = Problem::from_json(&self.problem.to_string())?;
        Ok(Instance { spec: self.spec, problem, data: self.data })
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Solve(#[from] ncopt::Error),
    #[error(transparent)]
    Report(#[from] ReportError),
    #[error("{}: {source}", path.display())]
    File { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl CliError {
    /// 2 for declared infeasibility, 3 for numerical failure, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Solve(e) => runner::exit_code(e),
            _ => 1,
        }
    }
}

fn destination(out: &Option<PathBuf>, default_name: &str) -> Option<PathBuf> {
    out.clone().or_else(|| std::env::var_os(OUT_DIR_ENV).map(|d| Path::new(&d).join(default_name)))
}

fn emit(dest: Option<PathBuf>, bytes: &[u8]) -> Result<(), CliError> {
    match dest {
        Some(path) => {
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir).map_err(|source| CliError::File { path: dir.to_path_buf(), source })?;
            }
            fs::write(&path, bytes).map_err(|source| CliError::File { path, source })
        }
        None => std::io::stdout()
            .write_all(bytes)
            .map_err(|source| CliError::File { path: PathBuf::from("<stdout>"), source }),
    }
}

fn render(reports: &[RunReport], format: Format, aggregate: bool) -> Result<Vec<u8>, CliError> {
    let mut buf = Vec::new();
    match (format, aggregate) {
        (Format::Csv, false) => report::write_csv(reports, &mut buf)?,
        (Format::Json, false) => report::write_json(reports, &mut buf)?,
        (Format::Csv, true) => report::write_aggregate_csv(reports, &mut buf)?,
        (Format::Json, true) => {
            serde_json::to_writer_pretty(&mut buf, &report::aggregate(reports))?;
            buf.push(b'\n');
        }
    }
    Ok(buf)
}

fn read_file(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::File { path: path.to_path_buf(), source })
}

pub fn execute(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Gen { instance, out } => {
            let inst = InstanceSpec::new(instance.family()?, instance.seed).generate()?;
            let mut bytes = serde_json::to_vec_pretty(&InstanceFile::from_instance(&inst)?)?;
            bytes.push(b'\n');
            emit(destination(&out, &format!("{}.json", inst.spec.id())), &bytes)
        }
        Command::Run { instance, input, method, count, solver, format, out } => {
            let cfg = solver.config(instance.seed)?;
            let (results, stem) = match input {
                Some(path) => {
                    let inst = serde_json::from_str::<InstanceFile>(&read_file(&path)?)?.into_instance()?;
                    let stem = inst.spec.id();
                    (method.iter().map(|&m| runner::run(&inst, m, &cfg).map(|o| o.report)).collect(), stem)
                }
                None => {
                    if count == 0 {
                        return Err(CliError::Usage("--count must be positive".into()));
                    }
                    let family = instance.family()?;
                    let specs: Vec<InstanceSpec> =
                        (0..count).map(|i| InstanceSpec::new(family.clone(), instance.seed + i)).collect();
                    let stem = format!("runs-{}-s{}", family.name(), instance.seed);
                    (runner::run_batch(&specs, &method, &cfg), stem)
                }
            };
            let mut reports = Vec::new();
            let mut first_err = None;
            for r in results {
                match r {
                    Ok(rep) => reports.push(rep),
                    // the first failure is returned; later ones are only logged
                    Err(e) if first_err.is_some() => eprintln!("error: {e}"),
                    Err(e) => first_err = Some(e),
                }
            }
            if !reports.is_empty() {
                emit(destination(&out, &format!("{stem}.{}", format.ext())), &render(&reports, format, false)?)?;
            }
            match first_err {
                Some(e) => Err(e.into()),
                None => Ok(()),
            }
        }
        Command::Report { inputs, format, aggregate, out } => {
            let mut reports = Vec::new();
            for path in &inputs {
                reports.extend(report::read_json(&read_file(path)?)?);
            }
            let name = if aggregate { "aggregate" } else { "report" };
            emit(destination(&out, &format!("{name}.{}", format.ext())), &render(&reports, format, aggregate)?)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Cli {
        Cli::try_parse_from(std::iter::once("ncopt-bench").chain(args.iter().copied())).unwrap()
    }

    #[test]
    fn ranges_parse() {
        assert_eq!(parse_range("0.5"), Ok(Range::Value(0.5)));
        assert_eq!(parse_range("0.2:1"), Ok(Range::Between(0.2, 1.0)));
        assert!(parse_range("a:1").is_err());
    }

    #[test]
    fn run_flags_map_to_config_and_family() {
        let cli = parse(&[
            "run",
            "--family",
            "sat3",
            "--size",
            "12",
            "--ratio",
            "4.25",
            "--method",
            "nc-admm,oracle",
            "--seed",
            "3",
            "--restarts",
            "2",
            "--iters",
            "7",
            "--rho",
            "0.4",
            "--admm-variant",
            "standard",
        ]);
        let Command::Run { instance, method, solver, .. } = cli.command else { panic!() };
        assert_eq!(method, [Method::NcAdmm, Method::Oracle]);
        assert_eq!(instance.family().unwrap(), Family::Sat3 { vars: 12, ratio: 4.25 });
        let cfg = solver.config(instance.seed).unwrap();
        assert_eq!((cfg.restarts, cfg.iterations, cfg.seed), (2, 7, 3));
        assert_eq!(cfg.rho, RhoChoice::Fixed(0.4));
        assert_eq!(cfg.variant, AdmmVariant::Standard);
    }

    #[test]
    fn bad_usage_is_rejected() {
        assert!(Cli::try_parse_from(["ncopt-bench", "run", "--family", "knapsack"]).is_err());
        assert!(Cli::try_parse_from(["ncopt-bench", "run", "--format", "xml"]).is_err());
        let cli = parse(&["gen"]);
        let Command::Gen { instance, .. } = cli.command else { panic!() };
        assert_eq!(instance.family().unwrap_err().exit_code(), 1);
        let cli = parse(&["run", "--family", "tsp", "--sigma=-1"]);
        let Command::Run { solver, .. } = cli.command else { panic!() };
        assert_eq!(solver.config(0).unwrap_err().exit_code(), 1);
    }

    #[test]
    fn instance_file_round_trips() {
        let inst = InstanceSpec::new(Family::Tsp { n: 5 }, 2).generate().unwrap();
        let file = InstanceFile::from_instance(&inst).unwrap();
        let text = serde_json::to_string(&file).unwrap();
        let back = serde_json::from_str::<InstanceFile>(&text).unwrap().into_instance().unwrap();
        assert_eq!(back.problem.to_json(), inst.problem.to_json());
        assert_eq!((back.spec, back.data), (inst.spec, inst.data));
    }

    #[test]
    fn run_then_report_through_files() {
        let dir = std::env::temp_dir().join(format!("ncopt-bench-cli-{}", std::process::id()));
        let runs = dir.join("runs.json");
        let cli = parse(&[
            "run",
            "--family",
            "tsp",
            "--size",
            "5",
            "--count",
            "2",
            "--method",
            "relax,oracle",
            "--format",
            "json",
            "--out",
            runs.to_str().unwrap(),
        ]);
        execute(cli).unwrap();
        let csv = dir.join("agg.csv");
        execute(parse(&["report", runs.to_str().unwrap(), "--aggregate", "--out", csv.to_str().unwrap()])).unwrap();
        let text = fs::read_to_string(&csv).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "family,method,runs,mean_merit,std_merit");
        assert!(lines[1].starts_with("tsp,oracle,2,"));
        assert_eq!(lines.len(), 2);
        fs::remove_dir_all(&dir).unwrap();
    }
}
