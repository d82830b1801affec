//! CSV and JSON output for run reports.

use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::runner::RunReport;

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("no reports to write")]
    Empty,
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

#[derive(Serialize)]
struct Row<'a> {
    instance: &'a str,
    family: &'a str,
    method: &'a str,
    seed: u64,
    merit: Option<f64>,
    objective: Option<f64>,
    residual: Option<f64>,
    bound: Option<f64>,
    subproblems: u64,
    ms: u64,
}

/// Reports ordered by (family, instance, method); the sort is stable so
/// repeated keys keep their input order.
pub fn sorted(reports: &[RunReport]) -> Vec<&RunReport> {
    let mut out: Vec<&RunReport> = reports.iter().collect();
    out.sort_by(|a, b| (&a.family, &a.instance, a.method).cmp(&(&b.family, &b.instance, b.method)));
    out
}

pub fn write_csv<W: Write>(reports: &[RunReport], w: W) -> Result<(), ReportError> {
    if reports.is_empty() {
        return Err(ReportError::Empty);
    }
    let mut wr = csv::Writer::from_writer(w);
    for r in sorted(reports) {
        wr.serialize(Row {
            instance: &r.instance,
            family: &r.family,
            method: r.method.name(),
            seed: r.seed,
            merit: r.merit,
            objective: r.objective,
            residual: r.residual,
            bound: r.bound,
            subproblems: r.subproblems,
            ms: r.ms,
        })?;
    }
    wr.flush()?;
    Ok(())
}

/// Full reports, configs included, as a pretty-printed JSON array.
pub fn write_json<W: Write>(reports: &[RunReport], mut w: W) -> Result<(), ReportError> {
    if reports.is_empty() {
        return Err(ReportError::Empty);
    }
    serde_json::to_writer_pretty(&mut w, &sorted(reports))?;
    writeln!(w)?;
    Ok(())
}

pub fn read_json(s: &str) -> Result<Vec<RunReport>, ReportError> {
    Ok(serde_json::from_str(s)?)
}

/// Merit statistics for one (family, method) group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyStats {
    pub family: String,
    pub method: String,
    pub runs: usize,
    pub mean_merit: f64,
    /// Sample standard deviation; zero for a single run.
    pub std_merit: f64,
}

/// Per-family merit mean and deviation, split by method. Runs without a
/// merit (`relax`) are skipped.
pub fn aggregate(reports: &[RunReport]) -> Vec<FamilyStats> {
    let mut groups: BTreeMap<(&str, &str), Vec<f64>> = BTreeMap::new();
    for r in sorted(reports) {
        if let Some(m) = r.merit {
            groups.entry((&r.family, r.method.name())).or_default().push(m);
        }
    }
    groups
        .into_iter()
        .map(|((family, method), xs)| {
            let n = xs.len() as f64;
            let mean = xs.iter().sum::<f64>() / n;
            let var = if xs.len() > 1 { xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0) } else { 0.0 };
            FamilyStats {
                family: family.to_string(),
                method: method.to_string(),
                runs: xs.len(),
                mean_merit: mean,
                std_merit: var.sqrt(),
            }
        })
        .collect()
}

pub fn write_aggregate_csv<W: Write>(reports: &[RunReport], w: W) -> Result<(), ReportError> {
    let stats = aggregate(reports);
    if stats.is_empty() {
        return Err(ReportError::Empty);
    }
    let mut wr = csv::Writer::from_writer(w);
    for s in &stats {
        wr.serialize(s)?;
    }
    wr.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::{Family, InstanceSpec};
    use crate::runner::Method;
    use ncopt::heuristics::HeuristicConfig;

    fn report(family: Family, seed: u64, method: Method, merit: Option<f64>) -> RunReport {
        let spec = InstanceSpec::new(family, seed);
        RunReport {
            instance: spec.id(),
            family: spec.family.name().to_string(),
            method,
            seed,
            spec,
            config: HeuristicConfig::default(),
            merit,
            objective: merit,
            residual: merit.map(|_| 0.0),
            bound: Some(-1.0),
            subproblems: 3,
            ms: 12,
            solution: None,
        }
    }

    fn csv_string(reports: &[RunReport]) -> String {
        let mut buf = Vec::new();
        write_csv(reports, &mut buf).unwrap();
        String::from_utf8(buf).unwrap()
    }

    #[test]
    fn single_report_is_two_lines() {
        let s = csv_string(&[report(Family::Tsp { n: 5 }, 1, Method::NcAdmm, Some(2.5))]);
        let lines: Vec<&str> = s.lines().collect();
        assert_eq!(lines.len(), 2);
        assert_eq!(lines[0], "instance,family,method,seed,merit,objective,residual,bound,subproblems,ms");
        assert_eq!(lines[1], "tsp-n5-s1,tsp,nc-admm,1,2.5,2.5,0.0,-1.0,3,12");
    }

    #[test]
    fn rows_sorted_by_family_instance_method() {
        let rs = vec![
            report(Family::Tsp { n: 5 }, 2, Method::Oracle, Some(1.0)),
            report(Family::Tsp { n: 5 }, 1, Method::Relax, None),
            report(Family::Regressor { m: 10 }, 1, Method::NcAdmm, Some(3.0)),
            report(Family::Tsp { n: 5 }, 1, Method::NcAdmm, Some(1.0)),
        ];
        let s = csv_string(&rs);
        let keys: Vec<String> = s.lines().skip(1).map(|l| l.split(',').take(3).collect::<Vec<_>>().join(",")).collect();
        assert_eq!(
            keys,
            [
                "regressor-m10-s1,regressor,nc-admm",
                "tsp-n5-s1,tsp,relax",
                "tsp-n5-s1,tsp,nc-admm",
                "tsp-n5-s2,tsp,oracle"
            ]
        );
        // relax has no merit: empty cells
        assert!(s.contains("tsp-n5-s1,tsp,relax,1,,,,-1.0,3,12"));
    }

    #[test]
    fn output_is_byte_stable_and_json_round_trips() {
        let rs = vec![
            report(Family::Tsp { n: 5 }, 2, Method::Oracle, Some(0.1 + 0.2)),
            report(Family::Jobs { n: 20 }, 1, Method::NcAdmm, Some(-3.75)),
        ];
        assert_eq!(csv_string(&rs), csv_string(&rs));
        let mut buf = Vec::new();
        write_json(&rs, &mut buf).unwrap();
        let back = read_json(std::str::from_utf8(&buf).unwrap()).unwrap();
        let sorted_in: Vec<RunReport> = sorted(&rs).into_iter().cloned().collect();
        assert_eq!(back, sorted_in);
    }

    #[test]
    fn aggregate_mean_and_std() {
        let rs = vec![
            report(Family::Tsp { n: 5 }, 1, Method::NcAdmm, Some(1.0)),
            report(Family::Tsp { n: 5 }, 2, Method::NcAdmm, Some(3.0)),
            report(Family::Tsp { n: 5 }, 3, Method::NcAdmm, Some(5.0)),
            report(Family::Tsp { n: 5 }, 3, Method::Relax, None),
            report(Family::Jobs { n: 20 }, 1, Method::NcAdmm, Some(-2.0)),
        ];
        let stats = aggregate(&rs);
        assert_eq!(stats.len(), 2);
        assert_eq!((stats[0].family.as_str(), stats[0].runs, stats[0].std_merit), ("jobs", 1, 0.0));
        // 1, 3, 5: mean 3, sample variance (4 + 0 + 4) / 2 = 4
        assert_eq!((stats[1].mean_merit, stats[1].std_merit), (3.0, 2.0));
    }

    #[test]
    fn empty_input_is_refused() {
        assert!(matches!(write_csv(&[], Vec::new()), Err(ReportError::Empty)));
        assert!(matches!(write_json(&[], Vec::new()), Err(ReportError::Empty)));
    }
}
