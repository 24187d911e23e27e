//! Per-case rows, per-system aggregates and the files written for them.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::classify::{classify_discontinuities, Thresholds};
use super::plot;
use super::trace::PoseTrace;
use crate::error::{Error, Result};

pub const CASES_CSV: &str = "cases.csv";
pub const RATES_CSV: &str = "rates.csv";
pub const SUMMARY_CSV: &str = "summary.csv";
pub const FLAGS_CSV: &str = "flags.csv";

/// `system,case,n,d,r_d`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseRow {
    pub system: String,
    pub case: String,
    pub n: usize,
    pub d: usize,
    pub r_d: f64,
}

/// `system,case,len_s,n,F`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateRow {
    pub system: String,
    pub case: String,
    pub len_s: f64,
    pub n: usize,
    #[serde(rename = "F")]
    pub f: f64,
}

/// Mean and sample standard deviation of one metric over a system's cases.
/// The deviation is blank for a single case.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub system: String,
    pub metric: String,
    pub cases: usize,
    pub mean: f64,
    pub std: Option<f64>,
}

/// One flagged pair `(pair, pair + 1)` of a trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlagRow {
    pub system: String,
    pub case: String,
    pub pair: usize,
    pub frame: usize,
    pub t: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationReport {
    pub thresholds: Thresholds,
    pub cases: Vec<CaseRow>,
    pub rates: Vec<RateRow>,
    pub flags: Vec<FlagRow>,
    pub aggregates: Vec<Aggregate>,
}

/// Mean and `n − 1` standard deviation; `None` for the deviation of one value.
pub fn mean_std(values: &[f64]) -> (f64, Option<f64>) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, None);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, Some(var.sqrt()))
}

/// Per-system aggregates of `r_d` and `F`, systems in name order.
pub fn summarize(cases: &[CaseRow], rates: &[RateRow]) -> Vec<Aggregate> {
    let mut out = Vec::new();
    let mut push = |metric: &str, groups: BTreeMap<&str, Vec<f64>>| {
        for (system, values) in groups {
            let (mean, std) = mean_std(&values);
            out.push(Aggregate { system: system.to_string(), metric: metric.to_string(), cases: values.len(), mean, std });
        }
    };
    let mut rd: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
    for c in cases {
        rd.entry(&c.system).or_default().push(c.r_d);
    }
    push("r_d", rd);
    let mut f: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
    for r in rates {
        f.entry(&r.system).or_default().push(r.f);
    }
    push("F", f);
    out
}

/// Classifies every trace and aggregates the results. Empty traces are an error.
pub fn evaluate(traces: &[PoseTrace], rates: Vec<RateRow>, th: &Thresholds) -> Result<EvaluationReport> {
    th.validate()?;
    let mut cases = Vec::with_capacity(traces.len());
    let mut flags = Vec::new();
    for trace in traces {
        if trace.is_empty() {
            return Err(Error::EmptyTrace);
        }
        let flagged = classify_discontinuities(trace, th);
        for &pair in &flagged {
            let r = &trace.records[pair];
            flags.push(FlagRow { system: trace.system.clone(), case: trace.case.clone(), pair, frame: r.frame, t: r.t });
        }
        cases.push(CaseRow {
            system: trace.system.clone(),
            case: trace.case.clone(),
            n: trace.len(),
            d: flagged.len(),
            r_d: flagged.len() as f64 / trace.len() as f64,
        });
    }
    let aggregates = summarize(&cases, &rates);
    Ok(EvaluationReport { thresholds: *th, cases, rates, flags, aggregates })
}

fn write_csv<T: Serialize>(path: &Path, rows: &[T], header: &[&str]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
    if rows.is_empty() {
        w.write_record(header).map_err(|e| csv_error(path, e))?;
    }
    for row in rows {
        w.serialize(row).map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::parse(path, format!("{other:?}")),
    }
}

pub fn read_csv<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_error(path, e))?;
    r.deserialize().map(|row| row.map_err(|e| csv_error(path, e))).collect()
}

/// Writes the CSV tables and SVG plots; returns the paths written.
pub fn emit_report(report: &EvaluationReport, traces: &[PoseTrace], out_dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let mut written = Vec::new();
    let path = out_dir.join(CASES_CSV);
    write_csv(&path, &report.cases, &["system", "case", "n", "d", "r_d"])?;
    written.push(path);
    let path = out_dir.join(RATES_CSV);
    write_csv(&path, &report.rates, &["system", "case", "len_s", "n", "F"])?;
    written.push(path);
    let path = out_dir.join(SUMMARY_CSV);
    write_csv(&path, &report.aggregates, &["system", "metric", "cases", "mean", "std"])?;
    written.push(path);
    let path = out_dir.join(FLAGS_CSV);
    write_csv(&path, &report.flags, &["system", "case", "pair", "frame", "t"])?;
    written.push(path);

    for trace in traces {
        let flagged: Vec<usize> = report
            .flags
            .iter()
            .filter(|f| f.system == trace.system && f.case == trace.case)
            .map(|f| f.pair)
            .collect();
        let stem = format!("{}__{}", file_safe(&trace.system), file_safe(&trace.case));
        let path = out_dir.join(format!("{stem}__targets.svg"));
        write_text(&path, &plot::targets_svg(trace, &flagged))?;
        written.push(path);
        let path = out_dir.join(format!("{stem}__speed.svg"));
        write_text(&path, &plot::speed_svg(trace, &report.thresholds))?;
        written.push(path);
    }
    let path = out_dir.join("distributions.svg");
    write_text(&path, &plot::distributions_svg(&report.cases, &report.rates))?;
    written.push(path);
    Ok(written)
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn file_safe(s: &str) -> String {
    s.chars().map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '.' { c } else { '_' }).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(system: &str, r_d: f64) -> CaseRow {
        CaseRow { system: system.into(), case: "c".into(), n: 100, d: (r_d * 100.0) as usize, r_d }
    }

    #[test]
    fn sample_std_examples() {
        let (m, s) = mean_std(&[0.0, 0.02]);
        assert!((m - 0.01).abs() < 1e-15);
        assert!((s.unwrap() - 0.01 * 2f64.sqrt()).abs() < 1e-12);
        assert_eq!(mean_std(&[0.3]), (0.3, None));
    }

    #[test]
    fn aggregates_per_system() {
        let agg = summarize(&[row("b", 0.1), row("a", 0.0), row("a", 0.02)], &[]);
        assert_eq!(agg.len(), 2);
        assert_eq!((agg[0].system.as_str(), agg[0].cases), ("a", 2));
        assert_eq!(agg[1].std, None);
    }

    #[test]
    fn csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let cases = vec![row("orig", 1.0 / 3.0), row("orig", 0.1 + 0.2), row("ellipse", 0.0)];
        let rates = vec![RateRow { system: "orig".into(), case: "s1".into(), len_s: 60.0, n: 601, f: 601.0 / 60.0 }];
        let report = EvaluationReport {
            thresholds: Thresholds::default(),
            aggregates: summarize(&cases, &rates),
            cases,
            rates,
            flags: vec![],
        };
        emit_report(&report, &[], dir.path()).unwrap();
        let cases: Vec<CaseRow> = read_csv(&dir.path().join(CASES_CSV)).unwrap();
        let rates: Vec<RateRow> = read_csv(&dir.path().join(RATES_CSV)).unwrap();
        assert_eq!(cases, report.cases);
        assert_eq!(summarize(&cases, &rates), report.aggregates);
        let stored: Vec<Aggregate> = read_csv(&dir.path().join(SUMMARY_CSV)).unwrap();
        assert_eq!(stored, report.aggregates);
    }
}
