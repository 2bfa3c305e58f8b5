//! CSV and plain-text tables for campaign, dump and bench output.

use std::io::Write;

use aoa_core::harness::{McRow, RunRecord};

use crate::error::CliResult;

pub const SUMMARY_HEADER: [&str; 9] = ["scenario", "n", "estimator", "bias", "rmse", "rcrlb", "runs", "failures", "seed"];
pub const DUMP_HEADER: [&str; 9] = ["scenario", "n", "estimator", "run", "seed", "error", "x", "y", "z"];
pub const BENCH_HEADER: [&str; 5] = ["scenario", "n", "estimator", "median_seconds", "ratio_to_first_n"];

fn num(x: f64) -> String {
    if x.is_nan() {
        "NaN".into()
    } else {
        format!("{x:e}")
    }
}

pub fn write_summary_csv<W: Write>(out: W, rows: &[McRow]) -> CliResult<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SUMMARY_HEADER)?;
    for r in rows {
        w.write_record([
            r.scenario.clone(),
            r.n.to_string(),
            r.estimator.to_string(),
            num(r.bias),
            num(r.rmse),
            r.rcrlb.map(num).unwrap_or_default(),
            r.runs_completed.to_string(),
            r.runs_failed.to_string(),
            r.base_seed.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_dump_csv<W: Write>(out: W, scenario: &str, records: &[RunRecord], header: bool) -> CliResult<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    if header {
        w.write_record(DUMP_HEADER)?;
    }
    for r in records {
        let mut coords: Vec<String> = r.estimate.iter().flatten().map(|&x| num(x)).collect();
        coords.resize(3, String::new());
        let mut rec = vec![
            scenario.to_string(),
            r.n.to_string(),
            r.estimator.to_string(),
            r.run.to_string(),
            r.seed.to_string(),
            r.error.unwrap_or_default().to_string(),
        ];
        rec.extend(coords);
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// One bench measurement.
#[derive(Debug, Clone)]
pub struct BenchRow {
    pub scenario: String,
    pub n: usize,
    pub estimator: String,
    pub median_seconds: f64,
    pub ratio_to_first_n: f64,
}

pub fn write_bench_csv<W: Write>(out: W, rows: &[BenchRow]) -> CliResult<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(BENCH_HEADER)?;
    for r in rows {
        w.write_record([
            r.scenario.clone(),
            r.n.to_string(),
            r.estimator.clone(),
            num(r.median_seconds),
            format!("{:.4}", r.ratio_to_first_n),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Human-readable summary with aligned columns. Cells with more than 1%
/// failed runs are marked `INVALID`.
pub fn summary_table(rows: &[McRow]) -> String {
    let header = ["scenario", "n", "estimator", "bias", "rmse", "rcrlb", "rmse/rcrlb", "runs", "failed", ""];
    let mut cells: Vec<Vec<String>> = vec![header.iter().map(|s| s.to_string()).collect()];
    for r in rows {
        let opt = |x: Option<f64>, prec: usize| x.map(|v| format!("{v:.prec$}")).unwrap_or_else(|| "-".into());
        cells.push(vec![
            r.scenario.clone(),
            r.n.to_string(),
            r.estimator.to_string(),
            format!("{:.6}", r.bias),
            format!("{:.6}", r.rmse),
            opt(r.rcrlb, 6),
            opt(r.ratio_to_bound(), 3),
            r.runs_completed.to_string(),
            r.runs_failed.to_string(),
            if r.is_valid() { String::new() } else { "INVALID".into() },
        ]);
    }
    let widths: Vec<usize> =
        (0..header.len()).map(|c| cells.iter().map(|row| row[c].chars().count()).max().unwrap_or(0)).collect();
    let mut out = String::new();
    for row in &cells {
        let line: Vec<String> = row
            .iter()
            .enumerate()
            .map(|(c, s)| if c < 3 { format!("{s:<w$}", w = widths[c]) } else { format!("{s:>w$}", w = widths[c]) })
            .collect();
        out.push_str(line.join("  ").trim_end());
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use aoa_core::harness::EstimatorKind;

    fn row(scenario: &str) -> McRow {
        McRow {
            scenario: scenario.into(),
            n: 100,
            estimator: EstimatorKind::BelsGn,
            bias: 0.25,
            rmse: 1.5,
            rcrlb: Some(1.25),
            runs_completed: 99,
            runs_failed: 1,
            base_seed: 7,
        }
    }

    #[test]
    fn summary_csv_header_and_quoting() {
        let mut buf = Vec::new();
        write_summary_csv(&mut buf, &[row("a,b")]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "scenario,n,estimator,bias,rmse,rcrlb,runs,failures,seed");
        assert_eq!(lines.next().unwrap(), "\"a,b\",100,BELS+GN,2.5e-1,1.5e0,1.25e0,99,1,7");
    }

    #[test]
    fn table_flags_invalid_cells() {
        let mut bad = row("x");
        bad.runs_failed = 5;
        let t = summary_table(&[row("x"), bad]);
        assert_eq!(t.lines().count(), 3);
        assert!(!t.lines().nth(1).unwrap().contains("INVALID"));
        assert!(t.lines().nth(2).unwrap().ends_with("INVALID"));
    }
}
