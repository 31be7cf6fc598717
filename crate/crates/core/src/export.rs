//! CSV and JSON writers for traces and regret reports.
//!
//! The trace CSV has one row per query:
//! `t,x_1,…,x_n,value,score,edge_norm,simple_regret,average_regret`, where the
//! coordinates are the evaluated (projected) point and the two regret columns
//! are running values up to that row. Missing values are empty cells.

use std::io::Write;

use serde::Serialize;

use crate::optimizer::{QueryRecord, RunTrace};
use crate::regret::RegretReport;

pub fn trace_csv_header(dim: usize) -> Vec<String> {
    let mut header = vec!["t".to_string()];
    header.extend((1..=dim).map(|i| format!("x_{i}")));
    header.extend(
        [
            "value",
            "score",
            "edge_norm",
            "simple_regret",
            "average_regret",
        ]
        .map(String::from),
    );
    header
}

pub fn write_trace_csv<W: Write>(out: W, trace: &RunTrace, f_min: f64) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(trace_csv_header(trace.dim))?;
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    let mut best = f64::INFINITY;
    let mut total = 0.0;
    for r in &trace.records {
        best = best.min(r.value);
        total += r.value - f_min;
        let mut row = vec![r.t.to_string()];
        row.extend(r.x_omega.coords().iter().map(f64::to_string));
        row.push(r.value.to_string());
        row.push(opt(r.score));
        row.push(opt(r.edge_norm));
        row.push((best - f_min).to_string());
        row.push((total / r.t as f64).to_string());
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_report_csv<W: Write>(mut out: W, reports: &[RegretReport]) -> std::io::Result<()> {
    writeln!(out, "{}", RegretReport::csv_header())?;
    for r in reports {
        writeln!(out, "{}", r.csv_row())?;
    }
    Ok(())
}

#[derive(Serialize)]
struct TraceDocument<'a> {
    algorithm: &'static str,
    dim: usize,
    lipschitz: Option<f64>,
    records: &'a [QueryRecord],
    report: &'a RegretReport,
}

/// One JSON object holding the trace and its report.
pub fn write_trace_json<W: Write>(
    out: W,
    trace: &RunTrace,
    report: &RegretReport,
) -> serde_json::Result<()> {
    let doc = TraceDocument {
        algorithm: trace.algorithm.as_str(),
        dim: trace.dim,
        lipschitz: trace.lipschitz,
        records: &trace.records,
        report,
    };
    serde_json::to_writer_pretty(out, &doc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objectives::Benchmark;
    use crate::optimizer::{run, Budget, Settings};

    #[test]
    fn trace_csv_layout() {
        let f = Benchmark::cone(2, 1.0, &[0.3, 0.7]).unwrap();
        let trace = run(&f, Settings::new(1.0), Budget::horizon(4)).unwrap();
        let mut buf = Vec::new();
        write_trace_csv(&mut buf, &trace, 0.0).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(
            lines[0],
            "t,x_1,x_2,value,score,edge_norm,simple_regret,average_regret"
        );
        assert_eq!(lines.len(), 5);
        let first: Vec<&str> = lines[1].split(',').collect();
        assert_eq!(first[0], "1");
        assert_eq!(first[4], "");
        assert!(lines[2].split(',').nth(4).unwrap().parse::<f64>().is_ok());
    }

    #[test]
    fn json_document() {
        let f = Benchmark::cone(1, 1.0, &[0.3]).unwrap();
        let trace = run(&f, Settings::new(1.0), Budget::horizon(3)).unwrap();
        let report = RegretReport::from_trace(&trace, 0.0).unwrap();
        let mut buf = Vec::new();
        write_trace_json(&mut buf, &trace, &report).unwrap();
        let v: serde_json::Value = serde_json::from_slice(&buf).unwrap();
        assert_eq!(v["algorithm"], "lipsplit");
        assert_eq!(v["records"].as_array().unwrap().len(), 3);
        assert_eq!(v["records"][1]["x_omega"][0], 0.25);
        assert_eq!(v["report"]["T"], 3);
        assert!(v["report"]["slope"].is_null());
    }
}
