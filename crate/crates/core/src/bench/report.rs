//! Report assembly: the human-readable table, the machine-readable TSV,
//! and comparison between two runs.
//!
//! Everything rendered here must be byte-for-byte reproducible for a given
//! configuration and seed, so no timestamps or durations appear in these
//! files (the run manifest carries those instead).

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::{MetricKind, MetricSummary};

/// Retained forecasts for one series under one model.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrackData {
    pub series: String,
    /// Index on the full time axis of the first forecast point.
    pub start_index: usize,
    pub actual: Vec<f64>,
    pub predicted: Vec<f64>,
}

/// Scores for one model on one dataset.
#[derive(Debug, Clone)]
pub struct EvalReport {
    pub dataset: String,
    pub model: String,
    pub summary: MetricSummary,
    pub notes: Vec<String>,
    pub tracks: Option<Vec<TrackData>>,
}

/// One `(dataset, model, metric, value)` record from a report TSV.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub dataset: String,
    pub model: String,
    pub metric: MetricKind,
    pub value: f64,
}

fn fmt_value(v: f64) -> String {
    if v.is_nan() {
        "NaN".to_string()
    } else {
        format!("{v}")
    }
}

/// The fixed-width table written to `report.txt`.
pub fn render_table(reports: &[EvalReport], metrics: &[MetricKind], digest: &str) -> String {
    let mut out = String::new();
    let dataset = reports.first().map(|r| r.dataset.as_str()).unwrap_or("-");
    let _ = writeln!(out, "dataset: {dataset}");
    let _ = writeln!(out, "config:  {digest}");
    out.push('\n');

    let model_width = reports
        .iter()
        .map(|r| r.model.len())
        .chain(std::iter::once("model".len()))
        .max()
        .unwrap_or(5);
    let mut cells: Vec<Vec<String>> = Vec::with_capacity(reports.len());
    for r in reports {
        let row = metrics
            .iter()
            .map(|m| match r.summary.get(*m) {
                Some(v) => format!("{v:.6}"),
                None => "-".to_string(),
            })
            .collect();
        cells.push(row);
    }
    let mut col_widths: Vec<usize> = metrics.iter().map(|m| m.name().len()).collect();
    for row in &cells {
        for (j, cell) in row.iter().enumerate() {
            col_widths[j] = col_widths[j].max(cell.len());
        }
    }

    let _ = write!(out, "{:<model_width$}", "model");
    for (m, w) in metrics.iter().zip(&col_widths) {
        let _ = write!(out, "  {:>w$}", m.name(), w = w);
    }
    out.push('\n');
    let total = model_width + col_widths.iter().map(|w| w + 2).sum::<usize>();
    out.push_str(&"-".repeat(total));
    out.push('\n');
    for (r, row) in reports.iter().zip(&cells) {
        let _ = write!(out, "{:<model_width$}", r.model);
        for (cell, w) in row.iter().zip(&col_widths) {
            let _ = write!(out, "  {:>w$}", cell, w = w);
        }
        out.push('\n');
    }

    let mut notes: Vec<&str> = Vec::new();
    for r in reports {
        for n in &r.notes {
            if !notes.contains(&n.as_str()) {
                notes.push(n);
            }
        }
    }
    if !notes.is_empty() {
        out.push('\n');
        for n in notes {
            let _ = writeln!(out, "note: {n}");
        }
    }
    out.push('\n');
    for m in metrics {
        let _ = writeln!(out, "{}: {}", m.name(), m.formula());
    }
    out
}

/// The machine-readable rows written to `report.tsv`.
pub fn render_tsv(reports: &[EvalReport], metrics: &[MetricKind], digest: &str) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# config_digest: {digest}");
    out.push_str("dataset\tmodel\tmetric\tvalue\n");
    for r in reports {
        for m in metrics {
            if let Some(v) = r.summary.get(*m) {
                let _ = writeln!(out, "{}\t{}\t{}\t{}", r.dataset, r.model, m.name(), fmt_value(v));
            }
        }
    }
    out
}

/// Parse the TSV produced by [`render_tsv`]; comment and header lines are
/// skipped.
pub fn parse_report_tsv(text: &str) -> Result<Vec<ReportRow>> {
    let mut rows = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim_end();
        if line.is_empty() || line.starts_with('#') || line.starts_with("dataset\t") {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 4 {
            return Err(Error::Data(format!(
                "report line {}: expected 4 tab-separated fields, got {}",
                lineno + 1,
                fields.len()
            )));
        }
        let metric: MetricKind = fields[2].parse()?;
        let value: f64 = fields[3].parse().map_err(|_| {
            Error::Data(format!("report line {}: bad value '{}'", lineno + 1, fields[3]))
        })?;
        rows.push(ReportRow {
            dataset: fields[0].to_string(),
            model: fields[1].to_string(),
            metric,
            value,
        });
    }
    if rows.is_empty() {
        return Err(Error::Data("report contains no result rows".into()));
    }
    Ok(rows)
}

/// Compare two report row sets on their shared `(model, metric)` pairs.
///
/// Fails when the reports cover different datasets or share nothing. The
/// `better` column respects metric direction (correlation is
/// higher-is-better, everything else lower-is-better).
pub fn compare_rows(
    label_a: &str,
    rows_a: &[ReportRow],
    label_b: &str,
    rows_b: &[ReportRow],
) -> Result<String> {
    let ds_a = &rows_a[0].dataset;
    let ds_b = &rows_b[0].dataset;
    if rows_a.iter().any(|r| &r.dataset != ds_a) || rows_b.iter().any(|r| &r.dataset != ds_b) {
        return Err(Error::Data("a report mixes rows from several datasets".into()));
    }
    if ds_a != ds_b {
        return Err(Error::Data(format!(
            "reports cover different datasets ('{ds_a}' vs '{ds_b}'); comparison would be \
             meaningless"
        )));
    }
    let mut lines = Vec::new();
    for a in rows_a {
        let Some(b) = rows_b
            .iter()
            .find(|b| b.model == a.model && b.metric == a.metric)
        else {
            continue;
        };
        let higher_better = a.metric == MetricKind::Corr;
        let delta = b.value - a.value;
        let rel = if a.value != 0.0 { delta / a.value.abs() } else { f64::NAN };
        let verdict = if (delta == 0.0) || (a.value.is_nan() && b.value.is_nan()) {
            "same"
        } else if (delta < 0.0) != higher_better {
            "b-better"
        } else {
            "a-better"
        };
        lines.push((a.model.clone(), a.metric, a.value, b.value, rel, verdict));
    }
    if lines.is_empty() {
        return Err(Error::Data(
            "reports share no (model, metric) pairs; nothing to compare".into(),
        ));
    }
    let mut out = String::new();
    let _ = writeln!(out, "dataset: {ds_a}");
    let _ = writeln!(out, "a: {label_a}");
    let _ = writeln!(out, "b: {label_b}");
    out.push('\n');
    let _ = writeln!(
        out,
        "{:<14}  {:<6}  {:>14}  {:>14}  {:>9}  {}",
        "model", "metric", "a", "b", "rel", "better"
    );
    for (model, metric, a, b, rel, verdict) in lines {
        let rel_s = if rel.is_nan() { "-".to_string() } else { format!("{:+.3}%", rel * 100.0) };
        let _ = writeln!(
            out,
            "{model:<14}  {:<6}  {a:>14.6}  {b:>14.6}  {rel_s:>9}  {verdict}",
            metric.name()
        );
    }
    Ok(out)
}

/// Serialize retained predictions to `predictions.tsv`.
pub fn render_predictions(reports: &[EvalReport]) -> String {
    let mut out = String::from("model\tseries\ttime_index\tactual\tpredicted\n");
    for r in reports {
        let Some(tracks) = &r.tracks else { continue };
        for t in tracks {
            for (k, (a, p)) in t.actual.iter().zip(&t.predicted).enumerate() {
                let _ = writeln!(
                    out,
                    "{}\t{}\t{}\t{}\t{}",
                    r.model,
                    t.series,
                    t.start_index + k,
                    fmt_value(*a),
                    fmt_value(*p)
                );
            }
        }
    }
    out
}

/// One parsed row of `predictions.tsv`.
#[derive(Debug, Clone)]
pub struct PredictionRow {
    pub model: String,
    pub series: String,
    pub time_index: usize,
    pub actual: f64,
    pub predicted: f64,
}

pub fn parse_predictions_tsv(text: &str) -> Result<Vec<PredictionRow>> {
    let mut rows = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim_end();
        if line.is_empty() || line.starts_with("model\t") {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 5 {
            return Err(Error::Data(format!(
                "predictions line {}: expected 5 fields, got {}",
                lineno + 1,
                fields.len()
            )));
        }
        let parse_f = |s: &str| -> Result<f64> {
            s.parse().map_err(|_| {
                Error::Data(format!("predictions line {}: bad number '{s}'", lineno + 1))
            })
        };
        rows.push(PredictionRow {
            model: fields[0].to_string(),
            series: fields[1].to_string(),
            time_index: fields[2].parse().map_err(|_| {
                Error::Data(format!("predictions line {}: bad index '{}'", lineno + 1, fields[2]))
            })?,
            actual: parse_f(fields[3])?,
            predicted: parse_f(fields[4])?,
        });
    }
    if rows.is_empty() {
        return Err(Error::Data("predictions file contains no rows".into()));
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::evaluate;

    fn sample_reports() -> Vec<EvalReport> {
        let tracks = vec![(vec![1.0, 2.0, 4.0, 5.0], vec![2.0, 1.0, 5.0, 4.0])];
        let metrics = [MetricKind::Rmse, MetricKind::Mae];
        let summary = evaluate(&tracks, &metrics).unwrap();
        vec![
            EvalReport {
                dataset: "demo".into(),
                model: "window_gbrt".into(),
                summary: summary.clone(),
                notes: vec!["windows per series: 2".into()],
                tracks: Some(vec![TrackData {
                    series: "s0".into(),
                    start_index: 10,
                    actual: vec![1.0, 2.0],
                    predicted: vec![1.5, 2.5],
                }]),
            },
            EvalReport {
                dataset: "demo".into(),
                model: "persistence".into(),
                summary,
                notes: vec![],
                tracks: None,
            },
        ]
    }

    #[test]
    fn table_lists_every_model_and_metric() {
        let reports = sample_reports();
        let text = render_table(&reports, &[MetricKind::Rmse, MetricKind::Mae], "abc123");
        assert!(text.contains("window_gbrt"));
        assert!(text.contains("persistence"));
        assert!(text.contains("rmse"));
        assert!(text.contains("1.000000"));
        assert!(text.contains("note: windows per series: 2"));
        assert!(text.contains("abc123"));
        // Formula footer present for each metric.
        assert!(text.contains("rmse: "));
        assert!(text.contains("mae: "));
    }

    #[test]
    fn tsv_round_trips_through_parser() {
        let reports = sample_reports();
        let metrics = [MetricKind::Rmse, MetricKind::Mae];
        let tsv = render_tsv(&reports, &metrics, "abc123");
        let rows = parse_report_tsv(&tsv).unwrap();
        assert_eq!(rows.len(), 4);
        assert_eq!(rows[0].dataset, "demo");
        assert_eq!(rows[0].model, "window_gbrt");
        assert_eq!(rows[0].metric, MetricKind::Rmse);
        assert_eq!(rows[0].value, 1.0);
    }

    #[test]
    fn tsv_values_keep_full_precision() {
        let tracks = vec![(vec![1.0, 2.0, 4.0], vec![1.1, 2.0, 4.0])];
        let summary = evaluate(&tracks, &[MetricKind::Mae]).unwrap();
        let reports = vec![EvalReport {
            dataset: "d".into(),
            model: "m".into(),
            summary,
            notes: vec![],
            tracks: None,
        }];
        let tsv = render_tsv(&reports, &[MetricKind::Mae], "x");
        let rows = parse_report_tsv(&tsv).unwrap();
        let direct = ((1.1f64 - 1.0).abs() + 0.0 + 0.0) / 3.0;
        assert_eq!(rows[0].value, direct, "shortest round-trip must be exact");
    }

    #[test]
    fn compare_reports_diff_and_direction() {
        let a = vec![
            ReportRow { dataset: "d".into(), model: "m".into(), metric: MetricKind::Rmse, value: 2.0 },
            ReportRow { dataset: "d".into(), model: "m".into(), metric: MetricKind::Corr, value: 0.5 },
        ];
        let b = vec![
            ReportRow { dataset: "d".into(), model: "m".into(), metric: MetricKind::Rmse, value: 1.0 },
            ReportRow { dataset: "d".into(), model: "m".into(), metric: MetricKind::Corr, value: 0.9 },
        ];
        let text = compare_rows("runA", &a, "runB", &b).unwrap();
        // Lower rmse in b and higher corr in b are both improvements.
        let lines: Vec<&str> = text.lines().filter(|l| l.contains("b-better")).collect();
        assert_eq!(lines.len(), 2, "{text}");
        assert!(text.contains("-50.000%"));
    }

    #[test]
    fn compare_rejects_mismatched_datasets() {
        let a = vec![ReportRow { dataset: "d1".into(), model: "m".into(), metric: MetricKind::Rmse, value: 1.0 }];
        let b = vec![ReportRow { dataset: "d2".into(), model: "m".into(), metric: MetricKind::Rmse, value: 1.0 }];
        let err = compare_rows("a", &a, "b", &b).unwrap_err();
        assert!(err.to_string().contains("different datasets"));
    }

    #[test]
    fn compare_requires_overlap() {
        let a = vec![ReportRow { dataset: "d".into(), model: "m1".into(), metric: MetricKind::Rmse, value: 1.0 }];
        let b = vec![ReportRow { dataset: "d".into(), model: "m2".into(), metric: MetricKind::Rmse, value: 1.0 }];
        assert!(compare_rows("a", &a, "b", &b).is_err());
    }

    #[test]
    fn predictions_round_trip() {
        let reports = sample_reports();
        let text = render_predictions(&reports);
        let rows = parse_predictions_tsv(&text).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].model, "window_gbrt");
        assert_eq!(rows[0].series, "s0");
        assert_eq!(rows[0].time_index, 10);
        assert_eq!(rows[1].time_index, 11);
        assert_eq!(rows[1].predicted, 2.5);
    }

    #[test]
    fn empty_reports_fail_to_parse() {
        assert!(parse_report_tsv("# only comments\n").is_err());
        assert!(parse_predictions_tsv("").is_err());
    }
}
