//! The benchmark harness: turns one [`ExperimentConfig`] into trained
//! models, scores, and report files.
//!
//! A run proceeds in phases:
//!
//! 1. **prepare** — load the dataset, subset series, impute, attach derived
//!    covariate channels.
//! 2. **tune** — when a grid or early stopping is configured, fit candidates
//!    on the training block minus validation and score them on the
//!    validation block; pick the best per model.
//! 3. **final fit** — retrain the selected configuration on the full
//!    training block (train + validation) and forecast the test block with
//!    rolling non-overlapping windows.
//! 4. **report** — pooled metrics per model, written as a table, a TSV, and
//!    a JSON manifest.
//!
//! Test data never reaches a model before its forecasts are fixed: lookups
//! for later test windows use only values already revealed by earlier
//! windows, and standardization statistics come from `[0, train_end)`.

pub mod config;
pub mod report;

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

pub use config::{
    expand_grid, BoostConfig, CovariateConfig, DatasetConfig, ExperimentConfig, GridPoint,
    ModelKind, SplitFinding, WindowConfig,
};
pub use report::{
    compare_rows, parse_predictions_tsv, parse_report_tsv, render_predictions, render_table,
    render_tsv, EvalReport, PredictionRow, ReportRow, TrackData,
};

use crate::error::{Error, Result};
use crate::forecast::{
    fit_naive_forecaster, fit_window_forecaster, fit_window_forecaster_with_eval,
    persistence_forecast, MultiOutputForecaster, NaiveForecaster,
};
use crate::frame::{load_delimited, SeriesFrame, SplitFrames, Standardizer};
use crate::metrics::{evaluate, MetricKind};
use crate::window::{make_test_set, TestSet, WindowSpec};

/// Load the dataset and apply every configured preprocessing step, in order:
/// series subset, native-covariate drop, imputation, calendar features,
/// series-id channel.
pub fn prepare_frame(cfg: &ExperimentConfig) -> Result<SeriesFrame> {
    let mut frame = load_delimited(&cfg.dataset.path, &cfg.dataset.schema)?;
    if let Some(indices) = &cfg.dataset.series {
        frame = frame.select_series(indices)?;
    }
    if cfg.covariates.drop_native {
        frame = frame.drop_covariates();
    }
    frame = frame.impute_missing(cfg.dataset.impute)?;
    if !cfg.covariates.time_features.is_empty() {
        frame = frame.derive_time_covariates(&cfg.covariates.time_features)?;
    }
    if cfg.covariates.series_id_feature {
        frame = frame.with_series_id_channel()?;
    }
    frame.ensure_finite()?;
    Ok(frame)
}

/// One scored tuning candidate.
#[derive(Debug, Clone, Serialize)]
pub struct GridRow {
    pub model: String,
    pub index: usize,
    pub params: String,
    pub score: f64,
}

/// Outcome of the tuning phase.
#[derive(Debug, Clone)]
pub struct TuneOutcome {
    pub rows: Vec<GridRow>,
    pub selected_window: GridPoint,
    pub selected_naive: BoostConfig,
    /// Boosting rounds the winning window fit kept (max across horizon
    /// models) when early stopping was active; the final fit uses this as
    /// its tree count.
    pub window_rounds: Option<usize>,
}

impl TuneOutcome {
    fn untuned(point: GridPoint) -> TuneOutcome {
        TuneOutcome {
            rows: Vec::new(),
            selected_naive: point.boost.clone(),
            selected_window: point,
            window_rounds: None,
        }
    }
}

fn metric_better(metric: MetricKind, candidate: f64, incumbent: f64) -> bool {
    if metric == MetricKind::Corr {
        candidate > incumbent
    } else {
        candidate < incumbent
    }
}

fn window_spec(cfg: &ExperimentConfig, w: usize) -> Result<WindowSpec> {
    WindowSpec::with_stride(w, cfg.window.h, cfg.window.mode, cfg.window.stride)
}

/// Collect per-series prediction tracks from a series-major test set.
fn window_predictions(
    forecaster: &MultiOutputForecaster,
    set: &TestSet,
    n_series: usize,
) -> Result<Vec<Vec<f64>>> {
    let preds = forecaster.forecast_instances(&set.instances)?;
    let mut per_series = vec![Vec::new(); n_series];
    for (inst, p) in set.instances.iter().zip(preds) {
        per_series[inst.series].extend(p);
    }
    Ok(per_series)
}

/// Pair predictions with raw-scale actuals, inverting standardization.
fn finish_tracks(
    mut predictions: Vec<Vec<f64>>,
    raw: &SeriesFrame,
    start: usize,
    count: usize,
    standardizer: Option<&Standardizer>,
) -> Vec<(Vec<f64>, Vec<f64>)> {
    let mut tracks = Vec::with_capacity(predictions.len());
    for (i, pred) in predictions.iter_mut().enumerate() {
        pred.truncate(count);
        if let Some(s) = standardizer {
            s.inverse(i, pred);
        }
        let actual = raw.target_series(i)[start..start + count].to_vec();
        tracks.push((actual, std::mem::take(pred)));
    }
    tracks
}

/// Score tracks for the final report, degrading metrics that are undefined
/// for this particular forecast (for example correlation against a constant
/// prediction) to NaN with an explanatory note instead of failing the run.
fn evaluate_lenient(
    tracks: &[(Vec<f64>, Vec<f64>)],
    metrics: &[MetricKind],
    model: &str,
    notes: &mut Vec<String>,
) -> Result<crate::metrics::MetricSummary> {
    let mut values = Vec::with_capacity(metrics.len());
    let mut mape_skipped = None;
    let mut corr_skipped = None;
    for &m in metrics {
        match evaluate(tracks, &[m]) {
            Ok(s) => {
                values.push((m, s.get(m).expect("metric evaluated")));
                if m == MetricKind::Mape {
                    mape_skipped = s.mape_skipped;
                }
                if m == MetricKind::Corr {
                    corr_skipped = s.corr_skipped;
                }
            }
            Err(Error::Numerical(msg)) => {
                values.push((m, f64::NAN));
                notes.push(format!("{model}: {msg}"));
            }
            Err(e) => return Err(e),
        }
    }
    Ok(crate::metrics::MetricSummary { values, mape_skipped, corr_skipped })
}

fn tune_models(
    cfg: &ExperimentConfig,
    parts: &SplitFrames,
    raw: &SeriesFrame,
    standardizer: Option<&Standardizer>,
) -> Result<TuneOutcome> {
    let points = expand_grid(cfg)?;
    let valid = parts
        .valid
        .as_ref()
        .ok_or_else(|| Error::Config("tuning needs split.valid_len > 0".into()))?;
    let primary = cfg.primary_metric;
    let valid_start = cfg.split.train_end - cfg.split.valid_len;
    let mut rows = Vec::new();

    let do_window = cfg.models.contains(&ModelKind::WindowGbrt);
    let do_naive = cfg.models.contains(&ModelKind::NaiveGbrt);

    let mut best_window: Option<(usize, f64, Option<usize>)> = None;
    if do_window {
        for (idx, point) in points.iter().enumerate() {
            let spec = window_spec(cfg, point.w)?;
            let params = point.boost.to_params(cfg.seed);
            let vset = make_test_set(&parts.train, valid, &spec)?;
            let forecaster = if params.early_stopping_patience.is_some() {
                fit_window_forecaster_with_eval(&parts.train, &spec, &params, Some(&vset.instances))?
            } else {
                fit_window_forecaster(&parts.train, &spec, &params)?
            };
            let preds = window_predictions(&forecaster, &vset, raw.n())?;
            let count = vset.windows_per_series * spec.h;
            let tracks = finish_tracks(preds, raw, valid_start, count, standardizer);
            let score = evaluate(&tracks, &[primary])?
                .get(primary)
                .expect("primary metric evaluated");
            log::info!("tune window_gbrt [{idx}] {} -> {primary}={score}", point.describe(cfg));
            rows.push(GridRow {
                model: ModelKind::WindowGbrt.name().to_string(),
                index: idx,
                params: point.describe(cfg),
                score,
            });
            let rounds = if params.early_stopping_patience.is_some() {
                forecaster.rounds_per_model().into_iter().max()
            } else {
                None
            };
            if best_window
                .as_ref()
                .is_none_or(|(_, s, _)| metric_better(primary, score, *s))
            {
                best_window = Some((idx, score, rounds));
            }
        }
    }

    let mut best_naive: Option<(usize, f64)> = None;
    if do_naive {
        // The lookup width is irrelevant to the naive model, so tune only
        // over distinct boost configurations.
        let mut seen: Vec<&BoostConfig> = Vec::new();
        for (idx, point) in points.iter().enumerate() {
            if seen.contains(&&point.boost) {
                continue;
            }
            seen.push(&point.boost);
            let mut params = point.boost.to_params(cfg.seed);
            // No held-out eval stream inside the naive fit.
            params.early_stopping_patience = None;
            let model = fit_naive_forecaster(&parts.train, &params, cfg.naive_fallback)?;
            let preds = model.forecast_frame(valid, parts.train.len())?;
            let tracks = finish_tracks(preds, raw, valid_start, valid.len(), standardizer);
            let score = evaluate(&tracks, &[primary])?
                .get(primary)
                .expect("primary metric evaluated");
            log::info!("tune naive_gbrt [{idx}] {} -> {primary}={score}", point.describe(cfg));
            rows.push(GridRow {
                model: ModelKind::NaiveGbrt.name().to_string(),
                index: idx,
                params: point.describe(cfg),
                score,
            });
            if best_naive
                .as_ref()
                .is_none_or(|(_, s)| metric_better(primary, score, *s))
            {
                best_naive = Some((idx, score));
            }
        }
    }

    let (window_idx, window_rounds) = match best_window {
        Some((idx, _, rounds)) => (idx, rounds),
        None => (0, None),
    };
    let naive_idx = best_naive.map(|(idx, _)| idx).unwrap_or(0);
    Ok(TuneOutcome {
        rows,
        selected_window: points[window_idx].clone(),
        selected_naive: points[naive_idx].boost.clone(),
        window_rounds,
    })
}

/// Run metadata written next to the reports. Wall time lives here and only
/// here so the report files stay byte-reproducible.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub dataset: String,
    pub config_digest: String,
    pub seed: u64,
    pub version: String,
    pub models: Vec<String>,
    pub series: usize,
    pub train_len: usize,
    pub valid_len: usize,
    pub test_len: usize,
    /// Test points actually scored per series: `(test_len / h) * h`.
    pub evaluated_per_series: usize,
    pub dropped_tail: usize,
    pub grid_points: usize,
    pub selected_window: GridPoint,
    pub selected_naive: BoostConfig,
    pub wall_time_secs: f64,
    pub notes: Vec<String>,
}

/// Everything a finished run produced, before any files are written.
pub struct RunOutcome {
    pub reports: Vec<EvalReport>,
    pub manifest: RunManifest,
    pub grid_rows: Vec<GridRow>,
    pub window_model: Option<MultiOutputForecaster>,
    pub naive_model: Option<NaiveForecaster>,
}

/// Execute the full benchmark described by `cfg`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunOutcome> {
    let t0 = Instant::now();
    cfg.validate()?;
    let digest = cfg.digest();
    let raw = prepare_frame(cfg)?;
    let split = cfg.split;

    let standardizer = if cfg.dataset.standardize {
        Some(Standardizer::fit(&raw, split.train_end)?)
    } else {
        None
    };
    let work = match &standardizer {
        Some(s) => s.transform(&raw)?,
        None => raw.clone(),
    };
    let parts = work.split(&split)?;

    let windows = split.test_len / cfg.window.h;
    if windows == 0 {
        return Err(Error::Config(format!(
            "test_len {} cannot fit one forecast window of h={}",
            split.test_len, cfg.window.h
        )));
    }
    let evaluated = windows * cfg.window.h;
    let dropped = split.test_len - evaluated;
    if dropped > 0 {
        log::warn!(
            "test_len {} is not a multiple of h={}; the last {} point(s) per series are not scored",
            split.test_len,
            cfg.window.h,
            dropped
        );
    }

    let points = expand_grid(cfg)?;
    let any_gbrt = cfg.models.contains(&ModelKind::WindowGbrt)
        || cfg.models.contains(&ModelKind::NaiveGbrt);
    let needs_tuning = parts.valid.is_some()
        && any_gbrt
        && (points.len() > 1 || cfg.boost.early_stopping_patience.is_some());
    let tune = if needs_tuning {
        tune_models(cfg, &parts, &raw, standardizer.as_ref())?
    } else {
        TuneOutcome::untuned(points[0].clone())
    };

    // Final fits see train + validation; the test block stays untouched.
    let train_full = match &parts.valid {
        Some(v) => parts.train.concat_time(v)?,
        None => parts.train.clone(),
    };
    if train_full.len() != split.train_end || parts.test.len() != split.test_len {
        return Err(Error::Data(
            "internal split bookkeeping error: train/test blocks have unexpected lengths".into(),
        ));
    }

    let mut notes = Vec::new();
    if dropped > 0 {
        notes.push(format!(
            "last {dropped} test point(s) per series not scored (test_len not a multiple of h)"
        ));
    }
    if standardizer.is_some() {
        notes.push("models fit on standardized targets; metrics are in original units".into());
    }

    let mut reports = Vec::with_capacity(cfg.models.len());
    let mut window_model = None;
    let mut naive_model = None;

    for kind in &cfg.models {
        let report = match kind {
            ModelKind::WindowGbrt => {
                let sel = &tune.selected_window;
                let spec = window_spec(cfg, sel.w)?;
                let mut params = sel.boost.to_params(cfg.seed);
                params.early_stopping_patience = None;
                if let Some(r) = tune.window_rounds {
                    params.n_trees = r.max(1);
                }
                let forecaster = fit_window_forecaster(&train_full, &spec, &params)?;
                let tset = make_test_set(&train_full, &parts.test, &spec)?;
                let preds = window_predictions(&forecaster, &tset, raw.n())?;
                let tracks =
                    finish_tracks(preds, &raw, split.train_end, evaluated, standardizer.as_ref());
                let mut model_notes = vec![format!(
                    "window_gbrt: w={}, mode={}, {} window(s) per series",
                    sel.w,
                    cfg.window.mode,
                    tset.windows_per_series
                )];
                let summary =
                    evaluate_lenient(&tracks, &cfg.metrics, kind.name(), &mut model_notes)?;
                if points.len() > 1 {
                    model_notes.push(format!("window_gbrt tuned: {}", sel.describe(cfg)));
                }
                if let Some(r) = tune.window_rounds {
                    model_notes.push(format!("window_gbrt early stopping kept {r} round(s)"));
                }
                let tracks_out = cfg.retain_predictions.then(|| {
                    tracks
                        .iter()
                        .enumerate()
                        .map(|(i, (a, p))| TrackData {
                            series: raw.series_names()[i].clone(),
                            start_index: split.train_end,
                            actual: a.clone(),
                            predicted: p.clone(),
                        })
                        .collect()
                });
                window_model = Some(forecaster);
                EvalReport {
                    dataset: cfg.dataset.id.clone(),
                    model: kind.name().to_string(),
                    summary,
                    notes: model_notes,
                    tracks: tracks_out,
                }
            }
            ModelKind::NaiveGbrt => {
                let mut params = tune.selected_naive.to_params(cfg.seed);
                params.early_stopping_patience = None;
                let model = fit_naive_forecaster(&train_full, &params, cfg.naive_fallback)?;
                let preds = model.forecast_frame(&parts.test, train_full.len())?;
                let tracks =
                    finish_tracks(preds, &raw, split.train_end, evaluated, standardizer.as_ref());
                let mut model_notes = Vec::new();
                if model.uses_time_index() {
                    model_notes.push(
                        "naive_gbrt: no covariates; regressing on the time index alone".into(),
                    );
                }
                let summary =
                    evaluate_lenient(&tracks, &cfg.metrics, kind.name(), &mut model_notes)?;
                let tracks_out = cfg.retain_predictions.then(|| {
                    tracks
                        .iter()
                        .enumerate()
                        .map(|(i, (a, p))| TrackData {
                            series: raw.series_names()[i].clone(),
                            start_index: split.train_end,
                            actual: a.clone(),
                            predicted: p.clone(),
                        })
                        .collect()
                });
                naive_model = Some(model);
                EvalReport {
                    dataset: cfg.dataset.id.clone(),
                    model: kind.name().to_string(),
                    summary,
                    notes: model_notes,
                    tracks: tracks_out,
                }
            }
            ModelKind::Persistence => {
                let h = cfg.window.h;
                let mut tracks = Vec::with_capacity(raw.n());
                for i in 0..raw.n() {
                    let mut predicted = Vec::with_capacity(evaluated);
                    for k in 0..windows {
                        let last = raw.target(i, split.train_end - 1 + k * h);
                        predicted.extend(persistence_forecast(last, h));
                    }
                    let actual =
                        raw.target_series(i)[split.train_end..split.train_end + evaluated].to_vec();
                    tracks.push((actual, predicted));
                }
                let mut model_notes = Vec::new();
                let summary =
                    evaluate_lenient(&tracks, &cfg.metrics, kind.name(), &mut model_notes)?;
                let tracks_out = cfg.retain_predictions.then(|| {
                    tracks
                        .iter()
                        .enumerate()
                        .map(|(i, (a, p))| TrackData {
                            series: raw.series_names()[i].clone(),
                            start_index: split.train_end,
                            actual: a.clone(),
                            predicted: p.clone(),
                        })
                        .collect()
                });
                EvalReport {
                    dataset: cfg.dataset.id.clone(),
                    model: kind.name().to_string(),
                    summary,
                    notes: model_notes,
                    tracks: tracks_out,
                }
            }
        };
        reports.push(report);
    }

    let manifest = RunManifest {
        dataset: cfg.dataset.id.clone(),
        config_digest: digest,
        seed: cfg.seed,
        version: env!("CARGO_PKG_VERSION").to_string(),
        models: cfg.models.iter().map(|m| m.name().to_string()).collect(),
        series: raw.n(),
        train_len: split.train_end,
        valid_len: split.valid_len,
        test_len: split.test_len,
        evaluated_per_series: evaluated,
        dropped_tail: dropped,
        grid_points: points.len(),
        selected_window: tune.selected_window.clone(),
        selected_naive: tune.selected_naive.clone(),
        wall_time_secs: t0.elapsed().as_secs_f64(),
        notes,
    };

    Ok(RunOutcome { reports, manifest, grid_rows: tune.rows, window_model, naive_model })
}

/// Tuning phase alone (the `tune` CLI verb).
pub fn tune_experiment(cfg: &ExperimentConfig) -> Result<TuneOutcome> {
    cfg.validate()?;
    if cfg.split.valid_len == 0 {
        return Err(Error::Config("tuning needs split.valid_len > 0".into()));
    }
    let raw = prepare_frame(cfg)?;
    let standardizer = if cfg.dataset.standardize {
        Some(Standardizer::fit(&raw, cfg.split.train_end)?)
    } else {
        None
    };
    let work = match &standardizer {
        Some(s) => s.transform(&raw)?,
        None => raw.clone(),
    };
    let parts = work.split(&cfg.split)?;
    tune_models(cfg, &parts, &raw, standardizer.as_ref())
}

/// Render tuning results as TSV (`grid.tsv`).
pub fn render_grid_tsv(rows: &[GridRow], primary: MetricKind) -> String {
    let mut out = format!("model\tindex\tparams\t{}\n", primary.name());
    for r in rows {
        out.push_str(&format!("{}\t{}\t{}\t{}\n", r.model, r.index, r.params, r.score));
    }
    out
}

/// Selected hyper-parameters echoed as TOML (`selected.toml`).
#[derive(Serialize)]
struct SelectedFile<'a> {
    window: &'a GridPoint,
    naive: &'a BoostConfig,
}

/// Write the tuning phase's artifacts (`grid.tsv`, `selected.toml`) into
/// `cfg.output_dir`.
pub fn write_tune_artifacts(cfg: &ExperimentConfig, tune: &TuneOutcome) -> Result<Vec<PathBuf>> {
    let dir = &cfg.output_dir;
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let grid_path = dir.join("grid.tsv");
    std::fs::write(&grid_path, render_grid_tsv(&tune.rows, cfg.primary_metric))?;
    written.push(grid_path);
    let selected = SelectedFile { window: &tune.selected_window, naive: &tune.selected_naive };
    let selected_path = dir.join("selected.toml");
    let text = toml::to_string(&selected)
        .map_err(|e| Error::Data(format!("cannot serialize selected parameters: {e}")))?;
    std::fs::write(&selected_path, text)?;
    written.push(selected_path);
    Ok(written)
}

/// Write every artifact of a finished run into `cfg.output_dir`; returns the
/// paths written.
pub fn write_run_artifacts(cfg: &ExperimentConfig, outcome: &RunOutcome) -> Result<Vec<PathBuf>> {
    let dir = &cfg.output_dir;
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();

    let digest = &outcome.manifest.config_digest;
    let table = render_table(&outcome.reports, &cfg.metrics, digest);
    let txt = dir.join("report.txt");
    std::fs::write(&txt, &table)?;
    written.push(txt);

    let tsv = render_tsv(&outcome.reports, &cfg.metrics, digest);
    let tsv_path = dir.join("report.tsv");
    std::fs::write(&tsv_path, &tsv)?;
    written.push(tsv_path);

    let manifest_path = dir.join("manifest.json");
    std::fs::write(&manifest_path, serde_json::to_string_pretty(&outcome.manifest)?)?;
    written.push(manifest_path);

    let selected = SelectedFile {
        window: &outcome.manifest.selected_window,
        naive: &outcome.manifest.selected_naive,
    };
    let selected_path = dir.join("selected.toml");
    let selected_text = toml::to_string(&selected)
        .map_err(|e| Error::Data(format!("cannot serialize selected parameters: {e}")))?;
    std::fs::write(&selected_path, selected_text)?;
    written.push(selected_path);

    if !outcome.grid_rows.is_empty() {
        let grid_path = dir.join("grid.tsv");
        std::fs::write(&grid_path, render_grid_tsv(&outcome.grid_rows, cfg.primary_metric))?;
        written.push(grid_path);
    }

    if cfg.retain_predictions {
        let pred_path = dir.join("predictions.tsv");
        std::fs::write(&pred_path, render_predictions(&outcome.reports))?;
        written.push(pred_path);
    }

    if let Some(model) = &outcome.window_model {
        let mdir = dir.join("models").join("window_gbrt");
        model.save_dir(&mdir)?;
        written.push(mdir);
    }
    if let Some(model) = &outcome.naive_model {
        let mdir = dir.join("models");
        std::fs::create_dir_all(&mdir)?;
        let mpath = mdir.join("naive_gbrt.json");
        model.save(&mpath)?;
        written.push(mpath);
    }
    Ok(written)
}

fn plot_file_name(model: &str, series: &str) -> String {
    let safe: String = series
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect();
    format!("plot_{model}_{safe}.tsv")
}

/// Split a run's `predictions.tsv` into per-(model, series) plot files with
/// `time_index`, `actual`, `predicted` columns.
pub fn emit_plot_data(run_dir: &Path, out_dir: &Path) -> Result<Vec<PathBuf>> {
    let pred_path = run_dir.join("predictions.tsv");
    let text = std::fs::read_to_string(&pred_path).map_err(|_| {
        Error::Data(format!(
            "{} not found; re-run with retain_predictions = true to keep forecasts",
            pred_path.display()
        ))
    })?;
    let rows = parse_predictions_tsv(&text)?;
    std::fs::create_dir_all(out_dir)?;

    let mut groups: Vec<(String, String)> = Vec::new();
    for r in &rows {
        let key = (r.model.clone(), r.series.clone());
        if !groups.contains(&key) {
            groups.push(key);
        }
    }
    let mut written = Vec::with_capacity(groups.len());
    for (model, series) in groups {
        let mut out = String::from("time_index\tactual\tpredicted\n");
        for r in rows.iter().filter(|r| r.model == model && r.series == series) {
            out.push_str(&format!("{}\t{}\t{}\n", r.time_index, r.actual, r.predicted));
        }
        let path = out_dir.join(plot_file_name(&model, &series));
        std::fs::write(&path, out)?;
        written.push(path);
    }
    Ok(written)
}

/// Cap the global worker pool; call once at startup. Errors from repeat
/// initialization are ignored on purpose (tests share one process).
pub fn init_thread_pool(workers: Option<usize>) {
    if let Some(n) = workers {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}
