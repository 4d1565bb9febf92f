//! Python bindings for the boostcast forecasting toolkit.
//!
//! Compiles to the extension module `boostcast_py._native`; the pure-Python
//! package under `python/` finds the compiled library and re-exports its
//! names, so the workflow is `cargo build --release -p boostcast-py`
//! followed by `import boostcast_py`.

use std::path::PathBuf;

use pyo3::exceptions::{PyArithmeticError, PyIndexError, PyOSError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use boostcast::{
    fit_naive_forecaster, fit_window_forecaster, persistence_forecast, synth, BoostParams,
    ExperimentConfig, FlattenMode, MetricKind, MultiOutputForecaster, NaiveFallback,
    SeriesFrame, SplitStrategy, TimeFeature, WindowSpec,
};

fn to_py(err: boostcast::Error) -> PyErr {
    use boostcast::Error;
    match err {
        Error::Config(_) | Error::Data(_) => PyValueError::new_err(err.to_string()),
        Error::Numerical(_) => PyArithmeticError::new_err(err.to_string()),
        Error::Io(_) => PyOSError::new_err(err.to_string()),
    }
}

fn parse_mode(mode: &str) -> PyResult<FlattenMode> {
    match mode {
        "last_instance" => Ok(FlattenMode::LastInstance),
        "all_instances" => Ok(FlattenMode::AllInstances),
        "targets_only" => Ok(FlattenMode::TargetsOnly),
        other => Err(PyValueError::new_err(format!(
            "unknown window mode {other:?}; expected \"last_instance\", \"all_instances\" \
             or \"targets_only\""
        ))),
    }
}

fn parse_metric(name: &str) -> PyResult<MetricKind> {
    MetricKind::ALL
        .iter()
        .copied()
        .find(|k| k.name() == name)
        .ok_or_else(|| {
            let known: Vec<&str> = MetricKind::ALL.iter().map(|k| k.name()).collect();
            PyValueError::new_err(format!(
                "unknown metric {name:?}; expected one of {}",
                known.join(", ")
            ))
        })
}

fn parse_time_feature(name: &str) -> PyResult<TimeFeature> {
    match name {
        "hour_of_day" => Ok(TimeFeature::HourOfDay),
        "day_of_week" => Ok(TimeFeature::DayOfWeek),
        "day_of_month" => Ok(TimeFeature::DayOfMonth),
        "month" => Ok(TimeFeature::Month),
        "is_weekend" => Ok(TimeFeature::IsWeekend),
        other => Err(PyValueError::new_err(format!(
            "unknown time feature {other:?}; expected hour_of_day, day_of_week, \
             day_of_month, month or is_weekend"
        ))),
    }
}

#[allow(clippy::too_many_arguments)]
fn make_params(
    n_trees: usize,
    learning_rate: f64,
    max_depth: usize,
    reg_lambda: f64,
    gamma: f64,
    min_child_weight: f64,
    subsample: f64,
    colsample: f64,
    seed: u64,
    base_score: Option<f64>,
    histogram: bool,
    max_bins: usize,
) -> BoostParams {
    BoostParams {
        n_trees,
        learning_rate,
        max_depth,
        lambda: reg_lambda,
        gamma,
        min_child_weight,
        subsample,
        colsample,
        seed,
        base_score,
        strategy: if histogram {
            SplitStrategy::Histogram { max_bins }
        } else {
            SplitStrategy::Exact
        },
        early_stopping_patience: None,
    }
}

/// A panel of aligned time series plus optional covariate channels.
#[pyclass(name = "SeriesFrame", frozen)]
struct PyFrame {
    inner: SeriesFrame,
}

#[pymethods]
impl PyFrame {
    /// Build a covariate-free frame from one list of values per series.
    #[staticmethod]
    fn from_targets(targets: Vec<Vec<f64>>) -> PyResult<Self> {
        let inner = SeriesFrame::from_targets(&targets).map_err(to_py)?;
        Ok(PyFrame { inner })
    }

    /// Load a delimited file. `schema` is a TOML snippet with the same keys
    /// as the `[dataset.schema]` table in harness configs.
    #[staticmethod]
    fn load_csv(path: PathBuf, schema: &str) -> PyResult<Self> {
        let schema: boostcast::Schema =
            toml::from_str(schema).map_err(|e| PyValueError::new_err(format!("schema: {e}")))?;
        let inner = boostcast::load_delimited(&path, &schema).map_err(to_py)?;
        Ok(PyFrame { inner })
    }

    /// Copy of the frame with an evenly spaced time axis attached
    /// (`start_epoch` seconds since 1970, one step every `rate_secs`).
    fn with_timestamps(&self, start_epoch: i64, rate_secs: i64) -> PyResult<Self> {
        let inner = self
            .inner
            .clone()
            .with_timestamps(start_epoch, rate_secs)
            .map_err(to_py)?;
        Ok(PyFrame { inner })
    }

    /// Copy of the frame with `values` appended as a covariate channel
    /// shared by every series (one value per time step).
    fn push_covariate(&self, name: &str, values: Vec<f64>) -> PyResult<Self> {
        let inner = self.inner.push_shared_covariate(name, &values).map_err(to_py)?;
        Ok(PyFrame { inner })
    }

    /// Copy of the frame with calendar covariates derived from its time
    /// axis (requires `with_timestamps` or a timestamped source file).
    fn derive_time_covariates(&self, features: Vec<String>) -> PyResult<Self> {
        let feats: Vec<TimeFeature> = features
            .iter()
            .map(|f| parse_time_feature(f))
            .collect::<PyResult<_>>()?;
        let inner = self.inner.derive_time_covariates(&feats).map_err(to_py)?;
        Ok(PyFrame { inner })
    }

    /// Copy of the time range `[a, b)` across all series.
    fn slice_time(&self, a: usize, b: usize) -> PyResult<Self> {
        if a >= b || b > self.inner.len() {
            return Err(PyValueError::new_err(format!(
                "slice bounds {a}..{b} out of range 0..{}",
                self.inner.len()
            )));
        }
        Ok(PyFrame { inner: self.inner.slice_time(a, b) })
    }

    /// Number of series.
    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    /// Number of covariate channels.
    #[getter]
    fn num_covariates(&self) -> usize {
        self.inner.num_covariates()
    }

    #[getter]
    fn series_names(&self) -> Vec<String> {
        self.inner.series_names().to_vec()
    }

    #[getter]
    fn covariate_names(&self) -> Vec<String> {
        self.inner.covariate_names().to_vec()
    }

    /// Target values of one series, oldest first.
    fn target_series(&self, series: usize) -> PyResult<Vec<f64>> {
        if series >= self.inner.n() {
            return Err(PyIndexError::new_err(format!(
                "series {series} out of range for a frame with {} series",
                self.inner.n()
            )));
        }
        Ok(self.inner.target_series(series).to_vec())
    }

    /// Covariate row of one series at time `t`.
    fn covariate_row(&self, series: usize, t: usize) -> PyResult<Vec<f64>> {
        if series >= self.inner.n() || t >= self.inner.len() {
            return Err(PyIndexError::new_err(format!(
                "(series {series}, t {t}) out of range for a {}x{} frame",
                self.inner.n(),
                self.inner.len()
            )));
        }
        Ok(self.inner.covariate_row(series, t).to_vec())
    }

    /// Number of time steps.
    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!(
            "SeriesFrame(n={}, len={}, covariates={})",
            self.inner.n(),
            self.inner.len(),
            self.inner.num_covariates()
        )
    }
}

/// Window-based multi-output forecaster: one boosted model per horizon
/// step, all reading the same flattened lookup window.
#[pyclass(frozen)]
struct WindowForecaster {
    inner: MultiOutputForecaster,
}

#[pymethods]
impl WindowForecaster {
    /// Fit on every training window of `frame`.
    #[staticmethod]
    #[allow(clippy::too_many_arguments)]
    #[pyo3(signature = (
        frame, w, h, *, mode = "last_instance", stride = 1, n_trees = 500,
        learning_rate = 0.05, max_depth = 6, reg_lambda = 1.0, gamma = 0.0,
        min_child_weight = 1.0, subsample = 1.0, colsample = 1.0, seed = 0,
        base_score = None, histogram = false, max_bins = 256
    ))]
    fn fit(
        py: Python<'_>,
        frame: Py<PyFrame>,
        w: usize,
        h: usize,
        mode: &str,
        stride: usize,
        n_trees: usize,
        learning_rate: f64,
        max_depth: usize,
        reg_lambda: f64,
        gamma: f64,
        min_child_weight: f64,
        subsample: f64,
        colsample: f64,
        seed: u64,
        base_score: Option<f64>,
        histogram: bool,
        max_bins: usize,
    ) -> PyResult<Self> {
        let spec = WindowSpec::with_stride(w, h, parse_mode(mode)?, stride).map_err(to_py)?;
        let params = make_params(
            n_trees,
            learning_rate,
            max_depth,
            reg_lambda,
            gamma,
            min_child_weight,
            subsample,
            colsample,
            seed,
            base_score,
            histogram,
            max_bins,
        );
        let inner = py
            .detach(|| fit_window_forecaster(&frame.get().inner, &spec, &params))
            .map_err(to_py)?;
        Ok(WindowForecaster { inner })
    }

    /// Forecast `h` steps from the last `w` observed targets plus their
    /// aligned covariate rows (one row of `num_covariates` values per step).
    #[pyo3(signature = (targets, covariates = None))]
    fn forecast(&self, targets: Vec<f64>, covariates: Option<Vec<Vec<f64>>>) -> PyResult<Vec<f64>> {
        let m = self.inner.num_covariates();
        let rows = covariates.unwrap_or_default();
        let mut flat = Vec::with_capacity(rows.len() * m);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != m {
                return Err(PyValueError::new_err(format!(
                    "covariate row {i} has {} values, expected {m}",
                    row.len()
                )));
            }
            flat.extend_from_slice(row);
        }
        self.inner.forecast_window(&targets, &flat).map_err(to_py)
    }

    /// Forecast from a pre-flattened input row of `input_width` values.
    fn forecast_flat(&self, x: Vec<f64>) -> PyResult<Vec<f64>> {
        self.inner.forecast_flat(&x).map_err(to_py)
    }

    #[getter]
    fn w(&self) -> usize {
        self.inner.spec().w
    }

    #[getter]
    fn horizon(&self) -> usize {
        self.inner.horizon()
    }

    #[getter]
    fn mode(&self) -> String {
        self.inner.spec().mode.to_string()
    }

    #[getter]
    fn num_covariates(&self) -> usize {
        self.inner.num_covariates()
    }

    /// Width of the flattened model input.
    #[getter]
    fn input_width(&self) -> usize {
        self.inner.input_width()
    }

    /// Boosting rounds kept per horizon model.
    #[getter]
    fn rounds(&self) -> Vec<usize> {
        self.inner.rounds_per_model()
    }

    /// Save as a directory of JSON model files plus a manifest.
    fn save(&self, dir: PathBuf) -> PyResult<()> {
        self.inner.save_dir(&dir).map_err(to_py)
    }

    #[staticmethod]
    fn load(dir: PathBuf) -> PyResult<Self> {
        let inner = MultiOutputForecaster::load_dir(&dir).map_err(to_py)?;
        Ok(WindowForecaster { inner })
    }

    fn __repr__(&self) -> String {
        let spec = self.inner.spec();
        format!(
            "WindowForecaster(w={}, h={}, mode={}, covariates={})",
            spec.w,
            spec.h,
            spec.mode,
            self.inner.num_covariates()
        )
    }
}

/// Point-wise baseline: a single boosted model mapping each step's
/// covariates (or the bare time index) to that step's target.
#[pyclass(frozen)]
struct NaiveForecaster {
    inner: boostcast::NaiveForecaster,
}

#[pymethods]
impl NaiveForecaster {
    /// Fit on every `(covariates_t, y_t)` pair of `frame`. With no
    /// covariates the model falls back to the time index unless
    /// `time_index_fallback=False`.
    #[staticmethod]
    #[allow(clippy::too_many_arguments)]
    #[pyo3(signature = (
        frame, *, time_index_fallback = true, n_trees = 500, learning_rate = 0.05,
        max_depth = 6, reg_lambda = 1.0, gamma = 0.0, min_child_weight = 1.0,
        subsample = 1.0, colsample = 1.0, seed = 0, base_score = None,
        histogram = false, max_bins = 256
    ))]
    fn fit(
        py: Python<'_>,
        frame: Py<PyFrame>,
        time_index_fallback: bool,
        n_trees: usize,
        learning_rate: f64,
        max_depth: usize,
        reg_lambda: f64,
        gamma: f64,
        min_child_weight: f64,
        subsample: f64,
        colsample: f64,
        seed: u64,
        base_score: Option<f64>,
        histogram: bool,
        max_bins: usize,
    ) -> PyResult<Self> {
        let params = make_params(
            n_trees,
            learning_rate,
            max_depth,
            reg_lambda,
            gamma,
            min_child_weight,
            subsample,
            colsample,
            seed,
            base_score,
            histogram,
            max_bins,
        );
        let fallback = if time_index_fallback {
            NaiveFallback::TimeIndex
        } else {
            NaiveFallback::Disabled
        };
        let inner = py
            .detach(|| fit_naive_forecaster(&frame.get().inner, &params, fallback))
            .map_err(to_py)?;
        Ok(NaiveForecaster { inner })
    }

    /// Predict one step from its covariate row (pass `time_index` when the
    /// model was fitted on the time-index fallback).
    #[pyo3(signature = (covariates, time_index = None))]
    fn forecast_point(&self, covariates: Vec<f64>, time_index: Option<usize>) -> PyResult<f64> {
        self.inner.forecast_point(&covariates, time_index).map_err(to_py)
    }

    /// Predict every step of `frame`, one track per series. `time_offset`
    /// is the global index of the frame's first step (training rows used
    /// local indices starting at 0).
    fn forecast_frame(&self, frame: &PyFrame, time_offset: usize) -> PyResult<Vec<Vec<f64>>> {
        self.inner.forecast_frame(&frame.inner, time_offset).map_err(to_py)
    }

    #[getter]
    fn num_covariates(&self) -> usize {
        self.inner.num_covariates()
    }

    #[getter]
    fn uses_time_index(&self) -> bool {
        self.inner.uses_time_index()
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        self.inner.save(&path).map_err(to_py)
    }

    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        let inner = boostcast::NaiveForecaster::load(&path).map_err(to_py)?;
        Ok(NaiveForecaster { inner })
    }

    fn __repr__(&self) -> String {
        format!(
            "NaiveForecaster(covariates={}, uses_time_index={})",
            self.inner.num_covariates(),
            self.inner.uses_time_index()
        )
    }
}

/// Repeat the last observed value `h` times.
#[pyfunction]
fn persistence(last_observed: f64, h: usize) -> Vec<f64> {
    persistence_forecast(last_observed, h)
}

/// Root mean squared error.
#[pyfunction]
fn rmse(actual: Vec<f64>, predicted: Vec<f64>) -> PyResult<f64> {
    boostcast::rmse(&actual, &predicted).map_err(to_py)
}

/// Mean absolute error.
#[pyfunction]
fn mae(actual: Vec<f64>, predicted: Vec<f64>) -> PyResult<f64> {
    boostcast::mae(&actual, &predicted).map_err(to_py)
}

/// Absolute error normalized by the total absolute actual value.
#[pyfunction]
fn wape(actual: Vec<f64>, predicted: Vec<f64>) -> PyResult<f64> {
    boostcast::wape(&actual, &predicted).map_err(to_py)
}

/// Mean absolute percentage error over the nonzero actuals. Returns
/// `(value, skipped)` where `skipped` counts the zero actuals left out.
#[pyfunction]
fn mape(actual: Vec<f64>, predicted: Vec<f64>) -> PyResult<(f64, usize)> {
    let out = boostcast::mape(&actual, &predicted).map_err(to_py)?;
    Ok((out.value, out.skipped))
}

/// Squared error relative to predicting the actuals' mean.
#[pyfunction]
fn rse(actual: Vec<f64>, predicted: Vec<f64>) -> PyResult<f64> {
    boostcast::rse(&actual, &predicted).map_err(to_py)
}

/// Pearson correlation coefficient, or `None` when either side is constant.
#[pyfunction]
fn pearson(a: Vec<f64>, b: Vec<f64>) -> PyResult<Option<f64>> {
    if a.len() != b.len() || a.is_empty() {
        return Err(PyValueError::new_err(format!(
            "pearson needs two equal-length non-empty tracks, got {} and {}",
            a.len(),
            b.len()
        )));
    }
    Ok(boostcast::pearson(&a, &b))
}

/// Score `(actual, predicted)` tracks, one pair per series, on the named
/// metrics. Returns `{metric: value}`.
#[pyfunction]
fn evaluate(
    py: Python<'_>,
    tracks: Vec<(Vec<f64>, Vec<f64>)>,
    metrics: Vec<String>,
) -> PyResult<Py<PyDict>> {
    let kinds: Vec<MetricKind> = metrics
        .iter()
        .map(|m| parse_metric(m))
        .collect::<PyResult<_>>()?;
    let summary = boostcast::evaluate(&tracks, &kinds).map_err(to_py)?;
    let dict = PyDict::new(py);
    for (kind, value) in &summary.values {
        dict.set_item(kind.name(), *value)?;
    }
    Ok(dict.unbind())
}

/// Stationary AR(1) sample: `x_t = mean + phi*(x_{t-1} - mean) + noise`.
#[pyfunction]
fn ar1(len: usize, phi: f64, sigma: f64, mean: f64, seed: u64) -> Vec<f64> {
    synth::ar1(len, phi, sigma, mean, seed)
}

/// Gaussian random walk starting at `start`.
#[pyfunction]
fn random_walk(len: usize, sigma: f64, start: f64, seed: u64) -> Vec<f64> {
    synth::random_walk(len, sigma, start, seed)
}

/// Sinusoid with the given period plus Gaussian noise.
#[pyfunction]
fn seasonal(len: usize, period: usize, amplitude: f64, noise: f64, seed: u64) -> Vec<f64> {
    synth::seasonal(len, period, amplitude, noise, seed)
}

/// Run a full benchmark experiment from a TOML config file. Returns
/// `{model: {metric: value}}`; artifacts go to the config's output
/// directory unless `write_artifacts=False`. `overrides` takes
/// `key.path=value` strings like the CLI's `--set`.
#[pyfunction]
#[pyo3(signature = (path, overrides = vec![], write_artifacts = true))]
fn run_config(
    py: Python<'_>,
    path: PathBuf,
    overrides: Vec<String>,
    write_artifacts: bool,
) -> PyResult<Py<PyDict>> {
    let cfg = ExperimentConfig::load(&path, &overrides).map_err(to_py)?;
    let outcome = py
        .detach(|| boostcast::bench::run_experiment(&cfg))
        .map_err(to_py)?;
    if write_artifacts {
        boostcast::bench::write_run_artifacts(&cfg, &outcome).map_err(to_py)?;
    }
    let by_model = PyDict::new(py);
    for report in &outcome.reports {
        let scores = PyDict::new(py);
        for (kind, value) in &report.summary.values {
            scores.set_item(kind.name(), *value)?;
        }
        by_model.set_item(&report.model, scores)?;
    }
    Ok(by_model.unbind())
}

#[pymodule]
fn _native(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<PyFrame>()?;
    m.add_class::<WindowForecaster>()?;
    m.add_class::<NaiveForecaster>()?;
    m.add_function(wrap_pyfunction!(persistence, m)?)?;
    m.add_function(wrap_pyfunction!(rmse, m)?)?;
    m.add_function(wrap_pyfunction!(mae, m)?)?;
    m.add_function(wrap_pyfunction!(wape, m)?)?;
    m.add_function(wrap_pyfunction!(mape, m)?)?;
    m.add_function(wrap_pyfunction!(rse, m)?)?;
    m.add_function(wrap_pyfunction!(pearson, m)?)?;
    m.add_function(wrap_pyfunction!(evaluate, m)?)?;
    m.add_function(wrap_pyfunction!(ar1, m)?)?;
    m.add_function(wrap_pyfunction!(random_walk, m)?)?;
    m.add_function(wrap_pyfunction!(seasonal, m)?)?;
    m.add_function(wrap_pyfunction!(run_config, m)?)?;
    Ok(())
}
