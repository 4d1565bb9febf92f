//! boostcast: gradient-boosted forecasting for multivariate time series.
//!
//! The crate turns forecasting into supervised learning: a sliding lookup
//! window of `w` past observations (optionally joined with covariates)
//! becomes one flat feature row, and the next `h` values become its targets,
//! predicted by `h` independently boosted tree ensembles. A point-wise
//! gradient-boosted baseline, a persistence baseline, a metric suite, and a
//! config-driven benchmark harness round out the toolkit.
//!
//! Quick tour:
//!
//! ```
//! use boostcast::{
//!     fit_window_forecaster, make_test_set, synth, BoostParams, FlattenMode, SeriesFrame,
//!     SplitSpec, WindowSpec,
//! };
//!
//! let series = synth::ar1(300, 0.8, 0.2, 5.0, 42);
//! let frame = SeriesFrame::from_targets(&[series]).unwrap();
//! let parts = frame.split(&SplitSpec { train_end: 276, test_len: 24, valid_len: 0 }).unwrap();
//!
//! let spec = WindowSpec::new(12, 6, FlattenMode::TargetsOnly).unwrap();
//! let params = BoostParams { n_trees: 30, max_depth: 3, ..BoostParams::default() };
//! let model = fit_window_forecaster(&parts.train, &spec, &params).unwrap();
//!
//! let test = make_test_set(&parts.train, &parts.test, &spec).unwrap();
//! let forecasts = model.forecast_instances(&test.instances).unwrap();
//! assert_eq!(forecasts.len(), 4); // 24 test points tile into 4 blocks of 6
//! ```
//!
//! Determinism is a hard guarantee: a fixed configuration and seed produce
//! bit-identical models and reports regardless of thread count.

pub mod bench;
pub mod error;
pub mod forecast;
pub mod frame;
pub mod gbrt;
pub mod metrics;
pub mod synth;
pub mod window;

pub use error::{Error, Result};
pub use forecast::{
    fit_naive_forecaster, fit_window_forecaster, fit_window_forecaster_with_eval,
    persistence_forecast, MultiOutputForecaster, NaiveFallback, NaiveForecaster,
};
pub use frame::{
    load_delimited, write_delimited, ImputePolicy, Layout, Schema, SeriesFrame, SplitFrames,
    SplitSpec, Standardizer, TimeFeature,
};
pub use gbrt::{BoostParams, BoostedModel, EvalSet, FeatureMatrix, SplitStrategy};
pub use metrics::{
    corr, evaluate, mae, mape, pearson, rmse, rse, wape, MapeOutcome, MetricKind, MetricSummary,
};
pub use window::{make_test_set, make_training_set, FlatInstance, FlattenMode, TestSet, WindowSpec};

pub use bench::{ExperimentConfig, ModelKind, RunOutcome};
