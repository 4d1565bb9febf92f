//! Experiment configuration: one TOML file fully determines a benchmark run.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::frame::{ImputePolicy, Schema, SplitSpec, TimeFeature};
use crate::forecast::NaiveFallback;
use crate::gbrt::{BoostParams, SplitStrategy};
use crate::metrics::MetricKind;
use crate::window::FlattenMode;

/// Which forecasters a run trains and scores.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    WindowGbrt,
    NaiveGbrt,
    Persistence,
}

impl ModelKind {
    pub fn name(&self) -> &'static str {
        match self {
            ModelKind::WindowGbrt => "window_gbrt",
            ModelKind::NaiveGbrt => "naive_gbrt",
            ModelKind::Persistence => "persistence",
        }
    }
}

impl std::fmt::Display for ModelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetConfig {
    /// Short name used in reports and output files.
    pub id: String,
    /// Delimited data file, resolved relative to the config file when not
    /// absolute.
    pub path: PathBuf,
    pub schema: Schema,
    /// Optional subset of series indices (after loading).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub series: Option<Vec<usize>>,
    #[serde(default = "default_impute")]
    pub impute: ImputePolicy,
    /// Standardize targets per series using statistics from `[0, train_end)`.
    #[serde(default)]
    pub standardize: bool,
}

fn default_impute() -> ImputePolicy {
    ImputePolicy::ForwardFill
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindowConfig {
    pub w: usize,
    pub h: usize,
    #[serde(default = "default_mode")]
    pub mode: FlattenMode,
    #[serde(default = "default_stride")]
    pub stride: usize,
}

fn default_mode() -> FlattenMode {
    FlattenMode::LastInstance
}

fn default_stride() -> usize {
    1
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CovariateConfig {
    /// Calendar features appended from the time axis.
    pub time_features: Vec<TimeFeature>,
    /// Drop covariate channels that came with the file.
    pub drop_native: bool,
    /// Append the series index as a constant channel.
    pub series_id_feature: bool,
}

/// Split-finding strategy selector (flat for easy TOML overrides).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SplitFinding {
    #[default]
    Exact,
    Histogram,
}

/// Flat mirror of [`BoostParams`] as it appears in config files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BoostConfig {
    pub n_trees: usize,
    pub learning_rate: f64,
    pub max_depth: usize,
    pub lambda: f64,
    pub gamma: f64,
    pub min_child_weight: f64,
    pub subsample: f64,
    pub colsample: f64,
    pub split: SplitFinding,
    pub max_bins: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub early_stopping_patience: Option<usize>,
}

impl Default for BoostConfig {
    fn default() -> Self {
        let p = BoostParams::default();
        BoostConfig {
            n_trees: p.n_trees,
            learning_rate: p.learning_rate,
            max_depth: p.max_depth,
            lambda: p.lambda,
            gamma: p.gamma,
            min_child_weight: p.min_child_weight,
            subsample: p.subsample,
            colsample: p.colsample,
            split: SplitFinding::Exact,
            max_bins: 256,
            early_stopping_patience: None,
        }
    }
}

impl BoostConfig {
    pub fn to_params(&self, seed: u64) -> BoostParams {
        BoostParams {
            n_trees: self.n_trees,
            learning_rate: self.learning_rate,
            max_depth: self.max_depth,
            lambda: self.lambda,
            gamma: self.gamma,
            min_child_weight: self.min_child_weight,
            subsample: self.subsample,
            colsample: self.colsample,
            seed,
            base_score: None,
            strategy: match self.split {
                SplitFinding::Exact => SplitStrategy::Exact,
                SplitFinding::Histogram => SplitStrategy::Histogram { max_bins: self.max_bins },
            },
            early_stopping_patience: self.early_stopping_patience,
        }
    }
}

fn default_models() -> Vec<ModelKind> {
    vec![ModelKind::WindowGbrt, ModelKind::NaiveGbrt, ModelKind::Persistence]
}

fn default_metrics() -> Vec<MetricKind> {
    vec![MetricKind::Rmse, MetricKind::Wape, MetricKind::Mae]
}

fn default_primary() -> MetricKind {
    MetricKind::Rmse
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub dataset: DatasetConfig,
    pub split: SplitSpec,
    pub window: WindowConfig,
    #[serde(default)]
    pub covariates: CovariateConfig,
    #[serde(default)]
    pub boost: BoostConfig,
    /// Hyper-parameter grid: key -> candidate values, expanded as a
    /// cartesian product in key order. Keys: the numeric boost fields plus
    /// `w`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<BTreeMap<String, Vec<toml::Value>>>,
    #[serde(default = "default_models")]
    pub models: Vec<ModelKind>,
    #[serde(default = "default_metrics")]
    pub metrics: Vec<MetricKind>,
    #[serde(default = "default_primary")]
    pub primary_metric: MetricKind,
    #[serde(default)]
    pub naive_fallback: NaiveFallback,
    /// Keep per-point predictions in the report (needed for plot data).
    #[serde(default)]
    pub retain_predictions: bool,
    #[serde(default)]
    pub seed: u64,
    pub output_dir: PathBuf,
    /// Rayon thread cap; default uses every core.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
}

impl ExperimentConfig {
    /// Read a config file, apply `key.path=value` overrides, validate, and
    /// resolve relative paths against the config's directory.
    pub fn load(path: &Path, overrides: &[String]) -> Result<ExperimentConfig> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
        let mut doc: toml::Table = toml::from_str(&text)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        for ov in overrides {
            apply_override(&mut doc, ov)?;
        }
        let mut cfg: ExperimentConfig = doc
            .try_into()
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        if cfg.dataset.path.is_relative() {
            cfg.dataset.path = base.join(&cfg.dataset.path);
        }
        if cfg.output_dir.is_relative() {
            cfg.output_dir = base.join(&cfg.output_dir);
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dataset.id.is_empty() {
            return Err(Error::Config("dataset.id must not be empty".into()));
        }
        if self.models.is_empty() {
            return Err(Error::Config("models list must not be empty".into()));
        }
        if self.metrics.is_empty() {
            return Err(Error::Config("metrics list must not be empty".into()));
        }
        if !self.metrics.contains(&self.primary_metric) {
            return Err(Error::Config(format!(
                "primary metric '{}' must appear in the metrics list",
                self.primary_metric
            )));
        }
        crate::window::WindowSpec::with_stride(
            self.window.w,
            self.window.h,
            self.window.mode,
            self.window.stride,
        )?;
        self.boost.to_params(self.seed).validate()?;
        if let Some(grid) = &self.grid {
            for (key, values) in grid {
                if values.is_empty() {
                    return Err(Error::Config(format!("grid key '{key}' has no values")));
                }
            }
            let points = expand_grid(self)?;
            if points.len() > 1 && self.split.valid_len == 0 {
                return Err(Error::Config(
                    "grid search needs a validation block; set split.valid_len > 0".into(),
                ));
            }
        }
        if self.workers == Some(0) {
            return Err(Error::Config("workers must be at least 1".into()));
        }
        Ok(())
    }

    /// SHA-256 of the resolved configuration in canonical TOML form.
    ///
    /// The digest identifies the *experiment*: two configs that can only
    /// produce identical results share a digest. Fields that steer where
    /// artifacts land or how many threads run (`output_dir`, `workers`)
    /// are normalized out before hashing.
    pub fn digest(&self) -> String {
        let mut identity = self.clone();
        identity.output_dir = PathBuf::new();
        identity.workers = None;
        let canonical = toml::to_string(&identity).expect("config serializes");
        let hash = Sha256::digest(canonical.as_bytes());
        let mut hex = String::with_capacity(64);
        for b in hash {
            hex.push_str(&format!("{b:02x}"));
        }
        hex
    }
}

/// One grid cell: a lookup width plus boost parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub w: usize,
    pub boost: BoostConfig,
}

impl GridPoint {
    /// Compact `key=value` listing of what this point overrides, for logs
    /// and the tuning report.
    pub fn describe(&self, base: &ExperimentConfig) -> String {
        let mut parts = Vec::new();
        if self.w != base.window.w {
            parts.push(format!("w={}", self.w));
        }
        let b = &self.boost;
        let d = &base.boost;
        if b.n_trees != d.n_trees {
            parts.push(format!("n_trees={}", b.n_trees));
        }
        if b.learning_rate != d.learning_rate {
            parts.push(format!("learning_rate={}", b.learning_rate));
        }
        if b.max_depth != d.max_depth {
            parts.push(format!("max_depth={}", b.max_depth));
        }
        if b.lambda != d.lambda {
            parts.push(format!("lambda={}", b.lambda));
        }
        if b.gamma != d.gamma {
            parts.push(format!("gamma={}", b.gamma));
        }
        if b.min_child_weight != d.min_child_weight {
            parts.push(format!("min_child_weight={}", b.min_child_weight));
        }
        if b.subsample != d.subsample {
            parts.push(format!("subsample={}", b.subsample));
        }
        if b.colsample != d.colsample {
            parts.push(format!("colsample={}", b.colsample));
        }
        if b.max_bins != d.max_bins {
            parts.push(format!("max_bins={}", b.max_bins));
        }
        if parts.is_empty() {
            "base".to_string()
        } else {
            parts.join(",")
        }
    }
}

fn grid_usize(key: &str, v: &toml::Value) -> Result<usize> {
    match v {
        toml::Value::Integer(i) if *i >= 0 => Ok(*i as usize),
        _ => Err(Error::Config(format!("grid key '{key}' needs non-negative integers, got {v}"))),
    }
}

fn grid_f64(key: &str, v: &toml::Value) -> Result<f64> {
    match v {
        toml::Value::Float(f) => Ok(*f),
        toml::Value::Integer(i) => Ok(*i as f64),
        _ => Err(Error::Config(format!("grid key '{key}' needs numbers, got {v}"))),
    }
}

fn apply_grid_key(point: &mut GridPoint, key: &str, v: &toml::Value) -> Result<()> {
    match key {
        "w" => point.w = grid_usize(key, v)?,
        "n_trees" => point.boost.n_trees = grid_usize(key, v)?,
        "max_depth" => point.boost.max_depth = grid_usize(key, v)?,
        "max_bins" => point.boost.max_bins = grid_usize(key, v)?,
        "learning_rate" => point.boost.learning_rate = grid_f64(key, v)?,
        "lambda" => point.boost.lambda = grid_f64(key, v)?,
        "gamma" => point.boost.gamma = grid_f64(key, v)?,
        "min_child_weight" => point.boost.min_child_weight = grid_f64(key, v)?,
        "subsample" => point.boost.subsample = grid_f64(key, v)?,
        "colsample" => point.boost.colsample = grid_f64(key, v)?,
        other => {
            return Err(Error::Config(format!(
                "unknown grid key '{other}' (supported: w, n_trees, max_depth, max_bins, \
                 learning_rate, lambda, gamma, min_child_weight, subsample, colsample)"
            )))
        }
    }
    Ok(())
}

/// Expand the grid as a cartesian product, keys in alphabetical order and
/// values in file order; without a grid, the single base point.
pub fn expand_grid(cfg: &ExperimentConfig) -> Result<Vec<GridPoint>> {
    let base = GridPoint { w: cfg.window.w, boost: cfg.boost.clone() };
    let Some(grid) = &cfg.grid else {
        return Ok(vec![base]);
    };
    if grid.is_empty() {
        return Ok(vec![base]);
    }
    let keys: Vec<&String> = grid.keys().collect();
    let mut points = vec![base];
    for key in keys {
        let values = &grid[key];
        let mut next = Vec::with_capacity(points.len() * values.len());
        for p in &points {
            for v in values {
                let mut q = p.clone();
                apply_grid_key(&mut q, key, v)?;
                next.push(q);
            }
        }
        points = next;
    }
    for p in &points {
        p.boost.to_params(cfg.seed).validate()?;
        if p.w == 0 {
            return Err(Error::Config("grid produced w = 0".into()));
        }
    }
    Ok(points)
}

/// Parse `path.to.key=value` and set it in the TOML document, creating
/// intermediate tables. Values parse as TOML (so `0.1`, `true`, `[1,2]`,
/// `"text"` all work); anything unparseable is a string.
fn apply_override(doc: &mut toml::Table, spec: &str) -> Result<()> {
    let (path, raw) = spec.split_once('=').ok_or_else(|| {
        Error::Config(format!("override '{spec}' must look like key.path=value"))
    })?;
    let value = parse_override_value(raw.trim());
    let segments: Vec<&str> = path.trim().split('.').collect();
    if segments.iter().any(|s| s.is_empty()) {
        return Err(Error::Config(format!("override '{spec}' has an empty path segment")));
    }
    let mut table = doc;
    for seg in &segments[..segments.len() - 1] {
        table = table
            .entry(seg.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()))
            .as_table_mut()
            .ok_or_else(|| {
                Error::Config(format!("override '{spec}': '{seg}' is not a table"))
            })?;
    }
    table.insert(segments[segments.len() - 1].to_string(), value);
    Ok(())
}

fn parse_override_value(raw: &str) -> toml::Value {
    let attempt: std::result::Result<toml::Table, _> = toml::from_str(&format!("v = {raw}"));
    match attempt {
        Ok(mut t) => t.remove("v").unwrap(),
        Err(_) => toml::Value::String(raw.to_string()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write as _;

    const MINIMAL: &str = r#"
output_dir = "out"

[dataset]
id = "demo"
path = "demo.csv"

[dataset.schema]
targets = ["*"]
has_header = false

[split]
train_end = 80
test_len = 20
valid_len = 10

[window]
w = 8
h = 4
"#;

    fn load_str(text: &str, overrides: &[&str]) -> Result<ExperimentConfig> {
        let mut f = tempfile::NamedTempFile::with_suffix(".toml").unwrap();
        f.write_all(text.as_bytes()).unwrap();
        let ovs: Vec<String> = overrides.iter().map(|s| s.to_string()).collect();
        ExperimentConfig::load(f.path(), &ovs)
    }

    #[test]
    fn minimal_config_gets_defaults() {
        let cfg = load_str(MINIMAL, &[]).unwrap();
        assert_eq!(cfg.window.mode, FlattenMode::LastInstance);
        assert_eq!(cfg.window.stride, 1);
        assert_eq!(cfg.models, default_models());
        assert_eq!(cfg.metrics, vec![MetricKind::Rmse, MetricKind::Wape, MetricKind::Mae]);
        assert_eq!(cfg.primary_metric, MetricKind::Rmse);
        assert_eq!(cfg.boost, BoostConfig::default());
        assert_eq!(cfg.naive_fallback, NaiveFallback::TimeIndex);
        assert_eq!(cfg.seed, 0);
        assert!(!cfg.retain_predictions);
        // Relative paths resolve against the config directory.
        assert!(cfg.dataset.path.is_absolute());
    }

    #[test]
    fn overrides_reach_nested_fields() {
        let cfg = load_str(
            MINIMAL,
            &["boost.learning_rate=0.1", "window.h=6", "seed=9", "dataset.id=other"],
        )
        .unwrap();
        assert_eq!(cfg.boost.learning_rate, 0.1);
        assert_eq!(cfg.window.h, 6);
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.dataset.id, "other");
    }

    #[test]
    fn bad_overrides_are_config_errors() {
        assert!(load_str(MINIMAL, &["nonsense"]).is_err());
        assert!(load_str(MINIMAL, &["boost.nope=1"]).is_err());
        assert!(load_str(MINIMAL, &["window.w=-3"]).is_err());
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let text = format!("{MINIMAL}\ntypo_field = 1\n");
        assert!(load_str(&text, &[]).is_err());
    }

    #[test]
    fn digest_is_stable_and_sensitive() {
        let a = load_str(MINIMAL, &[]).unwrap();
        let b = load_str(MINIMAL, &[]).unwrap();
        assert_eq!(a.digest(), b.digest());
        let c = load_str(MINIMAL, &["seed=1"]).unwrap();
        assert_ne!(a.digest(), c.digest());
        assert_eq!(a.digest().len(), 64);
        // Artifact destination and thread count never change the results,
        // so they must not change the experiment identity either.
        let d = load_str(MINIMAL, &["output_dir=elsewhere", "workers=3"]).unwrap();
        assert_eq!(a.digest(), d.digest());
    }

    #[test]
    fn grid_expansion_is_cartesian_and_ordered() {
        let text = format!(
            "{MINIMAL}\n[grid]\nlearning_rate = [0.05, 0.1]\nmax_depth = [4, 6, 8]\n"
        );
        let cfg = load_str(&text, &[]).unwrap();
        let points = expand_grid(&cfg).unwrap();
        assert_eq!(points.len(), 6);
        // Keys alphabetical: learning_rate varies slowest.
        assert_eq!(points[0].boost.learning_rate, 0.05);
        assert_eq!(points[0].boost.max_depth, 4);
        assert_eq!(points[1].boost.max_depth, 6);
        assert_eq!(points[3].boost.learning_rate, 0.1);
        // w stays at the base value.
        assert!(points.iter().all(|p| p.w == 8));
    }

    #[test]
    fn grid_can_tune_the_lookup_width() {
        let text = format!("{MINIMAL}\n[grid]\nw = [4, 8, 16]\n");
        let cfg = load_str(&text, &[]).unwrap();
        let points = expand_grid(&cfg).unwrap();
        assert_eq!(points.iter().map(|p| p.w).collect::<Vec<_>>(), vec![4, 8, 16]);
    }

    #[test]
    fn grid_without_validation_split_is_rejected() {
        let text = MINIMAL.replace("valid_len = 10", "valid_len = 0")
            + "\n[grid]\nmax_depth = [3, 5]\n";
        let err = load_str(&text, &[]).unwrap_err();
        assert!(err.to_string().contains("valid_len"), "{err}");
    }

    #[test]
    fn unknown_grid_key_is_rejected() {
        let text = format!("{MINIMAL}\n[grid]\nmagic = [1]\n");
        assert!(load_str(&text, &[]).is_err());
    }

    #[test]
    fn boost_config_maps_to_params() {
        let mut bc = BoostConfig::default();
        bc.split = SplitFinding::Histogram;
        bc.max_bins = 128;
        let p = bc.to_params(7);
        assert_eq!(p.strategy, SplitStrategy::Histogram { max_bins: 128 });
        assert_eq!(p.seed, 7);
        assert_eq!(p.n_trees, 500);
    }

    #[test]
    fn primary_metric_must_be_listed() {
        let text = format!("{MINIMAL}\nmetrics = [\"mae\"]\nprimary_metric = \"rmse\"\n");
        assert!(load_str(&text, &[]).is_err());
    }
}
