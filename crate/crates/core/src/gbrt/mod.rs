//! Gradient-boosted regression trees for squared-error regression with the
//! second-order regularized objective: per round, gradients g_i = yhat_i -
//! y_i and unit hessians; splits maximize
//! `0.5*(GL^2/(HL+l) + GR^2/(HR+l) - G^2/(H+l)) - gamma` and leaves take
//! `-G/(H+l)`, scaled by the learning rate at prediction time.

mod matrix;
mod tree;

pub use matrix::FeatureMatrix;
pub use tree::{Node, RegressionTree};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const MODEL_FORMAT: &str = "boostcast.gbrt";
const MODEL_VERSION: u32 = 1;

/// Split-finding strategy: exhaustive scan over presorted values, or
/// histogram accumulation over quantile bins.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum SplitStrategy {
    Exact,
    Histogram { max_bins: usize },
}

impl Default for SplitStrategy {
    fn default() -> Self {
        SplitStrategy::Exact
    }
}

/// Boosting hyper-parameters. `Default` gives the reference configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BoostParams {
    pub n_trees: usize,
    pub learning_rate: f64,
    pub max_depth: usize,
    /// L2 penalty on leaf weights.
    pub lambda: f64,
    /// Per-split penalty subtracted from the gain.
    pub gamma: f64,
    /// Minimum hessian mass per child; with unit hessians, a row count.
    pub min_child_weight: f64,
    /// Row sampling fraction per round.
    pub subsample: f64,
    /// Feature sampling fraction per round.
    pub colsample: f64,
    pub seed: u64,
    /// Initial prediction; defaults to the training-target mean.
    pub base_score: Option<f64>,
    pub strategy: SplitStrategy,
    /// Stop when the eval loss has not improved for this many rounds and
    /// keep the best-round prefix. Requires an eval set.
    pub early_stopping_patience: Option<usize>,
}

impl Default for BoostParams {
    fn default() -> Self {
        BoostParams {
            n_trees: 500,
            learning_rate: 0.05,
            max_depth: 6,
            lambda: 1.0,
            gamma: 0.0,
            min_child_weight: 1.0,
            subsample: 1.0,
            colsample: 1.0,
            seed: 0,
            base_score: None,
            strategy: SplitStrategy::Exact,
            early_stopping_patience: None,
        }
    }
}

impl BoostParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.n_trees == 0 {
            return bad("n_trees must be at least 1".into());
        }
        if !(self.learning_rate > 0.0 && self.learning_rate <= 1.0) {
            return bad(format!("learning_rate must be in (0, 1], got {}", self.learning_rate));
        }
        if self.max_depth == 0 {
            return bad("max_depth must be at least 1".into());
        }
        if !(self.lambda >= 0.0) {
            return bad(format!("lambda must be non-negative, got {}", self.lambda));
        }
        if !(self.gamma >= 0.0) {
            return bad(format!("gamma must be non-negative, got {}", self.gamma));
        }
        if !(self.min_child_weight >= 0.0) {
            return bad(format!("min_child_weight must be non-negative, got {}", self.min_child_weight));
        }
        if !(self.subsample > 0.0 && self.subsample <= 1.0) {
            return bad(format!("subsample must be in (0, 1], got {}", self.subsample));
        }
        if !(self.colsample > 0.0 && self.colsample <= 1.0) {
            return bad(format!("colsample must be in (0, 1], got {}", self.colsample));
        }
        if let Some(b) = self.base_score {
            if !b.is_finite() {
                return bad("base_score must be finite".into());
            }
        }
        if let SplitStrategy::Histogram { max_bins } = self.strategy {
            if !(2..=u16::MAX as usize).contains(&max_bins) {
                return bad(format!("max_bins must be in 2..=65535, got {max_bins}"));
            }
        }
        if self.early_stopping_patience == Some(0) {
            return bad("early_stopping_patience must be at least 1".into());
        }
        Ok(())
    }
}

/// Held-out rows scored after every boosting round.
pub struct EvalSet<'a> {
    pub features: &'a FeatureMatrix,
    pub targets: &'a [f64],
}

/// A fitted boosted ensemble for one scalar target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoostedModel {
    base_score: f64,
    n_features: usize,
    params: BoostParams,
    trees: Vec<RegressionTree>,
    /// Eval RMSE after each kept round (empty without an eval set).
    eval_history: Vec<f64>,
    /// True when early stopping truncated the ensemble.
    stopped_early: bool,
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn sample_rows(rng: &mut ChaCha8Rng, n: usize, fraction: f64) -> Vec<u32> {
    if fraction >= 1.0 {
        return (0..n as u32).collect();
    }
    let k = ((n as f64 * fraction).round() as usize).clamp(1, n);
    let mut picked: Vec<u32> = rand::seq::index::sample(rng, n, k).into_iter().map(|i| i as u32).collect();
    picked.sort_unstable();
    picked
}

fn sample_cols(rng: &mut ChaCha8Rng, n: usize, fraction: f64) -> Vec<usize> {
    if fraction >= 1.0 {
        return (0..n).collect();
    }
    let k = ((n as f64 * fraction).round() as usize).clamp(1, n);
    let mut picked: Vec<usize> = rand::seq::index::sample(rng, n, k).into_vec();
    picked.sort_unstable();
    picked
}

/// Fit on `features`/`targets`; equivalent to [`fit_with_eval`] without an
/// eval set.
pub fn fit(features: &FeatureMatrix, targets: &[f64], params: &BoostParams) -> Result<BoostedModel> {
    fit_with_eval(features, targets, params, None)
}

/// Fit a boosted ensemble. With an eval set, RMSE is recorded after every
/// round; with `early_stopping_patience` the ensemble is truncated to the
/// best round once patience is exhausted.
pub fn fit_with_eval(
    features: &FeatureMatrix,
    targets: &[f64],
    params: &BoostParams,
    eval: Option<EvalSet<'_>>,
) -> Result<BoostedModel> {
    params.validate()?;
    let n = features.n_rows();
    if targets.len() != n {
        return Err(Error::Data(format!(
            "{} targets for {n} feature rows",
            targets.len()
        )));
    }
    if targets.iter().any(|t| !t.is_finite()) {
        return Err(Error::Data("training targets contain non-finite values".into()));
    }
    if let Some(e) = &eval {
        if e.features.n_cols() != features.n_cols() {
            return Err(Error::Data(format!(
                "eval set has {} features, training set has {}",
                e.features.n_cols(),
                features.n_cols()
            )));
        }
        if e.targets.len() != e.features.n_rows() {
            return Err(Error::Data("eval target count does not match eval rows".into()));
        }
    }
    if params.early_stopping_patience.is_some() && eval.is_none() {
        return Err(Error::Config("early_stopping_patience requires an eval set".into()));
    }

    let base_score = params.base_score.unwrap_or_else(|| mean(targets));
    let eta = params.learning_rate;
    let grow_spec = tree::GrowSpec {
        max_depth: params.max_depth,
        lambda: params.lambda,
        gamma: params.gamma,
        min_child_weight: params.min_child_weight,
    };
    let binned = match params.strategy {
        SplitStrategy::Histogram { max_bins } => Some(features.binned(max_bins)),
        SplitStrategy::Exact => None,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);

    let mut preds = vec![base_score; n];
    let mut grad = vec![0.0f64; n];
    let hess = vec![1.0f64; n];
    let mut trees: Vec<RegressionTree> = Vec::with_capacity(params.n_trees);
    let mut eval_preds: Option<Vec<f64>> = eval.as_ref().map(|e| vec![base_score; e.targets.len()]);
    let mut eval_history: Vec<f64> = Vec::new();
    let mut best = (f64::INFINITY, 0usize);
    let mut stopped_early = false;

    for round in 0..params.n_trees {
        for i in 0..n {
            grad[i] = preds[i] - targets[i];
        }
        let rows = sample_rows(&mut rng, n, params.subsample);
        let cols = sample_cols(&mut rng, features.n_cols(), params.colsample);
        let t = tree::grow(features, binned.as_deref(), &grad, &hess, &rows, &cols, &grow_spec);

        preds.par_iter_mut().enumerate().for_each(|(i, p)| {
            *p += eta * t.predict_at(|f| features.value(i, f));
        });
        trees.push(t);

        if let (Some(e), Some(ep)) = (&eval, &mut eval_preds) {
            let t = trees.last().unwrap();
            ep.par_iter_mut().enumerate().for_each(|(i, p)| {
                *p += eta * t.predict_at(|f| e.features.value(i, f));
            });
            let mse = ep
                .iter()
                .zip(e.targets)
                .map(|(p, y)| (p - y) * (p - y))
                .sum::<f64>()
                / ep.len() as f64;
            let rmse = mse.sqrt();
            eval_history.push(rmse);
            if rmse < best.0 {
                best = (rmse, round);
            }
            if let Some(patience) = params.early_stopping_patience {
                if round - best.1 >= patience {
                    trees.truncate(best.1 + 1);
                    eval_history.truncate(best.1 + 1);
                    stopped_early = true;
                    break;
                }
            }
        }
    }

    Ok(BoostedModel {
        base_score,
        n_features: features.n_cols(),
        params: params.clone(),
        trees,
        eval_history,
        stopped_early,
    })
}

impl BoostedModel {
    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn n_trees(&self) -> usize {
        self.trees.len()
    }

    pub fn base_score(&self) -> f64 {
        self.base_score
    }

    pub fn params(&self) -> &BoostParams {
        &self.params
    }

    pub fn eval_history(&self) -> &[f64] {
        &self.eval_history
    }

    pub fn stopped_early(&self) -> bool {
        self.stopped_early
    }

    fn check_row(&self, row: &[f64]) -> Result<()> {
        if row.len() != self.n_features {
            return Err(Error::Data(format!(
                "input row has {} features, model expects {}",
                row.len(),
                self.n_features
            )));
        }
        if row.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numerical("prediction input contains non-finite values".into()));
        }
        Ok(())
    }

    pub fn predict_row(&self, row: &[f64]) -> Result<f64> {
        self.check_row(row)?;
        Ok(self.predict_row_unchecked(row, self.trees.len()))
    }

    /// Prediction using only the first `rounds` trees.
    pub fn predict_row_upto(&self, row: &[f64], rounds: usize) -> Result<f64> {
        self.check_row(row)?;
        Ok(self.predict_row_unchecked(row, rounds.min(self.trees.len())))
    }

    fn predict_row_unchecked(&self, row: &[f64], rounds: usize) -> f64 {
        let mut acc = self.base_score;
        for t in &self.trees[..rounds] {
            acc += self.params.learning_rate * t.predict_row(row);
        }
        acc
    }

    pub fn predict_batch<R: AsRef<[f64]> + Sync>(&self, rows: &[R]) -> Result<Vec<f64>> {
        for row in rows {
            self.check_row(row.as_ref())?;
        }
        Ok(rows
            .par_iter()
            .map(|r| self.predict_row_unchecked(r.as_ref(), self.trees.len()))
            .collect())
    }

    /// Total split gain attributed to each feature.
    pub fn feature_importance(&self) -> Vec<f64> {
        let mut imp = vec![0.0; self.n_features];
        for t in &self.trees {
            t.accumulate_importance(&mut imp);
        }
        imp
    }

    pub fn to_json(&self) -> Result<String> {
        let file = ModelFile {
            format: MODEL_FORMAT.to_string(),
            version: MODEL_VERSION,
            model: self.clone(),
        };
        Ok(serde_json::to_string_pretty(&file)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ModelFile = serde_json::from_str(text)?;
        if file.format != MODEL_FORMAT {
            return Err(Error::Data(format!(
                "unsupported model format '{}', expected '{MODEL_FORMAT}'",
                file.format
            )));
        }
        if file.version != MODEL_VERSION {
            return Err(Error::Data(format!(
                "unsupported model version {}, this build reads version {MODEL_VERSION}",
                file.version
            )));
        }
        Ok(file.model)
    }

    pub fn save(&self, path: &std::path::Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Data(format!("cannot read model {}: {e}", path.display())))?;
        Self::from_json(&text)
    }
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    format: String,
    version: u32,
    model: BoostedModel,
}
