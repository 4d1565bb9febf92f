//! Forecasters: the window-based multi-output GBRT (one boosted model per
//! horizon step over a shared flat input), the naive point-wise GBRT that
//! regresses targets on concurrent covariates only, and the persistence
//! baseline.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frame::SeriesFrame;
use crate::gbrt::{self, BoostParams, BoostedModel, EvalSet, FeatureMatrix};
use crate::window::{make_training_set, FlatInstance, WindowSpec};

const FORECASTER_FORMAT: &str = "boostcast.forecaster";
const NAIVE_FORMAT: &str = "boostcast.naive";
const FORMAT_VERSION: u32 = 1;

/// Multi-output forecaster: `h` independently boosted single-target models
/// reading the same flattened lookup window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiOutputForecaster {
    spec: WindowSpec,
    m: usize,
    covariate_names: Vec<String>,
    models: Vec<BoostedModel>,
}

/// Fit the window-based forecaster on every training instance of `train`.
pub fn fit_window_forecaster(
    train: &SeriesFrame,
    spec: &WindowSpec,
    params: &BoostParams,
) -> Result<MultiOutputForecaster> {
    fit_window_forecaster_with_eval(train, spec, params, None)
}

/// Same, scoring each horizon model on held-out instances after every round
/// (enables early stopping).
pub fn fit_window_forecaster_with_eval(
    train: &SeriesFrame,
    spec: &WindowSpec,
    params: &BoostParams,
    eval: Option<&[FlatInstance]>,
) -> Result<MultiOutputForecaster> {
    let instances = make_training_set(train, spec)?;
    let rows: Vec<&[f64]> = instances.iter().map(|i| i.x.as_slice()).collect();
    let matrix = FeatureMatrix::from_rows(&rows)?;

    let eval_matrix = match eval {
        Some(insts) if !insts.is_empty() => {
            let erows: Vec<&[f64]> = insts.iter().map(|i| i.x.as_slice()).collect();
            Some(FeatureMatrix::from_rows(&erows)?)
        }
        _ => None,
    };

    let mut models = Vec::with_capacity(spec.h);
    for k in 0..spec.h {
        let targets: Vec<f64> = instances.iter().map(|i| i.y[k]).collect();
        let eval_set = match (&eval_matrix, eval) {
            (Some(em), Some(insts)) => {
                let ey: Vec<f64> = insts.iter().map(|i| i.y[k]).collect();
                Some((em, ey))
            }
            _ => None,
        };
        let model = match &eval_set {
            Some((em, ey)) => {
                gbrt::fit_with_eval(&matrix, &targets, params, Some(EvalSet { features: em, targets: ey }))?
            }
            None => gbrt::fit(&matrix, &targets, params)?,
        };
        models.push(model);
    }
    Ok(MultiOutputForecaster {
        spec: *spec,
        m: train.num_covariates(),
        covariate_names: train.covariate_names().to_vec(),
        models,
    })
}

impl MultiOutputForecaster {
    pub fn spec(&self) -> &WindowSpec {
        &self.spec
    }

    pub fn horizon(&self) -> usize {
        self.spec.h
    }

    pub fn num_covariates(&self) -> usize {
        self.m
    }

    pub fn input_width(&self) -> usize {
        self.spec.input_width(self.m)
    }

    pub fn models(&self) -> &[BoostedModel] {
        &self.models
    }

    /// Forecast `h` steps from a pre-flattened input row.
    pub fn forecast_flat(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.models.iter().map(|m| m.predict_row(x)).collect()
    }

    /// Forecast `h` steps from the last `w` observed targets and their
    /// aligned covariate rows (`w * m` values, time-major).
    pub fn forecast_window(&self, targets: &[f64], cov_rows: &[f64]) -> Result<Vec<f64>> {
        let x = self.spec.flatten(targets, cov_rows, self.m)?;
        self.forecast_flat(&x)
    }

    /// Forecast every instance; row order follows the input.
    pub fn forecast_instances(&self, instances: &[FlatInstance]) -> Result<Vec<Vec<f64>>> {
        instances.iter().map(|i| self.forecast_flat(&i.x)).collect()
    }

    /// Rounds kept per horizon model (equal unless early stopping differed).
    pub fn rounds_per_model(&self) -> Vec<usize> {
        self.models.iter().map(|m| m.n_trees()).collect()
    }

    /// Save as a directory: `forecaster.json` manifest plus one model file
    /// per horizon step.
    pub fn save_dir(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        let mut files = Vec::with_capacity(self.models.len());
        for (k, model) in self.models.iter().enumerate() {
            let name = format!("horizon_{k:03}.json");
            model.save(&dir.join(&name))?;
            files.push(name);
        }
        let manifest = ForecasterManifest {
            format: FORECASTER_FORMAT.to_string(),
            version: FORMAT_VERSION,
            spec: self.spec,
            m: self.m,
            covariate_names: self.covariate_names.clone(),
            model_files: files,
        };
        std::fs::write(dir.join("forecaster.json"), serde_json::to_string_pretty(&manifest)?)?;
        Ok(())
    }

    pub fn load_dir(dir: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(dir.join("forecaster.json"))
            .map_err(|e| Error::Data(format!("cannot read {}/forecaster.json: {e}", dir.display())))?;
        let manifest: ForecasterManifest = serde_json::from_str(&text)?;
        if manifest.format != FORECASTER_FORMAT {
            return Err(Error::Data(format!(
                "unsupported forecaster format '{}'",
                manifest.format
            )));
        }
        if manifest.version != FORMAT_VERSION {
            return Err(Error::Data(format!(
                "unsupported forecaster version {}, this build reads version {FORMAT_VERSION}",
                manifest.version
            )));
        }
        if manifest.model_files.len() != manifest.spec.h {
            return Err(Error::Data(format!(
                "forecaster manifest lists {} models for horizon {}",
                manifest.model_files.len(),
                manifest.spec.h
            )));
        }
        let width = manifest.spec.input_width(manifest.m);
        let mut models = Vec::with_capacity(manifest.model_files.len());
        for name in &manifest.model_files {
            let model = BoostedModel::load(&dir.join(name))?;
            if model.n_features() != width {
                return Err(Error::Data(format!(
                    "model {name} expects {} features but the manifest implies {width}",
                    model.n_features()
                )));
            }
            models.push(model);
        }
        Ok(MultiOutputForecaster {
            spec: manifest.spec,
            m: manifest.m,
            covariate_names: manifest.covariate_names,
            models,
        })
    }
}

#[derive(Serialize, Deserialize)]
struct ForecasterManifest {
    format: String,
    version: u32,
    spec: WindowSpec,
    m: usize,
    covariate_names: Vec<String>,
    model_files: Vec<String>,
}

/// What the naive forecaster regresses on when the dataset has no covariates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum NaiveFallback {
    /// Use the absolute time index as the only input.
    #[default]
    TimeIndex,
    /// Refuse to fit without covariates.
    Disabled,
}

/// Point-wise GBRT baseline: predicts each target from the covariates
/// observed at the same time step, with no lagged-target features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NaiveForecaster {
    m: usize,
    covariate_names: Vec<String>,
    uses_time_index: bool,
    model: BoostedModel,
}

/// Fit the naive baseline on every (covariates_t -> y_t) pair in `train`.
/// Training rows use local time indices starting at `0`; pass the matching
/// offset when forecasting later frames.
pub fn fit_naive_forecaster(
    train: &SeriesFrame,
    params: &BoostParams,
    fallback: NaiveFallback,
) -> Result<NaiveForecaster> {
    train.ensure_finite()?;
    let m = train.num_covariates();
    let uses_time_index = match (m, fallback) {
        (0, NaiveFallback::TimeIndex) => true,
        (0, NaiveFallback::Disabled) => {
            return Err(Error::Config(
                "naive forecaster has no inputs: the dataset has no covariates and the \
                 time-index fallback is disabled"
                    .into(),
            ))
        }
        _ => false,
    };
    let width = m + usize::from(uses_time_index);
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(train.n() * train.len());
    let mut targets: Vec<f64> = Vec::with_capacity(train.n() * train.len());
    for i in 0..train.n() {
        for t in 0..train.len() {
            let mut row = Vec::with_capacity(width);
            row.extend_from_slice(train.covariate_row(i, t));
            if uses_time_index {
                row.push(t as f64);
            }
            rows.push(row);
            targets.push(train.target(i, t));
        }
    }
    let matrix = FeatureMatrix::from_rows(&rows)?;
    let model = gbrt::fit(&matrix, &targets, params)?;
    Ok(NaiveForecaster {
        m,
        covariate_names: train.covariate_names().to_vec(),
        uses_time_index,
        model,
    })
}

impl NaiveForecaster {
    pub fn num_covariates(&self) -> usize {
        self.m
    }

    pub fn uses_time_index(&self) -> bool {
        self.uses_time_index
    }

    pub fn model(&self) -> &BoostedModel {
        &self.model
    }

    /// Predict one point from its concurrent covariates; `time_index` is the
    /// absolute position on the training time axis and is required exactly
    /// when the model was fit with the time-index fallback.
    pub fn forecast_point(&self, covariates: &[f64], time_index: Option<usize>) -> Result<f64> {
        if covariates.len() != self.m {
            return Err(Error::Data(format!(
                "{} covariates given, model expects {}",
                covariates.len(),
                self.m
            )));
        }
        let mut row = covariates.to_vec();
        if self.uses_time_index {
            let t = time_index.ok_or_else(|| {
                Error::Data("this naive model needs a time index for every prediction".into())
            })?;
            row.push(t as f64);
        }
        self.model.predict_row(&row)
    }

    /// Predict every point of `frame`. `time_offset` maps the frame's local
    /// indices onto the training axis (for a test frame, the train length).
    pub fn forecast_frame(&self, frame: &SeriesFrame, time_offset: usize) -> Result<Vec<Vec<f64>>> {
        frame.ensure_finite()?;
        if frame.num_covariates() != self.m {
            return Err(Error::Data(format!(
                "frame has {} covariates, model expects {}",
                frame.num_covariates(),
                self.m
            )));
        }
        let mut out = Vec::with_capacity(frame.n());
        for i in 0..frame.n() {
            let mut track = Vec::with_capacity(frame.len());
            for t in 0..frame.len() {
                track.push(self.forecast_point(frame.covariate_row(i, t), Some(time_offset + t))?);
            }
            out.push(track);
        }
        Ok(out)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = NaiveFile {
            format: NAIVE_FORMAT.to_string(),
            version: FORMAT_VERSION,
            forecaster: self.clone(),
        };
        std::fs::write(path, serde_json::to_string_pretty(&file)?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Data(format!("cannot read {}: {e}", path.display())))?;
        let file: NaiveFile = serde_json::from_str(&text)?;
        if file.format != NAIVE_FORMAT {
            return Err(Error::Data(format!("unsupported format '{}'", file.format)));
        }
        if file.version != FORMAT_VERSION {
            return Err(Error::Data(format!("unsupported version {}", file.version)));
        }
        Ok(file.forecaster)
    }
}

#[derive(Serialize, Deserialize)]
struct NaiveFile {
    format: String,
    version: u32,
    forecaster: NaiveForecaster,
}

/// Persistence baseline: repeat the last observed value across the horizon.
pub fn persistence_forecast(last_observed: f64, h: usize) -> Vec<f64> {
    vec![last_observed; h]
}
