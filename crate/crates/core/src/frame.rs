//! In-memory representation of an aligned multivariate time series panel,
//! plus delimited-file ingestion, imputation, calendar covariates, and
//! train/validation/test splitting.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use chrono::{Datelike, Timelike};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A panel of `n` target series observed on a shared time axis of length
/// `len`, with `m` covariate channels per series. Targets and covariates are
/// stored densely; a missing observation is a NaN until imputation runs.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesFrame {
    n: usize,
    len: usize,
    m: usize,
    /// `n * len`, series-major: `targets[i * len + t]`.
    targets: Vec<f64>,
    /// `n * len * m`: `covariates[(i * len + t) * m + k]`.
    covariates: Vec<f64>,
    covariate_names: Vec<String>,
    series_names: Vec<String>,
    /// Epoch seconds, strictly increasing with a constant step.
    timestamps: Option<Vec<i64>>,
    /// Seconds between consecutive observations, when known.
    sample_rate: Option<i64>,
    finite: bool,
}

/// Temporal split boundaries: train is `[0, train_end)` minus the trailing
/// `valid_len` points, validation is `[train_end - valid_len, train_end)`,
/// test is `[train_end, train_end + test_len)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub train_end: usize,
    pub test_len: usize,
    #[serde(default)]
    pub valid_len: usize,
}

impl SplitSpec {
    pub fn new(train_end: usize, test_len: usize, valid_len: usize) -> Result<Self> {
        let s = SplitSpec { train_end, test_len, valid_len };
        s.validate_basic()?;
        Ok(s)
    }

    fn validate_basic(&self) -> Result<()> {
        if self.train_end == 0 {
            return Err(Error::Config("split: train_end must be positive".into()));
        }
        if self.test_len == 0 {
            return Err(Error::Config("split: test_len must be positive".into()));
        }
        if self.valid_len >= self.train_end {
            return Err(Error::Config(format!(
                "split: valid_len ({}) must be smaller than train_end ({})",
                self.valid_len, self.train_end
            )));
        }
        Ok(())
    }
}

/// Result of splitting a frame in time. `valid` is `None` when `valid_len` is 0.
#[derive(Debug, Clone)]
pub struct SplitFrames {
    pub train: SeriesFrame,
    pub valid: Option<SeriesFrame>,
    pub test: SeriesFrame,
}

/// How to fill missing observations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ImputePolicy {
    /// Carry the last observed value forward; leading gaps take the first
    /// observed value.
    ForwardFill,
    /// Replace missing observations with zero.
    Zero,
    /// Drop leading time steps until every channel is observed; any gap after
    /// that is an error.
    DropLeading,
}

impl std::fmt::Display for ImputePolicy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            ImputePolicy::ForwardFill => "forward_fill",
            ImputePolicy::Zero => "zero",
            ImputePolicy::DropLeading => "drop_leading",
        };
        f.write_str(s)
    }
}

/// Calendar features derivable from the time axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TimeFeature {
    HourOfDay,
    DayOfWeek,
    DayOfMonth,
    Month,
    IsWeekend,
}

impl TimeFeature {
    pub fn name(&self) -> &'static str {
        match self {
            TimeFeature::HourOfDay => "hour_of_day",
            TimeFeature::DayOfWeek => "day_of_week",
            TimeFeature::DayOfMonth => "day_of_month",
            TimeFeature::Month => "month",
            TimeFeature::IsWeekend => "is_weekend",
        }
    }

    fn value_at(&self, epoch_secs: i64) -> Result<f64> {
        let dt = chrono::DateTime::from_timestamp(epoch_secs, 0)
            .ok_or_else(|| Error::Data(format!("timestamp {epoch_secs} out of range")))?;
        Ok(match self {
            TimeFeature::HourOfDay => dt.hour() as f64,
            TimeFeature::DayOfWeek => dt.weekday().num_days_from_monday() as f64,
            TimeFeature::DayOfMonth => dt.day() as f64,
            TimeFeature::Month => dt.month() as f64,
            TimeFeature::IsWeekend => {
                if dt.weekday().num_days_from_monday() >= 5 {
                    1.0
                } else {
                    0.0
                }
            }
        })
    }
}

impl std::str::FromStr for TimeFeature {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "hour_of_day" => TimeFeature::HourOfDay,
            "day_of_week" => TimeFeature::DayOfWeek,
            "day_of_month" => TimeFeature::DayOfMonth,
            "month" => TimeFeature::Month,
            "is_weekend" => TimeFeature::IsWeekend,
            other => {
                return Err(Error::Config(format!(
                    "unknown time feature '{other}' (expected one of: hour_of_day, \
                     day_of_week, day_of_month, month, is_weekend)"
                )))
            }
        })
    }
}

fn compute_finite(values: &[f64]) -> bool {
    values.iter().all(|v| v.is_finite())
}

fn validate_axis(ts: &[i64], expected_rate: Option<i64>) -> Result<Option<i64>> {
    if ts.len() < 2 {
        return Ok(expected_rate);
    }
    let step = ts[1] - ts[0];
    if step <= 0 {
        return Err(Error::Data(format!(
            "timestamps must be strictly increasing (step {step} at index 1)"
        )));
    }
    if let Some(r) = expected_rate {
        if r != step {
            return Err(Error::Data(format!(
                "timestamp step {step}s does not match declared sample rate {r}s"
            )));
        }
    }
    for (i, w) in ts.windows(2).enumerate() {
        if w[1] - w[0] != step {
            return Err(Error::Data(format!(
                "irregular time axis: step {} at index {} (expected {step})",
                w[1] - w[0],
                i + 1
            )));
        }
    }
    Ok(Some(step))
}

impl SeriesFrame {
    /// Low-level constructor; validates every structural invariant.
    #[allow(clippy::too_many_arguments)]
    pub fn from_parts(
        n: usize,
        len: usize,
        m: usize,
        targets: Vec<f64>,
        covariates: Vec<f64>,
        covariate_names: Vec<String>,
        series_names: Vec<String>,
        timestamps: Option<Vec<i64>>,
        sample_rate: Option<i64>,
    ) -> Result<Self> {
        if n == 0 || len == 0 {
            return Err(Error::Data(format!(
                "frame must have at least one series and one time step (n={n}, len={len})"
            )));
        }
        if targets.len() != n * len {
            return Err(Error::Data(format!(
                "target buffer has {} values, expected n*len = {}",
                targets.len(),
                n * len
            )));
        }
        if covariates.len() != n * len * m {
            return Err(Error::Data(format!(
                "covariate buffer has {} values, expected n*len*m = {}",
                covariates.len(),
                n * len * m
            )));
        }
        if covariate_names.len() != m {
            return Err(Error::Data(format!(
                "{} covariate names for {m} channels",
                covariate_names.len()
            )));
        }
        if series_names.len() != n {
            return Err(Error::Data(format!(
                "{} series names for {n} series",
                series_names.len()
            )));
        }
        let sample_rate = match &timestamps {
            Some(ts) => {
                if ts.len() != len {
                    return Err(Error::Data(format!(
                        "{} timestamps for {len} time steps",
                        ts.len()
                    )));
                }
                validate_axis(ts, sample_rate)?
            }
            None => sample_rate,
        };
        let finite = compute_finite(&targets) && compute_finite(&covariates);
        Ok(SeriesFrame {
            n,
            len,
            m,
            targets,
            covariates,
            covariate_names,
            series_names,
            timestamps,
            sample_rate,
            finite,
        })
    }

    /// Covariate-free frame from one vector per series (all equal length).
    pub fn from_targets(series: &[Vec<f64>]) -> Result<Self> {
        if series.is_empty() {
            return Err(Error::Data("no series given".into()));
        }
        let len = series[0].len();
        for (i, s) in series.iter().enumerate() {
            if s.len() != len {
                return Err(Error::Data(format!(
                    "series {i} has length {}, expected {len}",
                    s.len()
                )));
            }
        }
        let targets: Vec<f64> = series.iter().flat_map(|s| s.iter().copied()).collect();
        let names = (0..series.len()).map(|i| format!("s{i}")).collect();
        SeriesFrame::from_parts(series.len(), len, 0, targets, Vec::new(), Vec::new(), names, None, None)
    }

    /// Attach a generated time axis starting at `start_epoch` with a constant
    /// step of `rate_secs` seconds.
    pub fn with_timestamps(mut self, start_epoch: i64, rate_secs: i64) -> Result<Self> {
        if rate_secs <= 0 {
            return Err(Error::Config(format!("sample rate must be positive, got {rate_secs}")));
        }
        self.timestamps = Some((0..self.len as i64).map(|i| start_epoch + i * rate_secs).collect());
        self.sample_rate = Some(rate_secs);
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        false // invariant: len >= 1
    }

    pub fn num_covariates(&self) -> usize {
        self.m
    }

    pub fn covariate_names(&self) -> &[String] {
        &self.covariate_names
    }

    pub fn series_names(&self) -> &[String] {
        &self.series_names
    }

    pub fn timestamps(&self) -> Option<&[i64]> {
        self.timestamps.as_deref()
    }

    pub fn sample_rate(&self) -> Option<i64> {
        self.sample_rate
    }

    pub fn target(&self, series: usize, t: usize) -> f64 {
        debug_assert!(series < self.n && t < self.len);
        self.targets[series * self.len + t]
    }

    pub fn target_series(&self, series: usize) -> &[f64] {
        &self.targets[series * self.len..(series + 1) * self.len]
    }

    pub fn covariate(&self, series: usize, t: usize, channel: usize) -> f64 {
        debug_assert!(series < self.n && t < self.len && channel < self.m);
        self.covariates[(series * self.len + t) * self.m + channel]
    }

    /// All covariate channels at one (series, time) point.
    pub fn covariate_row(&self, series: usize, t: usize) -> &[f64] {
        let base = (series * self.len + t) * self.m;
        &self.covariates[base..base + self.m]
    }

    /// True when every target and covariate value is finite.
    pub fn is_fully_observed(&self) -> bool {
        self.finite
    }

    /// Error naming the first non-finite location, if any.
    pub fn ensure_finite(&self) -> Result<()> {
        if self.finite {
            return Ok(());
        }
        for i in 0..self.n {
            for t in 0..self.len {
                if !self.target(i, t).is_finite() {
                    return Err(Error::Data(format!(
                        "series '{}' has a missing/non-finite target at t={t}; run imputation first",
                        self.series_names[i]
                    )));
                }
                for k in 0..self.m {
                    if !self.covariate(i, t, k).is_finite() {
                        return Err(Error::Data(format!(
                            "series '{}' covariate '{}' is missing/non-finite at t={t}; run imputation first",
                            self.series_names[i], self.covariate_names[k]
                        )));
                    }
                }
            }
        }
        unreachable!("finite flag disagreed with a full scan");
    }

    /// Fill missing values according to `policy`. Returns a new frame; under
    /// `DropLeading` the time axis may shrink.
    pub fn impute_missing(&self, policy: ImputePolicy) -> Result<SeriesFrame> {
        // Every (series, channel) pair is imputed independently; channel 0 is
        // the target, channels 1..=m are covariates.
        let channel_name = |k: usize| -> String {
            if k == 0 {
                "target".to_string()
            } else {
                format!("covariate '{}'", self.covariate_names[k - 1])
            }
        };
        let get = |buf: &SeriesFrame, i: usize, t: usize, k: usize| -> f64 {
            if k == 0 {
                buf.target(i, t)
            } else {
                buf.covariate(i, t, k - 1)
            }
        };

        // Entirely-missing channels are an error under every policy.
        for i in 0..self.n {
            for k in 0..=self.m {
                let any_finite = (0..self.len).any(|t| get(self, i, t, k).is_finite());
                if !any_finite {
                    return Err(Error::Data(format!(
                        "series '{}' {} is entirely missing; imputation impossible",
                        self.series_names[i],
                        channel_name(k)
                    )));
                }
            }
        }

        match policy {
            ImputePolicy::ForwardFill => {
                let mut out = self.clone();
                for i in 0..self.n {
                    // Target channel.
                    let base = i * self.len;
                    let first = (0..self.len).find(|&t| self.targets[base + t].is_finite()).unwrap();
                    let mut last = self.targets[base + first];
                    for t in 0..self.len {
                        let v = &mut out.targets[base + t];
                        if v.is_finite() {
                            last = *v;
                        } else {
                            *v = last;
                        }
                    }
                    // Covariate channels.
                    for k in 0..self.m {
                        let idx = |t: usize| (i * self.len + t) * self.m + k;
                        let first = (0..self.len).find(|&t| self.covariates[idx(t)].is_finite()).unwrap();
                        let mut last = self.covariates[idx(first)];
                        for t in 0..self.len {
                            let v = &mut out.covariates[idx(t)];
                            if v.is_finite() {
                                last = *v;
                            } else {
                                *v = last;
                            }
                        }
                    }
                }
                out.finite = true;
                Ok(out)
            }
            ImputePolicy::Zero => {
                let mut out = self.clone();
                for v in out.targets.iter_mut().chain(out.covariates.iter_mut()) {
                    if !v.is_finite() {
                        *v = 0.0;
                    }
                }
                out.finite = true;
                Ok(out)
            }
            ImputePolicy::DropLeading => {
                let mut start = 0usize;
                for i in 0..self.n {
                    for k in 0..=self.m {
                        let lead = (0..self.len)
                            .find(|&t| get(self, i, t, k).is_finite())
                            .unwrap();
                        start = start.max(lead);
                    }
                }
                if start >= self.len {
                    return Err(Error::Data("dropping leading missing rows would empty the frame".into()));
                }
                let out = self.slice_time(start, self.len);
                // Interior gaps cannot be fixed by dropping the head.
                for i in 0..out.n {
                    for k in 0..=out.m {
                        for t in 0..out.len {
                            if !get(&out, i, t, k).is_finite() {
                                return Err(Error::Data(format!(
                                    "series '{}' {} still missing at t={} after dropping {start} leading rows",
                                    out.series_names[i],
                                    channel_name(k),
                                    t + start
                                )));
                            }
                        }
                    }
                }
                Ok(out)
            }
        }
    }

    /// Append calendar covariates computed from the time axis. Features whose
    /// channel name already exists are skipped, so the call is idempotent.
    pub fn derive_time_covariates(&self, features: &[TimeFeature]) -> Result<SeriesFrame> {
        let ts = self.timestamps.as_ref().ok_or_else(|| {
            Error::Data(
                "frame has no time axis; load with a timestamp column or set synthetic_start \
                 in the schema"
                    .into(),
            )
        })?;
        let mut out = self.clone();
        for feat in features {
            if out.covariate_names.iter().any(|n| n == feat.name()) {
                continue;
            }
            let col: Vec<f64> = ts.iter().map(|&s| feat.value_at(s)).collect::<Result<_>>()?;
            out = out.push_shared_covariate(feat.name(), &col)?;
        }
        Ok(out)
    }

    /// Append one covariate channel whose values depend only on time (shared
    /// by all series).
    pub fn push_shared_covariate(&self, name: &str, values: &[f64]) -> Result<SeriesFrame> {
        if values.len() != self.len {
            return Err(Error::Data(format!(
                "covariate '{name}' has {} values for {} time steps",
                values.len(),
                self.len
            )));
        }
        if self.covariate_names.iter().any(|n| n == name) {
            return Err(Error::Config(format!("covariate '{name}' already exists")));
        }
        let m2 = self.m + 1;
        let mut cov = Vec::with_capacity(self.n * self.len * m2);
        for i in 0..self.n {
            for t in 0..self.len {
                cov.extend_from_slice(self.covariate_row(i, t));
                cov.push(values[t]);
            }
        }
        let mut names = self.covariate_names.clone();
        names.push(name.to_string());
        SeriesFrame::from_parts(
            self.n,
            self.len,
            m2,
            self.targets.clone(),
            cov,
            names,
            self.series_names.clone(),
            self.timestamps.clone(),
            self.sample_rate,
        )
    }

    /// Append the series index as a constant covariate channel `series_id`.
    pub fn with_series_id_channel(&self) -> Result<SeriesFrame> {
        if self.covariate_names.iter().any(|n| n == "series_id") {
            return Ok(self.clone());
        }
        let m2 = self.m + 1;
        let mut cov = Vec::with_capacity(self.n * self.len * m2);
        for i in 0..self.n {
            for t in 0..self.len {
                cov.extend_from_slice(self.covariate_row(i, t));
                cov.push(i as f64);
            }
        }
        let mut names = self.covariate_names.clone();
        names.push("series_id".to_string());
        SeriesFrame::from_parts(
            self.n,
            self.len,
            m2,
            self.targets.clone(),
            cov,
            names,
            self.series_names.clone(),
            self.timestamps.clone(),
            self.sample_rate,
        )
    }

    /// Drop all covariate channels, keeping only targets.
    pub fn drop_covariates(&self) -> SeriesFrame {
        let mut out = self.clone();
        out.m = 0;
        out.covariates = Vec::new();
        out.covariate_names = Vec::new();
        out.finite = compute_finite(&out.targets);
        out
    }

    /// Keep only the series at `indices` (order preserved, duplicates rejected).
    pub fn select_series(&self, indices: &[usize]) -> Result<SeriesFrame> {
        if indices.is_empty() {
            return Err(Error::Config("series selection is empty".into()));
        }
        let mut seen = vec![false; self.n];
        for &i in indices {
            if i >= self.n {
                return Err(Error::Config(format!(
                    "series index {i} out of range (frame has {} series)",
                    self.n
                )));
            }
            if seen[i] {
                return Err(Error::Config(format!("series index {i} selected twice")));
            }
            seen[i] = true;
        }
        let mut targets = Vec::with_capacity(indices.len() * self.len);
        let mut covariates = Vec::with_capacity(indices.len() * self.len * self.m);
        let mut names = Vec::with_capacity(indices.len());
        for &i in indices {
            targets.extend_from_slice(self.target_series(i));
            let base = i * self.len * self.m;
            covariates.extend_from_slice(&self.covariates[base..base + self.len * self.m]);
            names.push(self.series_names[i].clone());
        }
        SeriesFrame::from_parts(
            indices.len(),
            self.len,
            self.m,
            targets,
            covariates,
            self.covariate_names.clone(),
            names,
            self.timestamps.clone(),
            self.sample_rate,
        )
    }

    /// Copy of the time range `[a, b)` across all series.
    pub fn slice_time(&self, a: usize, b: usize) -> SeriesFrame {
        assert!(a < b && b <= self.len, "slice bounds {a}..{b} out of range 0..{}", self.len);
        let len2 = b - a;
        let mut targets = Vec::with_capacity(self.n * len2);
        let mut covariates = Vec::with_capacity(self.n * len2 * self.m);
        for i in 0..self.n {
            targets.extend_from_slice(&self.targets[i * self.len + a..i * self.len + b]);
            let lo = (i * self.len + a) * self.m;
            let hi = (i * self.len + b) * self.m;
            covariates.extend_from_slice(&self.covariates[lo..hi]);
        }
        let timestamps = self.timestamps.as_ref().map(|ts| ts[a..b].to_vec());
        SeriesFrame {
            n: self.n,
            len: len2,
            m: self.m,
            finite: compute_finite(&targets) && compute_finite(&covariates),
            targets,
            covariates,
            covariate_names: self.covariate_names.clone(),
            series_names: self.series_names.clone(),
            timestamps,
            sample_rate: self.sample_rate,
        }
    }

    /// Concatenate `other` after `self` in time. Series and covariate layout
    /// must match; when both carry time axes they must be contiguous.
    pub fn concat_time(&self, other: &SeriesFrame) -> Result<SeriesFrame> {
        if self.n != other.n || self.m != other.m {
            return Err(Error::Data(format!(
                "cannot concatenate frames with different shape: {}x{} vs {}x{} (series x channels)",
                self.n, self.m, other.n, other.m
            )));
        }
        if self.series_names != other.series_names || self.covariate_names != other.covariate_names {
            return Err(Error::Data("cannot concatenate frames with different column names".into()));
        }
        let timestamps = match (&self.timestamps, &other.timestamps) {
            (Some(a), Some(b)) => {
                let rate = self.sample_rate.ok_or_else(|| {
                    Error::Data("cannot concatenate single-point time axes without a sample rate".into())
                })?;
                if other.sample_rate.is_some() && other.sample_rate != self.sample_rate {
                    return Err(Error::Data("sample rates differ between frames".into()));
                }
                if b[0] != a[a.len() - 1] + rate {
                    return Err(Error::Data(format!(
                        "time axes are not contiguous: left ends at {}, right starts at {}",
                        a[a.len() - 1],
                        b[0]
                    )));
                }
                let mut ts = a.clone();
                ts.extend_from_slice(b);
                Some(ts)
            }
            (None, None) => None,
            _ => return Err(Error::Data("one frame has a time axis and the other does not".into())),
        };
        let len2 = self.len + other.len;
        let mut targets = Vec::with_capacity(self.n * len2);
        let mut covariates = Vec::with_capacity(self.n * len2 * self.m);
        for i in 0..self.n {
            targets.extend_from_slice(self.target_series(i));
            targets.extend_from_slice(other.target_series(i));
            let a = &self.covariates[i * self.len * self.m..(i + 1) * self.len * self.m];
            let b = &other.covariates[i * other.len * self.m..(i + 1) * other.len * self.m];
            covariates.extend_from_slice(a);
            covariates.extend_from_slice(b);
        }
        SeriesFrame::from_parts(
            self.n,
            len2,
            self.m,
            targets,
            covariates,
            self.covariate_names.clone(),
            self.series_names.clone(),
            timestamps,
            self.sample_rate,
        )
    }

    /// Split along time into train / optional validation / test frames.
    pub fn split(&self, spec: &SplitSpec) -> Result<SplitFrames> {
        spec.validate_basic()?;
        if spec.train_end + spec.test_len > self.len {
            return Err(Error::Config(format!(
                "split: train_end + test_len = {} exceeds series length {}",
                spec.train_end + spec.test_len,
                self.len
            )));
        }
        let train = self.slice_time(0, spec.train_end - spec.valid_len);
        let valid = if spec.valid_len > 0 {
            Some(self.slice_time(spec.train_end - spec.valid_len, spec.train_end))
        } else {
            None
        };
        let test = self.slice_time(spec.train_end, spec.train_end + spec.test_len);
        Ok(SplitFrames { train, valid, test })
    }
}

/// Per-series affine standardization of targets, fit on a leading time range
/// so test data never influences the statistics.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Standardizer {
    means: Vec<f64>,
    stds: Vec<f64>,
}

impl Standardizer {
    /// Fit per-series mean/std on `frame` targets restricted to `[0, fit_len)`.
    /// Constant series get std 1 so the transform stays invertible.
    pub fn fit(frame: &SeriesFrame, fit_len: usize) -> Result<Self> {
        if fit_len == 0 || fit_len > frame.len() {
            return Err(Error::Config(format!(
                "standardizer fit_len {fit_len} out of range 1..={}",
                frame.len()
            )));
        }
        let mut means = Vec::with_capacity(frame.n());
        let mut stds = Vec::with_capacity(frame.n());
        for i in 0..frame.n() {
            let xs = &frame.target_series(i)[..fit_len];
            let mean = xs.iter().sum::<f64>() / fit_len as f64;
            let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / fit_len as f64;
            let std = var.sqrt();
            means.push(mean);
            stds.push(if std > 1e-12 { std } else { 1.0 });
        }
        Ok(Standardizer { means, stds })
    }

    pub fn transform(&self, frame: &SeriesFrame) -> Result<SeriesFrame> {
        if self.means.len() != frame.n() {
            return Err(Error::Data(format!(
                "standardizer was fit on {} series, frame has {}",
                self.means.len(),
                frame.n()
            )));
        }
        let mut out = frame.clone();
        for i in 0..frame.n() {
            let base = i * frame.len();
            for t in 0..frame.len() {
                out.targets[base + t] = (out.targets[base + t] - self.means[i]) / self.stds[i];
            }
        }
        out.finite = compute_finite(&out.targets) && compute_finite(&out.covariates);
        Ok(out)
    }

    /// Map standardized predictions for one series back to the original scale.
    pub fn inverse(&self, series: usize, values: &mut [f64]) {
        let (m, s) = (self.means[series], self.stds[series]);
        for v in values {
            *v = *v * s + m;
        }
    }
}

// ---------------------------------------------------------------------------
// Delimited-file ingestion
// ---------------------------------------------------------------------------

/// File layout: `wide` has one column per series; `long` stacks rows keyed by
/// a series-id column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Layout {
    #[default]
    Wide,
    Long,
}

fn default_missing_values() -> Vec<String> {
    ["", "NA", "NaN", "nan", "null", "?"].iter().map(|s| s.to_string()).collect()
}

fn default_delimiter() -> String {
    ",".to_string()
}

fn default_true() -> bool {
    true
}

/// Column-role assignment for a delimited file. Every column not named here
/// is ignored.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Schema {
    #[serde(default)]
    pub layout: Layout,
    /// Field delimiter: a single character, or the alias "tab".
    #[serde(default = "default_delimiter")]
    pub delimiter: String,
    /// Whether the first row holds column names. Headerless files get
    /// synthetic names `c0`, `c1`, ...
    #[serde(default = "default_true")]
    pub has_header: bool,
    /// Timestamp column (epoch seconds or ISO-8601).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<String>,
    /// Series-id column; required for the long layout.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub series_id: Option<String>,
    /// Target columns. In the wide layout `["*"]` means every column not
    /// assigned another role.
    pub targets: Vec<String>,
    #[serde(default)]
    pub covariates: Vec<String>,
    /// Subset of `covariates` to one-hot encode (channel per distinct value).
    #[serde(default)]
    pub categorical: Vec<String>,
    /// Cell contents treated as missing.
    #[serde(default = "default_missing_values")]
    pub missing_values: Vec<String>,
    /// Expected seconds between rows; checked against the data when a
    /// timestamp column exists, required with `synthetic_start`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample_rate_secs: Option<i64>,
    /// Generate a time axis from this ISO-8601 instant when the file has no
    /// timestamp column.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub synthetic_start: Option<String>,
}

impl Schema {
    /// Minimal wide schema: every column is a target.
    pub fn wide_all_targets(has_header: bool) -> Schema {
        Schema {
            layout: Layout::Wide,
            delimiter: default_delimiter(),
            has_header,
            timestamp: None,
            series_id: None,
            targets: vec!["*".to_string()],
            covariates: Vec::new(),
            categorical: Vec::new(),
            missing_values: default_missing_values(),
            sample_rate_secs: None,
            synthetic_start: None,
        }
    }

    fn delimiter_byte(&self) -> Result<u8> {
        match self.delimiter.as_str() {
            "tab" | "\t" => Ok(b'\t'),
            s if s.len() == 1 && s.is_ascii() => Ok(s.as_bytes()[0]),
            other => Err(Error::Config(format!(
                "delimiter must be one ASCII character or \"tab\", got '{other}'"
            ))),
        }
    }

    fn is_missing(&self, cell: &str) -> bool {
        self.missing_values.iter().any(|m| m == cell)
    }
}

/// Parse a timestamp cell: epoch seconds, RFC 3339, or common ISO layouts.
pub fn parse_timestamp(s: &str) -> Result<i64> {
    let t = s.trim();
    if let Ok(v) = t.parse::<i64>() {
        return Ok(v);
    }
    if let Ok(dt) = chrono::DateTime::parse_from_rfc3339(t) {
        return Ok(dt.timestamp());
    }
    for fmt in ["%Y-%m-%d %H:%M:%S", "%Y-%m-%dT%H:%M:%S", "%Y-%m-%d %H:%M"] {
        if let Ok(dt) = chrono::NaiveDateTime::parse_from_str(t, fmt) {
            return Ok(dt.and_utc().timestamp());
        }
    }
    if let Ok(d) = chrono::NaiveDate::parse_from_str(t, "%Y-%m-%d") {
        return Ok(d.and_hms_opt(0, 0, 0).unwrap().and_utc().timestamp());
    }
    Err(Error::Data(format!("cannot parse timestamp '{t}'")))
}

fn parse_cell(schema: &Schema, cell: &str, line: usize, col: &str) -> Result<f64> {
    let c = cell.trim();
    if schema.is_missing(c) {
        return Ok(f64::NAN);
    }
    match c.parse::<f64>() {
        // Non-finite literals count as missing so downstream invariants hold.
        Ok(v) if v.is_finite() => Ok(v),
        Ok(_) => Ok(f64::NAN),
        Err(_) => Err(Error::Data(format!(
            "line {line}, column '{col}': cannot parse '{c}' as a number"
        ))),
    }
}

struct ResolvedColumns {
    ts: Option<usize>,
    sid: Option<usize>,
    targets: Vec<usize>,
    /// (column index, name, categorical?)
    covariates: Vec<(usize, String, bool)>,
}

fn resolve_columns(schema: &Schema, names: &[String]) -> Result<ResolvedColumns> {
    let find = |name: &str| -> Result<usize> {
        names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| Error::Config(format!("schema references unknown column '{name}'")))
    };
    for c in &schema.categorical {
        if !schema.covariates.contains(c) {
            return Err(Error::Config(format!(
                "categorical column '{c}' must also be listed in covariates"
            )));
        }
    }
    let ts = schema.timestamp.as_deref().map(find).transpose()?;
    let sid = schema.series_id.as_deref().map(find).transpose()?;
    let covariates = schema
        .covariates
        .iter()
        .map(|c| Ok((find(c)?, c.clone(), schema.categorical.contains(c))))
        .collect::<Result<Vec<_>>>()?;

    let targets = if schema.targets.len() == 1 && schema.targets[0] == "*" {
        let mut used: Vec<usize> = covariates.iter().map(|c| c.0).collect();
        used.extend(ts);
        used.extend(sid);
        (0..names.len()).filter(|i| !used.contains(i)).collect()
    } else {
        schema.targets.iter().map(|t| find(t)).collect::<Result<Vec<_>>>()?
    };
    if targets.is_empty() {
        return Err(Error::Config("schema selects no target columns".into()));
    }
    Ok(ResolvedColumns { ts, sid, targets, covariates })
}

/// Expand raw categorical strings into sorted one-hot channels.
/// `raw[r]` is `None` when the cell was a missing sentinel.
fn encode_categorical(name: &str, raw: &[Option<String>]) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let mut cats: Vec<&str> = raw.iter().flatten().map(|s| s.as_str()).collect();
    cats.sort_unstable();
    cats.dedup();
    if cats.is_empty() {
        return Err(Error::Data(format!("categorical column '{name}' is entirely missing")));
    }
    let names = cats.iter().map(|c| format!("{name}={c}")).collect();
    let mut channels = vec![vec![0.0; raw.len()]; cats.len()];
    for (r, cell) in raw.iter().enumerate() {
        match cell {
            Some(v) => {
                let k = cats.binary_search(&v.as_str()).unwrap();
                channels[k][r] = 1.0;
            }
            None => {
                for ch in channels.iter_mut() {
                    ch[r] = f64::NAN;
                }
            }
        }
    }
    Ok((names, channels))
}

fn finalize_timestamps(
    schema: &Schema,
    parsed: Option<Vec<i64>>,
    len: usize,
) -> Result<(Option<Vec<i64>>, Option<i64>)> {
    match parsed {
        Some(ts) => {
            let rate = validate_axis(&ts, schema.sample_rate_secs)?;
            Ok((Some(ts), rate))
        }
        None => match &schema.synthetic_start {
            Some(start) => {
                let rate = schema.sample_rate_secs.ok_or_else(|| {
                    Error::Config("synthetic_start requires sample_rate_secs".into())
                })?;
                if rate <= 0 {
                    return Err(Error::Config(format!("sample_rate_secs must be positive, got {rate}")));
                }
                let s = parse_timestamp(start)?;
                Ok((Some((0..len as i64).map(|i| s + i * rate).collect()), Some(rate)))
            }
            None => Ok((None, schema.sample_rate_secs)),
        },
    }
}

/// Load a delimited file into a frame using `schema` to assign column roles.
pub fn load_delimited(path: &Path, schema: &Schema) -> Result<SeriesFrame> {
    let delim = schema.delimiter_byte()?;
    let file = File::open(path)
        .map_err(|e| Error::Data(format!("cannot open {}: {e}", path.display())))?;
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .delimiter(delim)
        .flexible(false)
        .from_reader(BufReader::new(file));

    let mut records = rdr.records();
    let first = match records.next() {
        Some(r) => r?,
        None => return Err(Error::Data(format!("{} is empty", path.display()))),
    };
    let (names, header_lines): (Vec<String>, usize) = if schema.has_header {
        (first.iter().map(str::to_string).collect(), 1)
    } else {
        ((0..first.len()).map(|i| format!("c{i}")).collect(), 0)
    };
    let cols = resolve_columns(schema, &names)?;

    if schema.layout == Layout::Long && cols.sid.is_none() {
        return Err(Error::Config("long layout requires a series_id column".into()));
    }
    if schema.layout == Layout::Long && cols.targets.len() != 1 {
        return Err(Error::Config(format!(
            "long layout requires exactly one target column, got {}",
            cols.targets.len()
        )));
    }

    // Stream rows once; categorical cells are kept raw and encoded afterwards.
    struct SeriesBuf {
        name: String,
        targets: Vec<f64>,
        numeric: Vec<Vec<f64>>,          // per numeric covariate
        raw: Vec<Vec<Option<String>>>,   // per categorical covariate
        timestamps: Vec<i64>,
    }
    let num_numeric = cols.covariates.iter().filter(|c| !c.2).count();
    let num_cat = cols.covariates.len() - num_numeric;
    let new_buf = |name: String| SeriesBuf {
        name,
        targets: Vec::new(),
        numeric: vec![Vec::new(); num_numeric],
        raw: vec![Vec::new(); num_cat],
        timestamps: Vec::new(),
    };

    let mut series: Vec<SeriesBuf> = Vec::new();
    let mut by_id: BTreeMap<String, usize> = BTreeMap::new();
    if schema.layout == Layout::Wide {
        for &c in &cols.targets {
            series.push(new_buf(names[c].clone()));
        }
    }
    // Wide-layout shared covariates are collected once per time step.
    let mut wide_numeric: Vec<Vec<f64>> = vec![Vec::new(); num_numeric];
    let mut wide_raw: Vec<Vec<Option<String>>> = vec![Vec::new(); num_cat];
    let mut wide_ts: Vec<i64> = Vec::new();

    let mut line = header_lines; // 1-based line number of the previous row
    let mut row_iter = if schema.has_header { None } else { Some(first) };
    loop {
        let record = match row_iter.take() {
            Some(r) => r,
            None => match records.next() {
                Some(r) => r?,
                None => break,
            },
        };
        line += 1;
        let cell = |idx: usize| record.get(idx).unwrap_or("");

        let read_covs = |numeric: &mut Vec<Vec<f64>>, raw: &mut Vec<Vec<Option<String>>>| -> Result<()> {
            let (mut ni, mut ci) = (0, 0);
            for (idx, name, is_cat) in &cols.covariates {
                if *is_cat {
                    let c = cell(*idx).trim();
                    raw[ci].push(if schema.is_missing(c) { None } else { Some(c.to_string()) });
                    ci += 1;
                } else {
                    numeric[ni].push(parse_cell(schema, cell(*idx), line, name)?);
                    ni += 1;
                }
            }
            Ok(())
        };

        match schema.layout {
            Layout::Wide => {
                if let Some(tsi) = cols.ts {
                    wide_ts.push(parse_timestamp(cell(tsi)).map_err(|e| {
                        Error::Data(format!("line {line}: {e}"))
                    })?);
                }
                for (s, &c) in cols.targets.iter().enumerate() {
                    let v = parse_cell(schema, cell(c), line, &names[c])?;
                    series[s].targets.push(v);
                }
                read_covs(&mut wide_numeric, &mut wide_raw)?;
            }
            Layout::Long => {
                let id = cell(cols.sid.unwrap()).trim().to_string();
                let slot = *by_id.entry(id.clone()).or_insert_with(|| {
                    series.push(new_buf(id));
                    series.len() - 1
                });
                let buf = &mut series[slot];
                if let Some(tsi) = cols.ts {
                    buf.timestamps.push(parse_timestamp(cell(tsi)).map_err(|e| {
                        Error::Data(format!("line {line}: {e}"))
                    })?);
                }
                let tcol = cols.targets[0];
                let v = parse_cell(schema, cell(tcol), line, &names[tcol])?;
                buf.targets.push(v);
                read_covs(&mut buf.numeric, &mut buf.raw)?;
            }
        }
    }

    if series.is_empty() || series[0].targets.is_empty() {
        return Err(Error::Data(format!("{} contains no data rows", path.display())));
    }

    // Assemble the frame.
    let n = series.len();
    let len = series[0].targets.len();
    for b in &series {
        if b.targets.len() != len {
            return Err(Error::Data(format!(
                "series '{}' has {} rows but '{}' has {len}; all series must share the time axis",
                b.name,
                b.targets.len(),
                series[0].name
            )));
        }
    }

    // Channel expansion: keep schema order, categorical columns expand in place.
    let expand = |numeric: &[Vec<f64>], raw: &[Vec<Option<String>>]| -> Result<(Vec<String>, Vec<Vec<f64>>)> {
        let mut names_out = Vec::new();
        let mut chans: Vec<Vec<f64>> = Vec::new();
        let (mut ni, mut ci) = (0, 0);
        for (_, name, is_cat) in &cols.covariates {
            if *is_cat {
                let (cn, cc) = encode_categorical(name, &raw[ci])?;
                names_out.extend(cn);
                chans.extend(cc);
                ci += 1;
            } else {
                names_out.push(name.clone());
                chans.push(numeric[ni].clone());
                ni += 1;
            }
        }
        Ok((names_out, chans))
    };

    match schema.layout {
        Layout::Wide => {
            let (cov_names, chans) = expand(&wide_numeric, &wide_raw)?;
            let m = cov_names.len();
            let mut targets = Vec::with_capacity(n * len);
            for b in &series {
                targets.extend_from_slice(&b.targets);
            }
            let mut covariates = Vec::with_capacity(n * len * m);
            for _ in 0..n {
                for t in 0..len {
                    for ch in &chans {
                        covariates.push(ch[t]);
                    }
                }
            }
            let series_names = series.iter().map(|b| b.name.clone()).collect();
            let (ts, rate) = finalize_timestamps(schema, (cols.ts.is_some()).then_some(wide_ts), len)?;
            SeriesFrame::from_parts(n, len, m, targets, covariates, cov_names, series_names, ts, rate)
        }
        Layout::Long => {
            // Categorical categories must be global across series, so encode
            // over the concatenation and slice back per series.
            let mut cat_all: Vec<Vec<Option<String>>> = vec![Vec::new(); num_cat];
            for b in &series {
                for (ci, r) in b.raw.iter().enumerate() {
                    cat_all[ci].extend(r.iter().cloned());
                }
            }
            let mut numeric_all: Vec<Vec<f64>> = vec![Vec::new(); num_numeric];
            for b in &series {
                for (ni, r) in b.numeric.iter().enumerate() {
                    numeric_all[ni].extend_from_slice(r);
                }
            }
            let (cov_names, chans) = expand(&numeric_all, &cat_all)?;
            let m = cov_names.len();

            if cols.ts.is_some() {
                for b in &series[1..] {
                    if b.timestamps != series[0].timestamps {
                        return Err(Error::Data(format!(
                            "series '{}' has a different time axis than '{}'",
                            b.name, series[0].name
                        )));
                    }
                }
            }
            let mut targets = Vec::with_capacity(n * len);
            for b in &series {
                targets.extend_from_slice(&b.targets);
            }
            let mut covariates = Vec::with_capacity(n * len * m);
            for i in 0..n {
                for t in 0..len {
                    for ch in &chans {
                        covariates.push(ch[i * len + t]);
                    }
                }
            }
            let series_names = series.iter().map(|b| b.name.clone()).collect();
            let parsed_ts = (cols.ts.is_some()).then(|| series[0].timestamps.clone());
            let (ts, rate) = finalize_timestamps(schema, parsed_ts, len)?;
            SeriesFrame::from_parts(n, len, m, targets, covariates, cov_names, series_names, ts, rate)
        }
    }
}

/// Write a frame in canonical form: wide when there is a single series or no
/// covariates, long otherwise. `canonical_schema` describes the result.
pub fn write_delimited(frame: &SeriesFrame, path: &Path, delimiter: u8) -> Result<()> {
    let file = File::create(path)
        .map_err(|e| Error::Data(format!("cannot create {}: {e}", path.display())))?;
    let mut out = BufWriter::new(file);
    let d = delimiter as char;
    let fmt = |v: f64| -> String {
        if v.is_finite() {
            format!("{v}")
        } else {
            "NaN".to_string()
        }
    };

    let wide = frame.n() == 1 || frame.num_covariates() == 0;
    let mut header: Vec<String> = Vec::new();
    if frame.timestamps().is_some() {
        header.push("timestamp".into());
    }
    if wide {
        header.extend(frame.series_names().iter().cloned());
        if frame.n() == 1 {
            header.extend(frame.covariate_names().iter().cloned());
        }
        writeln!(out, "{}", header.join(&d.to_string()))?;
        for t in 0..frame.len() {
            let mut row: Vec<String> = Vec::new();
            if let Some(ts) = frame.timestamps() {
                row.push(ts[t].to_string());
            }
            for i in 0..frame.n() {
                row.push(fmt(frame.target(i, t)));
            }
            if frame.n() == 1 {
                for k in 0..frame.num_covariates() {
                    row.push(fmt(frame.covariate(0, t, k)));
                }
            }
            writeln!(out, "{}", row.join(&d.to_string()))?;
        }
    } else {
        header.push("series".into());
        header.push("y".into());
        header.extend(frame.covariate_names().iter().cloned());
        writeln!(out, "{}", header.join(&d.to_string()))?;
        for i in 0..frame.n() {
            for t in 0..frame.len() {
                let mut row: Vec<String> = Vec::new();
                if let Some(ts) = frame.timestamps() {
                    row.push(ts[t].to_string());
                }
                row.push(frame.series_names()[i].clone());
                row.push(fmt(frame.target(i, t)));
                for k in 0..frame.num_covariates() {
                    row.push(fmt(frame.covariate(i, t, k)));
                }
                writeln!(out, "{}", row.join(&d.to_string()))?;
            }
        }
    }
    out.flush()?;
    Ok(())
}

/// Schema that reads back a file produced by [`write_delimited`].
pub fn canonical_schema(frame: &SeriesFrame, delimiter: &str) -> Schema {
    let wide = frame.n() == 1 || frame.num_covariates() == 0;
    Schema {
        layout: if wide { Layout::Wide } else { Layout::Long },
        delimiter: delimiter.to_string(),
        has_header: true,
        timestamp: frame.timestamps().map(|_| "timestamp".to_string()),
        series_id: if wide { None } else { Some("series".to_string()) },
        targets: if wide {
            frame.series_names().to_vec()
        } else {
            vec!["y".to_string()]
        },
        covariates: frame.covariate_names().to_vec(),
        categorical: Vec::new(),
        missing_values: default_missing_values(),
        sample_rate_secs: frame.sample_rate(),
        synthetic_start: None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn frame_2x6() -> SeriesFrame {
        SeriesFrame::from_targets(&[
            vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0],
            vec![10.0, 20.0, 30.0, 40.0, 50.0, 60.0],
        ])
        .unwrap()
    }

    #[test]
    fn construction_validates_shapes() {
        assert!(SeriesFrame::from_targets(&[]).is_err());
        assert!(SeriesFrame::from_targets(&[vec![1.0], vec![1.0, 2.0]]).is_err());
        let err = SeriesFrame::from_parts(1, 2, 1, vec![0.0; 2], vec![0.0; 3], vec!["a".into()], vec!["s".into()], None, None);
        assert!(err.is_err());
    }

    #[test]
    fn split_boundaries_are_exact() {
        let f = frame_2x6();
        let parts = f.split(&SplitSpec::new(4, 2, 1).unwrap()).unwrap();
        assert_eq!(parts.train.len(), 3);
        assert_eq!(parts.valid.as_ref().unwrap().len(), 1);
        assert_eq!(parts.test.len(), 2);
        assert_eq!(parts.train.target_series(0), &[1.0, 2.0, 3.0]);
        assert_eq!(parts.valid.unwrap().target_series(0), &[4.0]);
        assert_eq!(parts.test.target_series(1), &[50.0, 60.0]);

        // No validation block.
        let parts = f.split(&SplitSpec::new(4, 2, 0).unwrap()).unwrap();
        assert!(parts.valid.is_none());
        assert_eq!(parts.train.len(), 4);
    }

    #[test]
    fn split_rejects_bad_bounds() {
        let f = frame_2x6();
        assert!(f.split(&SplitSpec { train_end: 5, test_len: 2, valid_len: 0 }).is_err());
        assert!(SplitSpec::new(4, 2, 4).is_err());
        assert!(SplitSpec::new(0, 2, 0).is_err());
    }

    #[test]
    fn split_at_documented_scale() {
        // 26136 hourly points, train_end 25968, one week of test.
        let spec = SplitSpec::new(25968, 168, 0).unwrap();
        assert_eq!(spec.train_end + spec.test_len, 26136);
    }

    #[test]
    fn concat_restores_split() {
        let f = frame_2x6().with_timestamps(1_000_000, 3600).unwrap();
        let parts = f.split(&SplitSpec::new(4, 2, 0).unwrap()).unwrap();
        let back = parts.train.concat_time(&parts.test).unwrap();
        assert_eq!(back, f);
    }

    #[test]
    fn forward_fill_and_zero_imputation() {
        let f = SeriesFrame::from_targets(&[vec![f64::NAN, 2.0, f64::NAN, 4.0]]).unwrap();
        assert!(!f.is_fully_observed());
        let ff = f.impute_missing(ImputePolicy::ForwardFill).unwrap();
        assert_eq!(ff.target_series(0), &[2.0, 2.0, 2.0, 4.0]);
        let z = f.impute_missing(ImputePolicy::Zero).unwrap();
        assert_eq!(z.target_series(0), &[0.0, 2.0, 0.0, 4.0]);
        assert!(z.is_fully_observed());
    }

    #[test]
    fn drop_leading_imputation() {
        let f = SeriesFrame::from_targets(&[
            vec![f64::NAN, f64::NAN, 3.0, 4.0],
            vec![f64::NAN, 2.0, 3.0, 4.0],
        ])
        .unwrap();
        let d = f.impute_missing(ImputePolicy::DropLeading).unwrap();
        assert_eq!(d.len(), 2);
        assert_eq!(d.target_series(0), &[3.0, 4.0]);

        // Interior gaps are not fixable by dropping the head.
        let bad = SeriesFrame::from_targets(&[vec![1.0, f64::NAN, 3.0]]).unwrap();
        assert!(bad.impute_missing(ImputePolicy::DropLeading).is_err());
    }

    #[test]
    fn entirely_missing_channel_errors() {
        let f = SeriesFrame::from_targets(&[vec![f64::NAN, f64::NAN]]).unwrap();
        for p in [ImputePolicy::ForwardFill, ImputePolicy::Zero, ImputePolicy::DropLeading] {
            assert!(f.impute_missing(p).is_err(), "{p} should reject an all-missing channel");
        }
    }

    #[test]
    fn time_covariates_from_axis() {
        // 2021-03-01 is a Monday; midnight UTC epoch 1614556800.
        let f = frame_2x6().with_timestamps(1_614_556_800, 3600).unwrap();
        let g = f
            .derive_time_covariates(&[TimeFeature::HourOfDay, TimeFeature::DayOfWeek, TimeFeature::IsWeekend])
            .unwrap();
        assert_eq!(g.num_covariates(), 3);
        assert_eq!(g.covariate(0, 0, 0), 0.0);
        assert_eq!(g.covariate(0, 5, 0), 5.0);
        assert_eq!(g.covariate(1, 3, 1), 0.0); // Monday
        assert_eq!(g.covariate(0, 2, 2), 0.0);
        // Idempotent.
        let h = g.derive_time_covariates(&[TimeFeature::HourOfDay]).unwrap();
        assert_eq!(h.num_covariates(), 3);
    }

    #[test]
    fn time_covariates_need_an_axis() {
        assert!(frame_2x6().derive_time_covariates(&[TimeFeature::HourOfDay]).is_err());
    }

    #[test]
    fn series_id_channel() {
        let g = frame_2x6().with_series_id_channel().unwrap();
        assert_eq!(g.covariate(0, 3, 0), 0.0);
        assert_eq!(g.covariate(1, 3, 0), 1.0);
        // Calling again is a no-op.
        assert_eq!(g.with_series_id_channel().unwrap().num_covariates(), 1);
    }

    #[test]
    fn select_series_subsets() {
        let f = frame_2x6();
        let s = f.select_series(&[1]).unwrap();
        assert_eq!(s.n(), 1);
        assert_eq!(s.target_series(0)[0], 10.0);
        assert!(f.select_series(&[0, 0]).is_err());
        assert!(f.select_series(&[2]).is_err());
    }

    #[test]
    fn standardizer_round_trip() {
        let f = frame_2x6();
        let st = Standardizer::fit(&f, 4).unwrap();
        let g = st.transform(&f).unwrap();
        // Train block of series 0: mean 2.5, population std of [1,2,3,4].
        let mean = 2.5;
        let std = ((1.5f64 * 1.5 + 0.5 * 0.5) * 2.0 / 4.0).sqrt();
        assert!((g.target(0, 0) - (1.0 - mean) / std).abs() < 1e-12);
        let mut back: Vec<f64> = g.target_series(0).to_vec();
        st.inverse(0, &mut back);
        for (a, b) in back.iter().zip(f.target_series(0)) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn standardizer_constant_series() {
        let f = SeriesFrame::from_targets(&[vec![7.0; 5]]).unwrap();
        let st = Standardizer::fit(&f, 5).unwrap();
        let g = st.transform(&f).unwrap();
        assert_eq!(g.target(0, 0), 0.0);
    }

    fn write_tmp(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    #[test]
    fn load_wide_with_timestamps_and_covariates() {
        let file = write_tmp(
            "timestamp,a,b,temp\n\
             2021-03-01 00:00:00,1,10,5.5\n\
             2021-03-01 01:00:00,2,20,6.5\n\
             2021-03-01 02:00:00,3,NA,7.5\n",
        );
        let schema = Schema {
            timestamp: Some("timestamp".into()),
            targets: vec!["a".into(), "b".into()],
            covariates: vec!["temp".into()],
            ..Schema::wide_all_targets(true)
        };
        let f = load_delimited(file.path(), &schema).unwrap();
        assert_eq!((f.n(), f.len(), f.num_covariates()), (2, 3, 1));
        assert_eq!(f.sample_rate(), Some(3600));
        assert_eq!(f.target_series(0), &[1.0, 2.0, 3.0]);
        assert!(f.target(1, 2).is_nan());
        assert_eq!(f.covariate(1, 1, 0), 6.5);
        assert_eq!(f.series_names(), &["a".to_string(), "b".to_string()]);
    }

    #[test]
    fn load_headerless_wildcard() {
        let file = write_tmp("1,10\n2,20\n3,30\n");
        let schema = Schema {
            synthetic_start: Some("1990-01-01".into()),
            sample_rate_secs: Some(86400),
            ..Schema::wide_all_targets(false)
        };
        let f = load_delimited(file.path(), &schema).unwrap();
        assert_eq!((f.n(), f.len()), (2, 3));
        assert_eq!(f.series_names(), &["c0".to_string(), "c1".to_string()]);
        let ts = f.timestamps().unwrap();
        assert_eq!(ts[1] - ts[0], 86400);
    }

    #[test]
    fn load_long_with_categorical() {
        let file = write_tmp(
            "t,id,y,wind\n\
             0,x,1,NE\n\
             0,y,4,SE\n\
             3600,x,2,NE\n\
             3600,y,5,NE\n",
        );
        let schema = Schema {
            layout: Layout::Long,
            timestamp: Some("t".into()),
            series_id: Some("id".into()),
            targets: vec!["y".into()],
            covariates: vec!["wind".into()],
            categorical: vec!["wind".into()],
            ..Schema::wide_all_targets(true)
        };
        let f = load_delimited(file.path(), &schema).unwrap();
        assert_eq!((f.n(), f.len(), f.num_covariates()), (2, 2, 2));
        assert_eq!(f.covariate_names(), &["wind=NE".to_string(), "wind=SE".to_string()]);
        assert_eq!(f.covariate(0, 0, 0), 1.0); // series x, t0: NE
        assert_eq!(f.covariate(1, 0, 1), 1.0); // series y, t0: SE
        assert_eq!(f.target(1, 1), 5.0);
    }

    #[test]
    fn load_rejects_bad_cells_and_ragged_rows() {
        let file = write_tmp("a,b\n1,2\n3,oops\n");
        let err = load_delimited(file.path(), &Schema::wide_all_targets(true)).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("line 3") && msg.contains('b'), "unexpected: {msg}");

        let ragged = write_tmp("a,b\n1,2\n3\n");
        assert!(load_delimited(ragged.path(), &Schema::wide_all_targets(true)).is_err());
    }

    #[test]
    fn load_rejects_irregular_axis() {
        let file = write_tmp("t,a\n0,1\n10,2\n30,3\n");
        let schema = Schema {
            timestamp: Some("t".into()),
            targets: vec!["a".into()],
            ..Schema::wide_all_targets(true)
        };
        let err = load_delimited(file.path(), &schema).unwrap_err();
        assert!(err.to_string().contains("irregular"), "{err}");
    }

    #[test]
    fn unknown_schema_column_is_config_error() {
        let file = write_tmp("a\n1\n");
        let schema = Schema {
            targets: vec!["nope".into()],
            ..Schema::wide_all_targets(true)
        };
        match load_delimited(file.path(), &schema) {
            Err(Error::Config(_)) => {}
            other => panic!("expected config error, got {other:?}"),
        }
    }

    #[test]
    fn canonical_write_read_round_trip() {
        // Multi-series with covariates -> long layout.
        let f = frame_2x6()
            .with_timestamps(0, 60)
            .unwrap()
            .push_shared_covariate("load", &[0.5, 1.5, 2.5, 3.5, 4.5, 5.5])
            .unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("canon.csv");
        write_delimited(&f, &path, b',').unwrap();
        let schema = canonical_schema(&f, ",");
        let g = load_delimited(&path, &schema).unwrap();
        assert_eq!(f, g);

        // Single series -> wide layout.
        let one = f.select_series(&[0]).unwrap();
        let p2 = dir.path().join("one.csv");
        write_delimited(&one, &p2, b',').unwrap();
        let g2 = load_delimited(&p2, &canonical_schema(&one, ",")).unwrap();
        assert_eq!(one, g2);
    }

    #[test]
    fn nan_survives_round_trip() {
        let f = SeriesFrame::from_targets(&[vec![1.0, f64::NAN, 3.0]]).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("nan.csv");
        write_delimited(&f, &path, b',').unwrap();
        let g = load_delimited(&path, &canonical_schema(&f, ",")).unwrap();
        assert!(g.target(0, 1).is_nan());
        assert_eq!(g.target(0, 2), 3.0);
    }
}
