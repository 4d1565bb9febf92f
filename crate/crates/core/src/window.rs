//! Window transformation: turns a series panel into flat supervised
//! instances. Each instance reads `w` lookup points ending at an anchor `t`
//! and predicts the next `h` target values.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frame::SeriesFrame;

/// How lookup covariates enter the flat input vector. Lagged targets are
/// always included, oldest first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FlattenMode {
    /// Targets plus the covariate row at the anchor only (the default):
    /// input width `w + m`.
    LastInstance,
    /// Targets plus every covariate row in the window, time-major:
    /// input width `w + w*m`.
    AllInstances,
    /// Targets only: input width `w`.
    TargetsOnly,
}

impl std::fmt::Display for FlattenMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            FlattenMode::LastInstance => "last_instance",
            FlattenMode::AllInstances => "all_instances",
            FlattenMode::TargetsOnly => "targets_only",
        };
        f.write_str(s)
    }
}

impl std::str::FromStr for FlattenMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "last_instance" => FlattenMode::LastInstance,
            "all_instances" => FlattenMode::AllInstances,
            "targets_only" => FlattenMode::TargetsOnly,
            other => {
                return Err(Error::Config(format!(
                    "unknown flatten mode '{other}' (expected last_instance, all_instances, or targets_only)"
                )))
            }
        })
    }
}

/// Lookup/forecast window geometry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowSpec {
    /// Lookup length (number of past points fed to the model).
    pub w: usize,
    /// Forecast horizon (number of future points predicted jointly).
    pub h: usize,
    pub mode: FlattenMode,
    /// Gap between consecutive training anchors.
    pub stride: usize,
}

impl WindowSpec {
    pub fn new(w: usize, h: usize, mode: FlattenMode) -> Result<Self> {
        WindowSpec::with_stride(w, h, mode, 1)
    }

    pub fn with_stride(w: usize, h: usize, mode: FlattenMode, stride: usize) -> Result<Self> {
        if w == 0 || h == 0 || stride == 0 {
            return Err(Error::Config(format!(
                "window parameters must be positive (w={w}, h={h}, stride={stride})"
            )));
        }
        Ok(WindowSpec { w, h, mode, stride })
    }

    /// Width of the flat input vector for `m` covariate channels.
    pub fn input_width(&self, m: usize) -> usize {
        match self.mode {
            FlattenMode::LastInstance => self.w + m,
            FlattenMode::AllInstances => self.w + self.w * m,
            FlattenMode::TargetsOnly => self.w,
        }
    }

    /// Flatten one lookup window. `targets` holds the `w` lagged target
    /// values oldest-first; `cov_rows` holds `w` covariate rows of `m` values
    /// each, time-major and aligned with `targets`.
    pub fn flatten(&self, targets: &[f64], cov_rows: &[f64], m: usize) -> Result<Vec<f64>> {
        if targets.len() != self.w {
            return Err(Error::Data(format!(
                "lookup window has {} target values, expected w={}",
                targets.len(),
                self.w
            )));
        }
        if cov_rows.len() != self.w * m {
            return Err(Error::Data(format!(
                "lookup window has {} covariate values, expected w*m={}",
                cov_rows.len(),
                self.w * m
            )));
        }
        let mut x = Vec::with_capacity(self.input_width(m));
        x.extend_from_slice(targets);
        match self.mode {
            FlattenMode::LastInstance => {
                x.extend_from_slice(&cov_rows[(self.w - 1) * m..]);
            }
            FlattenMode::AllInstances => {
                x.extend_from_slice(cov_rows);
            }
            FlattenMode::TargetsOnly => {}
        }
        Ok(x)
    }

    /// Number of training instances one series of length `len` yields,
    /// `floor((len - w - h)/stride) + 1`, or 0 when the series is too short.
    pub fn train_instances_per_series(&self, len: usize) -> usize {
        if len < self.w + self.h {
            0
        } else {
            (len - self.w - self.h) / self.stride + 1
        }
    }
}

/// One flat supervised instance.
#[derive(Debug, Clone, PartialEq)]
pub struct FlatInstance {
    /// Index of the source series within its frame.
    pub series: usize,
    /// Time index of the last lookup point, relative to the frame the
    /// instance was built from.
    pub anchor: usize,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

fn window_instance(frame: &SeriesFrame, spec: &WindowSpec, series: usize, anchor: usize) -> Result<FlatInstance> {
    let lo = anchor + 1 - spec.w;
    let targets = &frame.target_series(series)[lo..=anchor];
    let m = frame.num_covariates();
    let mut cov = Vec::with_capacity(spec.w * m);
    for t in lo..=anchor {
        cov.extend_from_slice(frame.covariate_row(series, t));
    }
    let x = spec.flatten(targets, &cov, m)?;
    let y = frame.target_series(series)[anchor + 1..anchor + 1 + spec.h].to_vec();
    Ok(FlatInstance { series, anchor, x, y })
}

/// Build every training instance: anchors run from `w-1` to `len-h-1` in
/// steps of `stride`, for each series in turn.
pub fn make_training_set(frame: &SeriesFrame, spec: &WindowSpec) -> Result<Vec<FlatInstance>> {
    frame.ensure_finite()?;
    if frame.len() < spec.w + spec.h {
        return Err(Error::Data(format!(
            "series length {} is too short for w={} plus h={}",
            frame.len(),
            spec.w,
            spec.h
        )));
    }
    let per = spec.train_instances_per_series(frame.len());
    let mut out = Vec::with_capacity(per * frame.n());
    for i in 0..frame.n() {
        let mut anchor = spec.w - 1;
        while anchor + spec.h < frame.len() {
            out.push(window_instance(frame, spec, i, anchor)?);
            anchor += spec.stride;
        }
    }
    Ok(out)
}

/// Rolling-origin evaluation instances.
#[derive(Debug, Clone)]
pub struct TestSet {
    /// Ordered series-major, then window-ascending; `y` blocks tile the test
    /// region with non-overlapping `h`-length segments.
    pub instances: Vec<FlatInstance>,
    /// Number of full windows per series.
    pub windows_per_series: usize,
    /// Trailing test points per series that did not fill a window and were
    /// dropped.
    pub dropped_tail: usize,
}

/// Build evaluation windows over `test`, reading lookup values from the true
/// observed history (`history` followed by already-revealed test points).
/// Anchors advance by `h`; a partial trailing block is dropped with a warning.
pub fn make_test_set(history: &SeriesFrame, test: &SeriesFrame, spec: &WindowSpec) -> Result<TestSet> {
    if history.len() < spec.w {
        return Err(Error::Data(format!(
            "history length {} is shorter than the lookup window w={}",
            history.len(),
            spec.w
        )));
    }
    let combined = history.concat_time(test)?;
    combined.ensure_finite()?;

    let windows = test.len() / spec.h;
    let dropped = test.len() - windows * spec.h;
    if windows == 0 {
        return Err(Error::Config(format!(
            "test region of length {} cannot fit one forecast window of h={}",
            test.len(),
            spec.h
        )));
    }
    if dropped > 0 {
        log::warn!(
            "test length {} is not a multiple of h={}; dropping the last {} point(s) per series",
            test.len(),
            spec.h,
            dropped
        );
    }

    let mut instances = Vec::with_capacity(windows * combined.n());
    for i in 0..combined.n() {
        for k in 0..windows {
            let anchor = history.len() - 1 + k * spec.h;
            instances.push(window_instance(&combined, spec, i, anchor)?);
        }
    }
    Ok(TestSet { instances, windows_per_series: windows, dropped_tail: dropped })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Frame where target(i, t) = 1000*i + t and covariate k at (i, t) is
    /// 100000*(k+1) + 1000*i + t, so any value identifies its origin.
    fn traceable(n: usize, len: usize, m: usize) -> SeriesFrame {
        let series: Vec<Vec<f64>> = (0..n)
            .map(|i| (0..len).map(|t| (1000 * i + t) as f64).collect())
            .collect();
        let mut f = SeriesFrame::from_targets(&series).unwrap();
        for k in 0..m {
            // push_shared_covariate is time-only; build per-series manually.
            f = push_per_series(&f, k);
        }
        f
    }

    fn push_per_series(f: &SeriesFrame, k: usize) -> SeriesFrame {
        let n = f.n();
        let len = f.len();
        let m = f.num_covariates();
        let mut cov = Vec::new();
        for i in 0..n {
            for t in 0..len {
                cov.extend_from_slice(f.covariate_row(i, t));
                cov.push((100000 * (k + 1) + 1000 * i + t) as f64);
            }
        }
        let mut names: Vec<String> = f.covariate_names().to_vec();
        names.push(format!("x{k}"));
        SeriesFrame::from_parts(
            n,
            len,
            m + 1,
            (0..n).flat_map(|i| f.target_series(i).to_vec()).collect(),
            cov,
            names,
            f.series_names().to_vec(),
            None,
            None,
        )
        .unwrap()
    }

    #[test]
    fn instance_count_matches_formula() {
        let f = traceable(1, 10, 0);
        let spec = WindowSpec::new(3, 2, FlattenMode::TargetsOnly).unwrap();
        let set = make_training_set(&f, &spec).unwrap();
        assert_eq!(set.len(), 6); // floor((10-3-2)/1)+1
        let anchors: Vec<usize> = set.iter().map(|i| i.anchor).collect();
        assert_eq!(anchors, vec![2, 3, 4, 5, 6, 7]);

        let spec2 = WindowSpec::with_stride(3, 2, FlattenMode::TargetsOnly, 2).unwrap();
        let set2 = make_training_set(&f, &spec2).unwrap();
        let anchors2: Vec<usize> = set2.iter().map(|i| i.anchor).collect();
        assert_eq!(anchors2, vec![2, 4, 6]);
        assert_eq!(set2.len(), spec2.train_instances_per_series(10));
    }

    #[test]
    fn instance_count_at_benchmark_scale() {
        // 8 series of 6048 points, w = h = 24: 8 * 6001 instances.
        let f = traceable(8, 6048, 0);
        let spec = WindowSpec::new(24, 24, FlattenMode::TargetsOnly).unwrap();
        let set = make_training_set(&f, &spec).unwrap();
        assert_eq!(set.len(), 48_008);
    }

    #[test]
    fn flatten_layout_last_instance() {
        let spec = WindowSpec::new(2, 1, FlattenMode::LastInstance).unwrap();
        // targets [5,7]; covariate rows t-1: [0.9,0.8], t: [0.1,0.2]
        let x = spec.flatten(&[5.0, 7.0], &[0.9, 0.8, 0.1, 0.2], 2).unwrap();
        assert_eq!(x, vec![5.0, 7.0, 0.1, 0.2]);
    }

    #[test]
    fn flatten_layout_all_instances() {
        let spec = WindowSpec::new(2, 1, FlattenMode::AllInstances).unwrap();
        let x = spec.flatten(&[5.0, 7.0], &[0.9, 0.8, 0.1, 0.2], 2).unwrap();
        assert_eq!(x, vec![5.0, 7.0, 0.9, 0.8, 0.1, 0.2]);
    }

    #[test]
    fn flatten_layout_targets_only() {
        let spec = WindowSpec::new(2, 1, FlattenMode::TargetsOnly).unwrap();
        let x = spec.flatten(&[5.0, 7.0], &[0.9, 0.8, 0.1, 0.2], 2).unwrap();
        assert_eq!(x, vec![5.0, 7.0]);
    }

    #[test]
    fn input_width_formulas() {
        let m = 16;
        let last = WindowSpec::new(6, 6, FlattenMode::LastInstance).unwrap();
        let all = WindowSpec::new(6, 6, FlattenMode::AllInstances).unwrap();
        assert_eq!(last.input_width(m), 22);
        assert_eq!(all.input_width(m), 102);
        assert!(last.input_width(m) < all.input_width(m));
    }

    #[test]
    fn training_instances_have_exact_layout() {
        let f = traceable(2, 12, 2);
        let spec = WindowSpec::new(3, 2, FlattenMode::LastInstance).unwrap();
        let set = make_training_set(&f, &spec).unwrap();
        assert_eq!(set.len(), 2 * spec.train_instances_per_series(12));
        // Second series, first anchor (t=2): targets 1000..1002,
        // last covariate row = [101002, 201002], y = [1003, 1004].
        let inst = set.iter().find(|i| i.series == 1 && i.anchor == 2).unwrap();
        assert_eq!(inst.x, vec![1000.0, 1001.0, 1002.0, 101_002.0, 201_002.0]);
        assert_eq!(inst.y, vec![1003.0, 1004.0]);
    }

    #[test]
    fn training_rejects_short_or_unimputed_frames() {
        let spec = WindowSpec::new(4, 2, FlattenMode::TargetsOnly).unwrap();
        let short = traceable(1, 5, 0);
        assert!(make_training_set(&short, &spec).is_err());
        let missing = SeriesFrame::from_targets(&[vec![1.0, f64::NAN, 3.0, 4.0, 5.0, 6.0, 7.0]]).unwrap();
        assert!(make_training_set(&missing, &spec).is_err());
    }

    #[test]
    fn test_windows_tile_without_overlap() {
        let f = traceable(1, 40, 0);
        let spec = WindowSpec::new(5, 4, FlattenMode::TargetsOnly).unwrap();
        let parts = f
            .split(&crate::frame::SplitSpec::new(28, 12, 0).unwrap())
            .unwrap();
        let ts = make_test_set(&parts.train, &parts.test, &spec).unwrap();
        assert_eq!(ts.windows_per_series, 3);
        assert_eq!(ts.dropped_tail, 0);
        let anchors: Vec<usize> = ts.instances.iter().map(|i| i.anchor).collect();
        assert_eq!(anchors, vec![27, 31, 35]);
        // y blocks tile the test region exactly.
        let collected: Vec<f64> = ts.instances.iter().flat_map(|i| i.y.clone()).collect();
        let expected: Vec<f64> = (28..40).map(|t| t as f64).collect();
        assert_eq!(collected, expected);
        // Later windows read revealed test values as lookup, not predictions.
        assert_eq!(ts.instances[1].x, vec![27.0, 28.0, 29.0, 30.0, 31.0]);
    }

    #[test]
    fn partial_trailing_window_is_dropped() {
        let f = traceable(1, 40, 0);
        let spec = WindowSpec::new(5, 4, FlattenMode::TargetsOnly).unwrap();
        let parts = f
            .split(&crate::frame::SplitSpec::new(30, 10, 0).unwrap())
            .unwrap();
        let ts = make_test_set(&parts.train, &parts.test, &spec).unwrap();
        assert_eq!(ts.windows_per_series, 2);
        assert_eq!(ts.dropped_tail, 2);
        assert_eq!(ts.instances.len(), 2);
    }

    #[test]
    fn window_counts_at_documented_scales() {
        // One week of hourly data, daily horizon: 7 windows.
        assert_eq!(168 / 24, 7);
        let f = traceable(1, 200 + 168, 0);
        let spec = WindowSpec::new(24, 24, FlattenMode::TargetsOnly).unwrap();
        let parts = f.split(&crate::frame::SplitSpec::new(200, 168, 0).unwrap()).unwrap();
        let ts = make_test_set(&parts.train, &parts.test, &spec).unwrap();
        assert_eq!((ts.windows_per_series, ts.dropped_tail), (7, 0));

        // 1440 test points at h=9: 160 windows.
        let f2 = traceable(1, 100 + 1440, 0);
        let spec2 = WindowSpec::new(9, 9, FlattenMode::TargetsOnly).unwrap();
        let parts2 = f2.split(&crate::frame::SplitSpec::new(100, 1440, 0).unwrap()).unwrap();
        let ts2 = make_test_set(&parts2.train, &parts2.test, &spec2).unwrap();
        assert_eq!((ts2.windows_per_series, ts2.dropped_tail), (160, 0));
    }

    #[test]
    fn test_region_shorter_than_h_is_an_error() {
        let f = traceable(1, 30, 0);
        let spec = WindowSpec::new(5, 8, FlattenMode::TargetsOnly).unwrap();
        let parts = f.split(&crate::frame::SplitSpec::new(25, 5, 0).unwrap()).unwrap();
        assert!(make_test_set(&parts.train, &parts.test, &spec).is_err());
    }

    proptest! {
        /// No instance may leak future information: every x value decodes to
        /// a time index <= anchor and every y value to an index > anchor.
        #[test]
        fn no_leakage(
            w in 1usize..6,
            h in 1usize..5,
            stride in 1usize..4,
            extra in 0usize..20,
            n in 1usize..3,
            m in 0usize..3,
        ) {
            let len = w + h + extra;
            let f = traceable(n, len, m);
            let spec = WindowSpec::with_stride(w, h, FlattenMode::AllInstances, stride).unwrap();
            let set = make_training_set(&f, &spec).unwrap();
            prop_assert_eq!(set.len(), n * spec.train_instances_per_series(len));
            for inst in &set {
                prop_assert_eq!(inst.x.len(), spec.input_width(m));
                prop_assert_eq!(inst.y.len(), h);
                for &v in &inst.x {
                    let t = (v as usize) % 1000;
                    prop_assert!(t <= inst.anchor, "x leaks t={} past anchor {}", t, inst.anchor);
                }
                for &v in &inst.y {
                    let t = (v as usize) % 1000;
                    prop_assert!(t > inst.anchor, "y at t={} not after anchor {}", t, inst.anchor);
                }
            }
        }

        /// Flattening is injective on the lookup content: rebuilding the
        /// window from x recovers targets and covariates exactly.
        #[test]
        fn flatten_is_lossless(
            w in 1usize..6,
            m in 0usize..4,
            seed in 0u64..1000,
        ) {
            let mut state = seed.wrapping_mul(6364136223846793005).wrapping_add(1); // LCG
            let mut next = || {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                (state >> 11) as f64 / (1u64 << 53) as f64
            };
            let targets: Vec<f64> = (0..w).map(|_| next()).collect();
            let covs: Vec<f64> = (0..w * m).map(|_| next()).collect();
            let spec = WindowSpec::new(w, 1, FlattenMode::AllInstances).unwrap();
            let x = spec.flatten(&targets, &covs, m).unwrap();
            prop_assert_eq!(&x[..w], &targets[..]);
            prop_assert_eq!(&x[w..], &covs[..]);
        }
    }
}
