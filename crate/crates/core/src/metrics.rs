//! Forecast accuracy metrics. Scale-dependent metrics pool every evaluated
//! point across series; correlation is computed per series and averaged.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Metric identifiers usable in configs and reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricKind {
    Rmse,
    Mae,
    Wape,
    Mape,
    Rse,
    Corr,
}

impl MetricKind {
    pub const ALL: [MetricKind; 6] = [
        MetricKind::Rmse,
        MetricKind::Mae,
        MetricKind::Wape,
        MetricKind::Mape,
        MetricKind::Rse,
        MetricKind::Corr,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            MetricKind::Rmse => "rmse",
            MetricKind::Mae => "mae",
            MetricKind::Wape => "wape",
            MetricKind::Mape => "mape",
            MetricKind::Rse => "rse",
            MetricKind::Corr => "corr",
        }
    }

    /// Definition printed in report footers.
    pub fn formula(&self) -> &'static str {
        match self {
            MetricKind::Rmse => "rmse = sqrt(mean((y - yhat)^2)), pooled over all evaluated points",
            MetricKind::Mae => "mae = mean(|y - yhat|), pooled over all evaluated points",
            MetricKind::Wape => "wape = sum(|y - yhat|) / sum(|y|), pooled",
            MetricKind::Mape => "mape = mean(|y - yhat| / |y|) over points with y != 0 (zeros skipped)",
            MetricKind::Rse => "rse = sqrt(sum((y - yhat)^2)) / sqrt(sum((y - mean(y))^2)), pooled",
            MetricKind::Corr => "corr = mean over series of Pearson r(y, yhat); flat series skipped",
        }
    }
}

impl std::fmt::Display for MetricKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for MetricKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        MetricKind::ALL
            .iter()
            .copied()
            .find(|m| m.name() == s)
            .ok_or_else(|| {
                Error::Config(format!(
                    "unknown metric '{s}' (expected one of: rmse, mae, wape, mape, rse, corr)"
                ))
            })
    }
}

fn check_pair(actual: &[f64], predicted: &[f64]) -> Result<()> {
    if actual.len() != predicted.len() {
        return Err(Error::Data(format!(
            "actual has {} points, predicted has {}",
            actual.len(),
            predicted.len()
        )));
    }
    if actual.is_empty() {
        return Err(Error::Data("cannot score an empty forecast".into()));
    }
    if actual.iter().chain(predicted).any(|v| !v.is_finite()) {
        return Err(Error::Numerical("metric input contains non-finite values".into()));
    }
    Ok(())
}

pub fn rmse(actual: &[f64], predicted: &[f64]) -> Result<f64> {
    check_pair(actual, predicted)?;
    let ss: f64 = actual
        .iter()
        .zip(predicted)
        .map(|(y, p)| (y - p) * (y - p))
        .sum();
    Ok((ss / actual.len() as f64).sqrt())
}

pub fn mae(actual: &[f64], predicted: &[f64]) -> Result<f64> {
    check_pair(actual, predicted)?;
    let s: f64 = actual.iter().zip(predicted).map(|(y, p)| (y - p).abs()).sum();
    Ok(s / actual.len() as f64)
}

/// Weighted absolute percentage error: total absolute error over total
/// absolute actuals. Errors when the actuals sum to zero in magnitude.
pub fn wape(actual: &[f64], predicted: &[f64]) -> Result<f64> {
    check_pair(actual, predicted)?;
    let num: f64 = actual.iter().zip(predicted).map(|(y, p)| (y - p).abs()).sum();
    let den: f64 = actual.iter().map(|y| y.abs()).sum();
    if den == 0.0 {
        return Err(Error::Numerical(
            "wape undefined: actual values sum to zero in magnitude".into(),
        ));
    }
    Ok(num / den)
}

/// MAPE with the number of skipped zero-actual points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MapeOutcome {
    pub value: f64,
    pub skipped: usize,
}

/// Mean absolute percentage error over points whose actual is non-zero;
/// zero-actual points are skipped and counted. Errors when every point is
/// skipped.
pub fn mape(actual: &[f64], predicted: &[f64]) -> Result<MapeOutcome> {
    check_pair(actual, predicted)?;
    let mut sum = 0.0;
    let mut used = 0usize;
    for (y, p) in actual.iter().zip(predicted) {
        if *y != 0.0 {
            sum += ((y - p) / y).abs();
            used += 1;
        }
    }
    if used == 0 {
        return Err(Error::Numerical("mape undefined: every actual value is zero".into()));
    }
    Ok(MapeOutcome { value: sum / used as f64, skipped: actual.len() - used })
}

/// Root relative squared error, normalized by deviation from the pooled mean
/// of the actuals. Errors when the actuals are constant.
pub fn rse(actual: &[f64], predicted: &[f64]) -> Result<f64> {
    check_pair(actual, predicted)?;
    let mean = actual.iter().sum::<f64>() / actual.len() as f64;
    let num: f64 = actual.iter().zip(predicted).map(|(y, p)| (y - p) * (y - p)).sum();
    let den: f64 = actual.iter().map(|y| (y - mean) * (y - mean)).sum();
    if den == 0.0 {
        return Err(Error::Numerical(
            "rse undefined: actual values are constant over the evaluated points".into(),
        ));
    }
    Ok(num.sqrt() / den.sqrt())
}

/// Pearson correlation, `None` when either side has zero variance.
pub fn pearson(a: &[f64], b: &[f64]) -> Option<f64> {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut va = 0.0;
    let mut vb = 0.0;
    for (x, y) in a.iter().zip(b) {
        cov += (x - ma) * (y - mb);
        va += (x - ma) * (x - ma);
        vb += (y - mb) * (y - mb);
    }
    if va == 0.0 || vb == 0.0 {
        return None;
    }
    Some(cov / (va.sqrt() * vb.sqrt()))
}

/// Mean per-series Pearson correlation with the number of skipped
/// (zero-variance) series. Errors when no series is usable.
pub fn corr(tracks: &[(Vec<f64>, Vec<f64>)]) -> Result<MapeOutcome> {
    let mut sum = 0.0;
    let mut used = 0usize;
    for (a, p) in tracks {
        check_pair(a, p)?;
        if let Some(r) = pearson(a, p) {
            sum += r;
            used += 1;
        }
    }
    if used == 0 {
        return Err(Error::Numerical(
            "corr undefined: every series has zero variance on one side".into(),
        ));
    }
    Ok(MapeOutcome { value: sum / used as f64, skipped: tracks.len() - used })
}

/// Metric values plus skip diagnostics for one model's forecasts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    pub values: Vec<(MetricKind, f64)>,
    pub mape_skipped: Option<usize>,
    pub corr_skipped: Option<usize>,
}

impl MetricSummary {
    pub fn get(&self, kind: MetricKind) -> Option<f64> {
        self.values.iter().find(|(k, _)| *k == kind).map(|(_, v)| *v)
    }
}

/// Score `(actual, predicted)` tracks, one pair per series. Scale-dependent
/// metrics pool every point; `corr` averages per-series coefficients.
pub fn evaluate(tracks: &[(Vec<f64>, Vec<f64>)], metrics: &[MetricKind]) -> Result<MetricSummary> {
    if tracks.is_empty() {
        return Err(Error::Data("no forecast tracks to evaluate".into()));
    }
    let mut actual = Vec::new();
    let mut predicted = Vec::new();
    for (a, p) in tracks {
        check_pair(a, p)?;
        actual.extend_from_slice(a);
        predicted.extend_from_slice(p);
    }
    let mut values = Vec::with_capacity(metrics.len());
    let mut mape_skipped = None;
    let mut corr_skipped = None;
    for &m in metrics {
        let v = match m {
            MetricKind::Rmse => rmse(&actual, &predicted)?,
            MetricKind::Mae => mae(&actual, &predicted)?,
            MetricKind::Wape => wape(&actual, &predicted)?,
            MetricKind::Mape => {
                let out = mape(&actual, &predicted)?;
                mape_skipped = Some(out.skipped);
                out.value
            }
            MetricKind::Rse => rse(&actual, &predicted)?,
            MetricKind::Corr => {
                let out = corr(tracks)?;
                corr_skipped = Some(out.skipped);
                out.value
            }
        };
        values.push((m, v));
    }
    Ok(MetricSummary { values, mape_skipped, corr_skipped })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const A: [f64; 4] = [1.0, 2.0, 4.0, 5.0];
    const P: [f64; 4] = [2.0, 1.0, 5.0, 4.0];

    fn close(a: f64, b: f64) {
        assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0), "{a} vs {b}");
    }

    #[test]
    fn hand_computed_values() {
        // Every error is +-1.
        close(rmse(&A, &P).unwrap(), 1.0);
        close(mae(&A, &P).unwrap(), 1.0);
        close(wape(&A, &P).unwrap(), 4.0 / 12.0);
        // mape terms: 1/1, 1/2, 1/4, 1/5.
        let m = mape(&A, &P).unwrap();
        close(m.value, (1.0 + 0.5 + 0.25 + 0.2) / 4.0);
        assert_eq!(m.skipped, 0);
        // Mean of actuals is 3; squared deviations sum to 10, errors to 4.
        close(rse(&A, &P).unwrap(), (4.0f64 / 10.0).sqrt());
        // Centered products: (-2)(-1)+(-1)(-2)+(1)(2)+(2)(1) = 8 over sqrt(10*10).
        let c = corr(&[(A.to_vec(), P.to_vec())]).unwrap();
        close(c.value, 0.8);
    }

    #[test]
    fn perfect_forecast() {
        close(rmse(&A, &A).unwrap(), 0.0);
        close(mae(&A, &A).unwrap(), 0.0);
        close(wape(&A, &A).unwrap(), 0.0);
        close(rse(&A, &A).unwrap(), 0.0);
        close(corr(&[(A.to_vec(), A.to_vec())]).unwrap().value, 1.0);
    }

    #[test]
    fn mape_skips_zero_actuals() {
        let m = mape(&[0.0, 1.0, 2.0], &[1.0, 1.0, 1.0]).unwrap();
        close(m.value, 0.25);
        assert_eq!(m.skipped, 1);
    }

    #[test]
    fn degenerate_denominators_error() {
        assert!(wape(&[0.0, 0.0], &[1.0, 1.0]).is_err());
        assert!(mape(&[0.0, 0.0], &[1.0, 1.0]).is_err());
        assert!(rse(&[3.0, 3.0, 3.0], &[1.0, 2.0, 3.0]).is_err());
        assert!(corr(&[(vec![1.0, 1.0], vec![1.0, 2.0])]).is_err());
    }

    #[test]
    fn corr_skips_flat_series() {
        let tracks = vec![
            (A.to_vec(), P.to_vec()),
            (vec![2.0, 2.0, 2.0, 2.0], vec![1.0, 2.0, 3.0, 4.0]),
        ];
        let c = corr(&tracks).unwrap();
        close(c.value, 0.8);
        assert_eq!(c.skipped, 1);
    }

    #[test]
    fn mismatched_or_empty_inputs_error() {
        assert!(rmse(&[1.0], &[1.0, 2.0]).is_err());
        assert!(mae(&[], &[]).is_err());
        assert!(rmse(&[f64::NAN], &[1.0]).is_err());
        assert!(rmse(&[1.0], &[f64::INFINITY]).is_err());
    }

    #[test]
    fn wape_mae_identity() {
        let total_abs: f64 = A.iter().map(|y| y.abs()).sum();
        let lhs = wape(&A, &P).unwrap();
        let rhs = mae(&A, &P).unwrap() * A.len() as f64 / total_abs;
        close(lhs, rhs);
    }

    #[test]
    fn evaluate_pools_and_averages() {
        let tracks = vec![
            (vec![1.0, 2.0], vec![2.0, 1.0]),
            (vec![4.0, 5.0], vec![5.0, 4.0]),
        ];
        let s = evaluate(&tracks, &MetricKind::ALL).unwrap();
        // Pooling the two tracks reproduces the single-track values above.
        close(s.get(MetricKind::Rmse).unwrap(), 1.0);
        close(s.get(MetricKind::Wape).unwrap(), 4.0 / 12.0);
        close(s.get(MetricKind::Rse).unwrap(), (4.0f64 / 10.0).sqrt());
        // Each track is perfectly anti-correlated.
        close(s.get(MetricKind::Corr).unwrap(), -1.0);
        assert_eq!(s.mape_skipped, Some(0));
        assert_eq!(s.corr_skipped, Some(0));
    }

    #[test]
    fn metric_names_round_trip() {
        for m in MetricKind::ALL {
            let parsed: MetricKind = m.name().parse().unwrap();
            assert_eq!(parsed, m);
        }
        assert!("median".parse::<MetricKind>().is_err());
    }

    proptest! {
        /// Pooled metrics are invariant under a permutation of the points.
        #[test]
        fn permutation_invariance(
            pairs in proptest::collection::vec((-100.0f64..100.0, -100.0f64..100.0), 2..40),
            seed in 0u64..1000,
        ) {
            let actual: Vec<f64> = pairs.iter().map(|p| p.0).collect();
            let predicted: Vec<f64> = pairs.iter().map(|p| p.1).collect();
            // Fisher-Yates with a tiny deterministic generator.
            let mut idx: Vec<usize> = (0..pairs.len()).collect();
            let mut state = seed.wrapping_add(1);
            for i in (1..idx.len()).rev() {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                idx.swap(i, (state % (i as u64 + 1)) as usize);
            }
            let pa: Vec<f64> = idx.iter().map(|&i| actual[i]).collect();
            let pp: Vec<f64> = idx.iter().map(|&i| predicted[i]).collect();
            let tol = 1e-9;
            prop_assert!((rmse(&actual, &predicted).unwrap() - rmse(&pa, &pp).unwrap()).abs() < tol);
            prop_assert!((mae(&actual, &predicted).unwrap() - mae(&pa, &pp).unwrap()).abs() < tol);
            if let (Ok(w1), Ok(w2)) = (wape(&actual, &predicted), wape(&pa, &pp)) {
                prop_assert!((w1 - w2).abs() < tol);
            }
        }

        /// rmse and mae scale linearly with the data; wape and rse are
        /// scale-invariant.
        #[test]
        fn scale_equivariance(
            pairs in proptest::collection::vec((-100.0f64..100.0, -100.0f64..100.0), 2..40),
            c in 0.1f64..50.0,
        ) {
            let actual: Vec<f64> = pairs.iter().map(|p| p.0).collect();
            let predicted: Vec<f64> = pairs.iter().map(|p| p.1).collect();
            let sa: Vec<f64> = actual.iter().map(|v| c * v).collect();
            let sp: Vec<f64> = predicted.iter().map(|v| c * v).collect();
            let rel = |a: f64, b: f64| (a - b).abs() / b.abs().max(1e-9);
            prop_assert!(rel(rmse(&sa, &sp).unwrap(), c * rmse(&actual, &predicted).unwrap()) < 1e-9);
            prop_assert!(rel(mae(&sa, &sp).unwrap(), c * mae(&actual, &predicted).unwrap()) < 1e-9);
            if let Ok(w) = wape(&actual, &predicted) {
                prop_assert!(rel(wape(&sa, &sp).unwrap(), w) < 1e-9);
            }
            if let Ok(r) = rse(&actual, &predicted) {
                prop_assert!(rel(rse(&sa, &sp).unwrap(), r) < 1e-9);
            }
        }
    }
}
