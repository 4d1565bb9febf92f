//! Column-major training matrix with presorted feature indices and optional
//! histogram binning, shared by every tree (and every horizon model) fit on
//! the same instances.

use std::sync::{Arc, OnceLock};

use crate::error::{Error, Result};

/// Dense feature matrix. Row count is capped at `u32::MAX` so sorted index
/// arrays stay compact.
#[derive(Debug)]
pub struct FeatureMatrix {
    n_rows: usize,
    cols: Vec<Vec<f64>>,
    /// Per column: row ids ordered by (value, row id) ascending.
    sorted: Vec<Vec<u32>>,
    binned: OnceLock<Arc<Binned>>,
}

impl FeatureMatrix {
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::Data("feature matrix needs at least one row".into()));
        }
        if rows.len() > u32::MAX as usize {
            return Err(Error::Data("feature matrix exceeds 2^32 rows".into()));
        }
        let width = rows[0].as_ref().len();
        if width == 0 {
            return Err(Error::Data("feature matrix needs at least one column".into()));
        }
        let mut cols = vec![Vec::with_capacity(rows.len()); width];
        for (r, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != width {
                return Err(Error::Data(format!(
                    "row {r} has {} values, expected {width}",
                    row.len()
                )));
            }
            for (c, &v) in row.iter().enumerate() {
                if !v.is_finite() {
                    return Err(Error::Data(format!(
                        "row {r}, column {c}: non-finite feature value"
                    )));
                }
                cols[c].push(v);
            }
        }
        let sorted = cols
            .iter()
            .map(|col| {
                let mut idx: Vec<u32> = (0..col.len() as u32).collect();
                idx.sort_unstable_by(|&a, &b| {
                    col[a as usize]
                        .partial_cmp(&col[b as usize])
                        .unwrap()
                        .then(a.cmp(&b))
                });
                idx
            })
            .collect();
        Ok(FeatureMatrix { n_rows: rows.len(), cols, sorted, binned: OnceLock::new() })
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.cols.len()
    }

    pub fn value(&self, row: usize, col: usize) -> f64 {
        self.cols[col][row]
    }

    pub(crate) fn col(&self, col: usize) -> &[f64] {
        &self.cols[col]
    }

    pub(crate) fn sorted_col(&self, col: usize) -> &[u32] {
        &self.sorted[col]
    }

    /// Histogram codes for `max_bins`; built once and shared across fits.
    /// A later request with a different bin count builds a fresh table.
    pub(crate) fn binned(&self, max_bins: usize) -> Arc<Binned> {
        let cached = self.binned.get_or_init(|| Arc::new(Binned::build(self, max_bins)));
        if cached.max_bins == max_bins {
            Arc::clone(cached)
        } else {
            Arc::new(Binned::build(self, max_bins))
        }
    }
}

/// Threshold strictly separating neighbouring values `a < b` under the
/// "route left iff value < threshold" rule. Falls back to `b` when the
/// midpoint is not representable strictly above `a`.
pub(crate) fn split_threshold(a: f64, b: f64) -> f64 {
    debug_assert!(a < b);
    let mid = 0.5 * (a + b);
    if mid > a {
        mid
    } else {
        b
    }
}

/// Quantile-style histogram: per column, ascending cut points and a bin code
/// per row. Bin `b` holds values in `[cuts[b-1], cuts[b])`; splitting after
/// bin `b` uses threshold `cuts[b]`.
#[derive(Debug)]
pub(crate) struct Binned {
    pub max_bins: usize,
    pub cuts: Vec<Vec<f64>>,
    pub codes: Vec<Vec<u16>>,
}

impl Binned {
    fn build(matrix: &FeatureMatrix, max_bins: usize) -> Binned {
        let max_bins = max_bins.clamp(2, u16::MAX as usize);
        let mut cuts = Vec::with_capacity(matrix.n_cols());
        let mut codes = Vec::with_capacity(matrix.n_cols());
        for c in 0..matrix.n_cols() {
            let col = matrix.col(c);
            let order = matrix.sorted_col(c);
            let mut distinct: Vec<f64> = Vec::new();
            for &r in order {
                let v = col[r as usize];
                if distinct.last() != Some(&v) {
                    distinct.push(v);
                }
            }
            let col_cuts: Vec<f64> = if distinct.len() <= max_bins {
                // One bin per distinct value: histogram candidates coincide
                // with exact-mode candidates.
                distinct.windows(2).map(|w| split_threshold(w[0], w[1])).collect()
            } else {
                let n = order.len();
                let mut qs: Vec<f64> = Vec::with_capacity(max_bins - 1);
                for k in 1..max_bins {
                    let pos = k * n / max_bins;
                    let lo = col[order[pos - 1] as usize];
                    let hi = col[order[pos] as usize];
                    if lo < hi {
                        qs.push(split_threshold(lo, hi));
                    }
                }
                qs.dedup();
                qs
            };
            let col_codes: Vec<u16> = col
                .iter()
                .map(|&v| col_cuts.partition_point(|&cut| cut <= v) as u16)
                .collect();
            cuts.push(col_cuts);
            codes.push(col_codes);
        }
        Binned { max_bins, cuts, codes }
    }
}
