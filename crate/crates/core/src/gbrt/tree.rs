//! Single regression tree: greedy second-order split search grown level by
//! level. Routing rule is "go left iff feature value < threshold".

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::matrix::{split_threshold, Binned, FeatureMatrix};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Node {
    Split {
        feature: usize,
        threshold: f64,
        gain: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        weight: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionTree {
    pub(crate) nodes: Vec<Node>,
}

impl RegressionTree {
    /// Route a row to its leaf, reading features through `value`.
    pub(crate) fn predict_at(&self, value: impl Fn(usize) -> f64) -> f64 {
        let mut i = 0usize;
        loop {
            match &self.nodes[i] {
                Node::Leaf { weight } => return *weight,
                Node::Split { feature, threshold, left, right, .. } => {
                    i = if value(*feature) < *threshold { *left } else { *right };
                }
            }
        }
    }

    pub fn predict_row(&self, row: &[f64]) -> f64 {
        self.predict_at(|f| row[f])
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn num_leaves(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, Node::Leaf { .. })).count()
    }

    #[cfg(test)]
    pub(crate) fn root(&self) -> &Node {
        &self.nodes[0]
    }

    pub(crate) fn accumulate_importance(&self, into: &mut [f64]) {
        for n in &self.nodes {
            if let Node::Split { feature, gain, .. } = n {
                into[*feature] += *gain;
            }
        }
    }
}

/// Regularization and depth limits for one tree.
#[derive(Debug, Clone, Copy)]
pub(crate) struct GrowSpec {
    pub max_depth: usize,
    pub lambda: f64,
    pub gamma: f64,
    pub min_child_weight: f64,
}

/// Best split found for one frontier node.
#[derive(Debug, Clone, Copy)]
struct Candidate {
    gain: f64,
    feature: usize,
    threshold: f64,
    left_g: f64,
    left_h: f64,
    left_cnt: usize,
}

/// Replace `best` when `cand` wins the (gain desc, feature asc, threshold
/// asc) ordering. Scans feed candidates in ascending feature order and, per
/// feature, ascending threshold order, so strict gain comparison per feature
/// plus this cross-feature merge realizes the full tie-break.
fn merge_candidate(best: &mut Option<Candidate>, cand: Candidate) {
    let replace = match best {
        None => true,
        Some(b) => {
            cand.gain > b.gain
                || (cand.gain == b.gain
                    && (cand.feature < b.feature
                        || (cand.feature == b.feature && cand.threshold < b.threshold)))
        }
    };
    if replace {
        *best = Some(cand);
    }
}

struct FrontierNode {
    node: usize,
    g: f64,
    h: f64,
    cnt: usize,
}

fn gain_for(gl: f64, hl: f64, gr: f64, hr: f64, g: f64, h: f64, spec: &GrowSpec) -> f64 {
    let l = spec.lambda;
    0.5 * (gl * gl / (hl + l) + gr * gr / (hr + l) - g * g / (h + l)) - spec.gamma
}

fn leaf_weight(g: f64, h: f64, lambda: f64) -> f64 {
    -g / (h + lambda)
}

/// Exhaustive scan of one feature over presorted values; one pass serves
/// every frontier node at once.
fn scan_exact_feature(
    matrix: &FeatureMatrix,
    feature: usize,
    grad: &[f64],
    hess: &[f64],
    slot_of_row: &[i32],
    frontier: &[FrontierNode],
    spec: &GrowSpec,
) -> Vec<Option<Candidate>> {
    let col = matrix.col(feature);
    let k = frontier.len();
    let mut left_g = vec![0.0f64; k];
    let mut left_h = vec![0.0f64; k];
    let mut left_cnt = vec![0usize; k];
    let mut prev = vec![f64::NAN; k];
    let mut best: Vec<Option<Candidate>> = vec![None; k];

    for &r in matrix.sorted_col(feature) {
        let s = slot_of_row[r as usize];
        if s < 0 {
            continue;
        }
        let s = s as usize;
        let v = col[r as usize];
        if !prev[s].is_nan() && v > prev[s] {
            let node = &frontier[s];
            let (gl, hl) = (left_g[s], left_h[s]);
            let (gr, hr) = (node.g - gl, node.h - hl);
            if hl >= spec.min_child_weight && hr >= spec.min_child_weight {
                let gain = gain_for(gl, hl, gr, hr, node.g, node.h, spec);
                if gain > 0.0 && best[s].is_none_or(|b| gain > b.gain) {
                    best[s] = Some(Candidate {
                        gain,
                        feature,
                        threshold: split_threshold(prev[s], v),
                        left_g: gl,
                        left_h: hl,
                        left_cnt: left_cnt[s],
                    });
                }
            }
        }
        left_g[s] += grad[r as usize];
        left_h[s] += hess[r as usize];
        left_cnt[s] += 1;
        prev[s] = v;
    }
    best
}

/// Histogram scan of one feature: accumulate per-bin sums, then walk the
/// prefix. Empty bins are skipped so ties resolve to the lowest threshold.
fn scan_binned_feature(
    binned: &Binned,
    feature: usize,
    grad: &[f64],
    hess: &[f64],
    slot_of_row: &[i32],
    frontier: &[FrontierNode],
    spec: &GrowSpec,
) -> Vec<Option<Candidate>> {
    let cuts = &binned.cuts[feature];
    let k = frontier.len();
    if cuts.is_empty() {
        return vec![None; k];
    }
    let nb = cuts.len() + 1;
    let codes = &binned.codes[feature];
    let mut hist_g = vec![0.0f64; k * nb];
    let mut hist_h = vec![0.0f64; k * nb];
    let mut hist_c = vec![0u32; k * nb];
    for (r, &s) in slot_of_row.iter().enumerate() {
        if s < 0 {
            continue;
        }
        let idx = s as usize * nb + codes[r] as usize;
        hist_g[idx] += grad[r];
        hist_h[idx] += hess[r];
        hist_c[idx] += 1;
    }

    let mut best: Vec<Option<Candidate>> = vec![None; k];
    for (s, node) in frontier.iter().enumerate() {
        let base = s * nb;
        let (mut gl, mut hl) = (0.0f64, 0.0f64);
        let mut cl = 0usize;
        for b in 0..nb - 1 {
            let c = hist_c[base + b];
            gl += hist_g[base + b];
            hl += hist_h[base + b];
            cl += c as usize;
            // An empty bin repeats the previous partition at a higher
            // threshold; an empty prefix or suffix is not a split.
            if c == 0 || cl == 0 || cl == node.cnt {
                continue;
            }
            let (gr, hr) = (node.g - gl, node.h - hl);
            if hl < spec.min_child_weight || hr < spec.min_child_weight {
                continue;
            }
            let gain = gain_for(gl, hl, gr, hr, node.g, node.h, spec);
            if gain > 0.0 && best[s].is_none_or(|x| gain > x.gain) {
                best[s] = Some(Candidate {
                    gain,
                    feature,
                    threshold: cuts[b],
                    left_g: gl,
                    left_h: hl,
                    left_cnt: cl,
                });
            }
        }
    }
    best
}

/// Grow one tree on the given gradients. `rows` selects the training rows
/// (ascending), `cols` the candidate features (ascending).
pub(crate) fn grow(
    matrix: &FeatureMatrix,
    binned: Option<&Binned>,
    grad: &[f64],
    hess: &[f64],
    rows: &[u32],
    cols: &[usize],
    spec: &GrowSpec,
) -> RegressionTree {
    debug_assert!(!rows.is_empty());
    let mut slot_of_row = vec![-1i32; matrix.n_rows()];
    let (mut g0, mut h0) = (0.0f64, 0.0f64);
    for &r in rows {
        slot_of_row[r as usize] = 0;
        g0 += grad[r as usize];
        h0 += hess[r as usize];
    }
    let mut nodes = vec![Node::Leaf { weight: 0.0 }];
    let mut frontier = vec![FrontierNode { node: 0, g: g0, h: h0, cnt: rows.len() }];

    for _depth in 0..spec.max_depth {
        if frontier.is_empty() {
            break;
        }
        // Per-feature scans run in parallel; the merge below is a sequential
        // fold in ascending feature order, so results are deterministic.
        let per_feature: Vec<Vec<Option<Candidate>>> = cols
            .par_iter()
            .map(|&f| match binned {
                Some(b) => scan_binned_feature(b, f, grad, hess, &slot_of_row, &frontier, spec),
                None => scan_exact_feature(matrix, f, grad, hess, &slot_of_row, &frontier, spec),
            })
            .collect();
        let mut best: Vec<Option<Candidate>> = vec![None; frontier.len()];
        for feature_best in per_feature {
            for (s, cand) in feature_best.into_iter().enumerate() {
                if let Some(c) = cand {
                    merge_candidate(&mut best[s], c);
                }
            }
        }

        enum Outcome {
            Done,
            Split { feature: usize, threshold: f64, left_slot: i32, right_slot: i32 },
        }
        let mut outcomes = Vec::with_capacity(frontier.len());
        let mut next = Vec::new();
        for (s, cand) in best.iter().enumerate() {
            let fnode = &frontier[s];
            match cand {
                Some(c) => {
                    // A positive-gain candidate always splits; children
                    // become leaves later if nothing improves them.
                    let li = nodes.len();
                    nodes.push(Node::Leaf { weight: 0.0 });
                    let ri = nodes.len();
                    nodes.push(Node::Leaf { weight: 0.0 });
                    nodes[fnode.node] = Node::Split {
                        feature: c.feature,
                        threshold: c.threshold,
                        gain: c.gain,
                        left: li,
                        right: ri,
                    };
                    let ls = next.len() as i32;
                    next.push(FrontierNode { node: li, g: c.left_g, h: c.left_h, cnt: c.left_cnt });
                    let rs = next.len() as i32;
                    next.push(FrontierNode {
                        node: ri,
                        g: fnode.g - c.left_g,
                        h: fnode.h - c.left_h,
                        cnt: fnode.cnt - c.left_cnt,
                    });
                    outcomes.push(Outcome::Split {
                        feature: c.feature,
                        threshold: c.threshold,
                        left_slot: ls,
                        right_slot: rs,
                    });
                }
                None => {
                    nodes[fnode.node] =
                        Node::Leaf { weight: leaf_weight(fnode.g, fnode.h, spec.lambda) };
                    outcomes.push(Outcome::Done);
                }
            }
        }

        for &r in rows {
            let s = slot_of_row[r as usize];
            if s < 0 {
                continue;
            }
            match &outcomes[s as usize] {
                Outcome::Done => slot_of_row[r as usize] = -1,
                Outcome::Split { feature, threshold, left_slot, right_slot } => {
                    slot_of_row[r as usize] = if matrix.value(r as usize, *feature) < *threshold {
                        *left_slot
                    } else {
                        *right_slot
                    };
                }
            }
        }
        frontier = next;
    }

    // Depth cap reached: finalize whatever is still open.
    for fnode in &frontier {
        nodes[fnode.node] = Node::Leaf { weight: leaf_weight(fnode.g, fnode.h, spec.lambda) };
    }
    RegressionTree { nodes }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(lambda: f64, gamma: f64, mcw: f64, depth: usize) -> GrowSpec {
        GrowSpec { max_depth: depth, lambda, gamma, min_child_weight: mcw }
    }

    fn all_rows(n: usize) -> Vec<u32> {
        (0..n as u32).collect()
    }

    /// Independent oracle: enumerate every (feature, boundary) candidate by
    /// walking values in ascending order and return the best under the
    /// (gain desc, feature asc, threshold asc) ordering.
    fn brute_force_best(
        rows: &[Vec<f64>],
        grad: &[f64],
        hess: &[f64],
        spec: &GrowSpec,
    ) -> Option<(usize, f64, f64)> {
        let n = rows.len();
        let width = rows[0].len();
        let mut best: Option<(usize, f64, f64)> = None; // (feature, threshold, gain)
        for f in 0..width {
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by(|&a, &b| rows[a][f].partial_cmp(&rows[b][f]).unwrap().then(a.cmp(&b)));
            let g_total: f64 = order.iter().map(|&i| grad[i]).sum();
            let h_total: f64 = order.iter().map(|&i| hess[i]).sum();
            let (mut gl, mut hl) = (0.0, 0.0);
            for pos in 1..n {
                let (prev, cur) = (rows[order[pos - 1]][f], rows[order[pos]][f]);
                gl += grad[order[pos - 1]];
                hl += hess[order[pos - 1]];
                if cur <= prev {
                    continue;
                }
                let (gr, hr) = (g_total - gl, h_total - hl);
                if hl < spec.min_child_weight || hr < spec.min_child_weight {
                    continue;
                }
                let gain = 0.5
                    * (gl * gl / (hl + spec.lambda) + gr * gr / (hr + spec.lambda)
                        - g_total * g_total / (h_total + spec.lambda))
                    - spec.gamma;
                if gain <= 0.0 {
                    continue;
                }
                let thr = split_threshold(prev, cur);
                let wins = match best {
                    None => true,
                    Some((bf, bt, bg)) => {
                        gain > bg || (gain == bg && (f < bf || (f == bf && thr < bt)))
                    }
                };
                if wins {
                    best = Some((f, thr, gain));
                }
            }
        }
        best
    }

    fn lcg_stream(seed: u64) -> impl FnMut() -> f64 {
        let mut state = seed.wrapping_mul(2862933555777941757).wrapping_add(3037000493);
        move || {
            state = state.wrapping_mul(2862933555777941757).wrapping_add(3037000493);
            (state >> 11) as f64 / (1u64 << 53) as f64
        }
    }

    #[test]
    fn root_split_matches_exhaustive_enumeration() {
        // Many randomized instances; each compares the engine's root split
        // against the independent enumeration oracle.
        for instance in 0..60 {
            let mut rnd = lcg_stream(instance * 7919 + 13);
            let n = 8 + (instance as usize % 40);
            let width = 1 + (instance as usize % 5);
            let rows: Vec<Vec<f64>> =
                (0..n).map(|_| (0..width).map(|_| (rnd() * 10.0).round() / 2.0).collect()).collect();
            let grad: Vec<f64> = (0..n).map(|_| rnd() * 4.0 - 2.0).collect();
            let hess = vec![1.0f64; n];
            let gs = spec(1.0, 0.0, 1.0, 1);

            let matrix = FeatureMatrix::from_rows(&rows).unwrap();
            let cols: Vec<usize> = (0..width).collect();
            let tree = grow(&matrix, None, &grad, &hess, &all_rows(n), &cols, &gs);
            let oracle = brute_force_best(&rows, &grad, &hess, &gs);

            match (tree.root(), oracle) {
                (Node::Split { feature, threshold, gain, .. }, Some((of, ot, og))) => {
                    assert_eq!(*feature, of, "instance {instance}: feature mismatch");
                    assert_eq!(*threshold, ot, "instance {instance}: threshold mismatch");
                    assert!(
                        (*gain - og).abs() <= 1e-9 * og.abs().max(1.0),
                        "instance {instance}: gain {gain} vs oracle {og}"
                    );
                }
                (Node::Leaf { .. }, None) => {}
                (got, want) => panic!("instance {instance}: engine {got:?} vs oracle {want:?}"),
            }
        }
    }

    #[test]
    fn histogram_root_split_matches_oracle_when_bins_cover_values() {
        for instance in 0..30 {
            let mut rnd = lcg_stream(instance * 104729 + 7);
            let n = 10 + (instance as usize % 30);
            let width = 1 + (instance as usize % 4);
            // Coarse values so duplicates occur and cardinality stays small.
            let rows: Vec<Vec<f64>> =
                (0..n).map(|_| (0..width).map(|_| (rnd() * 8.0).floor()).collect()).collect();
            let grad: Vec<f64> = (0..n).map(|_| rnd() * 2.0 - 1.0).collect();
            let hess = vec![1.0f64; n];
            let gs = spec(1.0, 0.0, 1.0, 1);

            let matrix = FeatureMatrix::from_rows(&rows).unwrap();
            let binned = matrix.binned(64);
            let cols: Vec<usize> = (0..width).collect();
            let tree = grow(&matrix, Some(&binned), &grad, &hess, &all_rows(n), &cols, &gs);
            let oracle = brute_force_best(&rows, &grad, &hess, &gs);
            match (tree.root(), oracle) {
                (Node::Split { feature, threshold, gain, .. }, Some((of, ot, og))) => {
                    assert_eq!(*feature, of, "instance {instance}");
                    assert!(
                        (*threshold - ot).abs() <= 1e-12,
                        "instance {instance}: threshold {threshold} vs {ot}"
                    );
                    assert!((*gain - og).abs() <= 1e-9 * og.abs().max(1.0), "instance {instance}");
                }
                (Node::Leaf { .. }, None) => {}
                (got, want) => panic!("instance {instance}: engine {got:?} vs oracle {want:?}"),
            }
        }
    }

    #[test]
    fn leaf_weight_is_regularized_mean() {
        // Four rows, one shared feature value: no split is possible, so the
        // root leaf takes -G/(H+lambda) = -2/(4+1).
        let rows = vec![vec![3.0]; 4];
        let matrix = FeatureMatrix::from_rows(&rows).unwrap();
        let grad = vec![0.5; 4];
        let hess = vec![1.0; 4];
        let tree = grow(&matrix, None, &grad, &hess, &all_rows(4), &[0], &spec(1.0, 0.0, 1.0, 6));
        match tree.root() {
            Node::Leaf { weight } => assert!((weight - (-0.4)).abs() < 1e-15),
            other => panic!("expected leaf, got {other:?}"),
        }
    }

    #[test]
    fn leaf_weight_matches_numeric_minimizer() {
        // The leaf weight must minimize sum_i (g_i*w + 0.5*h_i*w^2) +
        // 0.5*lambda*w^2; check against golden-section search on that
        // objective, an implementation-independent oracle.
        let mut rnd = lcg_stream(99);
        for _ in 0..20 {
            let n = 3 + (rnd() * 10.0) as usize;
            let grad: Vec<f64> = (0..n).map(|_| rnd() * 6.0 - 3.0).collect();
            let hess = vec![1.0f64; n];
            let lambda = rnd() * 3.0;
            let objective = |w: f64| -> f64 {
                grad.iter().zip(&hess).map(|(g, h)| g * w + 0.5 * h * w * w).sum::<f64>()
                    + 0.5 * lambda * w * w
            };
            // Golden-section search over a bracket that surely contains the optimum.
            let (mut lo, mut hi) = (-10.0f64, 10.0f64);
            let phi = (5.0f64.sqrt() - 1.0) / 2.0;
            while hi - lo > 1e-12 {
                let a = hi - phi * (hi - lo);
                let b = lo + phi * (hi - lo);
                if objective(a) < objective(b) {
                    hi = b;
                } else {
                    lo = a;
                }
            }
            let oracle = 0.5 * (lo + hi);

            let rows = vec![vec![1.0]; n];
            let matrix = FeatureMatrix::from_rows(&rows).unwrap();
            let tree = grow(
                &matrix,
                None,
                &grad,
                &hess,
                &all_rows(n),
                &[0],
                &spec(lambda, 0.0, 1.0, 4),
            );
            // A value-comparison line search cannot localize the argument
            // below ~sqrt(machine epsilon), so the bound is loose.
            match tree.root() {
                Node::Leaf { weight } => {
                    assert!((weight - oracle).abs() < 1e-6, "weight {weight} vs oracle {oracle}")
                }
                other => panic!("expected leaf, got {other:?}"),
            }
        }
    }

    #[test]
    fn gamma_and_min_child_weight_block_splits() {
        let rows: Vec<Vec<f64>> = (0..8).map(|i| vec![i as f64]).collect();
        let matrix = FeatureMatrix::from_rows(&rows).unwrap();
        let grad: Vec<f64> = (0..8).map(|i| if i < 4 { -1.0 } else { 1.0 }).collect();
        let hess = vec![1.0; 8];
        // Unconstrained: splits.
        let t = grow(&matrix, None, &grad, &hess, &all_rows(8), &[0], &spec(1.0, 0.0, 1.0, 3));
        assert!(matches!(t.root(), Node::Split { .. }));
        // Huge gamma: no candidate clears the penalty.
        let t = grow(&matrix, None, &grad, &hess, &all_rows(8), &[0], &spec(1.0, 1e9, 1.0, 3));
        assert!(matches!(t.root(), Node::Leaf { .. }));
        // min_child_weight above half the rows: both children can never qualify.
        let t = grow(&matrix, None, &grad, &hess, &all_rows(8), &[0], &spec(1.0, 0.0, 5.0, 3));
        assert!(matches!(t.root(), Node::Leaf { .. }));
    }

    #[test]
    fn depth_limit_is_respected() {
        let mut rnd = lcg_stream(5);
        let rows: Vec<Vec<f64>> = (0..64).map(|_| vec![rnd()]).collect();
        let grad: Vec<f64> = (0..64).map(|_| rnd() - 0.5).collect();
        let hess = vec![1.0; 64];
        for depth in 1..5 {
            let t = grow(&matrix_of(&rows), None, &grad, &hess, &all_rows(64), &[0], &spec(0.0, 0.0, 1.0, depth));
            assert!(t.num_leaves() <= 1 << depth);
            assert!(measured_depth(&t) <= depth);
        }
    }

    fn matrix_of(rows: &[Vec<f64>]) -> FeatureMatrix {
        FeatureMatrix::from_rows(rows).unwrap()
    }

    fn measured_depth(t: &RegressionTree) -> usize {
        fn rec(t: &RegressionTree, i: usize) -> usize {
            match &t.nodes[i] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + rec(t, *left).max(rec(t, *right)),
            }
        }
        rec(t, 0)
    }

    #[test]
    fn routing_is_strictly_less_than() {
        let tree = RegressionTree {
            nodes: vec![
                Node::Split { feature: 0, threshold: 2.0, gain: 1.0, left: 1, right: 2 },
                Node::Leaf { weight: -1.0 },
                Node::Leaf { weight: 1.0 },
            ],
        };
        assert_eq!(tree.predict_row(&[1.9]), -1.0);
        assert_eq!(tree.predict_row(&[2.0]), 1.0); // boundary goes right
        assert_eq!(tree.predict_row(&[2.1]), 1.0);
    }

    #[test]
    fn column_subset_restricts_split_features() {
        let mut rnd = lcg_stream(42);
        let rows: Vec<Vec<f64>> = (0..32).map(|_| vec![rnd(), rnd(), rnd()]).collect();
        let grad: Vec<f64> = rows.iter().map(|r| r[0] - 0.5).collect();
        let hess = vec![1.0; 32];
        let t = grow(&matrix_of(&rows), None, &grad, &hess, &all_rows(32), &[1, 2], &spec(0.0, 0.0, 1.0, 4));
        for n in &t.nodes {
            if let Node::Split { feature, .. } = n {
                assert!(*feature == 1 || *feature == 2, "feature 0 was excluded");
            }
        }
    }
}
