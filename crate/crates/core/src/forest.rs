//! Random forest classifier: bootstrap-aggregated CART trees with Gini
//! splitting and majority vote.
//!
//! Training is deterministic for a fixed seed: every tree owns an RNG
//! derived from the master seed and its index, so results do not depend on
//! thread scheduling.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ForestParams {
    pub n_trees: usize,
    /// Features tried per split; `None` means floor(sqrt(p)).
    pub mtry: Option<usize>,
    pub min_leaf: usize,
    pub max_depth: Option<usize>,
    /// Grow each tree on a bootstrap resample (disable to bag nothing).
    pub bootstrap: bool,
    pub seed: u64,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams {
            n_trees: 500,
            mtry: None,
            min_leaf: 1,
            max_depth: None,
            bootstrap: true,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Node {
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        counts: Vec<usize>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    nodes: Vec<Node>,
    n_classes: usize,
}

impl DecisionTree {
    /// Index of the leaf a sample falls into.
    pub fn leaf_index(&self, x: &[f64]) -> usize {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    i = if x[*feature] <= *threshold { *left } else { *right };
                }
                Node::Leaf { .. } => return i,
            }
        }
    }

    /// Majority class of the leaf the sample falls into; ties break toward
    /// the lowest class index.
    pub fn predict(&self, x: &[f64]) -> usize {
        match &self.nodes[self.leaf_index(x)] {
            Node::Leaf { counts } => argmax_counts(counts),
            Node::Split { .. } => unreachable!(),
        }
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }
}

fn argmax_counts(counts: &[usize]) -> usize {
    let mut best = 0;
    for (i, &c) in counts.iter().enumerate() {
        if c > counts[best] {
            best = i;
        }
    }
    best
}

/// Gini impurity 1 - sum((c_i / total)^2).
pub fn gini_impurity(class_counts: &[usize]) -> Result<f64> {
    let total: usize = class_counts.iter().sum();
    if total == 0 {
        return Err(Error::InsufficientData { needed: 1, got: 0 });
    }
    let t = total as f64;
    Ok(1.0 - class_counts.iter().map(|&c| (c as f64 / t).powi(2)).sum::<f64>())
}

struct TreeBuilder<'a> {
    x: &'a [Vec<f64>],
    y: &'a [usize],
    n_classes: usize,
    mtry: usize,
    min_leaf: usize,
    max_depth: usize,
    nodes: Vec<Node>,
    /// Gini decrease credited to each feature (sample-weighted).
    importance: Vec<f64>,
    n_root: usize,
}

impl<'a> TreeBuilder<'a> {
    fn build(&mut self, indices: Vec<usize>, depth: usize, rng: &mut ChaCha8Rng) -> usize {
        let counts = self.class_counts(&indices);
        let n_node = indices.len();
        let impurity = gini_impurity(&counts).expect("non-empty node");

        let at_depth_cap = depth >= self.max_depth;
        if impurity == 0.0 || n_node < 2 * self.min_leaf || at_depth_cap {
            return self.push_leaf(counts);
        }

        match self.best_split(&indices, &counts, impurity, rng) {
            None => self.push_leaf(counts),
            Some((feature, threshold, decrease)) => {
                self.importance[feature] += decrease * n_node as f64 / self.n_root as f64;
                let (left_idx, right_idx): (Vec<usize>, Vec<usize>) = indices
                    .into_iter()
                    .partition(|&i| self.x[i][feature] <= threshold);
                let node_pos = self.nodes.len();
                self.nodes.push(Node::Split {
                    feature,
                    threshold,
                    left: 0,
                    right: 0,
                });
                let left = self.build(left_idx, depth + 1, rng);
                let right = self.build(right_idx, depth + 1, rng);
                if let Node::Split {
                    left: l, right: r, ..
                } = &mut self.nodes[node_pos]
                {
                    *l = left;
                    *r = right;
                }
                node_pos
            }
        }
    }

    fn push_leaf(&mut self, counts: Vec<usize>) -> usize {
        self.nodes.push(Node::Leaf { counts });
        self.nodes.len() - 1
    }

    fn class_counts(&self, indices: &[usize]) -> Vec<usize> {
        let mut counts = vec![0usize; self.n_classes];
        for &i in indices {
            counts[self.y[i]] += 1;
        }
        counts
    }

    /// Best (feature, midpoint threshold, Gini decrease) over a random
    /// feature subset. Candidates are scanned in ascending feature index and
    /// ascending threshold, and a new best must be strictly better, which
    /// makes tie-breaking lexicographic by construction.
    fn best_split(
        &self,
        indices: &[usize],
        parent_counts: &[usize],
        parent_impurity: f64,
        rng: &mut ChaCha8Rng,
    ) -> Option<(usize, f64, f64)> {
        let p = self.x[0].len();
        let mut features: Vec<usize> = (0..p).collect();
        // Partial Fisher-Yates: the first mtry entries are the sample.
        for i in 0..self.mtry.min(p) {
            let j = rng.gen_range(i..p);
            features.swap(i, j);
        }
        let mut chosen: Vec<usize> = features[..self.mtry.min(p)].to_vec();
        chosen.sort_unstable();

        let n = indices.len() as f64;
        let mut best: Option<(usize, f64, f64)> = None;

        for &feature in &chosen {
            let mut order: Vec<usize> = indices.to_vec();
            order.sort_by(|&a, &b| {
                self.x[a][feature]
                    .partial_cmp(&self.x[b][feature])
                    .expect("finite feature values")
            });

            let mut left_counts = vec![0usize; self.n_classes];
            let mut n_left = 0usize;
            for w in 0..order.len() - 1 {
                let i = order[w];
                left_counts[self.y[i]] += 1;
                n_left += 1;
                let v = self.x[i][feature];
                let v_next = self.x[order[w + 1]][feature];
                if v == v_next {
                    continue;
                }
                let n_right = indices.len() - n_left;
                if n_left < self.min_leaf || n_right < self.min_leaf {
                    continue;
                }
                let right_counts: Vec<usize> = parent_counts
                    .iter()
                    .zip(&left_counts)
                    .map(|(&t, &l)| t - l)
                    .collect();
                let gl = gini_impurity(&left_counts).unwrap();
                let gr = gini_impurity(&right_counts).unwrap();
                let decrease =
                    parent_impurity - (n_left as f64 * gl + n_right as f64 * gr) / n;
                let threshold = 0.5 * (v + v_next);
                let better = match best {
                    None => decrease > 0.0,
                    Some((_, _, d)) => decrease > d + 1e-12,
                };
                if better {
                    best = Some((feature, threshold, decrease));
                }
            }
        }
        best
    }
}

fn grow_tree_impl(
    x: &[Vec<f64>],
    y: &[usize],
    n_classes: usize,
    params: &ForestParams,
    indices: Vec<usize>,
    rng: &mut ChaCha8Rng,
    importance: &mut [f64],
) -> DecisionTree {
    let p = x[0].len();
    let mtry = params.mtry.unwrap_or_else(|| (p as f64).sqrt().floor() as usize).clamp(1, p);
    let mut builder = TreeBuilder {
        x,
        y,
        n_classes,
        mtry,
        min_leaf: params.min_leaf.max(1),
        max_depth: params.max_depth.unwrap_or(usize::MAX),
        nodes: Vec::new(),
        importance: vec![0.0; p],
        n_root: indices.len(),
    };
    builder.build(indices, 0, rng);
    for (acc, v) in importance.iter_mut().zip(&builder.importance) {
        *acc += v;
    }
    DecisionTree {
        nodes: builder.nodes,
        n_classes,
    }
}

/// Grow a single CART tree on the full sample.
pub fn grow_tree(
    x: &[Vec<f64>],
    y: &[usize],
    n_classes: usize,
    params: &ForestParams,
    rng: &mut ChaCha8Rng,
) -> Result<DecisionTree> {
    validate_training_data(x, y, n_classes)?;
    let mut importance = vec![0.0; x[0].len()];
    Ok(grow_tree_impl(
        x,
        y,
        n_classes,
        params,
        (0..x.len()).collect(),
        rng,
        &mut importance,
    ))
}

fn validate_training_data(x: &[Vec<f64>], y: &[usize], n_classes: usize) -> Result<()> {
    if x.is_empty() {
        return Err(Error::InsufficientData { needed: 1, got: 0 });
    }
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch { expected: x.len(), got: y.len() });
    }
    let p = x[0].len();
    for row in x {
        if row.len() != p {
            return Err(Error::DimensionMismatch { expected: p, got: row.len() });
        }
        if row.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("feature matrix"));
        }
    }
    if y.iter().any(|&c| c >= n_classes) {
        return Err(Error::DimensionMismatch { expected: n_classes, got: y.iter().max().copied().unwrap_or(0) + 1 });
    }
    Ok(())
}

/// A fitted forest: trees plus out-of-bag accuracy and feature importance.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Forest {
    pub trees: Vec<DecisionTree>,
    pub n_classes: usize,
    pub n_features: usize,
    /// Out-of-bag accuracy; `None` when bootstrap was disabled.
    pub oob_accuracy: Option<f64>,
    /// Total sample-weighted Gini decrease per feature, summed over trees.
    pub importance: Vec<f64>,
    pub params: ForestParams,
}

fn tree_seed(master: u64, index: usize) -> u64 {
    // SplitMix64 step keeps per-tree streams decorrelated.
    let mut z = master.wrapping_add((index as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Fit a forest of `params.n_trees` trees.
pub fn fit_forest(
    x: &[Vec<f64>],
    y: &[usize],
    n_classes: usize,
    params: &ForestParams,
) -> Result<Forest> {
    validate_training_data(x, y, n_classes)?;
    if x.len() < 2 {
        return Err(Error::InsufficientData { needed: 2, got: x.len() });
    }
    let n = x.len();
    let p = x[0].len();

    let results: Vec<(DecisionTree, Vec<usize>, Vec<f64>)> = (0..params.n_trees)
        .into_par_iter()
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(tree_seed(params.seed, t));
            let indices: Vec<usize> = if params.bootstrap {
                (0..n).map(|_| rng.gen_range(0..n)).collect()
            } else {
                (0..n).collect()
            };
            let mut importance = vec![0.0; p];
            let tree = grow_tree_impl(x, y, n_classes, params, indices.clone(), &mut rng, &mut importance);
            (tree, indices, importance)
        })
        .collect();

    let mut trees = Vec::with_capacity(params.n_trees);
    let mut importance = vec![0.0; p];
    let mut in_bag: Vec<Vec<bool>> = Vec::with_capacity(params.n_trees);
    for (tree, indices, imp) in results {
        let mut mask = vec![false; n];
        for &i in &indices {
            mask[i] = true;
        }
        in_bag.push(mask);
        for (acc, v) in importance.iter_mut().zip(&imp) {
            *acc += v;
        }
        trees.push(tree);
    }

    let oob_accuracy = if params.bootstrap {
        let mut correct = 0usize;
        let mut counted = 0usize;
        for i in 0..n {
            let mut votes = vec![0usize; n_classes];
            let mut any = false;
            for (tree, mask) in trees.iter().zip(&in_bag) {
                if !mask[i] {
                    votes[tree.predict(&x[i])] += 1;
                    any = true;
                }
            }
            if any {
                counted += 1;
                if argmax_counts(&votes) == y[i] {
                    correct += 1;
                }
            }
        }
        (counted > 0).then(|| correct as f64 / counted as f64)
    } else {
        None
    };

    Ok(Forest {
        trees,
        n_classes,
        n_features: p,
        oob_accuracy,
        importance,
        params: params.clone(),
    })
}

impl Forest {
    /// Modal vote over trees with the vote fractions per class. Vote ties
    /// break toward the lowest class index.
    pub fn predict_class(&self, x: &[f64]) -> Result<(usize, Vec<f64>)> {
        if x.len() != self.n_features {
            return Err(Error::DimensionMismatch { expected: self.n_features, got: x.len() });
        }
        let mut votes = vec![0usize; self.n_classes];
        for tree in &self.trees {
            votes[tree.predict(x)] += 1;
        }
        Ok(tally(&votes))
    }

    /// Feature importance normalized to sum to 1 (all zeros if no splits).
    pub fn normalized_importance(&self) -> Vec<f64> {
        let total: f64 = self.importance.iter().sum();
        if total <= 0.0 {
            return vec![0.0; self.importance.len()];
        }
        self.importance.iter().map(|v| v / total).collect()
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("forest serialization")
    }

    /// Write per-feature total Gini decrease (raw and normalized) as CSV.
    pub fn write_importance_csv(&self, names: &[&str], path: &std::path::Path) -> Result<()> {
        if names.len() != self.n_features {
            return Err(Error::DimensionMismatch { expected: self.n_features, got: names.len() });
        }
        let normalized = self.normalized_importance();
        let mut out = String::from("feature,gini_decrease,normalized\n");
        for ((name, raw), norm) in names.iter().zip(&self.importance).zip(normalized) {
            out.push_str(&format!("{name},{raw:.12e},{norm:.12e}\n"));
        }
        std::fs::write(path, out).map_err(|e| Error::Io {
            path: path.display().to_string(),
            source: e,
        })
    }
}

/// Turn a vote tally into (winning class, fractions).
pub(crate) fn tally(votes: &[usize]) -> (usize, Vec<f64>) {
    let total: usize = votes.iter().sum();
    let fractions = votes.iter().map(|&v| v as f64 / total as f64).collect();
    (argmax_counts(votes), fractions)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::seq::SliceRandom;
    use rand::{Rng, SeedableRng};
    use rand_distr::StandardNormal;

    fn params(n_trees: usize, seed: u64) -> ForestParams {
        ForestParams {
            n_trees,
            seed,
            ..ForestParams::default()
        }
    }

    #[test]
    fn gini_reference_values() {
        assert_relative_eq!(gini_impurity(&[10, 0, 0]).unwrap(), 0.0);
        assert_relative_eq!(gini_impurity(&[5, 5]).unwrap(), 0.5);
        assert_relative_eq!(gini_impurity(&[2, 3, 5]).unwrap(), 0.62, epsilon = 1e-12);
        assert!(gini_impurity(&[0, 0]).is_err());
    }

    #[test]
    fn one_dimensional_split_matches_exhaustive_oracle() {
        let x = vec![vec![1.0], vec![2.0], vec![4.0], vec![5.0]];
        let y = vec![0, 0, 1, 1];
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let p = ForestParams {
            mtry: Some(1),
            bootstrap: false,
            ..params(1, 0)
        };
        let tree = grow_tree(&x, &y, 2, &p, &mut rng).unwrap();

        // Exhaustive oracle: enumerate every midpoint, find max Gini decrease.
        let mut best_decrease = f64::NEG_INFINITY;
        let mut best_threshold = f64::NAN;
        for w in [(1.0, 2.0), (2.0, 4.0), (4.0, 5.0)] {
            let thr = 0.5 * (w.0 + w.1);
            let left: Vec<usize> = y
                .iter()
                .zip(&x)
                .filter(|(_, xi)| xi[0] <= thr)
                .map(|(&yi, _)| yi)
                .collect();
            let right: Vec<usize> = y
                .iter()
                .zip(&x)
                .filter(|(_, xi)| xi[0] > thr)
                .map(|(&yi, _)| yi)
                .collect();
            let count = |v: &[usize]| {
                let mut c = [0usize; 2];
                for &cls in v {
                    c[cls] += 1;
                }
                c.to_vec()
            };
            let g = gini_impurity(&[2, 2]).unwrap()
                - (left.len() as f64 * gini_impurity(&count(&left)).unwrap()
                    + right.len() as f64 * gini_impurity(&count(&right)).unwrap())
                    / 4.0;
            if g > best_decrease {
                best_decrease = g;
                best_threshold = thr;
            }
        }
        assert_relative_eq!(best_threshold, 3.0);

        match &tree.nodes()[0] {
            Node::Split { threshold, .. } => {
                assert!(*threshold > 2.0 && *threshold < 4.0);
                assert_relative_eq!(*threshold, best_threshold);
            }
            Node::Leaf { .. } => panic!("expected a split at the root"),
        }
        for (xi, &yi) in x.iter().zip(&y) {
            assert_eq!(tree.predict(xi), yi);
        }
    }

    #[test]
    fn pure_node_stops_immediately() {
        let x = vec![vec![1.0], vec![2.0], vec![3.0]];
        let y = vec![1, 1, 1];
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let tree = grow_tree(&x, &y, 2, &params(1, 0), &mut rng).unwrap();
        assert_eq!(tree.nodes().len(), 1);
        assert!(matches!(tree.nodes()[0], Node::Leaf { .. }));
    }

    #[test]
    fn conflicting_duplicates_become_majority_leaf() {
        let x = vec![vec![1.0, 2.0]; 5];
        let y = vec![0, 0, 0, 1, 1];
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let tree = grow_tree(&x, &y, 2, &params(1, 0), &mut rng).unwrap();
        assert_eq!(tree.nodes().len(), 1);
        assert_eq!(tree.predict(&[1.0, 2.0]), 0);
    }

    #[test]
    fn degenerate_forest_equals_single_tree() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let x: Vec<Vec<f64>> = (0..50)
            .map(|_| (0..3).map(|_| rng.sample::<f64, _>(StandardNormal)).collect())
            .collect();
        let y: Vec<usize> = x.iter().map(|r| usize::from(r[0] + r[1] > 0.0)).collect();
        let p = ForestParams {
            n_trees: 1,
            mtry: Some(3),
            bootstrap: false,
            seed: 4,
            ..ForestParams::default()
        };
        let forest = fit_forest(&x, &y, 2, &p).unwrap();
        for row in &x {
            let (cls, _) = forest.predict_class(row).unwrap();
            assert_eq!(cls, forest.trees[0].predict(row));
        }
    }

    fn gaussian_blobs(n: usize, seed: u64) -> (Vec<Vec<f64>>, Vec<usize>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut x = Vec::with_capacity(n);
        let mut y = Vec::with_capacity(n);
        for i in 0..n {
            let class = i % 2;
            let center = if class == 0 { -2.0 } else { 2.0 };
            let mut row: Vec<f64> = (0..5).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
            row[0] += center;
            row[1] += center;
            x.push(row);
            y.push(class);
        }
        (x, y)
    }

    #[test]
    fn separable_classes_have_high_oob_accuracy() {
        let (x, y) = gaussian_blobs(200, 21);
        let forest = fit_forest(&x, &y, 2, &params(200, 1)).unwrap();
        let oob = forest.oob_accuracy.unwrap();
        assert!(oob > 0.9, "oob accuracy {oob}");
    }

    #[test]
    fn shuffled_labels_drop_to_majority_baseline() {
        let (x, mut y) = gaussian_blobs(200, 22);
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        y.shuffle(&mut rng);
        let majority = {
            let ones = y.iter().filter(|&&c| c == 1).count();
            (ones.max(y.len() - ones)) as f64 / y.len() as f64
        };
        let forest = fit_forest(&x, &y, 2, &params(200, 2)).unwrap();
        let oob = forest.oob_accuracy.unwrap();
        assert!(
            (oob - majority).abs() <= 0.1,
            "oob {oob} vs majority {majority}"
        );
    }

    #[test]
    fn memorizes_training_points_without_bootstrap() {
        let (x, y) = gaussian_blobs(60, 30);
        let p = ForestParams {
            n_trees: 1,
            mtry: Some(5),
            bootstrap: false,
            min_leaf: 1,
            max_depth: None,
            seed: 0,
        };
        let forest = fit_forest(&x, &y, 2, &p).unwrap();
        // Well-separated points with no duplicates: each training sample is
        // in a pure region of its own.
        for (row, &label) in x.iter().zip(&y) {
            assert_eq!(forest.predict_class(row).unwrap().0, label);
        }
    }

    #[test]
    fn deterministic_per_seed() {
        let (x, y) = gaussian_blobs(120, 77);
        let a = fit_forest(&x, &y, 2, &params(50, 42)).unwrap();
        let b = fit_forest(&x, &y, 2, &params(50, 42)).unwrap();
        assert_eq!(a.trees, b.trees);
        let c = fit_forest(&x, &y, 2, &params(50, 43)).unwrap();
        assert_ne!(a.trees, c.trees);
    }

    #[test]
    fn vote_tally_tie_breaks_to_lowest_class() {
        let (cls, fr) = tally(&[250, 0, 250]);
        assert_eq!(cls, 0);
        assert_relative_eq!(fr.iter().sum::<f64>(), 1.0, epsilon = 1e-12);
        assert_relative_eq!(fr[0], 0.5);
    }

    #[test]
    fn unanimous_votes_give_full_fraction() {
        let (cls, fr) = tally(&[0, 0, 500]);
        assert_eq!(cls, 2);
        assert_relative_eq!(fr[2], 1.0);
    }

    #[test]
    fn importance_is_nonnegative() {
        let (x, y) = gaussian_blobs(150, 13);
        let forest = fit_forest(&x, &y, 2, &params(80, 5)).unwrap();
        assert!(forest.importance.iter().all(|&v| v >= 0.0));
        // informative features 0 and 1 dominate
        let norm = forest.normalized_importance();
        assert!(norm[0] + norm[1] > 0.6, "importance {norm:?}");
    }

    #[test]
    fn forest_json_round_trip() {
        let (x, y) = gaussian_blobs(40, 1);
        let forest = fit_forest(&x, &y, 2, &params(5, 3)).unwrap();
        let json = forest.to_json();
        let back: Forest = serde_json::from_value(json).unwrap();
        assert_eq!(back.trees, forest.trees);
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let (x, y) = gaussian_blobs(40, 2);
        let forest = fit_forest(&x, &y, 2, &params(5, 3)).unwrap();
        assert!(forest.predict_class(&[1.0, 2.0]).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(20))]

        /// Strictly increasing per-feature transforms leave every tree's
        /// partition of the training samples unchanged. Bootstrap is off:
        /// an out-of-bag sample may sit strictly between the two in-bag
        /// values bracketing a midpoint threshold, and midpoints do not
        /// commute with nonlinear transforms.
        #[test]
        fn monotone_transform_preserves_partition(seed in 0u64..200) {
            let (x, y) = gaussian_blobs(80, seed);
            let p = ForestParams { bootstrap: false, ..params(10, seed) };
            let forest_a = fit_forest(&x, &y, 2, &p).unwrap();

            let xt: Vec<Vec<f64>> = x
                .iter()
                .map(|row| {
                    row.iter()
                        .enumerate()
                        .map(|(j, &v)| match j % 3 {
                            0 => v.exp(),
                            1 => 3.0 * v + 11.0,
                            _ => v + v.tanh(),
                        })
                        .collect()
                })
                .collect();
            let forest_b = fit_forest(&xt, &y, 2, &p).unwrap();

            for (ta, tb) in forest_a.trees.iter().zip(&forest_b.trees) {
                let leaves_a: Vec<usize> = x.iter().map(|r| ta.leaf_index(r)).collect();
                let leaves_b: Vec<usize> = xt.iter().map(|r| tb.leaf_index(r)).collect();
                prop_assert_eq!(leaves_a, leaves_b);
            }
        }

        #[test]
        fn vote_fractions_sum_to_one(seed in 0u64..100) {
            let (x, y) = gaussian_blobs(60, seed);
            let forest = fit_forest(&x, &y, 2, &params(17, seed)).unwrap();
            let (_, fr) = forest.predict_class(&x[0]).unwrap();
            prop_assert!((fr.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }
}
