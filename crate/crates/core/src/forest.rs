//! Random Forest with out-of-bag permutation feature importance.
//!
//! CART trees with axis-aligned threshold splits on Gini impurity,
//! sqrt(d) candidate features per split, bootstrap resamples of the same
//! size as the input. Importance of a component is the mean over trees of
//! the OOB accuracy drop after permuting that component's values within
//! the tree's out-of-bag samples.

use crate::error::{Error, Result};
use crate::matrix::FeatureMatrix;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ForestParams {
    pub n_trees: usize,
    pub max_depth: Option<usize>,
    /// Candidate features per split; defaults to ceil(sqrt(d)).
    pub features_per_split: Option<usize>,
    pub seed: u64,
}

impl Default for ForestParams {
    fn default() -> Self {
        Self {
            n_trees: 100,
            max_depth: None,
            features_per_split: None,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
enum Node {
    Leaf(i8),
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone)]
pub struct Tree {
    nodes: Vec<Node>,
    pub oob_indices: Vec<usize>,
}

impl Tree {
    pub fn predict(&self, x: &[f64]) -> i8 {
        let mut node = 0;
        loop {
            match self.nodes[node] {
                Node::Leaf(label) => return label,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    node = if x[feature] <= threshold { left } else { right };
                }
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct Forest {
    pub trees: Vec<Tree>,
    pub params: ForestParams,
    pub n_features: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ImportanceReport {
    pub component_names: Vec<String>,
    pub importances: Vec<f64>,
    /// Component indices in descending importance; ties break to the
    /// lower index.
    pub ranking: Vec<usize>,
}

impl ImportanceReport {
    pub fn save(&self, path: &std::path::Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(path, text).map_err(|source| Error::Io {
            path: path.to_owned(),
            source,
        })
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_owned(),
            source,
        })?;
        Ok(serde_json::from_str(&text)?)
    }

    /// Fraction of the top-k ranked components whose name matches the
    /// predicate (e.g. cross-channel components).
    pub fn top_k_share<F: Fn(&str) -> bool>(&self, k: usize, pred: F) -> f64 {
        let k = k.min(self.ranking.len());
        if k == 0 {
            return 0.0;
        }
        let hits = self.ranking[..k]
            .iter()
            .filter(|&&j| pred(&self.component_names[j]))
            .count();
        hits as f64 / k as f64
    }
}

fn gini(pos: f64, neg: f64) -> f64 {
    let n = pos + neg;
    if n == 0.0 {
        return 0.0;
    }
    let p = pos / n;
    let q = neg / n;
    1.0 - p * p - q * q
}

fn majority(y: &[i8], indices: &[usize]) -> i8 {
    let pos = indices.iter().filter(|&&i| y[i] > 0).count();
    let neg = indices.len() - pos;
    if pos > neg {
        1
    } else {
        -1
    }
}

fn grow(
    nodes: &mut Vec<Node>,
    x: &FeatureMatrix,
    y: &[i8],
    indices: &[usize],
    depth: usize,
    params: &ForestParams,
    k: usize,
    rng: &mut ChaCha8Rng,
) -> usize {
    let pos = indices.iter().filter(|&&i| y[i] > 0).count();
    let pure = pos == 0 || pos == indices.len();
    let depth_capped = params.max_depth.map_or(false, |d| depth >= d);
    if pure || depth_capped || indices.len() < 2 {
        let id = nodes.len();
        nodes.push(Node::Leaf(majority(y, indices)));
        return id;
    }

    // sample k distinct candidate features, then sort for a deterministic
    // tie-break by feature index
    let d = x.cols();
    let mut pool: Vec<usize> = (0..d).collect();
    let (chosen, _) = pool.partial_shuffle(rng, k);
    let mut candidates = chosen.to_vec();
    candidates.sort_unstable();

    let total_pos = pos as f64;
    let total_neg = (indices.len() - pos) as f64;
    let mut best: Option<(f64, usize, f64)> = None; // (impurity, feature, threshold)
    let mut vals: Vec<(f64, i8)> = Vec::with_capacity(indices.len());
    for &j in &candidates {
        vals.clear();
        vals.extend(indices.iter().map(|&i| (x.row(i)[j], y[i])));
        vals.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let mut left_pos = 0.0;
        let mut left_neg = 0.0;
        for w in 0..vals.len() - 1 {
            if vals[w].1 > 0 {
                left_pos += 1.0;
            } else {
                left_neg += 1.0;
            }
            if vals[w].0 == vals[w + 1].0 {
                continue;
            }
            let left_n = left_pos + left_neg;
            let right_pos = total_pos - left_pos;
            let right_neg = total_neg - left_neg;
            let right_n = right_pos + right_neg;
            let impurity = (left_n * gini(left_pos, left_neg)
                + right_n * gini(right_pos, right_neg))
                / (left_n + right_n);
            if best.map_or(true, |(bi, _, _)| impurity < bi) {
                let threshold = 0.5 * (vals[w].0 + vals[w + 1].0);
                best = Some((impurity, j, threshold));
            }
        }
    }

    let Some((_, feature, threshold)) = best else {
        let id = nodes.len();
        nodes.push(Node::Leaf(majority(y, indices)));
        return id;
    };
    let (left_idx, right_idx): (Vec<usize>, Vec<usize>) = indices
        .iter()
        .partition(|&&i| x.row(i)[feature] <= threshold);
    if left_idx.is_empty() || right_idx.is_empty() {
        let id = nodes.len();
        nodes.push(Node::Leaf(majority(y, indices)));
        return id;
    }
    let id = nodes.len();
    nodes.push(Node::Leaf(0)); // placeholder
    let left = grow(nodes, x, y, &left_idx, depth + 1, params, k, rng);
    let right = grow(nodes, x, y, &right_idx, depth + 1, params, k, rng);
    nodes[id] = Node::Split {
        feature,
        threshold,
        left,
        right,
    };
    id
}

fn tree_seed(seed: u64, t: usize) -> u64 {
    seed ^ (t as u64).wrapping_mul(0x9E3779B97F4A7C15)
}

/// Trains `n_trees` CART trees on bootstrap resamples and records each
/// tree's out-of-bag index set. Bootstraps with an empty OOB set are
/// redrawn. Fully deterministic given the seed.
pub fn train_forest(x: &FeatureMatrix, y: &[i8], params: &ForestParams) -> Result<Forest> {
    let n = x.rows();
    if y.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "{} labels for {n} rows",
            y.len()
        )));
    }
    let pos = y.iter().filter(|&&l| l > 0).count();
    if pos == 0 || pos == n {
        return Err(Error::SingleClass);
    }
    let d = x.cols();
    let k = params
        .features_per_split
        .unwrap_or_else(|| (d as f64).sqrt().ceil() as usize)
        .clamp(1, d);

    let trees: Vec<Tree> = (0..params.n_trees)
        .into_par_iter()
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(tree_seed(params.seed, t));
            let (bootstrap, oob) = loop {
                let bootstrap: Vec<usize> = (0..n).map(|_| rng.gen_range(0..n)).collect();
                let mut in_bag = vec![false; n];
                for &i in &bootstrap {
                    in_bag[i] = true;
                }
                let oob: Vec<usize> =
                    (0..n).filter(|&i| !in_bag[i]).collect();
                if !oob.is_empty() {
                    break (bootstrap, oob);
                }
            };
            let mut nodes = Vec::new();
            grow(&mut nodes, x, y, &bootstrap, 0, params, k, &mut rng);
            Tree {
                nodes,
                oob_indices: oob,
            }
        })
        .collect();

    Ok(Forest {
        trees,
        params: params.clone(),
        n_features: d,
    })
}

fn oob_accuracy(tree: &Tree, x: &FeatureMatrix, y: &[i8]) -> f64 {
    let hits = tree
        .oob_indices
        .iter()
        .filter(|&&i| tree.predict(x.row(i)) == y[i])
        .count();
    hits as f64 / tree.oob_indices.len() as f64
}

/// Mean over trees of (OOB accuracy) - (OOB accuracy with component j's
/// values permuted within the OOB set), with one seeded permutation per
/// (tree, component).
pub fn oob_permutation_importance(
    forest: &Forest,
    x: &FeatureMatrix,
    y: &[i8],
    seed: u64,
) -> Result<ImportanceReport> {
    if x.cols() != forest.n_features {
        return Err(Error::DimensionMismatch(format!(
            "{} columns for a {}-feature forest",
            x.cols(),
            forest.n_features
        )));
    }
    let d = x.cols();
    let per_tree: Vec<Vec<f64>> = forest
        .trees
        .par_iter()
        .enumerate()
        .map(|(t, tree)| {
            let baseline = oob_accuracy(tree, x, y);
            let oob = &tree.oob_indices;
            let mut row = vec![0.0; d];
            let mut buf: Vec<f64> = Vec::with_capacity(x.cols());
            for (j, slot) in row.iter_mut().enumerate() {
                let mut rng = ChaCha8Rng::seed_from_u64(
                    seed ^ tree_seed(0xA5A5_5A5A, t) ^ (j as u64).wrapping_mul(0xD1B54A32D192ED03),
                );
                let mut permuted: Vec<f64> = oob.iter().map(|&i| x.row(i)[j]).collect();
                permuted.shuffle(&mut rng);
                let hits = oob
                    .iter()
                    .zip(&permuted)
                    .filter(|(&i, &pv)| {
                        buf.clear();
                        buf.extend_from_slice(x.row(i));
                        buf[j] = pv;
                        tree.predict(&buf) == y[i]
                    })
                    .count();
                let permuted_acc = hits as f64 / oob.len() as f64;
                *slot = baseline - permuted_acc;
            }
            row
        })
        .collect();

    let mut importances = vec![0.0; d];
    for row in &per_tree {
        for (j, v) in row.iter().enumerate() {
            importances[j] += v;
        }
    }
    for v in &mut importances {
        *v /= forest.trees.len() as f64;
    }
    let mut ranking: Vec<usize> = (0..d).collect();
    ranking.sort_by(|&a, &b| {
        importances[b]
            .partial_cmp(&importances[a])
            .unwrap()
            .then(a.cmp(&b))
    });
    Ok(ImportanceReport {
        component_names: x.component_names.clone(),
        importances,
        ranking,
    })
}

/// Restricts the matrix to the top-k ranked components, in ranking order.
pub fn select_top_k(x: &FeatureMatrix, report: &ImportanceReport, k: usize) -> Result<FeatureMatrix> {
    if k < 1 || k > x.cols() {
        return Err(Error::OutOfBounds(format!(
            "k = {k} out of range 1..={}",
            x.cols()
        )));
    }
    if report.ranking.len() != x.cols() {
        return Err(Error::DimensionMismatch(
            "importance report does not match matrix width".into(),
        ));
    }
    x.select_columns(&report.ranking[..k])
}
