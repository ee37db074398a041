//! Real AdaBoost with domain-partitioning (quantile-binned) decision stumps.
//!
//! Each round evaluates every candidate feature: the feature's value range
//! is partitioned into equal-frequency bins (edges from training quantiles,
//! computed once up front), each bin predicts 0.5 * ln((W+ + eps)/(W- + eps))
//! from the current distribution masses, and the feature minimizing the
//! normalizer Z = sum over bins of 2*sqrt(W+ * W-) is selected; ties break
//! to the lowest feature index. Training is fully deterministic given the
//! inputs.

use crate::error::{Error, Result};
use crate::matrix::FeatureMatrix;
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoostParams {
    pub rounds: usize,
    pub bins: usize,
    /// Smoothing; defaults to 1/(2 * n_samples) when None.
    pub epsilon: Option<f64>,
    pub seed: u64,
}

impl Default for BoostParams {
    fn default() -> Self {
        Self {
            rounds: 500,
            bins: 16,
            epsilon: None,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Stump {
    pub feature: usize,
    pub name: String,
    /// Strictly increasing; outer values are the observed data range. Values
    /// outside clamp into the first/last bin.
    pub edges: Vec<f64>,
    pub outputs: Vec<f64>,
}

impl Stump {
    /// Bin index of x: number of interior edges <= x.
    pub fn bin(&self, x: f64) -> usize {
        let interior = &self.edges[1..self.edges.len() - 1];
        interior.partition_point(|&e| e <= x)
    }

    pub fn output(&self, x: f64) -> f64 {
        self.outputs[self.bin(x)]
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StumpEnsembleModel {
    pub version: u32,
    pub n_features: usize,
    #[serde(rename = "T")]
    pub rounds: usize,
    #[serde(rename = "B")]
    pub bins: usize,
    pub epsilon: f64,
    pub seed: u64,
    pub stumps: Vec<Stump>,
    /// Actual per-round normalizers; the training-error bound is their
    /// running product. Not part of the serialized model.
    #[serde(skip)]
    pub z_history: Vec<f64>,
}

impl StumpEnsembleModel {
    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(path, text).map_err(|source| Error::Io {
            path: path.to_owned(),
            source,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_owned(),
            source,
        })?;
        Ok(serde_json::from_str(&text)?)
    }
}

/// Equal-frequency bin edges from the sorted values; duplicates collapse,
/// so constant features get a single bin.
fn quantile_edges(values: &[f64], bins: usize) -> Vec<f64> {
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = sorted.len();
    let mut edges = Vec::with_capacity(bins + 1);
    edges.push(sorted[0]);
    for k in 1..bins {
        edges.push(sorted[k * n / bins]);
    }
    edges.push(sorted[n - 1]);
    edges.dedup();
    if edges.len() == 1 {
        // constant feature: one degenerate bin
        edges.push(edges[0] + 1.0);
    }
    edges
}

fn bin_of(edges: &[f64], x: f64) -> usize {
    edges[1..edges.len() - 1].partition_point(|&e| e <= x)
}

/// Trains a Real AdaBoost stump ensemble on labels in {+1, -1}.
pub fn train_real_adaboost(
    x: &FeatureMatrix,
    y: &[i8],
    params: &BoostParams,
) -> Result<StumpEnsembleModel> {
    let n = x.rows();
    let d = x.cols();
    if y.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "{} labels for {n} rows",
            y.len()
        )));
    }
    if params.rounds < 1 {
        return Err(Error::InvalidInput("rounds must be >= 1".into()));
    }
    if params.bins < 1 {
        return Err(Error::InvalidInput("bins must be >= 1".into()));
    }
    let pos = y.iter().filter(|&&l| l > 0).count();
    if pos == 0 || pos == n {
        return Err(Error::SingleClass);
    }
    for i in 0..n {
        if x.row(i).iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "non-finite feature value in row {i}"
            )));
        }
    }
    let epsilon = params.epsilon.unwrap_or(1.0 / (2.0 * n as f64));

    // Per-feature quantile edges and per-sample bin assignments, fixed for
    // the whole run.
    let mut edges_per_feature: Vec<Vec<f64>> = Vec::with_capacity(d);
    let mut bins_per_feature: Vec<Vec<u16>> = Vec::with_capacity(d);
    for j in 0..d {
        let col = x.column(j);
        let edges = quantile_edges(&col, params.bins);
        let assignments = col.iter().map(|&v| bin_of(&edges, v) as u16).collect();
        edges_per_feature.push(edges);
        bins_per_feature.push(assignments);
    }

    let mut dist = vec![1.0 / n as f64; n];
    let mut stumps = Vec::with_capacity(params.rounds);
    let mut z_history = Vec::with_capacity(params.rounds);
    let mut w_pos = Vec::new();
    let mut w_neg = Vec::new();

    for _round in 0..params.rounds {
        let mut best: Option<(f64, usize)> = None;
        for j in 0..d {
            let nbins = edges_per_feature[j].len() - 1;
            w_pos.clear();
            w_pos.resize(nbins, 0.0);
            w_neg.clear();
            w_neg.resize(nbins, 0.0);
            for i in 0..n {
                let b = bins_per_feature[j][i] as usize;
                if y[i] > 0 {
                    w_pos[b] += dist[i];
                } else {
                    w_neg[b] += dist[i];
                }
            }
            // unsmoothed selection criterion: splitting can only lower it,
            // so an uninformative partition is maximal
            let z: f64 = (0..nbins)
                .map(|b| 2.0 * (w_pos[b] * w_neg[b]).sqrt())
                .sum();
            if best.map_or(true, |(bz, _)| z < bz) {
                best = Some((z, j));
            }
        }
        let (_, j) = best.unwrap();

        let nbins = edges_per_feature[j].len() - 1;
        w_pos.clear();
        w_pos.resize(nbins, 0.0);
        w_neg.clear();
        w_neg.resize(nbins, 0.0);
        for i in 0..n {
            let b = bins_per_feature[j][i] as usize;
            if y[i] > 0 {
                w_pos[b] += dist[i];
            } else {
                w_neg[b] += dist[i];
            }
        }
        let outputs: Vec<f64> = (0..nbins)
            .map(|b| 0.5 * ((w_pos[b] + epsilon) / (w_neg[b] + epsilon)).ln())
            .collect();

        // reweight by the actual normalizer
        let mut z_actual = 0.0;
        for i in 0..n {
            let h = outputs[bins_per_feature[j][i] as usize];
            dist[i] *= (-f64::from(y[i]) * h).exp();
            z_actual += dist[i];
        }
        for w in &mut dist {
            *w /= z_actual;
        }
        z_history.push(z_actual);
        stumps.push(Stump {
            feature: j,
            name: x.component_names[j].clone(),
            edges: edges_per_feature[j].clone(),
            outputs,
        });
    }

    Ok(StumpEnsembleModel {
        version: 1,
        n_features: d,
        rounds: params.rounds,
        bins: params.bins,
        epsilon,
        seed: params.seed,
        stumps,
        z_history,
    })
}

/// Ensemble score: sum of the selected stumps' bin outputs.
pub fn predict_score(model: &StumpEnsembleModel, x: &[f64]) -> Result<f64> {
    if x.len() != model.n_features {
        return Err(Error::DimensionMismatch(format!(
            "{} features for a {}-feature model",
            x.len(),
            model.n_features
        )));
    }
    Ok(model.stumps.iter().map(|s| s.output(x[s.feature])).sum())
}

/// Label from the score sign; an exact zero predicts negative.
pub fn predict_label(model: &StumpEnsembleModel, x: &[f64]) -> Result<i8> {
    Ok(if predict_score(model, x)? > 0.0 { 1 } else { -1 })
}
