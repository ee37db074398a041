//! k-fold cross-validation, confusion counting, and precision/recall/F.

use crate::adaboost::{self, BoostParams};
use crate::error::{Error, Result};
use crate::matrix::FeatureMatrix;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Confusion counts are reals so that cross-validation averages (e.g.
/// 516.8) are representable.
#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: f64,
    pub fp: f64,
    pub tn: f64,
    #[serde(rename = "fn")]
    pub fn_: f64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Metrics {
    pub precision: f64,
    pub recall: f64,
    pub f_measure: f64,
}

/// Precision, recall, and the beta-weighted harmonic mean. Degenerate
/// denominators yield 0.
pub fn metrics(c: &ConfusionCounts, beta: f64) -> Result<Metrics> {
    if c.tp < 0.0 || c.fp < 0.0 || c.tn < 0.0 || c.fn_ < 0.0 {
        return Err(Error::InvalidInput("negative confusion counts".into()));
    }
    let precision = if c.tp + c.fp > 0.0 {
        c.tp / (c.tp + c.fp)
    } else {
        0.0
    };
    let recall = if c.tp + c.fn_ > 0.0 {
        c.tp / (c.tp + c.fn_)
    } else {
        0.0
    };
    let b2 = beta * beta;
    let denom = b2 * precision + recall;
    let f_measure = if denom > 0.0 {
        (b2 + 1.0) * precision * recall / denom
    } else {
        0.0
    };
    Ok(Metrics {
        precision,
        recall,
        f_measure,
    })
}

/// Stratified k-fold split: shuffles each class with the seeded generator
/// and deals round-robin, so each fold's positive count is within 1 of
/// every other fold's.
pub fn kfold_split(labels: &[i8], k: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if k < 2 {
        return Err(Error::InvalidInput("k must be >= 2".into()));
    }
    let mut pos: Vec<usize> = Vec::new();
    let mut neg: Vec<usize> = Vec::new();
    for (i, &l) in labels.iter().enumerate() {
        if l > 0 {
            pos.push(i);
        } else {
            neg.push(i);
        }
    }
    if pos.len() < k || neg.len() < k {
        return Err(Error::InvalidInput(format!(
            "each class needs >= {k} members ({} positive, {} negative)",
            pos.len(),
            neg.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    pos.shuffle(&mut rng);
    neg.shuffle(&mut rng);
    let mut folds = vec![Vec::new(); k];
    for (i, idx) in pos.into_iter().chain(neg).enumerate() {
        folds[i % k].push(idx);
    }
    for fold in &mut folds {
        fold.sort_unstable();
    }
    Ok(folds)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FoldResult {
    pub counts: ConfusionCounts,
    pub precision: f64,
    pub recall: f64,
    pub f_measure: f64,
}

/// Per-fold and averaged detection results.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DetectionReport {
    pub folds: Vec<FoldResult>,
    pub mean_counts: ConfusionCounts,
    pub mean_precision: f64,
    pub mean_recall: f64,
    pub mean_f_measure: f64,
    pub config: serde_json::Value,
}

impl DetectionReport {
    pub fn save(&self, path: &std::path::Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(path, text).map_err(|source| Error::Io {
            path: path.to_owned(),
            source,
        })
    }
}

/// Stratified subsample of `indices` keeping `fraction` of each class.
fn subsample(
    indices: &[usize],
    labels: &[i8],
    fraction: f64,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<usize>> {
    if fraction >= 1.0 {
        return Ok(indices.to_vec());
    }
    let mut out = Vec::new();
    for target in [1i8, -1i8] {
        let mut class: Vec<usize> = indices
            .iter()
            .copied()
            .filter(|&i| (labels[i] > 0) == (target > 0))
            .collect();
        let keep = (fraction * class.len() as f64).round() as usize;
        if keep == 0 {
            return Err(Error::InvalidInput(format!(
                "subsample fraction {fraction} eliminates the {} class",
                if target > 0 { "positive" } else { "negative" }
            )));
        }
        class.shuffle(rng);
        class.truncate(keep);
        out.extend(class);
    }
    out.sort_unstable();
    Ok(out)
}

pub fn confusion_from_predictions(y_true: &[i8], y_pred: &[i8]) -> ConfusionCounts {
    let mut c = ConfusionCounts::default();
    for (&t, &p) in y_true.iter().zip(y_pred) {
        match (t > 0, p > 0) {
            (true, true) => c.tp += 1.0,
            (false, true) => c.fp += 1.0,
            (false, false) => c.tn += 1.0,
            (true, false) => c.fn_ += 1.0,
        }
    }
    c
}

/// For each fold: subsample the training portion, train Real AdaBoost,
/// evaluate on the held-out fold.
pub fn cross_validate(
    x: &FeatureMatrix,
    y: &[i8],
    k: usize,
    train_fraction: f64,
    seed: u64,
    classifier: &BoostParams,
) -> Result<DetectionReport> {
    if !(0.0..=1.0).contains(&train_fraction) || train_fraction <= 0.0 {
        return Err(Error::InvalidInput(
            "train_fraction must be in (0, 1]".into(),
        ));
    }
    let folds = kfold_split(y, k, seed)?;
    let mut results = Vec::with_capacity(k);
    for (f, fold) in folds.iter().enumerate() {
        let in_fold: Vec<bool> = {
            let mut v = vec![false; y.len()];
            for &i in fold {
                v[i] = true;
            }
            v
        };
        let train_all: Vec<usize> = (0..y.len()).filter(|&i| !in_fold[i]).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (f as u64).wrapping_mul(0x9E3779B97F4A7C15));
        let train = subsample(&train_all, y, train_fraction, &mut rng)?;

        let train_rows: Vec<Vec<f64>> = train.iter().map(|&i| x.row(i).to_vec()).collect();
        let train_y: Vec<i8> = train.iter().map(|&i| y[i]).collect();
        let train_x = FeatureMatrix::from_rows(x.component_names.clone(), train_rows, None)?;
        let model = adaboost::train_real_adaboost(&train_x, &train_y, classifier)?;

        let test_y: Vec<i8> = fold.iter().map(|&i| y[i]).collect();
        let pred: Vec<i8> = fold
            .iter()
            .map(|&i| adaboost::predict_label(&model, x.row(i)))
            .collect::<Result<_>>()?;
        let counts = confusion_from_predictions(&test_y, &pred);
        let m = metrics(&counts, 1.0)?;
        results.push(FoldResult {
            counts,
            precision: m.precision,
            recall: m.recall,
            f_measure: m.f_measure,
        });
    }
    let kf = k as f64;
    let mean_counts = ConfusionCounts {
        tp: results.iter().map(|r| r.counts.tp).sum::<f64>() / kf,
        fp: results.iter().map(|r| r.counts.fp).sum::<f64>() / kf,
        tn: results.iter().map(|r| r.counts.tn).sum::<f64>() / kf,
        fn_: results.iter().map(|r| r.counts.fn_).sum::<f64>() / kf,
    };
    let report = DetectionReport {
        mean_precision: results.iter().map(|r| r.precision).sum::<f64>() / kf,
        mean_recall: results.iter().map(|r| r.recall).sum::<f64>() / kf,
        mean_f_measure: results.iter().map(|r| r.f_measure).sum::<f64>() / kf,
        mean_counts,
        folds: results,
        config: serde_json::json!({
            "k": k,
            "train_fraction": train_fraction,
            "seed": seed,
            "classifier": classifier,
        }),
    };
    Ok(report)
}
