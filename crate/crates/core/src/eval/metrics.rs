//! Precision/recall/F1 with the harmful class as positive.

use serde::{Deserialize, Serialize};

use crate::corpus::Label;
use crate::error::{Error, Result};

/// Confusion counts and derived scores for one prediction run.
/// `Harmful` is the positive class; `f1_macro` averages the harmful-positive
/// and clean-positive F1 scores.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub tn: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1_positive: f64,
    pub f1_macro: f64,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

fn f1(precision: f64, recall: f64) -> f64 {
    if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    }
}

/// Score predictions against gold labels. Zero-denominator precision,
/// recall, or F1 is reported as 0 rather than an error, so a constant
/// predictor scores 0 instead of poisoning fold averages with NaN.
pub fn f_score(predictions: &[Label], golds: &[Label]) -> Result<MetricsReport> {
    if predictions.len() != golds.len() {
        return Err(Error::Param(format!(
            "{} predictions against {} gold labels",
            predictions.len(),
            golds.len()
        )));
    }
    let (mut tp, mut fp, mut fn_, mut tn) = (0usize, 0usize, 0usize, 0usize);
    for (p, g) in predictions.iter().zip(golds) {
        match (p.is_harmful(), g.is_harmful()) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, true) => fn_ += 1,
            (false, false) => tn += 1,
        }
    }
    let precision = ratio(tp, tp + fp);
    let recall = ratio(tp, tp + fn_);
    let f1_positive = f1(precision, recall);
    // clean as positive: its true positives are the harmful-side true negatives
    let f1_clean = f1(ratio(tn, tn + fn_), ratio(tn, tn + fp));
    Ok(MetricsReport {
        tp,
        fp,
        fn_,
        tn,
        precision,
        recall,
        f1_positive,
        f1_macro: (f1_positive + f1_clean) / 2.0,
    })
}

/// Mean and sample standard deviation (n - 1 denominator; 0 for n < 2).
pub(crate) fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (0.0, 0.0);
    }
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (values.len() - 1) as f64;
    (mean, var.sqrt())
}
