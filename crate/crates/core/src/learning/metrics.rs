use serde::{Deserialize, Serialize};

use super::FittedModel;
use crate::encoding::EncodedMatrix;
use crate::error::{Error, Result};

/// Binary classification metrics with accept as the positive class.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub tn: usize,
}

impl Metrics {
    /// Ratios with a zero denominator are reported as 0.
    pub fn from_confusion(tp: usize, fp: usize, fn_: usize, tn: usize) -> Metrics {
        let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
        let precision = ratio(tp, tp + fp);
        let recall = ratio(tp, tp + fn_);
        let f1 = if precision + recall > 0.0 { 2.0 * precision * recall / (precision + recall) } else { 0.0 };
        Metrics { accuracy: ratio(tp + tn, tp + fp + fn_ + tn), precision, recall, f1, tp, fp, fn_, tn }
    }

    pub fn from_labels(predicted: &[u8], actual: &[u8]) -> Result<Metrics> {
        if actual.is_empty() {
            return Err(Error::Eval("no labels to evaluate".into()));
        }
        if predicted.len() != actual.len() {
            return Err(Error::Eval(format!("{} predictions for {} labels", predicted.len(), actual.len())));
        }
        let (mut tp, mut fp, mut fn_, mut tn) = (0, 0, 0, 0);
        for (&p, &a) in predicted.iter().zip(actual) {
            match (p, a) {
                (1, 1) => tp += 1,
                (1, _) => fp += 1,
                (_, 1) => fn_ += 1,
                _ => tn += 1,
            }
        }
        Ok(Metrics::from_confusion(tp, fp, fn_, tn))
    }
}

pub fn evaluate(model: &FittedModel, x: &EncodedMatrix, y: &[u8]) -> Result<Metrics> {
    if y.is_empty() {
        return Err(Error::Eval("no labels to evaluate".into()));
    }
    Metrics::from_labels(&model.predict_labels(x)?, y)
}
