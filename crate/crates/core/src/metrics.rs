//! Binary classification metrics with likely-defective as the positive
//! class. Unpredictable labels on either side are excluded and counted.

use serde::{Deserialize, Serialize};

use crate::defect::DefectLabel;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Metrics {
    /// Pairs with a binary label on both sides.
    pub evaluated: usize,
    pub excluded: usize,
    pub true_positives: usize,
    pub false_positives: usize,
    pub true_negatives: usize,
    pub false_negatives: usize,
    pub accuracy: f64,
    /// `None` when nothing was predicted positive.
    pub precision: Option<f64>,
    /// `None` when there are no actual positives.
    pub recall: Option<f64>,
    /// `None` when precision or recall is undefined, or both are zero.
    pub f1: Option<f64>,
}

/// Pairs are `(predicted, actual)`.
pub fn compute_metrics(pairs: &[(DefectLabel, DefectLabel)]) -> Result<Metrics> {
    let (mut tp, mut fp, mut tn, mut fn_, mut excluded) = (0, 0, 0, 0, 0);
    for &(pred, actual) in pairs {
        match (pred, actual) {
            (DefectLabel::Unpredictable, _) | (_, DefectLabel::Unpredictable) => excluded += 1,
            (DefectLabel::LikelyDefective, DefectLabel::LikelyDefective) => tp += 1,
            (DefectLabel::LikelyDefective, _) => fp += 1,
            (_, DefectLabel::LikelyDefective) => fn_ += 1,
            _ => tn += 1,
        }
    }
    let evaluated = tp + fp + tn + fn_;
    if evaluated == 0 {
        return Err(Error::Config(format!(
            "no binary predictions to evaluate ({excluded} unpredictable excluded)"
        )));
    }
    let ratio = |num: usize, den: usize| (den > 0).then(|| num as f64 / den as f64);
    let precision = ratio(tp, tp + fp);
    let recall = ratio(tp, tp + fn_);
    let f1 = match (precision, recall) {
        (Some(p), Some(r)) if p + r > 0.0 => Some(2.0 * p * r / (p + r)),
        _ => None,
    };
    Ok(Metrics {
        evaluated,
        excluded,
        true_positives: tp,
        false_positives: fp,
        true_negatives: tn,
        false_negatives: fn_,
        accuracy: (tp + tn) as f64 / evaluated as f64,
        precision,
        recall,
        f1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use DefectLabel::*;

    #[test]
    fn all_correct() {
        let m = compute_metrics(&[
            (LikelyDefective, LikelyDefective),
            (UnlikelyDefective, UnlikelyDefective),
        ])
        .unwrap();
        assert_eq!(m.accuracy, 1.0);
        assert_eq!(m.f1, Some(1.0));
    }

    #[test]
    fn two_thirds() {
        let mut pairs = vec![(LikelyDefective, LikelyDefective); 2];
        pairs.push((LikelyDefective, UnlikelyDefective));
        pairs.push((UnlikelyDefective, LikelyDefective));
        let m = compute_metrics(&pairs).unwrap();
        assert!((m.precision.unwrap() - 2.0 / 3.0).abs() < 1e-12);
        assert!((m.recall.unwrap() - 2.0 / 3.0).abs() < 1e-12);
        assert!((m.f1.unwrap() - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn no_positive_predictions() {
        let m = compute_metrics(&[
            (UnlikelyDefective, LikelyDefective),
            (Unpredictable, LikelyDefective),
        ])
        .unwrap();
        assert_eq!(m.precision, None);
        assert_eq!(m.f1, None);
        assert_eq!(m.excluded, 1);
        assert!(compute_metrics(&[]).is_err());
    }
}
