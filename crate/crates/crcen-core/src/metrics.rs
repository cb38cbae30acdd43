//! Confusion-matrix evaluation with the minority class (label 1) as
//! positive, plus the expense ratio quantifying the FP cost of recovering
//! one FN between two operating points.
//!
//! Degenerate ratios follow a fixed convention: any metric whose denominator
//! is zero reports 0. A classifier that never predicts positive therefore
//! gets precision 0 and F1 0.

use alloc::format;

use crate::error::{Error, Result};
use crate::math;

/// Counts at a fixed decision threshold; class 1 is positive.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ConfusionMatrix {
    pub tp: usize,
    pub fp: usize,
    #[cfg_attr(feature = "serde", serde(rename = "fn"))]
    pub fn_: usize,
    pub tn: usize,
}

impl ConfusionMatrix {
    pub fn total(&self) -> usize {
        self.tp + self.fp + self.fn_ + self.tn
    }
}

/// Tallies predictions against ground truth. Labels must be 0/1.
pub fn confusion(labels_true: &[u8], labels_pred: &[u8]) -> Result<ConfusionMatrix> {
    if labels_true.len() != labels_pred.len() {
        return Err(Error::Data(format!(
            "{} true labels vs {} predictions",
            labels_true.len(),
            labels_pred.len()
        )));
    }
    let mut cm = ConfusionMatrix {
        tp: 0,
        fp: 0,
        fn_: 0,
        tn: 0,
    };
    for (i, (&t, &p)) in labels_true.iter().zip(labels_pred).enumerate() {
        if t > 1 || p > 1 {
            return Err(Error::Data(format!("label outside {{0, 1}} at index {i}")));
        }
        match (t, p) {
            (1, 1) => cm.tp += 1,
            (0, 1) => cm.fp += 1,
            (1, 0) => cm.fn_ += 1,
            (0, 0) => cm.tn += 1,
            _ => unreachable!(),
        }
    }
    Ok(cm)
}

/// Ratio metrics derived from a confusion matrix, each in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MetricReport {
    pub precision: f64,
    pub recall: f64,
    pub specificity: f64,
    pub f1: f64,
    pub gmean: f64,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Precision, recall, specificity, F1, and G-mean. 0/0 denominators yield 0.
pub fn metric_report(cm: &ConfusionMatrix) -> MetricReport {
    let precision = ratio(cm.tp, cm.tp + cm.fp);
    let recall = ratio(cm.tp, cm.tp + cm.fn_);
    let specificity = ratio(cm.tn, cm.fp + cm.tn);
    let f1 = if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    };
    let gmean = math::sqrt(recall * specificity);
    MetricReport {
        precision,
        recall,
        specificity,
        f1,
        gmean,
    }
}

/// Change in false positives per false negative recovered between two
/// operating points: `(next.fp - prev.fp) / (prev.fn - next.fn)`.
///
/// `None` when the FN counts are equal (the ratio is undefined). A negative
/// value means FNs increased; it is reported with its sign.
pub fn expense(cm_prev: &ConfusionMatrix, cm_next: &ConfusionMatrix) -> Option<f64> {
    if cm_prev.fn_ == cm_next.fn_ {
        return None;
    }
    let dfp = cm_next.fp as f64 - cm_prev.fp as f64;
    let dfn = cm_prev.fn_ as f64 - cm_next.fn_ as f64;
    Some(dfp / dfn)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::RngStream;

    #[test]
    fn hand_counted_confusion() {
        let cm = confusion(&[1, 1, 0, 0], &[1, 0, 1, 0]).unwrap();
        assert_eq!(
            cm,
            ConfusionMatrix {
                tp: 1,
                fp: 1,
                fn_: 1,
                tn: 1
            }
        );
        assert_eq!(cm.total(), 4);
    }

    #[test]
    fn perfect_predictions_have_no_errors() {
        let y = [1u8, 0, 1, 0, 0];
        let cm = confusion(&y, &y).unwrap();
        assert_eq!(cm.fp, 0);
        assert_eq!(cm.fn_, 0);
        let m = metric_report(&cm);
        assert_eq!(
            (m.precision, m.recall, m.specificity, m.f1, m.gmean),
            (1.0, 1.0, 1.0, 1.0, 1.0)
        );
    }

    #[test]
    fn confusion_matches_brute_force_on_random_labels() {
        let mut rng = RngStream::new(44);
        let t: Vec<u8> = (0..1000).map(|_| (rng.next_below(2)) as u8).collect();
        let p: Vec<u8> = (0..1000).map(|_| (rng.next_below(2)) as u8).collect();
        let cm = confusion(&t, &p).unwrap();
        let count = |tv: u8, pv: u8| t.iter().zip(&p).filter(|(a, b)| **a == tv && **b == pv).count();
        assert_eq!(cm.tp, count(1, 1));
        assert_eq!(cm.fp, count(0, 1));
        assert_eq!(cm.fn_, count(1, 0));
        assert_eq!(cm.tn, count(0, 0));
    }

    #[test]
    fn confusion_rejects_bad_labels() {
        assert!(matches!(confusion(&[2], &[0]), Err(Error::Data(_))));
        assert!(matches!(confusion(&[0, 1], &[0]), Err(Error::Data(_))));
    }

    #[test]
    fn report_matches_hand_arithmetic() {
        let cm = ConfusionMatrix {
            tp: 5,
            fp: 5,
            fn_: 5,
            tn: 85,
        };
        let m = metric_report(&cm);
        assert_eq!(m.precision, 0.5);
        assert_eq!(m.recall, 0.5);
        assert_eq!(m.f1, 0.5);
        assert_eq!(m.specificity, 85.0 / 90.0);
        let expected_gmean = (0.5f64 * 85.0 / 90.0).sqrt();
        assert!((m.gmean - expected_gmean).abs() < 1e-15);
        assert!((m.gmean - 0.6872).abs() < 5e-5);
    }

    #[test]
    fn no_positive_predictions_follow_the_zero_convention() {
        let cm = ConfusionMatrix {
            tp: 0,
            fp: 0,
            fn_: 7,
            tn: 93,
        };
        let m = metric_report(&cm);
        assert_eq!(m.precision, 0.0);
        assert_eq!(m.f1, 0.0);
        assert_eq!(m.recall, 0.0);
        assert_eq!(m.gmean, 0.0);
    }

    #[test]
    fn all_metrics_stay_in_unit_interval() {
        let mut rng = RngStream::new(4);
        for _ in 0..200 {
            let cm = ConfusionMatrix {
                tp: rng.next_below(50) as usize,
                fp: rng.next_below(50) as usize,
                fn_: rng.next_below(50) as usize,
                tn: rng.next_below(50) as usize,
            };
            if cm.total() == 0 {
                continue;
            }
            let m = metric_report(&cm);
            for v in [m.precision, m.recall, m.specificity, m.f1, m.gmean] {
                assert!((0.0..=1.0).contains(&v), "{m:?}");
            }
        }
    }

    #[test]
    fn worked_expense_example() {
        let prev = ConfusionMatrix {
            tp: 0,
            fp: 158,
            fn_: 32,
            tn: 0,
        };
        let next = ConfusionMatrix {
            tp: 0,
            fp: 263,
            fn_: 13,
            tn: 0,
        };
        let e = expense(&prev, &next).unwrap();
        assert!((e - 105.0 / 19.0).abs() < 1e-12);
        assert_eq!(
            alloc::format!("{:.2}", e),
            "5.53"
        );
    }

    #[test]
    fn expense_edge_cases() {
        let a = ConfusionMatrix {
            tp: 1,
            fp: 10,
            fn_: 20,
            tn: 30,
        };
        let b = ConfusionMatrix {
            tp: 1,
            fp: 10,
            fn_: 15,
            tn: 30,
        };
        // FP unchanged: zero expense.
        assert_eq!(expense(&a, &b), Some(0.0));
        // FN unchanged: undefined.
        assert_eq!(expense(&a, &a), None);
    }

    #[test]
    fn expense_is_invariant_under_argument_swap() {
        // Both deltas flip sign, so the ratio is unchanged.
        let a = ConfusionMatrix {
            tp: 0,
            fp: 158,
            fn_: 32,
            tn: 0,
        };
        let b = ConfusionMatrix {
            tp: 0,
            fp: 263,
            fn_: 13,
            tn: 0,
        };
        assert_eq!(expense(&a, &b), expense(&b, &a));
    }
}
