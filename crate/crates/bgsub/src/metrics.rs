//! Confusion-matrix construction, accuracy/precision, and histogram reports.
//!
//! A prediction is compared against a binary ground-truth mask; the shadow
//! label (127) counts as a background prediction because ground truth never
//! marks shadows as objects of interest.

use crate::error::{Error, Result};
use crate::frame::{Mask, LABEL_FOREGROUND, LABEL_SHADOW};

/// Pixel counts for one (prediction, ground truth) pair.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ConfusionMatrix {
    pub tp: u64,
    pub fp: u64,
    pub fn_: u64,
    pub tn: u64,
}

impl ConfusionMatrix {
    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.fn_ + self.tn
    }

    /// Ground-truth positives.
    pub fn positives(&self) -> u64 {
        self.tp + self.fn_
    }

    /// Ground-truth negatives.
    pub fn negatives(&self) -> u64 {
        self.fp + self.tn
    }
}

/// Counts per-pixel agreement between a prediction and a binary ground-truth
/// mask. The ground truth must contain only 0 and 255; a shadow label in it
/// is an error, while shadow in the prediction counts as background.
pub fn confusion(pred: &Mask, gt: &Mask) -> Result<ConfusionMatrix> {
    if pred.width() != gt.width() || pred.height() != gt.height() {
        return Err(Error::DimensionMismatch {
            expected_width: gt.width(),
            expected_height: gt.height(),
            actual_width: pred.width(),
            actual_height: pred.height(),
        });
    }
    let mut cm = ConfusionMatrix::default();
    for (i, (&p, &g)) in pred.data().iter().zip(gt.data()).enumerate() {
        if g == LABEL_SHADOW {
            return Err(Error::InvalidGroundTruthLabel {
                value: g,
                x: (i % gt.width() as usize) as u32,
                y: (i / gt.width() as usize) as u32,
            });
        }
        let predicted_fg = p == LABEL_FOREGROUND;
        let actual_fg = g == LABEL_FOREGROUND;
        match (predicted_fg, actual_fg) {
            (true, true) => cm.tp += 1,
            (true, false) => cm.fp += 1,
            (false, true) => cm.fn_ += 1,
            (false, false) => cm.tn += 1,
        }
    }
    Ok(cm)
}

/// Fraction of all pixels classified correctly: (tp + tn) / total.
pub fn accuracy(cm: &ConfusionMatrix) -> Result<f64> {
    let total = cm.total();
    if total == 0 {
        return Err(Error::EmptyConfusionMatrix);
    }
    Ok((cm.tp + cm.tn) as f64 / total as f64)
}

/// Fraction of predicted-foreground pixels that are truly foreground:
/// tp / (tp + fp). Distinctly undefined when nothing was predicted
/// foreground; callers must not coerce that case to a number.
pub fn precision(cm: &ConfusionMatrix) -> Result<f64> {
    let predicted = cm.tp + cm.fp;
    if predicted == 0 {
        return Err(Error::UndefinedPrecision);
    }
    Ok(cm.tp as f64 / predicted as f64)
}

/// Occurrence histogram over [0, 1] with a cumulative line.
#[derive(Debug, Clone, PartialEq)]
pub struct HistogramReport {
    /// `bin_count + 1` edges partitioning [0, 1] into equal-width bins.
    pub bin_edges: Vec<f64>,
    pub counts: Vec<u64>,
    /// Running totals; the last entry equals the number of input values.
    pub cumulative: Vec<u64>,
}

/// Bins values from [0, 1] into `bin_count` equal-width bins. The right edge
/// is inclusive only for the last bin, so 1.0 lands in the final bin.
pub fn histogram(values: &[f64], bin_count: usize) -> Result<HistogramReport> {
    if bin_count < 1 {
        return Err(Error::invalid_parameter("bin_count", "must be at least 1"));
    }
    let mut counts = vec![0u64; bin_count];
    for &v in values {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::ValueOutOfRange { value: v });
        }
        let bin = ((v * bin_count as f64).floor() as usize).min(bin_count - 1);
        counts[bin] += 1;
    }
    let mut cumulative = Vec::with_capacity(bin_count);
    let mut running = 0u64;
    for &c in &counts {
        running += c;
        cumulative.push(running);
    }
    let bin_edges = (0..=bin_count)
        .map(|i| i as f64 / bin_count as f64)
        .collect();
    Ok(HistogramReport {
        bin_edges,
        counts,
        cumulative,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frame::Mask;

    fn mask(w: u32, h: u32, data: &[u8]) -> Mask {
        Mask::new(w, h, data.to_vec()).unwrap()
    }

    #[test]
    fn confusion_enumerates_four_pixels() {
        let pred = mask(4, 1, &[255, 0, 255, 0]);
        let gt = mask(4, 1, &[255, 255, 0, 0]);
        let cm = confusion(&pred, &gt).unwrap();
        assert_eq!(
            cm,
            ConfusionMatrix {
                tp: 1,
                fn_: 1,
                fp: 1,
                tn: 1
            }
        );
    }

    #[test]
    fn confusion_identity_case() {
        let m = mask(3, 2, &[255; 6]);
        let cm = confusion(&m, &m).unwrap();
        assert_eq!(cm.tp, 6);
        assert_eq!(cm.fp + cm.fn_ + cm.tn, 0);
    }

    #[test]
    fn shadow_prediction_counts_as_background() {
        let pred = mask(2, 1, &[127, 255]);
        let gt = mask(2, 1, &[255, 255]);
        let cm = confusion(&pred, &gt).unwrap();
        assert_eq!(
            cm,
            ConfusionMatrix {
                tp: 1,
                fn_: 1,
                fp: 0,
                tn: 0
            }
        );
    }

    #[test]
    fn shadow_in_ground_truth_is_rejected_with_coordinate() {
        let pred = mask(2, 2, &[0; 4]);
        let gt = mask(2, 2, &[0, 0, 0, 127]);
        match confusion(&pred, &gt).unwrap_err() {
            Error::InvalidGroundTruthLabel { value, x, y } => {
                assert_eq!((value, x, y), (127, 1, 1));
            }
            other => panic!("unexpected error: {other}"),
        }
    }

    #[test]
    fn confusion_rejects_dimension_mismatch() {
        let pred = mask(2, 1, &[0, 0]);
        let gt = mask(1, 2, &[0, 0]);
        assert!(matches!(
            confusion(&pred, &gt).unwrap_err(),
            Error::DimensionMismatch { .. }
        ));
    }

    #[test]
    fn accuracy_examples() {
        let cm = ConfusionMatrix {
            tp: 98,
            tn: 880,
            fn_: 2,
            fp: 20,
        };
        assert!((accuracy(&cm).unwrap() - 0.978).abs() < 1e-12);

        let perfect = ConfusionMatrix {
            tp: 10,
            tn: 90,
            ..Default::default()
        };
        assert_eq!(accuracy(&perfect).unwrap(), 1.0);

        let all_wrong = ConfusionMatrix {
            fp: 4,
            fn_: 6,
            ..Default::default()
        };
        assert_eq!(accuracy(&all_wrong).unwrap(), 0.0);

        assert!(matches!(
            accuracy(&ConfusionMatrix::default()).unwrap_err(),
            Error::EmptyConfusionMatrix
        ));
    }

    #[test]
    fn precision_examples() {
        let cm = ConfusionMatrix {
            tp: 30,
            fp: 70,
            ..Default::default()
        };
        assert!((precision(&cm).unwrap() - 0.30).abs() < 1e-12);

        let clean = ConfusionMatrix {
            tp: 50,
            ..Default::default()
        };
        assert_eq!(precision(&clean).unwrap(), 1.0);

        let none = ConfusionMatrix {
            tn: 5,
            fn_: 5,
            ..Default::default()
        };
        assert!(matches!(
            precision(&none).unwrap_err(),
            Error::UndefinedPrecision
        ));
    }

    #[test]
    fn swapping_pred_and_gt_transposes_fp_and_fn() {
        let a = mask(3, 3, &[255, 0, 255, 0, 0, 255, 0, 255, 0]);
        let b = mask(3, 3, &[0, 0, 255, 255, 0, 0, 0, 255, 255]);
        let ab = confusion(&a, &b).unwrap();
        let ba = confusion(&b, &a).unwrap();
        assert_eq!(ab.tp, ba.tp);
        assert_eq!(ab.tn, ba.tn);
        assert_eq!(ab.fp, ba.fn_);
        assert_eq!(ab.fn_, ba.fp);
        assert_eq!(accuracy(&ab).unwrap(), accuracy(&ba).unwrap());
    }

    #[test]
    fn histogram_examples() {
        let report = histogram(&[0.98, 0.99, 0.80], 10).unwrap();
        assert_eq!(report.counts[8], 1);
        assert_eq!(report.counts[9], 2);
        assert_eq!(report.counts.iter().sum::<u64>(), 3);
        assert_eq!(*report.cumulative.last().unwrap(), 3);

        let empty = histogram(&[], 10).unwrap();
        assert!(empty.counts.iter().all(|&c| c == 0));

        let top = histogram(&[1.0], 4).unwrap();
        assert_eq!(top.counts[3], 1);
    }

    #[test]
    fn histogram_rejects_out_of_range_values() {
        assert!(matches!(
            histogram(&[0.5, 1.2], 10).unwrap_err(),
            Error::ValueOutOfRange { .. }
        ));
        assert!(matches!(
            histogram(&[-0.1], 10).unwrap_err(),
            Error::ValueOutOfRange { .. }
        ));
        assert!(histogram(&[0.5], 0).is_err());
    }

    #[test]
    fn cumulative_is_nondecreasing_and_ends_at_total() {
        let values: Vec<f64> = (0..57).map(|i| (i as f64 * 0.017) % 1.0).collect();
        let report = histogram(&values, 10).unwrap();
        let mut prev = 0;
        for &c in &report.cumulative {
            assert!(c >= prev);
            prev = c;
        }
        assert_eq!(prev, values.len() as u64);
    }

    /// Brute-force double loop kept independent of `confusion`.
    fn confusion_by_hand(pred: &Mask, gt: &Mask) -> ConfusionMatrix {
        let mut cm = ConfusionMatrix::default();
        for y in 0..gt.height() {
            for x in 0..gt.width() {
                let p = pred.get(x, y) == 255;
                let g = gt.get(x, y) == 255;
                if p && g {
                    cm.tp += 1;
                } else if p && !g {
                    cm.fp += 1;
                } else if !p && g {
                    cm.fn_ += 1;
                } else {
                    cm.tn += 1;
                }
            }
        }
        cm
    }

    #[test]
    fn confusion_matches_brute_force_on_random_masks() {
        let mut state = 0x3aa5_u64;
        let mut next = move || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            state >> 33
        };
        for _ in 0..50 {
            let w = (next() % 64 + 1) as u32;
            let h = (next() % 64 + 1) as u32;
            let n = (w * h) as usize;
            let pred_data: Vec<u8> = (0..n)
                .map(|_| match next() % 3 {
                    0 => 0,
                    1 => 127,
                    _ => 255,
                })
                .collect();
            let gt_data: Vec<u8> = (0..n).map(|_| if next() % 2 == 0 { 0 } else { 255 }).collect();
            let pred = Mask::new(w, h, pred_data).unwrap();
            let gt = Mask::new(w, h, gt_data).unwrap();
            assert_eq!(confusion(&pred, &gt).unwrap(), confusion_by_hand(&pred, &gt));
        }
    }
}
