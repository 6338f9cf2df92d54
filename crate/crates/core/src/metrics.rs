//! Dice / IoU evaluation and error maps.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::{is_raster_file, read_mask};
use crate::raster::{Image, LabelMap};
use crate::scalar::Scalar;

/// Smoothing term added to numerator and denominator of both scores.
pub const SMOOTH: f64 = 1e-7;
pub const DEFAULT_METRIC_THRESHOLD: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Overlap {
    pub intersection: u64,
    pub predicted: u64,
    pub actual: u64,
}

impl Overlap {
    pub fn dice(&self) -> f64 {
        (2.0 * self.intersection as f64 + SMOOTH) / ((self.predicted + self.actual) as f64 + SMOOTH)
    }

    pub fn iou(&self) -> f64 {
        let union = self.predicted + self.actual - self.intersection;
        (self.intersection as f64 + SMOOTH) / (union as f64 + SMOOTH)
    }
}

fn check_same_dims<S: Scalar>(pred: &LabelMap<S>, gt: &LabelMap<S>) -> Result<()> {
    if pred.dims() != gt.dims() {
        return Err(Error::ShapeMismatch {
            expected: gt.dims(),
            found: pred.dims(),
        });
    }
    Ok(())
}

pub fn overlap<S: Scalar>(pred: &LabelMap<S>, gt: &LabelMap<S>, threshold: S) -> Result<Overlap> {
    check_same_dims(pred, gt)?;
    let mut counts = Overlap::default();
    for (&p, &g) in pred.data().iter().zip(gt.data()) {
        let (p, g) = (p > threshold, g > threshold);
        counts.predicted += u64::from(p);
        counts.actual += u64::from(g);
        counts.intersection += u64::from(p && g);
    }
    Ok(counts)
}

/// `(dice, iou)` of the masks binarized at `threshold`.
pub fn dice_iou<S: Scalar>(pred: &LabelMap<S>, gt: &LabelMap<S>, threshold: S) -> Result<(f64, f64)> {
    let o = overlap(pred, gt, threshold)?;
    Ok((o.dice(), o.iou()))
}

/// White where the binarized masks agree, black where they differ.
pub fn error_map<S: Scalar>(pred: &LabelMap<S>, gt: &LabelMap<S>, threshold: S) -> Result<Image<S>> {
    check_same_dims(pred, gt)?;
    Image::from_fn(gt.height(), gt.width(), |r, c| {
        let agree = (pred.get(r, c) > threshold) == (gt.get(r, c) > threshold);
        [if agree { S::one() } else { S::zero() }; 3]
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleScore {
    pub id: String,
    pub dice: f64,
    pub iou: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub per_sample: Vec<SampleScore>,
    pub mean_dice: f64,
    pub mean_iou: f64,
    pub count: usize,
    /// Ground-truth ids without a prediction.
    #[serde(default)]
    pub missing_predictions: Vec<String>,
}

impl MetricsReport {
    pub fn from_scores(per_sample: Vec<SampleScore>, missing_predictions: Vec<String>) -> Result<Self> {
        if per_sample.is_empty() {
            return Err(Error::EmptyEvaluation);
        }
        let count = per_sample.len();
        let mean_dice = per_sample.iter().map(|s| s.dice).sum::<f64>() / count as f64;
        let mean_iou = per_sample.iter().map(|s| s.iou).sum::<f64>() / count as f64;
        Ok(Self {
            per_sample,
            mean_dice,
            mean_iou,
            count,
            missing_predictions,
        })
    }

    /// Fixed-width table with percentages to two decimals.
    pub fn to_table(&self) -> String {
        let width = self
            .per_sample
            .iter()
            .map(|s| s.id.len())
            .chain(std::iter::once("mean".len()))
            .max()
            .unwrap_or(4);
        let mut out = format!("{:<width$}  {:>9}  {:>9}\n", "id", "Dice(%)", "IoU(%)");
        for s in &self.per_sample {
            out.push_str(&format!(
                "{:<width$}  {:>9.2}  {:>9.2}\n",
                s.id,
                s.dice * 100.0,
                s.iou * 100.0
            ));
        }
        out.push_str(&format!(
            "{:<width$}  {:>9.2}  {:>9.2}\n",
            "mean",
            self.mean_dice * 100.0,
            self.mean_iou * 100.0
        ));
        out
    }
}

/// Raster files of a directory keyed by stem (first path in byte order wins).
pub fn rasters_in(dir: &Path) -> Result<BTreeMap<String, PathBuf>> {
    let mut paths = Vec::new();
    for entry in std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        if path.is_file() && is_raster_file(&path) {
            paths.push(path);
        }
    }
    paths.sort();
    let mut map = BTreeMap::new();
    for p in paths {
        if let Some(stem) = p.file_stem().and_then(|s| s.to_str()) {
            map.entry(stem.to_owned()).or_insert(p);
        }
    }
    Ok(map)
}

/// Stems present in both directories, with their `(pred, gt)` paths, plus the
/// ground-truth stems lacking a prediction.
pub fn match_stems(pred_dir: &Path, gt_dir: &Path) -> Result<(Vec<(String, PathBuf, PathBuf)>, Vec<String>)> {
    let mut preds = rasters_in(pred_dir)?;
    let gts = rasters_in(gt_dir)?;
    let mut matched = Vec::new();
    let mut missing = Vec::new();
    for (id, gt_path) in gts {
        match preds.remove(&id) {
            Some(pred_path) => matched.push((id, pred_path, gt_path)),
            None => missing.push(id),
        }
    }
    Ok((matched, missing))
}

pub fn evaluate_dirs(pred_dir: &Path, gt_dir: &Path, threshold: f64) -> Result<MetricsReport> {
    let (matched, missing) = match_stems(pred_dir, gt_dir)?;
    let mut scores = Vec::with_capacity(matched.len());
    for (id, pred_path, gt_path) in matched {
        let pred: LabelMap<f64> = read_mask(&pred_path)?;
        let gt: LabelMap<f64> = read_mask(&gt_path)?;
        let (dice, iou) = dice_iou(&pred, &gt, threshold)?;
        scores.push(SampleScore { id, dice, iou });
    }
    MetricsReport::from_scores(scores, missing)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn mask(h: usize, w: usize, f: impl Fn(usize, usize) -> bool) -> LabelMap<f64> {
        LabelMap::from_fn(h, w, |r, c| if f(r, c) { 1.0 } else { 0.0 }).unwrap()
    }

    #[test]
    fn identical_masks_score_one() {
        let m = mask(10, 10, |r, c| r < 4 && c > 2);
        let (d, i) = dice_iou(&m, &m, 0.5).unwrap();
        assert!((d - 1.0).abs() < 1e-6 && (i - 1.0).abs() < 1e-6);
    }

    #[test]
    fn disjoint_masks_score_zero() {
        let a = mask(10, 10, |r, _| r < 5);
        let b = mask(10, 10, |r, _| r >= 5);
        let (d, i) = dice_iou(&a, &b, 0.5).unwrap();
        assert!(d < 1e-6 && i < 1e-6);
    }

    #[test]
    fn half_overlap_counts() {
        // 100 predicted, 100 actual, 50 shared.
        let pred = mask(20, 20, |r, c| r < 10 && c < 10);
        let gt = mask(20, 20, |r, c| r < 10 && (5..15).contains(&c));
        let o = overlap(&pred, &gt, 0.5).unwrap();
        assert_eq!((o.predicted, o.actual, o.intersection), (100, 100, 50));
        let (d, i) = (o.dice(), o.iou());
        assert!((d - 0.5).abs() < 1e-6);
        assert!((i - 1.0 / 3.0).abs() < 1e-6);
    }

    #[test]
    fn both_empty_is_one() {
        let z = mask(4, 4, |_, _| false);
        let (d, i) = dice_iou(&z, &z, 0.5).unwrap();
        assert_eq!((d, i), (1.0, 1.0));
    }

    #[test]
    fn shape_mismatch() {
        assert!(dice_iou(&mask(3, 3, |_, _| true), &mask(3, 4, |_, _| true), 0.5).is_err());
        assert!(error_map(&mask(3, 3, |_, _| true), &mask(4, 3, |_, _| true), 0.5).is_err());
    }

    #[test]
    fn error_map_cases() {
        let gt = mask(5, 6, |r, c| (r + c) % 3 == 0);
        let same = error_map(&gt, &gt, 0.5).unwrap();
        assert!(same.data().iter().all(|&v| v == 1.0));
        let inv = mask(5, 6, |r, c| (r + c) % 3 != 0);
        assert!(error_map(&inv, &gt, 0.5).unwrap().data().iter().all(|&v| v == 0.0));
        let mut one_off = gt.clone();
        one_off.set(2, 4, 1.0 - one_off.get(2, 4));
        let em = error_map(&one_off, &gt, 0.5).unwrap();
        let black: Vec<_> = (0..5)
            .flat_map(|r| (0..6).map(move |c| (r, c)))
            .filter(|&(r, c)| em.pixel(r, c)[0] == 0.0)
            .collect();
        assert_eq!(black, vec![(2, 4)]);
    }

    #[test]
    fn mean_of_scores() {
        let report = MetricsReport::from_scores(
            vec![
                SampleScore { id: "a".into(), dice: 1.0, iou: 1.0 },
                SampleScore { id: "b".into(), dice: 0.5, iou: 1.0 / 3.0 },
            ],
            vec![],
        )
        .unwrap();
        assert_eq!(report.mean_dice, 0.75);
        assert_eq!(report.count, 2);
        let json = serde_json::to_string(&report).unwrap();
        let back: MetricsReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back, report);
        assert!(report.to_table().contains("75.00"));
    }

    #[test]
    fn empty_report_is_error() {
        assert!(matches!(MetricsReport::from_scores(vec![], vec![]), Err(Error::EmptyEvaluation)));
    }

    proptest! {
        #[test]
        fn dice_iou_identities(a in proptest::collection::vec(any::<bool>(), 64), b in proptest::collection::vec(any::<bool>(), 64)) {
            let pa = mask(8, 8, |r, c| a[r * 8 + c]);
            let pb = mask(8, 8, |r, c| b[r * 8 + c]);
            let (d, i) = dice_iou(&pa, &pb, 0.5).unwrap();
            let (d2, i2) = dice_iou(&pb, &pa, 0.5).unwrap();
            prop_assert_eq!((d, i), (d2, i2));
            prop_assert!(i <= d + 1e-6 && d <= 1.0 + 1e-6 && i >= 0.0);
            prop_assert!((d - 2.0 * i / (1.0 + i)).abs() < 1e-6);
        }
    }
}
