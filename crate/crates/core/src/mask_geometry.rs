//! Foreground bounding box and patch extraction.

use crate::error::{Error, Result};
use crate::raster::{BoundingBox, Image, LabelMap};
use crate::scalar::Scalar;

/// Labels strictly above this value count as foreground.
pub const DEFAULT_FOREGROUND_THRESHOLD: f64 = 0.5;

/// A detached copy of the foreground rectangle of an image/label pair.
#[derive(Debug, Clone, PartialEq)]
pub struct ForegroundPatch<S> {
    pub image: Image<S>,
    pub label: LabelMap<S>,
    pub source_box: BoundingBox,
}

impl<S: Scalar> ForegroundPatch<S> {
    pub fn extent(&self) -> (usize, usize) {
        self.source_box.extent()
    }
}

/// Tight box around every pixel whose label exceeds `threshold`.
///
/// Disconnected blobs share one enclosing box.
pub fn foreground_bbox<S: Scalar>(label: &LabelMap<S>, threshold: S) -> Result<BoundingBox> {
    let height = label.height();
    let mut rows: Option<(usize, usize)> = None;
    let mut cols = (usize::MAX, 0usize);
    for r in 0..height {
        let row = label.row(r);
        let Some(first) = row.iter().position(|&v| v > threshold) else {
            continue;
        };
        let last = row.iter().rposition(|&v| v > threshold).unwrap_or(first);
        rows = Some(match rows {
            None => (r, r),
            Some((start, _)) => (start, r),
        });
        cols.0 = cols.0.min(first);
        cols.1 = cols.1.max(last);
    }
    let (row_first, row_last) = rows.ok_or(Error::EmptyForeground)?;
    Ok(BoundingBox::new(row_first, cols.0, row_last + 1, cols.1 + 1))
}

pub fn crop_patch<S: Scalar>(
    image: &Image<S>,
    label: &LabelMap<S>,
    region: BoundingBox,
) -> Result<ForegroundPatch<S>> {
    if image.dims() != label.dims() {
        return Err(Error::ShapeMismatch {
            expected: image.dims(),
            found: label.dims(),
        });
    }
    Ok(ForegroundPatch {
        image: image.crop(region)?,
        label: label.crop(region)?,
        source_box: region,
    })
}

/// [`foreground_bbox`] followed by [`crop_patch`].
pub fn extract_foreground<S: Scalar>(
    image: &Image<S>,
    label: &LabelMap<S>,
    threshold: S,
) -> Result<ForegroundPatch<S>> {
    let region = foreground_bbox(label, threshold)?;
    crop_patch(image, label, region)
}
