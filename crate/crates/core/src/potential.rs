//! The potential map that proposes paste locations.
//!
//! Each entry scores a candidate top-left corner; the lowest entry is the next
//! proposal and entries equal to the large value `T` are never proposed.

use crate::error::{Error, Result};
use crate::raster::{BoundingBox, Coord, LabelMap};
use crate::rng::SplitMix64;
use crate::scalar::Scalar;

pub const DEFAULT_BIG_T: f64 = 1e6;
pub const DEFAULT_KERNEL_SIZE: usize = 3;

/// Outcome of a candidate query.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Selection {
    At(Coord),
    Exhausted,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PotentialMap<S> {
    height: usize,
    width: usize,
    big_t: S,
    /// Extent of the patch whose top-left corners this map scores.
    patch_extent: (usize, usize),
    data: Vec<S>,
}

impl<S: Scalar> PotentialMap<S> {
    /// Random map for placing a `patch_extent` patch over `label`.
    ///
    /// Entries are uniform in `[0, 1)`. Foreground pixels of `label` and every
    /// top-left from which the patch would leave the image are set to `big_t`.
    pub fn init(
        label: &LabelMap<S>,
        patch_extent: (usize, usize),
        threshold: S,
        big_t: S,
        rng: &mut SplitMix64,
    ) -> Result<Self> {
        let (height, width) = label.dims();
        let (ph, pw) = patch_extent;
        if ph == 0 || pw == 0 || ph > height || pw > width {
            return Err(Error::PatchTooLarge {
                patch_h: ph,
                patch_w: pw,
                height,
                width,
            });
        }
        let mut data = Vec::with_capacity(height * width);
        for r in 0..height {
            for c in 0..width {
                let u = S::lit(rng.next_f64());
                let v = if label.get(r, c) > threshold {
                    big_t
                } else {
                    // f32 rounding can lift values just below 1 up to 1; keep them under T.
                    u.min(big_t)
                };
                data.push(v);
            }
        }
        let mut map = Self {
            height,
            width,
            big_t,
            patch_extent,
            data,
        };
        map.suppress_infeasible();
        Ok(map)
    }

    /// Map with explicit entries; every top-left is treated as feasible for a 1×1 patch.
    pub fn from_vec(height: usize, width: usize, big_t: S, data: Vec<S>) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(Error::InvalidDimensions { height, width });
        }
        if data.len() != height * width {
            return Err(Error::ShapeMismatch {
                expected: (height, width),
                found: (data.len() / width, width),
            });
        }
        Ok(Self {
            height,
            width,
            big_t,
            patch_extent: (1, 1),
            data: data.into_iter().map(|v| v.min(big_t)).collect(),
        })
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    pub fn big_t(&self) -> S {
        self.big_t
    }

    pub fn patch_extent(&self) -> (usize, usize) {
        self.patch_extent
    }

    pub fn data(&self) -> &[S] {
        &self.data
    }

    pub fn get(&self, row: usize, col: usize) -> S {
        self.data[row * self.width + col]
    }

    /// Whether a patch anchored at `(row, col)` stays inside the image.
    pub fn is_feasible(&self, row: usize, col: usize) -> bool {
        row + self.patch_extent.0 <= self.height && col + self.patch_extent.1 <= self.width
    }

    pub fn is_forbidden(&self, row: usize, col: usize) -> bool {
        self.get(row, col) >= self.big_t
    }

    /// Global minimum, ties broken row-major.
    pub fn select_candidate(&self) -> Selection {
        let mut best: Option<(usize, S)> = None;
        for (i, &v) in self.data.iter().enumerate() {
            match best {
                Some((_, b)) if v >= b => {}
                _ => best = Some((i, v)),
            }
        }
        match best {
            Some((i, v)) if v < self.big_t => Selection::At(Coord::new(i / self.width, i % self.width)),
            _ => Selection::Exhausted,
        }
    }

    /// Sets every entry inside `region` to `T`.
    pub fn mark_forbidden(&mut self, region: BoundingBox) -> Result<()> {
        region.check_within(self.height, self.width)?;
        for r in region.row_start..region.row_end {
            let start = r * self.width;
            self.data[start + region.col_start..start + region.col_end].fill(self.big_t);
        }
        Ok(())
    }

    pub fn mark_coord(&mut self, coord: Coord) -> Result<()> {
        self.mark_forbidden(BoundingBox::single(coord))
    }

    /// Resets every top-left from which the patch would overrun the border to `T`.
    pub fn suppress_infeasible(&mut self) {
        let (ph, pw) = self.patch_extent;
        let last_row = self.height - ph;
        let last_col = self.width - pw;
        for r in 0..self.height {
            let row = &mut self.data[r * self.width..(r + 1) * self.width];
            if r > last_row {
                row.fill(self.big_t);
            } else {
                row[last_col + 1..].fill(self.big_t);
            }
        }
    }

    /// Replaces the map with its mean-filtered version (replicate borders), then
    /// clamps to `T`.
    pub fn spread(&mut self, kernel: MeanKernel) {
        let radius = kernel.radius();
        let k = S::from_usize_lossy(kernel.size());
        let (h, w) = (self.height, self.width);

        // Rows first, then columns; each 1-D mean is clamped to its window's
        // range so constant windows reproduce their value exactly.
        let mut horizontal = vec![S::zero(); h * w];
        for r in 0..h {
            let row = &self.data[r * w..(r + 1) * w];
            for c in 0..w {
                let window = (0..kernel.size()).map(|i| row[clamp_index(c + i, radius, w)]);
                horizontal[r * w + c] = clamped_mean(window, k);
            }
        }
        for r in 0..h {
            for c in 0..w {
                let window =
                    (0..kernel.size()).map(|i| horizontal[clamp_index(r + i, radius, h) * w + c]);
                self.data[r * w + c] = clamped_mean(window, k).min(self.big_t);
            }
        }
    }

    /// Entries min-max normalized to `[0, 1]`; a constant map maps to zeros.
    pub fn normalized(&self) -> Vec<f64> {
        let (lo, hi) = self
            .data
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
                let v = v.as_f64();
                (lo.min(v), hi.max(v))
            });
        let span = hi - lo;
        self.data
            .iter()
            .map(|v| if span > 0.0 { (v.as_f64() - lo) / span } else { 0.0 })
            .collect()
    }
}

/// Square averaging kernel of odd size `k`, each weight `1/k²`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MeanKernel {
    size: usize,
}

impl MeanKernel {
    pub fn new(size: usize) -> Result<Self> {
        if size == 0 || size % 2 == 0 {
            return Err(Error::InvalidConfig(format!(
                "mean kernel size must be odd and positive, got {size}"
            )));
        }
        Ok(Self { size })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn radius(&self) -> usize {
        self.size / 2
    }

    pub fn weights<S: Scalar>(&self) -> Vec<S> {
        let w = S::one() / S::from_usize_lossy(self.size * self.size);
        vec![w; self.size * self.size]
    }
}

impl Default for MeanKernel {
    fn default() -> Self {
        Self {
            size: DEFAULT_KERNEL_SIZE,
        }
    }
}

/// Index `shifted - radius`, clamped into `0..len`.
fn clamp_index(shifted: usize, radius: usize, len: usize) -> usize {
    shifted.saturating_sub(radius).min(len - 1)
}

fn clamped_mean<S: Scalar>(window: impl Iterator<Item = S>, count: S) -> S {
    let (sum, lo, hi) = window.fold(
        (S::zero(), S::infinity(), S::neg_infinity()),
        |(sum, lo, hi), v| (sum + v, lo.min(v), hi.max(v)),
    );
    (sum / count).max(lo).min(hi)
}
