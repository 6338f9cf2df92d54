//! Color images, label maps and half-open pixel boxes.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub const CHANNELS: usize = 3;

/// An `height × width × 3` color raster with intensities in `[0, 1]`, stored
/// row-major with interleaved channels.
#[derive(Debug, Clone, PartialEq)]
pub struct Image<S> {
    height: usize,
    width: usize,
    data: Vec<S>,
}

impl<S: Scalar> Image<S> {
    pub fn new(height: usize, width: usize) -> Result<Self> {
        Self::filled(height, width, S::zero())
    }

    pub fn filled(height: usize, width: usize, value: S) -> Result<Self> {
        check_dims(height, width)?;
        Ok(Self {
            height,
            width,
            data: vec![value; height * width * CHANNELS],
        })
    }

    pub fn from_vec(height: usize, width: usize, data: Vec<S>) -> Result<Self> {
        check_dims(height, width)?;
        if data.len() != height * width * CHANNELS {
            return Err(Error::ShapeMismatch {
                expected: (height, width * CHANNELS),
                found: (data.len() / (width * CHANNELS).max(1), width * CHANNELS),
            });
        }
        Ok(Self {
            height,
            width,
            data,
        })
    }

    pub fn from_fn(
        height: usize,
        width: usize,
        mut f: impl FnMut(usize, usize) -> [S; CHANNELS],
    ) -> Result<Self> {
        check_dims(height, width)?;
        let mut data = Vec::with_capacity(height * width * CHANNELS);
        for r in 0..height {
            for c in 0..width {
                data.extend_from_slice(&f(r, c));
            }
        }
        Ok(Self {
            height,
            width,
            data,
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

    pub fn data(&self) -> &[S] {
        &self.data
    }

    pub fn pixel(&self, row: usize, col: usize) -> [S; CHANNELS] {
        let i = (row * self.width + col) * CHANNELS;
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }

    pub fn pixel_mut(&mut self, row: usize, col: usize) -> &mut [S] {
        let i = (row * self.width + col) * CHANNELS;
        &mut self.data[i..i + CHANNELS]
    }

    pub fn set_pixel(&mut self, row: usize, col: usize, value: [S; CHANNELS]) {
        self.pixel_mut(row, col).copy_from_slice(&value);
    }

    /// Row slice of `CHANNELS * width` interleaved values.
    pub fn row(&self, row: usize) -> &[S] {
        let stride = self.width * CHANNELS;
        &self.data[row * stride..(row + 1) * stride]
    }

    /// Copy of the boxed region.
    pub fn crop(&self, region: BoundingBox) -> Result<Self> {
        region.check_within(self.height, self.width)?;
        let mut data = Vec::with_capacity(region.area() * CHANNELS);
        for r in region.row_start..region.row_end {
            let row = self.row(r);
            data.extend_from_slice(&row[region.col_start * CHANNELS..region.col_end * CHANNELS]);
        }
        Self::from_vec(region.height(), region.width(), data)
    }
}

/// Per-pixel foreground label in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelMap<S> {
    height: usize,
    width: usize,
    data: Vec<S>,
}

impl<S: Scalar> LabelMap<S> {
    pub fn new(height: usize, width: usize) -> Result<Self> {
        Self::filled(height, width, S::zero())
    }

    pub fn filled(height: usize, width: usize, value: S) -> Result<Self> {
        check_dims(height, width)?;
        Ok(Self {
            height,
            width,
            data: vec![value; height * width],
        })
    }

    pub fn from_vec(height: usize, width: usize, data: Vec<S>) -> Result<Self> {
        check_dims(height, width)?;
        if data.len() != height * width {
            return Err(Error::ShapeMismatch {
                expected: (height, width),
                found: (data.len() / width.max(1), width),
            });
        }
        Ok(Self {
            height,
            width,
            data,
        })
    }

    pub fn from_fn(height: usize, width: usize, mut f: impl FnMut(usize, usize) -> S) -> Result<Self> {
        check_dims(height, width)?;
        let mut data = Vec::with_capacity(height * width);
        for r in 0..height {
            for c in 0..width {
                data.push(f(r, c));
            }
        }
        Ok(Self {
            height,
            width,
            data,
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

    pub fn data(&self) -> &[S] {
        &self.data
    }

    pub fn get(&self, row: usize, col: usize) -> S {
        self.data[row * self.width + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: S) {
        self.data[row * self.width + col] = value;
    }

    pub fn row(&self, row: usize) -> &[S] {
        &self.data[row * self.width..(row + 1) * self.width]
    }

    pub fn crop(&self, region: BoundingBox) -> Result<Self> {
        region.check_within(self.height, self.width)?;
        let mut data = Vec::with_capacity(region.area());
        for r in region.row_start..region.row_end {
            data.extend_from_slice(&self.row(r)[region.col_start..region.col_end]);
        }
        Self::from_vec(region.height(), region.width(), data)
    }

    /// Sum of all label values.
    pub fn mass(&self) -> S {
        self.data.iter().fold(S::zero(), |acc, &v| acc + v)
    }

    /// Hard mask: `true` where the label exceeds `threshold`.
    pub fn binarize(&self, threshold: S) -> Vec<bool> {
        self.data.iter().map(|&v| v > threshold).collect()
    }
}

/// Axis-aligned pixel box, half-open: rows `row_start..row_end`, cols
/// `col_start..col_end`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BoundingBox {
    pub row_start: usize,
    pub col_start: usize,
    pub row_end: usize,
    pub col_end: usize,
}

impl BoundingBox {
    pub fn new(row_start: usize, col_start: usize, row_end: usize, col_end: usize) -> Self {
        Self {
            row_start,
            col_start,
            row_end,
            col_end,
        }
    }

    /// Box of the given extent anchored at a top-left coordinate.
    pub fn at(top_left: Coord, height: usize, width: usize) -> Self {
        Self::new(
            top_left.row,
            top_left.col,
            top_left.row + height,
            top_left.col + width,
        )
    }

    pub fn single(coord: Coord) -> Self {
        Self::at(coord, 1, 1)
    }

    pub fn height(&self) -> usize {
        self.row_end.saturating_sub(self.row_start)
    }

    pub fn width(&self) -> usize {
        self.col_end.saturating_sub(self.col_start)
    }

    pub fn extent(&self) -> (usize, usize) {
        (self.height(), self.width())
    }

    pub fn area(&self) -> usize {
        self.height() * self.width()
    }

    pub fn top_left(&self) -> Coord {
        Coord::new(self.row_start, self.col_start)
    }

    pub fn contains(&self, row: usize, col: usize) -> bool {
        (self.row_start..self.row_end).contains(&row) && (self.col_start..self.col_end).contains(&col)
    }

    /// Checks `0 <= start < end <= limit` on both axes.
    pub fn check_within(&self, height: usize, width: usize) -> Result<()> {
        let ok = self.row_start < self.row_end
            && self.col_start < self.col_end
            && self.row_end <= height
            && self.col_end <= width;
        if ok {
            Ok(())
        } else {
            Err(Error::OutOfBounds {
                row_start: self.row_start,
                col_start: self.col_start,
                row_end: self.row_end,
                col_end: self.col_end,
                height,
                width,
            })
        }
    }
}

/// A `(row, col)` pixel coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Coord {
    pub row: usize,
    pub col: usize,
}

impl Coord {
    pub fn new(row: usize, col: usize) -> Self {
        Self { row, col }
    }
}

fn check_dims(height: usize, width: usize) -> Result<()> {
    if height == 0 || width == 0 {
        Err(Error::InvalidDimensions { height, width })
    } else {
        Ok(())
    }
}
