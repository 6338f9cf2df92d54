//! Raster file I/O. Rasters are 8-bit on disk and real-valued in memory;
//! quantization happens only here.

use std::path::Path;

use image::{GrayImage, ImageReader, Luma, Rgb, RgbImage};

use crate::error::{Error, Result};
use crate::raster::{Image, LabelMap};
use crate::scalar::{dequantize_u8, quantize_u8, Scalar};

pub const RASTER_EXTENSIONS: [&str; 6] = ["png", "jpg", "jpeg", "bmp", "tif", "tiff"];

pub fn is_raster_file(path: &Path) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .map(|e| RASTER_EXTENSIONS.contains(&e.to_ascii_lowercase().as_str()))
        .unwrap_or(false)
}

fn open(path: &Path) -> Result<image::DynamicImage> {
    let reader = ImageReader::open(path).map_err(|e| Error::io(path, e))?;
    let reader = reader.with_guessed_format().map_err(|e| Error::io(path, e))?;
    reader.decode().map_err(|source| Error::Image {
        path: path.to_owned(),
        source,
    })
}

/// `(height, width)` read from the file header.
pub fn raster_dims(path: &Path) -> Result<(usize, usize)> {
    let (w, h) = image::image_dimensions(path).map_err(|source| Error::Image {
        path: path.to_owned(),
        source,
    })?;
    Ok((h as usize, w as usize))
}

pub fn read_image<S: Scalar>(path: &Path) -> Result<Image<S>> {
    let rgb = open(path)?.into_rgb8();
    let (w, h) = rgb.dimensions();
    let data = rgb.into_raw().into_iter().map(dequantize_u8).collect();
    Image::from_vec(h as usize, w as usize, data)
}

/// Mask normalized to `[0, 1]`; for color masks the brightest channel counts.
pub fn read_mask<S: Scalar>(path: &Path) -> Result<LabelMap<S>> {
    let rgb = open(path)?.into_rgb8();
    let (w, h) = rgb.dimensions();
    let data = rgb
        .pixels()
        .map(|Rgb([r, g, b])| dequantize_u8(*r.max(g).max(b)))
        .collect();
    LabelMap::from_vec(h as usize, w as usize, data)
}

/// Mask binarized to `{0, 1}` at `threshold` (normalized units).
pub fn read_mask_binary<S: Scalar>(path: &Path, threshold: S) -> Result<LabelMap<S>> {
    let soft: LabelMap<S> = read_mask(path)?;
    let data = soft
        .data()
        .iter()
        .map(|&v| if v > threshold { S::one() } else { S::zero() })
        .collect();
    LabelMap::from_vec(soft.height(), soft.width(), data)
}

fn ensure_parent(path: &Path) -> Result<()> {
    match path.parent() {
        Some(dir) if !dir.as_os_str().is_empty() => {
            std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
        }
        _ => Ok(()),
    }
}

fn save(result: image::ImageResult<()>, path: &Path) -> Result<()> {
    result.map_err(|source| Error::Image {
        path: path.to_owned(),
        source,
    })
}

pub fn image_to_rgb8<S: Scalar>(image: &Image<S>) -> RgbImage {
    let raw = image.data().iter().map(|&v| quantize_u8(v)).collect();
    RgbImage::from_raw(image.width() as u32, image.height() as u32, raw)
        .expect("buffer length matches dimensions")
}

/// Label map as 8-bit grayscale `round(255·label)`, or `{0, 255}` when
/// `binarize` is set (any positive label becomes 255).
pub fn label_to_gray8<S: Scalar>(label: &LabelMap<S>, binarize: bool) -> GrayImage {
    let raw = label
        .data()
        .iter()
        .map(|&v| {
            if binarize {
                if v > S::zero() {
                    255
                } else {
                    0
                }
            } else {
                quantize_u8(v)
            }
        })
        .collect();
    GrayImage::from_raw(label.width() as u32, label.height() as u32, raw)
        .expect("buffer length matches dimensions")
}

pub fn write_image<S: Scalar>(path: &Path, image: &Image<S>) -> Result<()> {
    ensure_parent(path)?;
    save(image_to_rgb8(image).save(path), path)
}

pub fn write_label<S: Scalar>(path: &Path, label: &LabelMap<S>, binarize: bool) -> Result<()> {
    ensure_parent(path)?;
    save(label_to_gray8(label, binarize).save(path), path)
}

/// Writes values in `[0, 1]` as an 8-bit grayscale raster.
pub fn write_gray(path: &Path, height: usize, width: usize, values: &[f64]) -> Result<()> {
    ensure_parent(path)?;
    let mut img = GrayImage::new(width as u32, height as u32);
    for (i, px) in img.pixels_mut().enumerate() {
        *px = Luma([quantize_u8(values[i])]);
    }
    save(img.save(path), path)
}
