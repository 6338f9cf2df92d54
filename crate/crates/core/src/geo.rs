//! Joint geometric augmentation of an image and its label map: random
//! horizontal/vertical flips, rotation about the center and center zoom.
//!
//! Images are resampled bilinearly and labels by nearest neighbor, so a
//! binary label stays binary. Pixels mapped from outside the frame are 0.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::{Image, LabelMap, CHANNELS};
use crate::rng::SplitMix64;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeoConfig {
    pub hflip_prob: f64,
    pub vflip_prob: f64,
    /// Rotation angle is drawn uniformly from `[-max, max]` degrees.
    pub rotate_degrees_max: f64,
    /// `(min_scale, max_scale)`; scales above 1 zoom in.
    pub zoom_range: (f64, f64),
    pub seed: u64,
}

impl Default for GeoConfig {
    fn default() -> Self {
        Self {
            hflip_prob: 0.5,
            vflip_prob: 0.5,
            rotate_degrees_max: 90.0,
            zoom_range: (0.75, 1.25),
            seed: 0,
        }
    }
}

impl GeoConfig {
    /// A configuration whose transforms are all the identity.
    pub fn identity() -> Self {
        Self {
            hflip_prob: 0.0,
            vflip_prob: 0.0,
            rotate_degrees_max: 0.0,
            zoom_range: (1.0, 1.0),
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, p) in [("hflip_prob", self.hflip_prob), ("vflip_prob", self.vflip_prob)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidConfig(format!("{name} must lie in [0, 1], got {p}")));
            }
        }
        if !self.rotate_degrees_max.is_finite() || self.rotate_degrees_max < 0.0 {
            return Err(Error::InvalidConfig(format!(
                "rotate_degrees_max must be finite and non-negative, got {}",
                self.rotate_degrees_max
            )));
        }
        let (lo, hi) = self.zoom_range;
        if !(lo > 0.0 && lo <= hi && hi.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "zoom_range must satisfy 0 < min <= max, got ({lo}, {hi})"
            )));
        }
        Ok(())
    }

    /// Draws one set of transform parameters. Always consumes four draws.
    pub fn sample(&self, rng: &mut SplitMix64) -> GeoParams {
        let hflip = rng.bernoulli(self.hflip_prob);
        let vflip = rng.bernoulli(self.vflip_prob);
        let angle_degrees = rng.uniform(-self.rotate_degrees_max, self.rotate_degrees_max);
        let scale = rng.uniform(self.zoom_range.0, self.zoom_range.1);
        GeoParams {
            hflip,
            vflip,
            angle_degrees,
            scale,
        }
    }
}

/// Concrete transform parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeoParams {
    pub hflip: bool,
    pub vflip: bool,
    pub angle_degrees: f64,
    pub scale: f64,
}

impl GeoParams {
    pub const IDENTITY: GeoParams = GeoParams {
        hflip: false,
        vflip: false,
        angle_degrees: 0.0,
        scale: 1.0,
    };
}

/// Samples parameters from `config` and applies them to both rasters.
pub fn apply_geo<S: Scalar>(
    image: &Image<S>,
    label: &LabelMap<S>,
    config: &GeoConfig,
    rng: &mut SplitMix64,
) -> Result<(Image<S>, LabelMap<S>, GeoParams)> {
    config.validate()?;
    let params = config.sample(rng);
    let (img, lab) = apply_params(image, label, &params)?;
    Ok((img, lab, params))
}

pub fn apply_params<S: Scalar>(
    image: &Image<S>,
    label: &LabelMap<S>,
    params: &GeoParams,
) -> Result<(Image<S>, LabelMap<S>)> {
    if image.dims() != label.dims() {
        return Err(Error::ShapeMismatch {
            expected: image.dims(),
            found: label.dims(),
        });
    }
    let (h, w) = image.dims();
    let flip = |r: usize, c: usize| {
        (
            if params.vflip { h - 1 - r } else { r },
            if params.hflip { w - 1 - c } else { c },
        )
    };
    let flipped_image = Image::from_fn(h, w, |r, c| {
        let (sr, sc) = flip(r, c);
        image.pixel(sr, sc)
    })?;
    let flipped_label = LabelMap::from_fn(h, w, |r, c| {
        let (sr, sc) = flip(r, c);
        label.get(sr, sc)
    })?;
    if params.angle_degrees == 0.0 && params.scale == 1.0 {
        return Ok((flipped_image, flipped_label));
    }

    let warp = InverseWarp::new(h, w, params.angle_degrees, params.scale);
    let out_image = Image::from_fn(h, w, |r, c| {
        let (sy, sx) = warp.source(r, c);
        bilinear(&flipped_image, sy, sx)
    })?;
    let out_label = LabelMap::from_fn(h, w, |r, c| {
        let (sy, sx) = warp.source(r, c);
        nearest(&flipped_label, sy, sx)
    })?;
    Ok((out_image, out_label))
}

/// Maps output pixel centers back into the source frame.
struct InverseWarp {
    center: (f64, f64),
    cos: f64,
    sin: f64,
    inv_scale: f64,
}

impl InverseWarp {
    fn new(h: usize, w: usize, angle_degrees: f64, scale: f64) -> Self {
        let theta = angle_degrees.to_radians();
        Self {
            center: ((h as f64 - 1.0) / 2.0, (w as f64 - 1.0) / 2.0),
            cos: theta.cos(),
            sin: theta.sin(),
            inv_scale: 1.0 / scale,
        }
    }

    fn source(&self, row: usize, col: usize) -> (f64, f64) {
        let dy = (row as f64 - self.center.0) * self.inv_scale;
        let dx = (col as f64 - self.center.1) * self.inv_scale;
        (
            self.center.0 - self.sin * dx + self.cos * dy,
            self.center.1 + self.cos * dx + self.sin * dy,
        )
    }
}

fn in_frame(sy: f64, sx: f64, h: usize, w: usize) -> bool {
    sy >= -0.5 && sy < h as f64 - 0.5 && sx >= -0.5 && sx < w as f64 - 0.5
}

fn bilinear<S: Scalar>(img: &Image<S>, sy: f64, sx: f64) -> [S; CHANNELS] {
    let (h, w) = img.dims();
    if !in_frame(sy, sx, h, w) {
        return [S::zero(); CHANNELS];
    }
    let y = sy.clamp(0.0, (h - 1) as f64);
    let x = sx.clamp(0.0, (w - 1) as f64);
    let (y0, x0) = (y.floor() as usize, x.floor() as usize);
    let (y1, x1) = ((y0 + 1).min(h - 1), (x0 + 1).min(w - 1));
    let fy = S::lit(y - y0 as f64);
    let fx = S::lit(x - x0 as f64);
    let (p00, p01, p10, p11) = (img.pixel(y0, x0), img.pixel(y0, x1), img.pixel(y1, x0), img.pixel(y1, x1));
    let mut out = [S::zero(); CHANNELS];
    for ch in 0..CHANNELS {
        let top = p00[ch] + (p01[ch] - p00[ch]) * fx;
        let bottom = p10[ch] + (p11[ch] - p10[ch]) * fx;
        out[ch] = (top + (bottom - top) * fy).max(S::zero()).min(S::one());
    }
    out
}

fn nearest<S: Scalar>(label: &LabelMap<S>, sy: f64, sx: f64) -> S {
    let (h, w) = label.dims();
    if !in_frame(sy, sx, h, w) {
        return S::zero();
    }
    let r = (sy.round().max(0.0) as usize).min(h - 1);
    let c = (sx.round().max(0.0) as usize).min(w - 1);
    label.get(r, c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    fn sample_pair(h: usize, w: usize) -> (Image<f64>, LabelMap<f64>) {
        let img = Image::from_fn(h, w, |r, c| {
            [r as f64 / h as f64, c as f64 / w as f64, ((r * 7 + c * 3) % 11) as f64 / 10.0]
        })
        .unwrap();
        let lab = LabelMap::from_fn(h, w, |r, c| if (r + 2 * c) % 5 < 2 { 1.0 } else { 0.0 }).unwrap();
        (img, lab)
    }

    #[test]
    fn identity_config_is_identity() {
        let (img, lab) = sample_pair(9, 13);
        let mut rng = SplitMix64::new(4);
        let (oi, ol, params) = apply_geo(&img, &lab, &GeoConfig::identity(), &mut rng).unwrap();
        assert_eq!(params, GeoParams::IDENTITY);
        assert_eq!(oi, img);
        assert_eq!(ol, lab);
    }

    #[test]
    fn double_flip_is_identity() {
        let (img, lab) = sample_pair(6, 7);
        let p = GeoParams {
            hflip: true,
            vflip: true,
            ..GeoParams::IDENTITY
        };
        let (i1, l1) = apply_params(&img, &lab, &p).unwrap();
        assert_ne!(i1, img);
        let (i2, l2) = apply_params(&i1, &l1, &p).unwrap();
        assert_eq!(i2, img);
        assert_eq!(l2, lab);
    }

    #[test]
    fn hflip_mirrors_columns() {
        let (img, lab) = sample_pair(4, 5);
        let p = GeoParams {
            hflip: true,
            ..GeoParams::IDENTITY
        };
        let (i1, l1) = apply_params(&img, &lab, &p).unwrap();
        assert_eq!(i1.pixel(1, 0), img.pixel(1, 4));
        assert_eq!(l1.get(3, 1), lab.get(3, 3));
    }

    #[test]
    fn zoom_out_pads_with_zero() {
        let img = Image::<f64>::filled(20, 20, 0.8).unwrap();
        let lab = LabelMap::<f64>::filled(20, 20, 1.0).unwrap();
        let p = GeoParams {
            scale: 0.5,
            ..GeoParams::IDENTITY
        };
        let (oi, ol) = apply_params(&img, &lab, &p).unwrap();
        assert_eq!(ol.get(0, 0), 0.0);
        assert_eq!(oi.pixel(0, 0), [0.0; 3]);
        assert_eq!(ol.get(10, 10), 1.0);
        assert!((oi.pixel(10, 10)[0] - 0.8).abs() < 1e-12);
    }

    #[test]
    fn quarter_turn_of_square_permutes_pixels() {
        let (img, lab) = sample_pair(8, 8);
        let p = GeoParams {
            angle_degrees: 90.0,
            ..GeoParams::IDENTITY
        };
        let (_, ol) = apply_params(&img, &lab, &p).unwrap();
        let mut a: Vec<f64> = lab.data().to_vec();
        let mut b: Vec<f64> = ol.data().to_vec();
        a.sort_by(f64::total_cmp);
        b.sort_by(f64::total_cmp);
        assert_eq!(a, b);
    }

    #[test]
    fn binary_labels_stay_binary() {
        let (img, lab) = sample_pair(31, 24);
        let cfg = GeoConfig::default();
        for seed in 0..40 {
            let (oi, ol, _) = apply_geo(&img, &lab, &cfg, &mut SplitMix64::new(seed)).unwrap();
            assert_eq!(oi.dims(), img.dims());
            let values: BTreeSet<u64> = ol.data().iter().map(|v| v.to_bits()).collect();
            assert!(values.iter().all(|&b| b == 0f64.to_bits() || b == 1f64.to_bits()));
            assert!(oi.data().iter().all(|v| (0.0..=1.0).contains(v)));
        }
    }

    #[test]
    fn soft_label_values_are_never_invented() {
        let img = Image::<f64>::filled(16, 16, 0.5).unwrap();
        let lab = LabelMap::<f64>::from_fn(16, 16, |r, c| [0.0, 0.3, 0.7, 1.0][(r / 4 + c / 4) % 4]).unwrap();
        let allowed: BTreeSet<u64> = lab.data().iter().map(|v| v.to_bits()).collect();
        for seed in 0..20 {
            let (_, ol, _) = apply_geo(&img, &lab, &GeoConfig::default(), &mut SplitMix64::new(seed)).unwrap();
            assert!(ol.data().iter().all(|v| allowed.contains(&v.to_bits())));
        }
    }

    #[test]
    fn geo_is_deterministic() {
        let (img, lab) = sample_pair(12, 12);
        let a = apply_geo(&img, &lab, &GeoConfig::default(), &mut SplitMix64::new(77)).unwrap();
        let b = apply_geo(&img, &lab, &GeoConfig::default(), &mut SplitMix64::new(77)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let mut cfg = GeoConfig::default();
        cfg.hflip_prob = 1.5;
        assert!(cfg.validate().is_err());
        let mut cfg = GeoConfig::default();
        cfg.zoom_range = (1.2, 0.8);
        assert!(cfg.validate().is_err());
        let mut cfg = GeoConfig::default();
        cfg.zoom_range = (0.0, 1.0);
        assert!(cfg.validate().is_err());
    }
}
