//! Synthetic image/mask corpora for CLI-level tests.
#![allow(dead_code)]

use std::path::{Path, PathBuf};

use sepaug_core::io::{write_image, write_label};
use sepaug_core::mask_geometry::crop_patch;
use sepaug_core::pasting::blend_region;
use sepaug_core::{AugmentedSample, BoundingBox, Image, LabelMap, PasteRecord, SplitMix64, Strategy};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shape {
    Rect,
    Blob,
    /// Rectangle covering most of the frame: no exclusive placement exists.
    Dense,
}

pub struct Synthetic {
    pub id: String,
    pub image: Image<f64>,
    pub label: LabelMap<f64>,
}

/// Smooth color gradient plus noise, quantized to 8-bit levels so disk round
/// trips are exact.
pub fn textured_image(h: usize, w: usize, rng: &mut SplitMix64) -> Image<f64> {
    let (a, b, c) = (rng.next_f64(), rng.next_f64(), rng.next_f64());
    Image::from_fn(h, w, |r, col| {
        let y = r as f64 / h as f64;
        let x = col as f64 / w as f64;
        let q = |v: f64| (v.clamp(0.0, 1.0) * 255.0).round() / 255.0;
        [
            q(0.2 + 0.5 * y * a + 0.1 * ((r * 7 + col * 13) % 17) as f64 / 17.0),
            q(0.3 + 0.4 * x * b),
            q(0.1 + 0.6 * (x + y) / 2.0 * c),
        ]
    })
    .unwrap()
}

pub fn shape_label(h: usize, w: usize, shape: Shape, rng: &mut SplitMix64) -> LabelMap<f64> {
    match shape {
        Shape::Rect => {
            let rh = 4 + rng.below_usize(h / 3);
            let rw = 4 + rng.below_usize(w / 3);
            let r0 = rng.below_usize(h - rh);
            let c0 = rng.below_usize(w - rw);
            LabelMap::from_fn(h, w, |r, c| {
                if (r0..r0 + rh).contains(&r) && (c0..c0 + rw).contains(&c) { 1.0 } else { 0.0 }
            })
            .unwrap()
        }
        Shape::Blob => {
            let base_r = 3.0 + rng.next_f64() * (h.min(w) as f64 / 8.0);
            let cy = base_r * 2.0 + rng.next_f64() * (h as f64 - base_r * 4.0);
            let cx = base_r * 2.0 + rng.next_f64() * (w as f64 - base_r * 4.0);
            let lobes: Vec<(f64, f64, f64)> = (0..3)
                .map(|_| {
                    (
                        cy + (rng.next_f64() - 0.5) * base_r,
                        cx + (rng.next_f64() - 0.5) * base_r,
                        base_r * (0.6 + 0.6 * rng.next_f64()),
                    )
                })
                .collect();
            LabelMap::from_fn(h, w, |r, c| {
                let inside = lobes.iter().any(|&(y, x, rad)| {
                    let d2 = (r as f64 - y).powi(2) + (c as f64 - x).powi(2);
                    d2 <= rad * rad
                });
                if inside { 1.0 } else { 0.0 }
            })
            .unwrap()
        }
        Shape::Dense => {
            let mr = h / 10;
            let mc = w / 10;
            LabelMap::from_fn(h, w, |r, c| {
                if (mr..h - mr).contains(&r) && (mc..w - mc).contains(&c) { 1.0 } else { 0.0 }
            })
            .unwrap()
        }
    }
}

/// `n` samples with sizes drawn from `sizes`, cycling through `shapes`.
pub fn corpus(n: usize, sizes: std::ops::RangeInclusive<usize>, shapes: &[Shape], seed: u64) -> Vec<Synthetic> {
    let mut rng = SplitMix64::new(seed);
    let span = sizes.end() - sizes.start() + 1;
    (0..n)
        .map(|i| {
            let h = sizes.start() + rng.below_usize(span);
            let w = sizes.start() + rng.below_usize(span);
            let shape = shapes[i % shapes.len()];
            Synthetic {
                id: format!("s{i:04}"),
                image: textured_image(h, w, &mut rng),
                label: shape_label(h, w, shape, &mut rng),
            }
        })
        .collect()
}

/// Writes `images/` and `masks/` under `root`.
pub fn write_corpus(root: &Path, samples: &[Synthetic]) -> (PathBuf, PathBuf) {
    let images = root.join("images");
    let masks = root.join("masks");
    for s in samples {
        write_image(&images.join(format!("{}.png", s.id)), &s.image).unwrap();
        write_label(&masks.join(format!("{}.png", s.id)), &s.label, false).unwrap();
    }
    (images, masks)
}

/// For every accepted paste in `record`, replayed on the input in log order,
/// the number of patch-polyp pixels that landed on label above `threshold`.
/// Also returns the replayed (image, label).
pub fn replay(
    image: &Image<f64>,
    label: &LabelMap<f64>,
    record: &PasteRecord,
    alpha: f64,
    threshold: f64,
    strategy: Strategy,
) -> (Vec<usize>, Image<f64>, LabelMap<f64>) {
    let patch_box: BoundingBox = record.patch_box.expect("record carries the patch box");
    let patch = crop_patch(image, label, patch_box).unwrap();
    let mut img = image.clone();
    let mut lab = label.clone();
    let mut violations = Vec::new();
    for attempt in record.attempts.iter().filter(|a| a.accepted) {
        let region = attempt.region;
        let mut hits = 0;
        for pr in 0..region.height() {
            for pc in 0..region.width() {
                let existing = lab.get(region.row_start + pr, region.col_start + pc);
                if patch.label.get(pr, pc) > 0.5 && existing > threshold {
                    hits += 1;
                }
            }
        }
        violations.push(hits);
        blend_region(&mut img, &mut lab, region, &patch, alpha, strategy == Strategy::ForegroundOnly).unwrap();
    }
    (violations, img, lab)
}

pub fn replay_matches(sample: &Synthetic, out: &AugmentedSample<f64>, alpha: f64, threshold: f64, strategy: Strategy) -> Vec<usize> {
    let (v, img, lab) = replay(&sample.image, &sample.label, &out.record, alpha, threshold, strategy);
    assert_eq!(img, out.image, "{}: replayed image diverges", sample.id);
    assert_eq!(lab, out.label, "{}: replayed label diverges", sample.id);
    v
}

/// Runs the CLI in-process and returns (exit code, stdout, stderr).
pub fn run_cli(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let mut argv = vec!["sepaug"];
    argv.extend_from_slice(args);
    let code = sepaug_cli::run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

/// SHA-256 of every file under `root`, keyed by relative path.
pub fn tree_hashes(root: &Path) -> std::collections::BTreeMap<String, String> {
    use sha2::{Digest, Sha256};
    let mut out = std::collections::BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in std::fs::read_dir(&dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let rel = path.strip_prefix(root).unwrap().to_string_lossy().replace('\\', "/");
                let bytes = std::fs::read(&path).unwrap();
                out.insert(rel, hex::encode(Sha256::digest(&bytes)));
            }
        }
    }
    out
}
