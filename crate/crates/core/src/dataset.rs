//! Image/mask directory datasets and reproducible train/val/test partitions.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::{is_raster_file, raster_dims};
use crate::rng::SplitMix64;

/// Smallest dataset [`split`] accepts.
pub const MIN_SPLIT_SAMPLES: usize = 10;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SampleRef {
    pub id: String,
    pub image_path: PathBuf,
    pub mask_path: PathBuf,
}

/// A per-sample problem found while scanning. None of these abort the scan.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SampleIssue {
    MissingMask { id: String, image_path: PathBuf },
    MissingImage { id: String, mask_path: PathBuf },
    DimensionMismatch {
        id: String,
        image: (usize, usize),
        mask: (usize, usize),
    },
    DuplicateStem { id: String, path: PathBuf },
    Unreadable { id: String, message: String },
}

impl fmt::Display for SampleIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SampleIssue::MissingMask { id, image_path } => {
                write!(f, "{id}: no mask for {}", image_path.display())
            }
            SampleIssue::MissingImage { id, mask_path } => {
                write!(f, "{id}: no image for {}", mask_path.display())
            }
            SampleIssue::DimensionMismatch { id, image, mask } => write!(
                f,
                "{id}: image is {}x{} but mask is {}x{}",
                image.0, image.1, mask.0, mask.1
            ),
            SampleIssue::DuplicateStem { id, path } => {
                write!(f, "{id}: duplicate stem, ignoring {}", path.display())
            }
            SampleIssue::Unreadable { id, message } => write!(f, "{id}: {message}"),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct ScanReport {
    /// Matched samples sorted byte-wise by id.
    pub samples: Vec<SampleRef>,
    pub issues: Vec<SampleIssue>,
}

/// Raster files of `dir` keyed by file stem. Files sharing a stem keep the
/// first path in byte order; the rest are reported.
fn rasters_by_stem(dir: &Path, issues: &mut Vec<SampleIssue>) -> Result<BTreeMap<String, PathBuf>> {
    let entries = std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut paths = Vec::new();
    for entry in entries {
        let entry = entry.map_err(|e| Error::io(dir, e))?;
        let path = entry.path();
        if path.is_file() && is_raster_file(&path) {
            paths.push(path);
        }
    }
    paths.sort();
    let mut by_stem = BTreeMap::new();
    for path in paths {
        let Some(stem) = path.file_stem().and_then(|s| s.to_str()).map(str::to_owned) else {
            continue;
        };
        if by_stem.contains_key(&stem) {
            issues.push(SampleIssue::DuplicateStem { id: stem, path });
        } else {
            by_stem.insert(stem, path);
        }
    }
    Ok(by_stem)
}

/// Pairs images and masks by file stem.
pub fn scan_dataset(images_dir: &Path, masks_dir: &Path) -> Result<ScanReport> {
    let mut issues = Vec::new();
    let images = rasters_by_stem(images_dir, &mut issues)?;
    let mut masks = rasters_by_stem(masks_dir, &mut issues)?;
    let mut samples = Vec::new();

    for (id, image_path) in images {
        let Some(mask_path) = masks.remove(&id) else {
            issues.push(SampleIssue::MissingMask { id, image_path });
            continue;
        };
        match (raster_dims(&image_path), raster_dims(&mask_path)) {
            (Ok(image), Ok(mask)) if image == mask => samples.push(SampleRef {
                id,
                image_path,
                mask_path,
            }),
            (Ok(image), Ok(mask)) => issues.push(SampleIssue::DimensionMismatch { id, image, mask }),
            (Err(e), _) | (_, Err(e)) => issues.push(SampleIssue::Unreadable {
                id,
                message: e.to_string(),
            }),
        }
    }
    for (id, mask_path) in masks {
        issues.push(SampleIssue::MissingImage { id, mask_path });
    }
    if samples.is_empty() {
        return Err(Error::EmptyDataset);
    }
    Ok(ScanReport { samples, issues })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "seed", rename_all = "snake_case")]
pub enum SplitMode {
    /// Sorted order, no shuffling.
    Fix,
    /// Shuffle the sorted list with splitmix64-driven Fisher–Yates.
    Seeded(u64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub mode: SplitMode,
    /// `(train, val, test)` fractions summing to 1.
    pub ratios: (f64, f64, f64),
}

impl SplitSpec {
    pub fn fix() -> Self {
        Self {
            mode: SplitMode::Fix,
            ratios: (0.8, 0.1, 0.1),
        }
    }

    pub fn seeded(seed: u64) -> Self {
        Self {
            mode: SplitMode::Seeded(seed),
            ratios: (0.8, 0.1, 0.1),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let (a, b, c) = self.ratios;
        if [a, b, c].iter().any(|r| !(0.0..=1.0).contains(r)) || (a + b + c - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidConfig(format!(
                "split ratios must be non-negative and sum to 1, got ({a}, {b}, {c})"
            )));
        }
        Ok(())
    }

    /// `(train, val)` counts; test takes the remainder.
    pub fn sizes(&self, n: usize) -> (usize, usize) {
        // The epsilon absorbs representation error such as 0.8 * 10 = 7.999…
        let count = |ratio: f64| ((ratio * n as f64) + 1e-9).floor() as usize;
        (count(self.ratios.0), count(self.ratios.1))
    }
}

impl Default for SplitSpec {
    fn default() -> Self {
        Self::fix()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Partition<T> {
    pub train: Vec<T>,
    pub val: Vec<T>,
    pub test: Vec<T>,
}

impl<T> Partition<T> {
    pub fn map<U>(self, mut f: impl FnMut(T) -> U) -> Partition<U> {
        Partition {
            train: self.train.into_iter().map(&mut f).collect(),
            val: self.val.into_iter().map(&mut f).collect(),
            test: self.test.into_iter().map(&mut f).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.train.len() + self.val.len() + self.test.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Partitions an ordered sample list.
///
/// Fix mode keeps the given order: the first `train` share trains, the LAST
/// `val` share validates and whatever lies between is the test set. Seeded
/// mode shuffles first and then takes train, val and test consecutively.
pub fn split<T: Clone>(samples: &[T], spec: &SplitSpec) -> Result<Partition<T>> {
    spec.validate()?;
    let n = samples.len();
    if n < MIN_SPLIT_SAMPLES {
        return Err(Error::TooFewSamples(n));
    }
    let (n_train, n_val) = spec.sizes(n);
    match spec.mode {
        SplitMode::Fix => Ok(Partition {
            train: samples[..n_train].to_vec(),
            test: samples[n_train..n - n_val].to_vec(),
            val: samples[n - n_val..].to_vec(),
        }),
        SplitMode::Seeded(seed) => {
            let mut order = samples.to_vec();
            SplitMix64::new(seed).shuffle(&mut order);
            let test = order.split_off(n_train + n_val);
            let val = order.split_off(n_train);
            Ok(Partition {
                train: order,
                val,
                test,
            })
        }
    }
}

/// Reads a list file of sample ids, one per line. Blank lines are skipped and
/// a raster extension, if present, is stripped.
pub fn read_stem_list(path: &Path) -> Result<Vec<String>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(|l| {
            let p = Path::new(l);
            if is_raster_file(p) {
                p.file_stem().and_then(|s| s.to_str()).unwrap_or(l).to_owned()
            } else {
                l.to_owned()
            }
        })
        .collect())
}

/// Partition given by explicit train/val/test list files.
pub fn official_split(samples: &[SampleRef], lists: [&Path; 3]) -> Result<Partition<SampleRef>> {
    let by_id: BTreeMap<&str, &SampleRef> = samples.iter().map(|s| (s.id.as_str(), s)).collect();
    let resolve = |path: &Path| -> Result<Vec<SampleRef>> {
        read_stem_list(path)?
            .into_iter()
            .map(|id| by_id.get(id.as_str()).map(|s| (*s).clone()).ok_or(Error::UnknownStem(id)))
            .collect()
    };
    Ok(Partition {
        train: resolve(lists[0])?,
        val: resolve(lists[1])?,
        test: resolve(lists[2])?,
    })
}

/// Writes one id per line.
pub fn write_manifest<'a>(path: &Path, ids: impl IntoIterator<Item = &'a str>) -> Result<()> {
    let mut text = String::new();
    for id in ids {
        text.push_str(id);
        text.push('\n');
    }
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}
