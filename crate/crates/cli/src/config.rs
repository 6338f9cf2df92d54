//! Run configuration: defaults < config file < environment < flags.
//!
//! Environment variables (`SEPAUG_*`) are read by clap together with the
//! flags, so by the time values reach [`resolve_augment`] a `Some` already
//! means "flag or environment" and the file only fills the gaps.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use sepaug_core::dataset::SplitMode;
use sepaug_core::{AugmentationConfig, GeoConfig, SplitSpec, Strategy};

use crate::error::CliError;

/// Contents of a TOML config file. Every key is optional.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    #[serde(default)]
    pub augment: AugmentSection,
    #[serde(default)]
    pub geo: GeoSection,
    #[serde(default)]
    pub split: SplitSection,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AugmentSection {
    pub images: Option<PathBuf>,
    pub masks: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub strategy: Option<String>,
    pub alpha: Option<f64>,
    pub iterations: Option<usize>,
    pub kernel_size: Option<usize>,
    pub big_t: Option<f64>,
    pub overlap_threshold: Option<f64>,
    pub seed: Option<u64>,
    pub copies: Option<usize>,
    pub workers: Option<usize>,
    pub binarize_masks: Option<bool>,
    pub dump_potential: Option<bool>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeoSection {
    pub enabled: Option<bool>,
    pub hflip_prob: Option<f64>,
    pub vflip_prob: Option<f64>,
    pub rotate_degrees_max: Option<f64>,
    pub zoom_range: Option<(f64, f64)>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitSection {
    pub mode: Option<String>,
    pub seed: Option<u64>,
    pub ratios: Option<(f64, f64, f64)>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
    }

    pub fn parse(text: &str) -> Result<Self, toml::de::Error> {
        toml::from_str(text)
    }

    pub fn load_optional(path: Option<&Path>) -> Result<Self, CliError> {
        path.map(Self::load).transpose().map(Option::unwrap_or_default)
    }
}

/// Augmentation values as given on the command line or in the environment.
#[derive(Debug, Clone, Default)]
pub struct AugmentOverrides {
    pub images: Option<PathBuf>,
    pub masks: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub strategy: Option<String>,
    pub alpha: Option<f64>,
    pub iterations: Option<usize>,
    pub kernel_size: Option<usize>,
    pub big_t: Option<f64>,
    pub overlap_threshold: Option<f64>,
    pub seed: Option<u64>,
    pub copies: Option<usize>,
    pub workers: Option<usize>,
    pub binarize_masks: bool,
    pub dump_potential: bool,
    pub geo: bool,
}

/// Settings echoed into every metadata file. Excludes the output directory
/// and the worker count so neither changes output bytes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub images: PathBuf,
    pub masks: PathBuf,
    pub augmentation: AugmentationConfig,
    pub geo: Option<GeoConfig>,
    pub copies: usize,
    pub binarize_masks: bool,
    pub dump_potential: bool,
}

/// Fully resolved `augment` invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct AugmentRun {
    pub config: RunConfig,
    pub out: PathBuf,
    pub workers: usize,
}

fn required(value: Option<PathBuf>, name: &str) -> Result<PathBuf, CliError> {
    value.ok_or_else(|| CliError::Usage(format!("missing required setting `{name}`")))
}

pub fn resolve_augment(cli: AugmentOverrides, file: &FileConfig) -> Result<AugmentRun, CliError> {
    let f = &file.augment;
    let defaults = AugmentationConfig::default();
    let strategy = match cli.strategy.as_deref().or(f.strategy.as_deref()) {
        Some(s) => s.parse::<Strategy>()?,
        None => defaults.strategy,
    };
    let augmentation = AugmentationConfig {
        alpha: cli.alpha.or(f.alpha).unwrap_or(defaults.alpha),
        iterations: cli.iterations.or(f.iterations).unwrap_or(defaults.iterations),
        big_t: cli.big_t.or(f.big_t).unwrap_or(defaults.big_t),
        kernel_size: cli.kernel_size.or(f.kernel_size).unwrap_or(defaults.kernel_size),
        overlap_threshold: cli
            .overlap_threshold
            .or(f.overlap_threshold)
            .unwrap_or(defaults.overlap_threshold),
        foreground_threshold: defaults.foreground_threshold,
        strategy,
        seed: cli.seed.or(f.seed).unwrap_or(defaults.seed),
    };
    augmentation.validate()?;

    let g = &file.geo;
    let geo = if cli.geo || g.enabled.unwrap_or(false) {
        let d = GeoConfig::default();
        let geo = GeoConfig {
            hflip_prob: g.hflip_prob.unwrap_or(d.hflip_prob),
            vflip_prob: g.vflip_prob.unwrap_or(d.vflip_prob),
            rotate_degrees_max: g.rotate_degrees_max.unwrap_or(d.rotate_degrees_max),
            zoom_range: g.zoom_range.unwrap_or(d.zoom_range),
            seed: augmentation.seed,
        };
        geo.validate()?;
        Some(geo)
    } else {
        None
    };

    let copies = cli.copies.or(f.copies).unwrap_or(1);
    if copies == 0 {
        return Err(CliError::Usage("copies must be at least 1".into()));
    }
    let workers = cli
        .workers
        .or(f.workers)
        .unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1))
        .max(1);

    Ok(AugmentRun {
        config: RunConfig {
            images: required(cli.images.or_else(|| f.images.clone()), "images")?,
            masks: required(cli.masks.or_else(|| f.masks.clone()), "masks")?,
            augmentation,
            geo,
            copies,
            binarize_masks: cli.binarize_masks || f.binarize_masks.unwrap_or(false),
            dump_potential: cli.dump_potential || f.dump_potential.unwrap_or(false),
        },
        out: required(cli.out.or_else(|| f.out.clone()), "out")?,
        workers,
    })
}

pub fn resolve_split(mode: Option<&str>, seed: Option<u64>, file: &FileConfig) -> Result<SplitSpec, CliError> {
    let s = &file.split;
    let seed = seed.or(s.seed);
    let mode = match mode.or(s.mode.as_deref()).unwrap_or("fix") {
        "fix" => SplitMode::Fix,
        "seeded" => SplitMode::Seeded(
            seed.ok_or_else(|| CliError::Usage("seeded mode needs --seed".into()))?,
        ),
        other => return Err(CliError::Usage(format!("unknown split mode `{other}`"))),
    };
    let spec = SplitSpec {
        mode,
        ratios: s.ratios.unwrap_or(SplitSpec::fix().ratios),
    };
    spec.validate()?;
    Ok(spec)
}
