//! Copy-paste augmentation: the potential-guided exclusive pasting loop and
//! the ablation strategies it is compared against.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mask_geometry::{extract_foreground, ForegroundPatch, DEFAULT_FOREGROUND_THRESHOLD};
use crate::potential::{MeanKernel, PotentialMap, Selection, DEFAULT_BIG_T, DEFAULT_KERNEL_SIZE};
use crate::raster::{BoundingBox, Coord, Image, LabelMap, CHANNELS};
use crate::rng::SplitMix64;
use crate::scalar::Scalar;

pub const DEFAULT_ALPHA: f64 = 0.7;
pub const DEFAULT_ITERATIONS: usize = 10;
/// Uniform redraws allowed per round before the non-overlap strategy gives up on it.
pub const REJECTION_BUDGET: usize = 50;
/// Patch pixels above this label take part in overlap checks and foreground-only blending.
pub const PATCH_FOREGROUND_LEVEL: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    /// Potential-map placement with overlap revocation.
    Sep,
    /// Uniform placement, no checks.
    Random,
    /// Uniform placement with overlap rejection.
    NonOverlap,
    /// Like `Sep`, but only patch-foreground pixels are blended.
    ForegroundOnly,
    /// Like `Sep`, but the patch comes from another sample.
    CrossFrame,
}

impl Strategy {
    pub const ALL: [Strategy; 5] = [
        Strategy::Sep,
        Strategy::Random,
        Strategy::NonOverlap,
        Strategy::ForegroundOnly,
        Strategy::CrossFrame,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Strategy::Sep => "sep",
            Strategy::Random => "random",
            Strategy::NonOverlap => "non_overlap",
            Strategy::ForegroundOnly => "foreground_only",
            Strategy::CrossFrame => "cross_frame",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let normalized = s.trim().to_ascii_lowercase().replace('-', "_");
        Strategy::ALL
            .into_iter()
            .find(|st| st.as_str() == normalized)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown strategy `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AugmentationConfig {
    /// Weight kept by the existing pixels in the convex blend.
    pub alpha: f64,
    pub iterations: usize,
    pub big_t: f64,
    pub kernel_size: usize,
    /// Existing labels above this value count as polyp in the overlap check.
    pub overlap_threshold: f64,
    /// Labels above this value count as foreground for the bounding box and map init.
    pub foreground_threshold: f64,
    pub strategy: Strategy,
    pub seed: u64,
}

impl Default for AugmentationConfig {
    fn default() -> Self {
        Self {
            alpha: DEFAULT_ALPHA,
            iterations: DEFAULT_ITERATIONS,
            big_t: DEFAULT_BIG_T,
            kernel_size: DEFAULT_KERNEL_SIZE,
            overlap_threshold: 0.0,
            foreground_threshold: DEFAULT_FOREGROUND_THRESHOLD,
            strategy: Strategy::Sep,
            seed: 0,
        }
    }
}

impl AugmentationConfig {
    pub fn with_strategy(strategy: Strategy) -> Self {
        Self {
            strategy,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(Error::InvalidConfig(format!("alpha must lie in (0, 1], got {}", self.alpha)));
        }
        if self.iterations == 0 {
            return Err(Error::InvalidConfig("iterations must be at least 1".into()));
        }
        if !(self.big_t > 1.0) || !self.big_t.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "big_t must be finite and exceed 1, got {}",
                self.big_t
            )));
        }
        if !(0.0..1.0).contains(&self.overlap_threshold) {
            return Err(Error::InvalidConfig(format!(
                "overlap_threshold must lie in [0, 1), got {}",
                self.overlap_threshold
            )));
        }
        if !(0.0..1.0).contains(&self.foreground_threshold) {
            return Err(Error::InvalidConfig(format!(
                "foreground_threshold must lie in [0, 1), got {}",
                self.foreground_threshold
            )));
        }
        MeanKernel::new(self.kernel_size).map(|_| ())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RevokeReason {
    /// The patch polyp would land on existing polyp.
    PolypOverlap,
    /// Every redraw of the round overlapped.
    RejectionBudget,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PasteAttempt {
    pub round: usize,
    pub candidate: Coord,
    pub region: BoundingBox,
    pub accepted: bool,
    pub reason: Option<RevokeReason>,
}

/// Audit log of one augmented sample.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PasteRecord {
    /// Box the patch was cropped from, in the donor's coordinates.
    pub patch_box: Option<BoundingBox>,
    /// Donor sample for cross-frame pasting.
    pub donor_id: Option<String>,
    pub attempts: Vec<PasteAttempt>,
    pub accepted_count: usize,
}

impl PasteRecord {
    fn accept(&mut self, round: usize, region: BoundingBox) {
        self.attempts.push(PasteAttempt {
            round,
            candidate: region.top_left(),
            region,
            accepted: true,
            reason: None,
        });
        self.accepted_count += 1;
    }

    fn revoke(&mut self, round: usize, region: BoundingBox, reason: RevokeReason) {
        self.attempts.push(PasteAttempt {
            round,
            candidate: region.top_left(),
            region,
            accepted: false,
            reason: Some(reason),
        });
    }

    pub fn accepted(&self) -> impl Iterator<Item = &PasteAttempt> {
        self.attempts.iter().filter(|a| a.accepted)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AugmentedSample<S> {
    pub image: Image<S>,
    pub label: LabelMap<S>,
    pub record: PasteRecord,
    pub source_id: String,
    /// Final potential map, for strategies that use one.
    pub potential: Option<PotentialMap<S>>,
}

/// A sample offered as patch donor for cross-frame pasting.
#[derive(Debug, Clone, PartialEq)]
pub struct Donor<S> {
    pub id: String,
    pub image: Image<S>,
    pub label: LabelMap<S>,
}

/// Random-access source of donor samples, possibly loaded lazily.
pub trait DonorPool<S> {
    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn fetch(&self, index: usize) -> Result<Donor<S>>;
}

impl<S: Scalar> DonorPool<S> for [Donor<S>] {
    fn len(&self) -> usize {
        <[Donor<S>]>::len(self)
    }

    fn fetch(&self, index: usize) -> Result<Donor<S>> {
        Ok(self[index].clone())
    }
}

impl<S: Scalar> DonorPool<S> for Vec<Donor<S>> {
    fn len(&self) -> usize {
        self.as_slice().len()
    }

    fn fetch(&self, index: usize) -> Result<Donor<S>> {
        Ok(self[index].clone())
    }
}

fn check_region<S: Scalar>(label: &LabelMap<S>, region: BoundingBox, patch_extent: (usize, usize)) -> Result<()> {
    if region.extent() != patch_extent {
        return Err(Error::ShapeMismatch {
            expected: region.extent(),
            found: patch_extent,
        });
    }
    region.check_within(label.height(), label.width())
}

/// Convex blend of `patch` into `region`:
/// `x ← alpha·x + (1 − alpha)·patch` for both image and label.
///
/// With `mask_to_foreground`, pixels whose patch label is at most 0.5 are left untouched.
pub fn blend_region<S: Scalar>(
    image: &mut Image<S>,
    label: &mut LabelMap<S>,
    region: BoundingBox,
    patch: &ForegroundPatch<S>,
    alpha: S,
    mask_to_foreground: bool,
) -> Result<()> {
    if image.dims() != label.dims() {
        return Err(Error::ShapeMismatch {
            expected: image.dims(),
            found: label.dims(),
        });
    }
    if patch.image.dims() != patch.label.dims() {
        return Err(Error::ShapeMismatch {
            expected: patch.label.dims(),
            found: patch.image.dims(),
        });
    }
    check_region(label, region, patch.label.dims())?;
    let keep = alpha;
    let take = S::one() - alpha;
    let fg_level = S::lit(PATCH_FOREGROUND_LEVEL);
    for pr in 0..region.height() {
        for pc in 0..region.width() {
            let patch_label = patch.label.get(pr, pc);
            if mask_to_foreground && patch_label <= fg_level {
                continue;
            }
            let (r, c) = (region.row_start + pr, region.col_start + pc);
            let src = patch.image.pixel(pr, pc);
            let dst = image.pixel_mut(r, c);
            for ch in 0..CHANNELS {
                dst[ch] = keep * dst[ch] + take * src[ch];
            }
            label.set(r, c, keep * label.get(r, c) + take * patch_label);
        }
    }
    Ok(())
}

/// Whether any patch-foreground pixel would land on a label above `threshold`.
pub fn has_polyp_overlap<S: Scalar>(
    label: &LabelMap<S>,
    region: BoundingBox,
    patch_label: &LabelMap<S>,
    threshold: S,
) -> Result<bool> {
    check_region(label, region, patch_label.dims())?;
    let fg_level = S::lit(PATCH_FOREGROUND_LEVEL);
    for pr in 0..region.height() {
        let patch_row = patch_label.row(pr);
        let label_row = &label.row(region.row_start + pr)[region.col_start..region.col_end];
        if patch_row
            .iter()
            .zip(label_row)
            .any(|(&p, &l)| p > fg_level && l > threshold)
        {
            return Ok(true);
        }
    }
    Ok(false)
}

/// Potential-guided exclusive pasting with the default full-rectangle blend.
pub fn augment_sep<S: Scalar>(
    image: &Image<S>,
    label: &LabelMap<S>,
    config: &AugmentationConfig,
    rng: &mut SplitMix64,
    source_id: &str,
) -> Result<AugmentedSample<S>> {
    config.validate()?;
    let patch = extract_foreground(image, label, S::lit(config.foreground_threshold))?;
    potential_guided(image, label, patch, None, config, false, rng, source_id)
}

/// Runs the strategy named in `config`. `pool` is only consulted by
/// [`Strategy::CrossFrame`].
pub fn augment_variant<S: Scalar, P: DonorPool<S> + ?Sized>(
    image: &Image<S>,
    label: &LabelMap<S>,
    config: &AugmentationConfig,
    rng: &mut SplitMix64,
    source_id: &str,
    pool: Option<&P>,
) -> Result<AugmentedSample<S>> {
    config.validate()?;
    if image.dims() != label.dims() {
        return Err(Error::ShapeMismatch {
            expected: image.dims(),
            found: label.dims(),
        });
    }
    let threshold = S::lit(config.foreground_threshold);
    match config.strategy {
        Strategy::Sep => augment_sep(image, label, config, rng, source_id),
        Strategy::ForegroundOnly => {
            let patch = extract_foreground(image, label, threshold)?;
            potential_guided(image, label, patch, None, config, true, rng, source_id)
        }
        Strategy::CrossFrame => {
            let pool = pool.filter(|p| !p.is_empty()).ok_or(Error::EmptyPool)?;
            // The target must itself carry a polyp, like every other strategy.
            extract_foreground(image, label, threshold)?;
            let donor = pool.fetch(rng.below_usize(pool.len()))?;
            let patch = extract_foreground(&donor.image, &donor.label, threshold)?;
            potential_guided(image, label, patch, Some(donor.id), config, false, rng, source_id)
        }
        Strategy::Random => {
            let patch = extract_foreground(image, label, threshold)?;
            uniform_placement(image, label, patch, config, false, rng, source_id)
        }
        Strategy::NonOverlap => {
            let patch = extract_foreground(image, label, threshold)?;
            uniform_placement(image, label, patch, config, true, rng, source_id)
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn potential_guided<S: Scalar>(
    image: &Image<S>,
    label: &LabelMap<S>,
    patch: ForegroundPatch<S>,
    donor_id: Option<String>,
    config: &AugmentationConfig,
    mask_to_foreground: bool,
    rng: &mut SplitMix64,
    source_id: &str,
) -> Result<AugmentedSample<S>> {
    let kernel = MeanKernel::new(config.kernel_size)?;
    let alpha = S::lit(config.alpha);
    let overlap_threshold = S::lit(config.overlap_threshold);
    let (ph, pw) = patch.extent();

    let mut map = PotentialMap::init(
        label,
        (ph, pw),
        S::lit(config.foreground_threshold),
        S::lit(config.big_t),
        rng,
    )?;
    let mut out_image = image.clone();
    let mut out_label = label.clone();
    let mut record = PasteRecord {
        patch_box: Some(patch.source_box),
        donor_id,
        ..PasteRecord::default()
    };

    for round in 0..config.iterations {
        let candidate = match map.select_candidate() {
            Selection::At(c) => c,
            Selection::Exhausted => break,
        };
        let region = BoundingBox::at(candidate, ph, pw);
        if has_polyp_overlap(&out_label, region, &patch.label, overlap_threshold)? {
            map.mark_coord(candidate)?;
            record.revoke(round, region, RevokeReason::PolypOverlap);
        } else {
            blend_region(&mut out_image, &mut out_label, region, &patch, alpha, mask_to_foreground)?;
            map.mark_forbidden(region)?;
            record.accept(round, region);
        }
        map.spread(kernel);
        // Spreading bleeds finite values into the border strip; keep it unselectable.
        map.suppress_infeasible();
    }

    Ok(AugmentedSample {
        image: out_image,
        label: out_label,
        record,
        source_id: source_id.to_owned(),
        potential: Some(map),
    })
}

fn uniform_placement<S: Scalar>(
    image: &Image<S>,
    label: &LabelMap<S>,
    patch: ForegroundPatch<S>,
    config: &AugmentationConfig,
    reject_overlap: bool,
    rng: &mut SplitMix64,
    source_id: &str,
) -> Result<AugmentedSample<S>> {
    let alpha = S::lit(config.alpha);
    let overlap_threshold = S::lit(config.overlap_threshold);
    let (ph, pw) = patch.extent();
    let (h, w) = label.dims();
    let rows = h + 1 - ph;
    let cols = w + 1 - pw;

    let mut out_image = image.clone();
    let mut out_label = label.clone();
    let mut record = PasteRecord {
        patch_box: Some(patch.source_box),
        ..PasteRecord::default()
    };
    let draw = |rng: &mut SplitMix64| {
        let top_left = Coord::new(rng.below_usize(rows), rng.below_usize(cols));
        BoundingBox::at(top_left, ph, pw)
    };

    for round in 0..config.iterations {
        let mut region = draw(rng);
        if reject_overlap {
            let mut rejections = 0;
            while has_polyp_overlap(&out_label, region, &patch.label, overlap_threshold)? {
                rejections += 1;
                if rejections == REJECTION_BUDGET {
                    break;
                }
                region = draw(rng);
            }
            if rejections == REJECTION_BUDGET {
                record.revoke(round, region, RevokeReason::RejectionBudget);
                continue;
            }
        }
        blend_region(&mut out_image, &mut out_label, region, &patch, alpha, false)?;
        record.accept(round, region);
    }

    Ok(AugmentedSample {
        image: out_image,
        label: out_label,
        record,
        source_id: source_id.to_owned(),
        potential: None,
    })
}
