//! Spatially exclusive copy-paste augmentation for binary-foreground
//! segmentation data.
//!
//! The foreground rectangle of an image is cropped once and pasted back into
//! the same image at locations proposed by a random potential map. Pastes
//! whose polyp would land on existing polyp are revoked, accepted pastes are
//! blended as a convex combination of image and label, and the map is
//! mean-filtered after each round so later pastes keep away from earlier
//! ones. Ablation strategies, geometric augmentation, dataset splitting and
//! Dice/IoU evaluation complete the toolkit.
//!
//! All numeric code is generic over [`Scalar`] (`f32` or `f64`); the `*F64`
//! and `*F32` aliases below name the concrete instantiations.

pub mod dataset;
pub mod error;
pub mod geo;
pub mod io;
pub mod mask_geometry;
pub mod metrics;
pub mod pasting;
pub mod potential;
pub mod raster;
pub mod rng;
pub mod scalar;

pub use dataset::{scan_dataset, split, Partition, SampleRef, SplitMode, SplitSpec};
pub use error::{Error, Result};
pub use geo::{apply_geo, GeoConfig, GeoParams};
pub use mask_geometry::{crop_patch, foreground_bbox, ForegroundPatch};
pub use metrics::{dice_iou, error_map, evaluate_dirs, MetricsReport};
pub use pasting::{
    augment_sep, augment_variant, blend_region, has_polyp_overlap, AugmentationConfig, AugmentedSample,
    Donor, DonorPool, PasteAttempt, PasteRecord, RevokeReason, Strategy,
};
pub use potential::{MeanKernel, PotentialMap, Selection};
pub use raster::{BoundingBox, Coord, Image, LabelMap};
pub use rng::SplitMix64;
pub use scalar::Scalar;

pub type ImageF64 = Image<f64>;
pub type ImageF32 = Image<f32>;
pub type LabelMapF64 = LabelMap<f64>;
pub type LabelMapF32 = LabelMap<f32>;
pub type PotentialMapF64 = PotentialMap<f64>;
pub type PotentialMapF32 = PotentialMap<f32>;
pub type ForegroundPatchF64 = ForegroundPatch<f64>;
pub type AugmentedSampleF64 = AugmentedSample<f64>;
pub type AugmentedSampleF32 = AugmentedSample<f32>;
