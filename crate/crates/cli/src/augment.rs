//! Batch augmentation of an image/mask directory pair.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::Serialize;

use sepaug_core::dataset::{scan_dataset, SampleRef};
use sepaug_core::geo::{apply_geo, GeoParams};
use sepaug_core::io::{read_image, read_mask_binary, write_gray, write_image, write_label};
use sepaug_core::mask_geometry::DEFAULT_FOREGROUND_THRESHOLD;
use sepaug_core::rng::job_seed;
use sepaug_core::{augment_variant, Donor, DonorPool, Error as CoreError, PasteRecord, SplitMix64};

use crate::config::{AugmentRun, RunConfig};
use crate::error::CliError;

/// Donors read from disk on demand.
struct DiskPool<'a> {
    samples: Vec<&'a SampleRef>,
}

impl DonorPool<f64> for DiskPool<'_> {
    fn len(&self) -> usize {
        self.samples.len()
    }

    fn fetch(&self, index: usize) -> sepaug_core::Result<Donor<f64>> {
        let s = self.samples[index];
        Ok(Donor {
            id: s.id.clone(),
            image: read_image(&s.image_path)?,
            label: read_mask_binary(&s.mask_path, DEFAULT_FOREGROUND_THRESHOLD)?,
        })
    }
}

#[derive(Serialize)]
struct SampleMetadata<'a> {
    source_id: &'a str,
    copy_index: usize,
    job_seed: u64,
    image: String,
    mask: String,
    geo: Option<GeoParams>,
    record: &'a PasteRecord,
    config: &'a RunConfig,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum JobOutcome {
    Written { id: String, copy: usize, accepted: usize },
    Skipped { id: String, copy: usize, reason: String },
}

#[derive(Debug, Clone)]
pub struct AugmentSummary {
    pub samples: usize,
    pub outcomes: Vec<JobOutcome>,
    pub scan_issues: Vec<String>,
    pub elapsed: Duration,
}

impl AugmentSummary {
    pub fn written(&self) -> usize {
        self.outcomes
            .iter()
            .filter(|o| matches!(o, JobOutcome::Written { .. }))
            .count()
    }

    /// Number of outputs per accepted-paste count.
    pub fn histogram(&self) -> BTreeMap<usize, usize> {
        let mut h = BTreeMap::new();
        for o in &self.outcomes {
            if let JobOutcome::Written { accepted, .. } = o {
                *h.entry(*accepted).or_insert(0) += 1;
            }
        }
        h
    }

    pub fn render(&self) -> String {
        let mut out = format!(
            "samples: {}\noutputs written: {}\nskipped: {}\n",
            self.samples,
            self.written(),
            self.outcomes.len() - self.written()
        );
        for o in &self.outcomes {
            if let JobOutcome::Skipped { id, copy, reason } = o {
                out.push_str(&format!("  skipped {id} #{copy}: {reason}\n"));
            }
        }
        out.push_str("accepted pastes per output:\n");
        for (count, n) in self.histogram() {
            out.push_str(&format!("  {count:>3}: {n}\n"));
        }
        out.push_str(&format!("wall time: {:.2}s\n", self.elapsed.as_secs_f64()));
        out
    }
}

fn output_name(id: &str, copy: usize) -> String {
    format!("{id}_{copy}")
}

fn run_job(
    sample: &SampleRef,
    copy: usize,
    all: &[SampleRef],
    config: &RunConfig,
    out: &Path,
) -> Result<JobOutcome, CliError> {
    let seed = job_seed(config.augmentation.seed, &sample.id, copy as u64);
    let mut rng = SplitMix64::new(seed);
    let mut image = read_image::<f64>(&sample.image_path)?;
    let mut label = read_mask_binary::<f64>(&sample.mask_path, DEFAULT_FOREGROUND_THRESHOLD)?;

    let geo = match &config.geo {
        Some(geo_config) => {
            let (img, lab, params) = apply_geo(&image, &label, geo_config, &mut rng)?;
            image = img;
            label = lab;
            Some(params)
        }
        None => None,
    };

    let pool = DiskPool {
        samples: all.iter().filter(|s| s.id != sample.id).collect(),
    };
    let augmented = match augment_variant(&image, &label, &config.augmentation, &mut rng, &sample.id, Some(&pool)) {
        Ok(a) => a,
        Err(e) if e.is_io() => return Err(e.into()),
        Err(e @ (CoreError::EmptyForeground | CoreError::PatchTooLarge { .. } | CoreError::EmptyPool)) => {
            return Ok(JobOutcome::Skipped {
                id: sample.id.clone(),
                copy,
                reason: e.to_string(),
            })
        }
        Err(e) => return Err(e.into()),
    };

    let name = output_name(&sample.id, copy);
    let image_rel = PathBuf::from("images").join(format!("{name}.png"));
    let mask_rel = PathBuf::from("masks").join(format!("{name}.png"));
    write_image(&out.join(&image_rel), &augmented.image)?;
    write_label(&out.join(&mask_rel), &augmented.label, config.binarize_masks)?;
    if config.dump_potential {
        if let Some(map) = &augmented.potential {
            let path = out.join("potential").join(format!("{name}.png"));
            write_gray(&path, map.height(), map.width(), &map.normalized())?;
        }
    }

    let meta = SampleMetadata {
        source_id: &sample.id,
        copy_index: copy,
        job_seed: seed,
        image: image_rel.to_string_lossy().replace('\\', "/"),
        mask: mask_rel.to_string_lossy().replace('\\', "/"),
        geo,
        record: &augmented.record,
        config,
    };
    let meta_path = out.join("meta").join(format!("{name}.json"));
    let mut json = serde_json::to_vec_pretty(&meta).map_err(|e| CliError::Data(e.to_string()))?;
    json.push(b'\n');
    if let Some(dir) = meta_path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    }
    std::fs::write(&meta_path, json).map_err(|e| CliError::Io(format!("{}: {e}", meta_path.display())))?;

    Ok(JobOutcome::Written {
        id: sample.id.clone(),
        copy,
        accepted: augmented.record.accepted_count,
    })
}

pub fn cmd_augment(run: &AugmentRun) -> Result<AugmentSummary, CliError> {
    let started = Instant::now();
    let config = &run.config;
    let report = scan_dataset(&config.images, &config.masks)?;
    let samples = report.samples;
    std::fs::create_dir_all(&run.out).map_err(|e| CliError::Io(format!("{}: {e}", run.out.display())))?;

    let jobs: Vec<(usize, usize)> = (0..samples.len())
        .flat_map(|i| (0..config.copies).map(move |k| (i, k)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(run.workers)
        .build()
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let results: Vec<Result<JobOutcome, CliError>> = pool.install(|| {
        jobs.par_iter()
            .map(|&(i, k)| run_job(&samples[i], k, &samples, config, &run.out))
            .collect()
    });
    let outcomes = results.into_iter().collect::<Result<Vec<_>, _>>()?;

    let summary = AugmentSummary {
        samples: samples.len(),
        outcomes,
        scan_issues: report.issues.iter().map(ToString::to_string).collect(),
        elapsed: started.elapsed(),
    };
    if summary.written() == 0 {
        return Err(CliError::Data(format!(
            "no processable samples\n{}",
            summary.render()
        )));
    }
    Ok(summary)
}
