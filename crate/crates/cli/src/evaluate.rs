//! `split`, `eval` and `errormap`.

use std::path::{Path, PathBuf};

use sepaug_core::dataset::{official_split, scan_dataset, split, write_manifest, Partition, SampleRef};
use sepaug_core::io::{read_mask, write_label};
use sepaug_core::metrics::match_stems;
use sepaug_core::{error_map, evaluate_dirs, LabelMap, MetricsReport, SplitSpec};

use crate::error::CliError;

fn io_err(path: &Path, e: std::io::Error) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

pub enum SplitSource<'a> {
    Spec(SplitSpec),
    /// Train, validation and test list files.
    Lists([&'a Path; 3]),
}

pub struct SplitOutcome {
    pub partition: Partition<String>,
    pub scan_issues: Vec<String>,
}

pub fn cmd_split(images: &Path, masks: &Path, out: &Path, source: SplitSource<'_>) -> Result<SplitOutcome, CliError> {
    let report = scan_dataset(images, masks)?;
    let partition: Partition<SampleRef> = match source {
        SplitSource::Spec(spec) => split(&report.samples, &spec)?,
        SplitSource::Lists(lists) => official_split(&report.samples, lists)?,
    };
    let partition = partition.map(|s| s.id);
    std::fs::create_dir_all(out).map_err(|e| io_err(out, e))?;
    for (name, ids) in [("train", &partition.train), ("val", &partition.val), ("test", &partition.test)] {
        write_manifest(&out.join(format!("{name}.txt")), ids.iter().map(String::as_str))?;
    }
    Ok(SplitOutcome {
        partition,
        scan_issues: report.issues.iter().map(ToString::to_string).collect(),
    })
}

/// Percentages as printed on stdout.
pub fn format_means(report: &MetricsReport) -> String {
    format!(
        "mDice(%): {:.2}\nmIoU(%): {:.2}\n",
        report.mean_dice * 100.0,
        report.mean_iou * 100.0
    )
}

pub fn cmd_eval(pred: &Path, gt: &Path, out: Option<&Path>, threshold: f64) -> Result<MetricsReport, CliError> {
    let report = evaluate_dirs(pred, gt, threshold)?;
    if let Some(out) = out {
        std::fs::create_dir_all(out).map_err(|e| io_err(out, e))?;
        let mut json = serde_json::to_vec_pretty(&report).map_err(|e| CliError::Data(e.to_string()))?;
        json.push(b'\n');
        let json_path = out.join("report.json");
        std::fs::write(&json_path, json).map_err(|e| io_err(&json_path, e))?;
        let table_path = out.join("report.txt");
        std::fs::write(&table_path, report.to_table()).map_err(|e| io_err(&table_path, e))?;
    }
    Ok(report)
}

/// Writes one error map per shared stem; returns the written paths.
pub fn cmd_errormap(pred: &Path, gt: &Path, out: &Path, threshold: f64) -> Result<Vec<PathBuf>, CliError> {
    let (matched, _) = match_stems(pred, gt)?;
    if matched.is_empty() {
        return Err(sepaug_core::Error::EmptyEvaluation.into());
    }
    let mut written = Vec::with_capacity(matched.len());
    for (id, pred_path, gt_path) in matched {
        let p: LabelMap<f64> = read_mask(&pred_path)?;
        let g: LabelMap<f64> = read_mask(&gt_path)?;
        let map = error_map(&p, &g, threshold)?;
        // White/black is identical across channels; store it as grayscale.
        let gray = LabelMap::from_fn(map.height(), map.width(), |r, c| map.pixel(r, c)[0])?;
        let path = out.join(format!("{id}.png"));
        write_label(&path, &gray, false)?;
        written.push(path);
    }
    Ok(written)
}
