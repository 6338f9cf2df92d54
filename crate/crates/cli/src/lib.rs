//! `sepaug` command-line tool: batch augmentation, dataset splitting,
//! evaluation and error maps.

pub mod augment;
pub mod config;
pub mod error;
pub mod evaluate;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use sepaug_core::metrics::DEFAULT_METRIC_THRESHOLD;

use crate::config::{resolve_augment, resolve_split, AugmentOverrides, FileConfig};
use crate::error::{CliError, EXIT_OK, EXIT_USAGE};
use crate::evaluate::{format_means, SplitSource};

#[derive(Debug, Parser)]
#[command(name = "sepaug", version, about = "Spatially exclusive copy-paste augmentation for segmentation datasets")]
pub struct Cli {
    /// TOML config file (sections [augment], [geo], [split]).
    #[arg(long, global = true, env = "SEPAUG_CONFIG")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Synthesize augmented image/mask/metadata triples.
    Augment(AugmentArgs),
    /// Write train/val/test manifests.
    Split(SplitArgs),
    /// Compute mDice and mIoU of predictions against ground truth.
    Eval(EvalArgs),
    /// Write per-sample error maps (white where prediction equals ground truth).
    Errormap(ErrormapArgs),
}

#[derive(Debug, Args)]
pub struct AugmentArgs {
    #[arg(long, env = "SEPAUG_IMAGES")]
    pub images: Option<PathBuf>,
    #[arg(long, env = "SEPAUG_MASKS")]
    pub masks: Option<PathBuf>,
    #[arg(long, env = "SEPAUG_OUT")]
    pub out: Option<PathBuf>,
    /// sep, random, non_overlap, foreground_only or cross_frame.
    #[arg(long, env = "SEPAUG_STRATEGY")]
    pub strategy: Option<String>,
    #[arg(long, env = "SEPAUG_ALPHA")]
    pub alpha: Option<f64>,
    #[arg(long, env = "SEPAUG_ITERS")]
    pub iters: Option<usize>,
    /// Mean-filter size (odd).
    #[arg(long, env = "SEPAUG_KERNEL")]
    pub kernel: Option<usize>,
    /// Potential assigned to forbidden top-left positions.
    #[arg(long = "big-t", env = "SEPAUG_BIG_T")]
    pub big_t: Option<f64>,
    #[arg(long, env = "SEPAUG_OVERLAP_THRESHOLD")]
    pub overlap_threshold: Option<f64>,
    #[arg(long, env = "SEPAUG_SEED")]
    pub seed: Option<u64>,
    #[arg(long, env = "SEPAUG_COPIES")]
    pub copies: Option<usize>,
    #[arg(long, env = "SEPAUG_WORKERS")]
    pub workers: Option<usize>,
    /// Apply random flip/rotation/zoom before pasting.
    #[arg(long, env = "SEPAUG_GEO")]
    pub geo: bool,
    /// Also write the final potential map of each output as grayscale.
    #[arg(long, env = "SEPAUG_DUMP_POTENTIAL")]
    pub dump_potential: bool,
    /// Write hard {0,255} masks instead of soft ones.
    #[arg(long, env = "SEPAUG_BINARIZE_MASKS")]
    pub binarize_masks: bool,
}

#[derive(Debug, Args)]
pub struct SplitArgs {
    #[arg(long, env = "SEPAUG_IMAGES")]
    pub images: PathBuf,
    #[arg(long, env = "SEPAUG_MASKS")]
    pub masks: PathBuf,
    #[arg(long, env = "SEPAUG_OUT")]
    pub out: PathBuf,
    /// fix or seeded.
    #[arg(long, env = "SEPAUG_MODE")]
    pub mode: Option<String>,
    #[arg(long, env = "SEPAUG_SEED")]
    pub seed: Option<u64>,
    /// Comma-separated train,val,test list files.
    #[arg(long, value_delimiter = ',', conflicts_with_all = ["mode", "seed"])]
    pub official_split: Option<Vec<PathBuf>>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub pred: PathBuf,
    #[arg(long)]
    pub gt: PathBuf,
    /// Directory for report.json and report.txt.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_METRIC_THRESHOLD)]
    pub threshold: f64,
}

#[derive(Debug, Args)]
pub struct ErrormapArgs {
    #[arg(long)]
    pub pred: PathBuf,
    #[arg(long)]
    pub gt: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = DEFAULT_METRIC_THRESHOLD)]
    pub threshold: f64,
}

impl From<AugmentArgs> for AugmentOverrides {
    fn from(a: AugmentArgs) -> Self {
        AugmentOverrides {
            images: a.images,
            masks: a.masks,
            out: a.out,
            strategy: a.strategy,
            alpha: a.alpha,
            iterations: a.iters,
            kernel_size: a.kernel,
            big_t: a.big_t,
            overlap_threshold: a.overlap_threshold,
            seed: a.seed,
            copies: a.copies,
            workers: a.workers,
            binarize_masks: a.binarize_masks,
            dump_potential: a.dump_potential,
            geo: a.geo,
        }
    }
}

/// Executes a parsed command, writing human-readable output to `stdout`.
pub fn execute(cli: Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<(), CliError> {
    let file = FileConfig::load_optional(cli.config.as_deref())?;
    let print = |w: &mut dyn Write, s: &str| {
        w.write_all(s.as_bytes())
            .map_err(|e| CliError::Io(format!("stdout: {e}")))
    };
    match cli.command {
        Command::Augment(args) => {
            let run = resolve_augment(args.into(), &file)?;
            let summary = augment::cmd_augment(&run)?;
            for issue in &summary.scan_issues {
                print(stderr, &format!("warning: {issue}\n"))?;
            }
            print(stdout, &summary.render())
        }
        Command::Split(args) => {
            let lists = args.official_split.as_ref();
            let source = match lists {
                Some(l) if l.len() != 3 => {
                    return Err(CliError::Usage(
                        "--official-split takes exactly three files: train,val,test".into(),
                    ))
                }
                Some(l) => SplitSource::Lists([&l[0], &l[1], &l[2]]),
                None => SplitSource::Spec(resolve_split(args.mode.as_deref(), args.seed, &file)?),
            };
            let outcome = evaluate::cmd_split(&args.images, &args.masks, &args.out, source)?;
            for issue in &outcome.scan_issues {
                print(stderr, &format!("warning: {issue}\n"))?;
            }
            let p = &outcome.partition;
            print(
                stdout,
                &format!("train: {}\nval: {}\ntest: {}\n", p.train.len(), p.val.len(), p.test.len()),
            )
        }
        Command::Eval(args) => {
            let report = evaluate::cmd_eval(&args.pred, &args.gt, args.out.as_deref(), args.threshold)?;
            for id in &report.missing_predictions {
                print(stderr, &format!("warning: {id}: missing prediction\n"))?;
            }
            print(stdout, &format_means(&report))
        }
        Command::Errormap(args) => {
            let written = evaluate::cmd_errormap(&args.pred, &args.gt, &args.out, args.threshold)?;
            print(stdout, &format!("error maps written: {}\n", written.len()))
        }
    }
}

/// Parses `args` (including the program name) and runs; returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let rendered = e.render().to_string();
            let _ = if e.use_stderr() {
                stderr.write_all(rendered.as_bytes())
            } else {
                stdout.write_all(rendered.as_bytes())
            };
            return code;
        }
    };
    match execute(cli, stdout, stderr) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}
