//! Command-line interface: `prep`, `augment`, `preview` and `stats`.
//!
//! Every command that draws random numbers prints its effective seed and the
//! fully resolved policy before doing any work.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use mixcut_core::{AugmentPolicy, CenterSpec, ImageBatch, LabelBatch, LambdaSpec, Method, RatioSpec};

use crate::ferplus::{self, PrepOptions};
use crate::pipeline::{self, AugmentOptions, DEFAULT_BATCH_SIZE};
use crate::stats::{self, StatsConfig, DEFAULT_TRIALS};
use crate::{mxb1, policy_file, preview, Error, Result};

pub const SEED_ENV: &str = "MSDA_SEED";

#[derive(Debug, Parser)]
#[command(name = "mixcut", version, about = "MixCut and related mixed-sample augmentations")]
#[command(after_help = "Exit codes: 0 success, 2 validation failure, 3 IO or parse failure.")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Convert fer2013.csv + FER+ votes into MXB1 tensors and a manifest.
    Prep(PrepArgs),
    /// Augment an MXB1 image/label pair batch by batch.
    Augment(AugmentArgs),
    /// Render augmented samples as a PNG grid.
    #[command(after_help = "Cells are separated and surrounded by a 2-pixel black border.")]
    Preview(PreviewArgs),
    /// Report sampling statistics for a policy.
    Stats(StatsArgs),
}

#[derive(Debug, Args)]
pub struct PrepArgs {
    /// fer2013.csv (emotion,pixels,Usage)
    #[arg(long)]
    pub fer: PathBuf,
    /// FER+ vote file (fer2013new.csv)
    #[arg(long)]
    pub ferplus: PathBuf,
    /// Output prefix
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 48)]
    pub height: usize,
    #[arg(long, default_value_t = 48)]
    pub width: usize,
}

#[derive(Clone, Debug, Default, Args)]
pub struct PolicyArgs {
    /// key=value policy file; conflicts with the inline flags
    #[arg(long, conflicts_with_all = ["method", "lambda", "beta", "gamma", "per_sample", "center"])]
    pub policy_file: Option<PathBuf>,
    /// mixcut, cutout, mixup, cutmix or none
    #[arg(long)]
    pub method: Option<Method>,
    /// `beta11` or a fixed mixing weight
    #[arg(long)]
    pub lambda: Option<LambdaSpec>,
    /// `beta11` (1 - eta, eta ~ Beta(1,1)) or a fixed removal ratio
    #[arg(long)]
    pub beta: Option<RatioSpec>,
    /// Probability of applying the operator to a batch
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Draw parameters per sample instead of per batch
    #[arg(long)]
    pub per_sample: bool,
    /// `uniform`, `interior` or a fixed `x,y`
    #[arg(long)]
    pub center: Option<CenterSpec>,
}

impl PolicyArgs {
    pub fn resolve(&self) -> Result<AugmentPolicy> {
        if let Some(path) = &self.policy_file {
            return policy_file::read(path);
        }
        let mut p = AugmentPolicy::for_method(self.method.unwrap_or(Method::MixCut));
        if let Some(l) = self.lambda {
            p.lambda = l;
        }
        if let Some(b) = self.beta {
            p.beta = b;
        }
        if let Some(g) = self.gamma {
            p.gamma = g;
        }
        if let Some(c) = self.center {
            p.center = c;
        }
        p.per_sample |= self.per_sample;
        p.validate()?;
        Ok(p)
    }
}

#[derive(Clone, Debug, Default, Args)]
pub struct SeedArgs {
    /// RNG seed; falls back to $MSDA_SEED, then 0
    #[arg(long, env = SEED_ENV)]
    pub seed: Option<u64>,
}

impl SeedArgs {
    pub fn resolve(&self) -> (u64, bool) {
        match self.seed {
            Some(s) => (s, false),
            None => (0, true),
        }
    }
}

#[derive(Debug, Args)]
pub struct AugmentArgs {
    /// MXB1 images, N x C x H x W in [0, 1]
    #[arg(long)]
    pub in_images: PathBuf,
    /// MXB1 labels, N x K with rows summing to 1
    #[arg(long)]
    pub in_labels: PathBuf,
    /// Output prefix; writes <out>.images.mxb, <out>.labels.mxb, <out>.log.jsonl
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub seed: SeedArgs,
    #[command(flatten)]
    pub policy: PolicyArgs,
    #[arg(long, default_value_t = DEFAULT_BATCH_SIZE)]
    pub batch_size: usize,
    /// Random square crop of this size before the policy
    #[arg(long)]
    pub crop: Option<usize>,
    /// Random horizontal mirroring before the policy
    #[arg(long)]
    pub mirror: bool,
    /// Worker threads (output does not depend on this)
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Debug, Args)]
pub struct PreviewArgs {
    /// MXB1 images, N x C x H x W in [0, 1]; C must be 1 or 3
    #[arg(long)]
    pub in_images: PathBuf,
    /// Labels are optional; without them every sample is treated as class 0
    #[arg(long)]
    pub in_labels: Option<PathBuf>,
    /// Output PNG path
    #[arg(long)]
    pub out: PathBuf,
    /// Grid shape as RxC
    #[arg(long, default_value = "2x4")]
    pub grid: Grid,
    #[command(flatten)]
    pub seed: SeedArgs,
    #[command(flatten)]
    pub policy: PolicyArgs,
    #[arg(long, default_value_t = DEFAULT_BATCH_SIZE)]
    pub batch_size: usize,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    #[command(flatten)]
    pub seed: SeedArgs,
    #[command(flatten)]
    pub policy: PolicyArgs,
    /// Number of one-sample trials
    #[arg(long, default_value_t = DEFAULT_TRIALS)]
    pub trials: usize,
    #[arg(long, default_value_t = 48)]
    pub width: usize,
    #[arg(long, default_value_t = 48)]
    pub height: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Grid {
    pub rows: usize,
    pub cols: usize,
}

impl FromStr for Grid {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let (r, c) = s
            .split_once(['x', 'X'])
            .ok_or_else(|| format!("expected RxC, found `{s}`"))?;
        let parse = |v: &str| {
            v.trim()
                .parse::<usize>()
                .map_err(|_| format!("bad grid dimension `{v}`"))
        };
        let grid = Grid {
            rows: parse(r)?,
            cols: parse(c)?,
        };
        if grid.rows == 0 || grid.cols == 0 {
            return Err("grid dimensions must be positive".into());
        }
        Ok(grid)
    }
}

fn header<W: Write>(out: &mut W, seed: (u64, bool), policy: &AugmentPolicy) -> Result<()> {
    let note = if seed.1 { " (default)" } else { "" };
    writeln!(out, "seed: {}{note}", seed.0)?;
    writeln!(out, "policy: {}", policy_file::format_inline(policy))?;
    Ok(())
}

fn read_pair(images: &Path, labels: Option<&Path>) -> Result<(ImageBatch, LabelBatch)> {
    let images = mxb1::read_images(images)?;
    let labels = match labels {
        Some(path) => mxb1::read_labels(path)?,
        None => LabelBatch::one_hot(&vec![0; images.len()], 1)?,
    };
    Ok((images, labels))
}

pub fn prep<W: Write>(args: &PrepArgs, out: &mut W) -> Result<()> {
    let opts = PrepOptions {
        height: args.height,
        width: args.width,
    };
    let dataset = ferplus::prepare_ferplus_paths(&args.fer, &args.ferplus, opts)?;
    let manifest = ferplus::write_prepared(&dataset, &args.out)?;
    out.write_all(manifest.render().as_bytes())?;
    Ok(())
}

pub fn augment<W: Write>(args: &AugmentArgs, out: &mut W) -> Result<()> {
    let seed = args.seed.resolve();
    let policy = args.policy.resolve()?;
    header(out, seed, &policy)?;
    let (images, labels) = read_pair(&args.in_images, Some(&args.in_labels))?;
    let opts = AugmentOptions {
        policy,
        seed: seed.0,
        batch_size: args.batch_size,
        crop: args.crop,
        mirror: args.mirror,
        threads: args.threads,
    };
    let result = pipeline::augment_dataset(&images, &labels, &opts)?;
    let images_path = ferplus::with_suffix(&args.out, ".images.mxb");
    let labels_path = ferplus::with_suffix(&args.out, ".labels.mxb");
    let log_path = ferplus::with_suffix(&args.out, ".log.jsonl");
    mxb1::write_images(&images_path, &result.images)?;
    mxb1::write_labels(&labels_path, &result.labels)?;
    let file = std::fs::File::create(&log_path).map_err(|e| Error::io(&log_path, e))?;
    result.write_log(std::io::BufWriter::new(file)).map_err(|e| match e {
        Error::Stream(source) => Error::io(&log_path, source),
        other => other,
    })?;
    writeln!(
        out,
        "batches: {} applied: {:.4}",
        result.log.len(),
        result.applied_fraction()
    )?;
    for p in [images_path, labels_path, log_path] {
        writeln!(out, "wrote {}", p.display())?;
    }
    Ok(())
}

pub fn preview<W: Write>(args: &PreviewArgs, out: &mut W) -> Result<()> {
    let seed = args.seed.resolve();
    let policy = args.policy.resolve()?;
    header(out, seed, &policy)?;
    writeln!(out, "grid: {}x{} pad={}", args.grid.rows, args.grid.cols, preview::PAD)?;
    let (images, labels) = read_pair(&args.in_images, args.in_labels.as_deref())?;
    let mut opts = AugmentOptions::new(policy, seed.0);
    opts.batch_size = args.batch_size;
    let result = pipeline::augment_dataset(&images, &labels, &opts)?;
    let grid = preview::render_grid(&result.images, args.grid.rows, args.grid.cols)?;
    preview::save_png(&grid, &args.out)?;
    writeln!(out, "wrote {} ({}x{})", args.out.display(), grid.width(), grid.height())?;
    Ok(())
}

pub fn stats<W: Write>(args: &StatsArgs, out: &mut W) -> Result<()> {
    let seed = args.seed.resolve();
    let policy = args.policy.resolve()?;
    header(out, seed, &policy)?;
    let report = stats::run_stats(&StatsConfig {
        policy,
        trials: args.trials,
        width: args.width,
        height: args.height,
        seed: seed.0,
    })?;
    writeln!(out, "{report}")?;
    Ok(())
}

pub fn run<W: Write>(cli: &Cli, out: &mut W) -> Result<()> {
    match &cli.command {
        Command::Prep(a) => prep(a, out),
        Command::Augment(a) => augment(a, out),
        Command::Preview(a) => preview(a, out),
        Command::Stats(a) => stats(a, out),
    }
}
