//! Batch-wise augmentation of a whole tensor file.
//!
//! Batch `b` draws from `RngStream::child(seed, b)`, so the output depends only
//! on the seed and the batch layout, never on the number of worker threads.
//! Within a batch, the optional train transforms come first (per sample:
//! crop offsets `ox`, `oy`, then the mirror gate), then the policy draws.

use std::io::Write;

use mixcut_core::dataset::{self, CropSpec};
use mixcut_core::{
    apply_policy, validate_batch, AppliedRecord, AugmentPolicy, Image, ImageBatch, LabelBatch, RngStream,
};
use rayon::prelude::*;
use serde::Serialize;

use crate::{Error, Result};

pub const DEFAULT_BATCH_SIZE: usize = 128;

#[derive(Clone, Debug, PartialEq)]
pub struct AugmentOptions {
    pub policy: AugmentPolicy,
    pub seed: u64,
    pub batch_size: usize,
    /// Random square crop applied before the policy.
    pub crop: Option<usize>,
    /// Random horizontal mirroring applied before the policy.
    pub mirror: bool,
    /// Worker threads; `None` uses the global pool.
    pub threads: Option<usize>,
}

impl AugmentOptions {
    pub fn new(policy: AugmentPolicy, seed: u64) -> Self {
        Self {
            policy,
            seed,
            batch_size: DEFAULT_BATCH_SIZE,
            crop: None,
            mirror: false,
            threads: None,
        }
    }
}

/// One log line per batch.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BatchLog {
    pub batch: usize,
    pub offset: usize,
    pub size: usize,
    pub seed: u64,
    pub stream: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub transforms: Option<Vec<SampleTransform>>,
    pub record: AppliedRecord,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AugmentOutput {
    pub images: ImageBatch,
    pub labels: LabelBatch,
    pub log: Vec<BatchLog>,
}

impl AugmentOutput {
    pub fn applied_fraction(&self) -> f64 {
        let applied = self.log.iter().filter(|l| l.record.applied).count();
        applied as f64 / self.log.len().max(1) as f64
    }

    /// JSON lines, one per batch.
    pub fn write_log<W: Write>(&self, mut out: W) -> Result<()> {
        for entry in &self.log {
            serde_json::to_writer(&mut out, entry).map_err(|e| Error::Format(e.to_string()))?;
            out.write_all(b"\n")?;
        }
        out.flush()?;
        Ok(())
    }
}

fn slice_batch(
    images: &ImageBatch,
    labels: &LabelBatch,
    offset: usize,
    size: usize,
) -> Result<(ImageBatch, LabelBatch)> {
    let [_, c, h, w] = images.dims();
    let per = images.sample_len();
    let k = labels.classes();
    let img = ImageBatch::new(
        size,
        c,
        h,
        w,
        images.data()[offset * per..(offset + size) * per].to_vec(),
    )?;
    let lbl = LabelBatch::new(size, k, labels.data()[offset * k..(offset + size) * k].to_vec())?;
    Ok((img, lbl))
}

/// Per-sample train transform applied before the policy.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct SampleTransform {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub crop: Option<CropSpec>,
    pub mirrored: bool,
}

impl SampleTransform {
    pub fn apply(&self, image: &Image) -> Result<Image> {
        Ok(match self.crop {
            Some(spec) => dataset::crop(
                image,
                &CropSpec {
                    mirrored: self.mirrored,
                    ..spec
                },
            )?,
            None if self.mirrored => dataset::mirror_horizontal(image),
            None => image.clone(),
        })
    }
}

fn train_transforms(
    images: &ImageBatch,
    crop: Option<usize>,
    mirror: bool,
    rng: &mut RngStream,
) -> Result<(ImageBatch, Option<Vec<SampleTransform>>)> {
    if crop.is_none() && !mirror {
        return Ok((images.clone(), None));
    }
    let (h, w) = (images.height(), images.width());
    if let Some(size) = crop {
        if size == 0 || size > h || size > w {
            return Err(mixcut_core::Error::CropTooLarge {
                size,
                height: h,
                width: w,
            }
            .into());
        }
    }
    let mut out = Vec::with_capacity(images.len());
    let mut transforms = Vec::with_capacity(images.len());
    for i in 0..images.len() {
        let t = SampleTransform {
            crop: crop.map(|size| dataset::random_crop_spec(h, w, size, rng)),
            mirrored: mirror && rng.next_unit() < 0.5,
        };
        out.push(t.apply(&images.image(i))?);
        transforms.push(t);
    }
    Ok((ImageBatch::from_images(&out)?, Some(transforms)))
}

fn run_batch(
    images: &ImageBatch,
    labels: &LabelBatch,
    opts: &AugmentOptions,
    batch: usize,
) -> Result<(ImageBatch, LabelBatch, BatchLog)> {
    let offset = batch * opts.batch_size;
    let size = opts.batch_size.min(images.len() - offset);
    let (img, lbl) = slice_batch(images, labels, offset, size)?;
    let mut rng = RngStream::child(opts.seed, batch as u64);
    let (img, transforms) = train_transforms(&img, opts.crop, opts.mirror, &mut rng)?;
    let out = apply_policy(&img, &lbl, &opts.policy, &mut rng)?;
    validate_batch(&out.images, &out.labels)?;
    let log = BatchLog {
        batch,
        offset,
        size,
        seed: rng.seed(),
        stream: rng.stream(),
        transforms,
        record: out.record,
    };
    Ok((out.images, out.labels, log))
}

/// Augments `images`/`labels` batch by batch. Inputs and every output batch
/// are validated; the first failure aborts the run.
pub fn augment_dataset(images: &ImageBatch, labels: &LabelBatch, opts: &AugmentOptions) -> Result<AugmentOutput> {
    if opts.batch_size == 0 {
        return Err(Error::Usage("batch size must be at least 1".into()));
    }
    opts.policy.validate()?;
    validate_batch(images, labels)?;
    let batches = images.len().div_ceil(opts.batch_size);
    let work = || -> Result<Vec<_>> {
        (0..batches)
            .into_par_iter()
            .map(|b| run_batch(images, labels, opts, b))
            .collect()
    };
    let results = match opts.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Usage(e.to_string()))?
            .install(work)?,
        None => work()?,
    };

    let mut img_parts = Vec::with_capacity(batches);
    let mut lbl_data = Vec::with_capacity(labels.data().len());
    let mut log = Vec::with_capacity(batches);
    for (img, lbl, entry) in results {
        img_parts.push(img);
        lbl_data.extend_from_slice(lbl.data());
        log.push(entry);
    }
    let [c, h, w] = {
        let first = &img_parts[0];
        [first.channels(), first.height(), first.width()]
    };
    let n = images.len();
    let img_data: Vec<f32> = img_parts.into_iter().flat_map(ImageBatch::into_data).collect();
    Ok(AugmentOutput {
        images: ImageBatch::new(n, c, h, w, img_data)?,
        labels: LabelBatch::new(n, labels.classes(), lbl_data)?,
        log,
    })
}
