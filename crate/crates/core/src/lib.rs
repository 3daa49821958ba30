//! Mixed-sample data augmentation operators for image batches.
//!
//! This crate is `no_std` (it needs `alloc`). It provides:
//!
//! * [`ImageBatch`] / [`LabelBatch`] containers and [`validate_batch`],
//! * [`RngStream`], a seedable generator with a fixed draw-order contract,
//! * square cut-region sampling and mask rasterization ([`geometry`]),
//! * the MixCut, Cutout, Mixup and CutMix batch operators ([`augment`]),
//! * FER+-style relabeling, crops, mirroring and the ten-crop test ensemble ([`dataset`]).
//!
//! File formats, CSV ingestion and the command line live in the `mixcut` crate.
#![no_std]

extern crate alloc;

pub mod augment;
pub mod dataset;
mod error;
pub mod geometry;
pub mod policy;
pub mod rng;
pub mod tensor;

pub use augment::{
    apply_policy, cutmix_batch, cutout_batch, draw_plan, mixcut_batch, mixup_batch, AppliedRecord, Augmented, DrawPlan,
    PairedBatch, SampleParams,
};
pub use error::{Error, Result};
pub use geometry::{BinaryMask, CutRegion};
pub use policy::{AugmentPolicy, CenterSpec, LambdaSpec, Method, RatioSpec};
pub use rng::RngStream;
pub use tensor::{validate_batch, Image, ImageBatch, LabelBatch};
