//! Standard-library companion to `mixcut-core`: the MXB1 tensor format,
//! policy files, FER2013/FER+ CSV preparation, the batch augmentation
//! pipeline, PNG preview grids, sampling statistics and the `mixcut` CLI.

pub mod cli;
mod error;
pub mod ferplus;
pub mod mxb1;
pub mod pipeline;
pub mod policy_file;
pub mod preview;
pub mod stats;

pub use error::{Error, Result};
pub use mixcut_core as core;
