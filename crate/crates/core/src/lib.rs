//! Adversarial camera alignment for person re-identification trained with
//! intra-camera identity labels only.
//!
//! A feature extractor is trained with a within-camera batch-hard triplet
//! loss while a linear camera discriminator is played against it, pulling the
//! per-camera feature distributions together so that retrieval works across
//! cameras. See [`trainer::train`] for the loop and [`eval`] for the metrics.

pub mod checks;
pub mod cli;
pub mod data;
pub mod error;
pub mod eval;
pub mod numeric;
pub mod objectives;
pub mod trainer;

pub use error::{Error, Result};
