//! Samples, datasets, the synthetic multi-camera generator, CSV files and the
//! two training samplers.

mod csv_io;
mod dataset;
mod sampler;
mod synth;

pub(crate) use csv_io::{parse_rows, write_rows};
pub use csv_io::{content_hash, load_csv, save_csv, sidecar_path, write_csv, DatasetMeta};
pub use dataset::{Dataset, IdentityGroup, Provenance, Sample, Split};
pub use sampler::{sample_camera_balanced, sample_pk_batch, CameraBalancedBatch, PkBatch};
pub use synth::{generate_synthetic, SynthConfig, GENERATOR_ID, PROTOTYPE_SCALE};
