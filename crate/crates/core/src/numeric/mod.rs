//! Dense arithmetic, the extractor/discriminator network, SGD and gradient
//! checking.

pub mod gradcheck;
mod matrix;
mod network;
mod optim;
mod persist;

pub use gradcheck::{finite_difference_check, relative_error, GradCheckReport};
pub use matrix::{dot, matmul, matmul_at, matmul_bt, softmax_rows, Matrix};
pub use network::{
    relu, DiscriminatorOutput, ExtractorCache, ExtractorGrads, LayerGrads, LinearLayer, Network,
};
pub use optim::sgd_step;
pub use persist::{LayerRecord, ModelFile, MODEL_FORMAT_VERSION};
