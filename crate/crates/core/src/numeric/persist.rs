//! JSON model files.
//!
//! ```json
//! { "format_version": 1, "embedding_dim": 128, "num_cameras": 4,
//!   "layers": [{"rows": 64, "cols": 16, "weights": [...], "bias": [...]}, ...],
//!   "discriminator": {"rows": 4, "cols": 128, "weights": [...], "bias": [...]},
//!   "seed": 7, "scheme": "oce" }
//! ```
//!
//! Weights are row-major `out×in`. Floats are written in shortest round-trip
//! form, so a load/save cycle reproduces the file byte for byte.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::matrix::Matrix;
use super::network::{LinearLayer, Network};
use crate::error::{Error, Result};
use crate::objectives::Scheme;

pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerRecord {
    pub rows: usize,
    pub cols: usize,
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl LayerRecord {
    fn from_layer(layer: &LinearLayer) -> Self {
        Self {
            rows: layer.out_dim(),
            cols: layer.in_dim(),
            weights: layer.weight().as_slice().to_vec(),
            bias: layer.bias().to_vec(),
        }
    }

    fn to_layer(&self) -> Result<LinearLayer> {
        let w = Matrix::from_vec(self.rows, self.cols, self.weights.clone())?;
        LinearLayer::new(w, self.bias.clone())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub format_version: u32,
    pub embedding_dim: usize,
    pub num_cameras: usize,
    pub layers: Vec<LayerRecord>,
    pub discriminator: LayerRecord,
    pub seed: u64,
    pub scheme: Scheme,
}

impl ModelFile {
    pub fn new(net: &Network, seed: u64, scheme: Scheme) -> Self {
        Self {
            format_version: MODEL_FORMAT_VERSION,
            embedding_dim: net.embedding_dim(),
            num_cameras: net.num_cameras(),
            layers: net.extractor_layers().iter().map(LayerRecord::from_layer).collect(),
            discriminator: LayerRecord::from_layer(net.discriminator()),
            seed,
            scheme,
        }
    }

    pub fn to_network(&self) -> Result<Network> {
        if self.format_version != MODEL_FORMAT_VERSION {
            return Err(Error::parse(format!(
                "unsupported model format version {} (expected {MODEL_FORMAT_VERSION})",
                self.format_version
            )));
        }
        let layers = self
            .layers
            .iter()
            .map(LayerRecord::to_layer)
            .collect::<Result<Vec<_>>>()?;
        let net = Network::new(layers, self.discriminator.to_layer()?)?;
        if net.embedding_dim() != self.embedding_dim || net.num_cameras() != self.num_cameras {
            return Err(Error::parse(format!(
                "declared embedding_dim={} num_cameras={} disagree with layer shapes ({}, {})",
                self.embedding_dim,
                self.num_cameras,
                net.embedding_dim(),
                net.num_cameras()
            )));
        }
        Ok(net)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("model serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text).map_err(|e| e.with_path(path))
    }
}
