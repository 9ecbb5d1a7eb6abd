use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::synth::SynthConfig;
use crate::error::{Error, Result};
use crate::numeric::Matrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Query,
    Gallery,
}

impl Split {
    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Query => "query",
            Split::Gallery => "gallery",
        }
    }

    pub fn is_test(self) -> bool {
        self != Split::Train
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Split {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "train" => Ok(Split::Train),
            "query" => Ok(Split::Query),
            "gallery" => Ok(Split::Gallery),
            other => Err(Error::parse(format!(
                "unknown split {other:?} (expected train, query or gallery)"
            ))),
        }
    }
}

/// One feature vector with its camera and identity.
///
/// In the train split `identity` is local to the camera: the same number in
/// two cameras names two different people. In the query and gallery splits
/// identities are shared across cameras and serve as retrieval ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub features: Vec<f64>,
    pub camera: usize,
    pub identity: usize,
    pub split: Split,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Synthetic(SynthConfig),
    File(PathBuf),
}

/// Train samples of one identity within one camera.
#[derive(Debug, Clone, PartialEq)]
pub struct IdentityGroup {
    pub identity: usize,
    pub samples: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct Dataset {
    samples: Vec<Sample>,
    num_cameras: usize,
    input_dim: usize,
    provenance: Provenance,
    /// Per camera, train identities sorted by label.
    train_groups: Vec<Vec<IdentityGroup>>,
    /// Per camera, all train sample indices in order.
    train_by_camera: Vec<Vec<usize>>,
}

impl PartialEq for Dataset {
    fn eq(&self, other: &Self) -> bool {
        self.samples == other.samples
            && self.num_cameras == other.num_cameras
            && self.input_dim == other.input_dim
    }
}

impl Dataset {
    pub fn new(
        samples: Vec<Sample>,
        num_cameras: usize,
        input_dim: usize,
        provenance: Provenance,
    ) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::InvalidDataset("no samples".into()));
        }
        if num_cameras < 2 {
            return Err(Error::InvalidDataset(format!(
                "need at least 2 cameras, got {num_cameras}"
            )));
        }
        if input_dim == 0 {
            return Err(Error::InvalidDataset("input dimension is zero".into()));
        }
        let mut groups: Vec<BTreeMap<usize, Vec<usize>>> = vec![BTreeMap::new(); num_cameras];
        let mut train_by_camera = vec![Vec::new(); num_cameras];
        for (i, s) in samples.iter().enumerate() {
            if s.features.len() != input_dim {
                return Err(Error::InvalidDataset(format!(
                    "sample {i} has {} features, expected {input_dim}",
                    s.features.len()
                )));
            }
            if s.camera >= num_cameras {
                return Err(Error::InvalidDataset(format!(
                    "sample {i} has camera {} but the dataset declares {num_cameras} cameras",
                    s.camera
                )));
            }
            if s.features.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidDataset(format!("sample {i} has non-finite features")));
            }
            if s.split == Split::Train {
                groups[s.camera].entry(s.identity).or_default().push(i);
                train_by_camera[s.camera].push(i);
            }
        }
        for (c, g) in groups.iter().enumerate() {
            if g.len() < 2 {
                return Err(Error::InvalidDataset(format!(
                    "camera {c} has {} train identities, need at least 2",
                    g.len()
                )));
            }
            if let Some((id, idx)) = g.iter().find(|(_, v)| v.len() < 2) {
                return Err(Error::InvalidDataset(format!(
                    "camera {c} identity {id} has {} train samples, need at least 2",
                    idx.len()
                )));
            }
        }
        let train_groups = groups
            .into_iter()
            .map(|g| {
                g.into_iter()
                    .map(|(identity, samples)| IdentityGroup { identity, samples })
                    .collect()
            })
            .collect();
        Ok(Self {
            samples,
            num_cameras,
            input_dim,
            provenance,
            train_groups,
            train_by_camera,
        })
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn num_cameras(&self) -> usize {
        self.num_cameras
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn train_identities(&self, camera: usize) -> &[IdentityGroup] {
        &self.train_groups[camera]
    }

    pub fn train_samples_of_camera(&self, camera: usize) -> &[usize] {
        &self.train_by_camera[camera]
    }

    pub fn num_train(&self) -> usize {
        self.train_by_camera.iter().map(Vec::len).sum()
    }

    pub fn indices_where(&self, pred: impl Fn(&Sample) -> bool) -> Vec<usize> {
        self.samples
            .iter()
            .enumerate()
            .filter(|(_, s)| pred(s))
            .map(|(i, _)| i)
            .collect()
    }

    pub fn split_indices(&self, split: Split) -> Vec<usize> {
        self.indices_where(|s| s.split == split)
    }

    /// Query and gallery samples.
    pub fn test_indices(&self) -> Vec<usize> {
        self.indices_where(|s| s.split.is_test())
    }

    pub fn features(&self, indices: &[usize]) -> Matrix {
        let mut data = Vec::with_capacity(indices.len() * self.input_dim);
        for &i in indices {
            data.extend_from_slice(&self.samples[i].features);
        }
        Matrix::from_vec(indices.len(), self.input_dim, data).expect("validated at construction")
    }

    pub fn cameras(&self, indices: &[usize]) -> Vec<usize> {
        indices.iter().map(|&i| self.samples[i].camera).collect()
    }

    pub fn identities(&self, indices: &[usize]) -> Vec<usize> {
        indices.iter().map(|&i| self.samples[i].identity).collect()
    }
}
