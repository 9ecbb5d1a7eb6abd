//! Synthetic multi-camera data.
//!
//! Every person has a latent prototype `μ ~ N(0, ρ²I)` with `ρ` a fixed
//! multiple of the within-identity spread `σ`. A sample of that person seen by
//! camera `c` is
//!
//! ```text
//! x = A_c (μ + σ ε) + t_c,      ε ~ N(0, I)
//! A_c = (1 − β) I + β Q_c,      β = ½ · s / (1 + s)
//! t_c = s · u_c
//! ```
//!
//! where `s` is the camera shift scale, `Q_c` a random orthogonal matrix and
//! `u_c` a random unit vector. With `s = 0` every camera is the identity map.
//!
//! Train identities are drawn fresh for each camera (no person appears in two
//! cameras). The overlap identities appear in every camera; their first sample
//! per camera goes to the query split and the rest to the gallery. Overlap
//! identities are numbered `identities_per_camera..` in every camera.
//!
//! All randomness comes from one `ChaCha8Rng` seeded with `seed`, consumed in
//! this order: per camera `Q_c` (d² normals, row-major, then Gram–Schmidt) and
//! `u_c` (d normals); train prototypes camera by camera; overlap prototypes;
//! train noise (camera, identity, sample); overlap noise (identity, camera,
//! sample). Normals are `rand_distr::StandardNormal`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::dataset::{Dataset, Provenance, Sample, Split};
use crate::error::{Error, Result};

pub const GENERATOR_ID: &str = "chacha8/rand_distr-0.5-standard-normal/acan-synth-v1";

/// Prototype standard deviation as a multiple of the within-identity spread.
pub const PROTOTYPE_SCALE: f64 = 2.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthConfig {
    pub cameras: usize,
    pub identities_per_camera: usize,
    pub samples_per_identity: usize,
    pub input_dim: usize,
    pub identity_spread: f64,
    pub camera_shift_scale: f64,
    pub cross_camera_overlap: usize,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            cameras: 4,
            identities_per_camera: 32,
            samples_per_identity: 8,
            input_dim: 16,
            identity_spread: 0.5,
            camera_shift_scale: 3.0,
            cross_camera_overlap: 16,
            seed: 7,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        let counts = [
            ("cameras", self.cameras),
            ("identities_per_camera", self.identities_per_camera),
            ("samples_per_identity", self.samples_per_identity),
            ("input_dim", self.input_dim),
        ];
        for (name, v) in counts {
            if v < 2 {
                return Err(Error::InvalidConfig(format!("{name} must be >= 2, got {v}")));
            }
        }
        if self.cross_camera_overlap < 1 {
            return Err(Error::InvalidConfig("cross_camera_overlap must be >= 1".into()));
        }
        if !(self.identity_spread > 0.0) || !self.identity_spread.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "identity_spread must be positive, got {}",
                self.identity_spread
            )));
        }
        if !(self.camera_shift_scale >= 0.0) || !self.camera_shift_scale.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "camera_shift_scale must be non-negative, got {}",
                self.camera_shift_scale
            )));
        }
        Ok(())
    }

    pub fn mixing_strength(&self) -> f64 {
        let s = self.camera_shift_scale;
        0.5 * s / (1.0 + s)
    }
}

struct CameraTransform {
    mixing: Vec<f64>,
    translation: Vec<f64>,
}

impl CameraTransform {
    fn apply(&self, v: &[f64]) -> Vec<f64> {
        let d = v.len();
        (0..d)
            .map(|i| {
                let row = &self.mixing[i * d..(i + 1) * d];
                row.iter().zip(v).map(|(a, b)| a * b).sum::<f64>() + self.translation[i]
            })
            .collect()
    }
}

fn normal_vec(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> Vec<f64> {
    (0..n)
        .map(|_| {
            let z: f64 = StandardNormal.sample(rng);
            scale * z
        })
        .collect()
}

/// Gram–Schmidt on the rows of a square Gaussian matrix.
fn random_orthogonal(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    let mut q = normal_vec(rng, d * d, 1.0);
    for i in 0..d {
        for j in 0..i {
            let proj: f64 = (0..d).map(|k| q[i * d + k] * q[j * d + k]).sum();
            for k in 0..d {
                q[i * d + k] -= proj * q[j * d + k];
            }
        }
        let norm = (0..d).map(|k| q[i * d + k].powi(2)).sum::<f64>().sqrt();
        for k in 0..d {
            q[i * d + k] /= norm;
        }
    }
    q
}

pub fn generate_synthetic(cfg: &SynthConfig) -> Result<Dataset> {
    cfg.validate()?;
    let d = cfg.input_dim;
    let sigma = cfg.identity_spread;
    let beta = cfg.mixing_strength();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let transforms: Vec<CameraTransform> = (0..cfg.cameras)
        .map(|_| {
            let q = random_orthogonal(&mut rng, d);
            let mut mixing: Vec<f64> = q.iter().map(|v| beta * v).collect();
            for i in 0..d {
                mixing[i * d + i] += 1.0 - beta;
            }
            let u = normal_vec(&mut rng, d, 1.0);
            let norm = u.iter().map(|v| v * v).sum::<f64>().sqrt();
            let translation = u.iter().map(|v| cfg.camera_shift_scale * v / norm).collect();
            CameraTransform {
                mixing,
                translation,
            }
        })
        .collect();

    let rho = PROTOTYPE_SCALE * sigma;
    let train_protos: Vec<Vec<Vec<f64>>> = (0..cfg.cameras)
        .map(|_| {
            (0..cfg.identities_per_camera)
                .map(|_| normal_vec(&mut rng, d, rho))
                .collect()
        })
        .collect();
    let overlap_protos: Vec<Vec<f64>> = (0..cfg.cross_camera_overlap)
        .map(|_| normal_vec(&mut rng, d, rho))
        .collect();

    let draw = |proto: &[f64], t: &CameraTransform, rng: &mut ChaCha8Rng| {
        let noisy: Vec<f64> = proto
            .iter()
            .zip(normal_vec(rng, d, sigma))
            .map(|(m, e)| m + e)
            .collect();
        t.apply(&noisy)
    };

    let per = cfg.samples_per_identity;
    let total = (cfg.cameras * cfg.identities_per_camera + cfg.cross_camera_overlap * cfg.cameras) * per;
    let mut samples = Vec::with_capacity(total);
    for (camera, protos) in train_protos.iter().enumerate() {
        for (identity, proto) in protos.iter().enumerate() {
            for _ in 0..per {
                samples.push(Sample {
                    features: draw(proto, &transforms[camera], &mut rng),
                    camera,
                    identity,
                    split: Split::Train,
                });
            }
        }
    }
    for (j, proto) in overlap_protos.iter().enumerate() {
        let identity = cfg.identities_per_camera + j;
        for (camera, t) in transforms.iter().enumerate() {
            for k in 0..per {
                samples.push(Sample {
                    features: draw(proto, t, &mut rng),
                    camera,
                    identity,
                    split: if k == 0 { Split::Query } else { Split::Gallery },
                });
            }
        }
    }
    Dataset::new(samples, cfg.cameras, d, Provenance::Synthetic(cfg.clone()))
}
