use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::objectives::{Scheme, TripletConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainConfig {
    pub scheme: Scheme,
    /// Weight of the adversarial term in the extractor objective.
    pub lambda: f64,
    pub margin: f64,
    /// Identities per PK batch.
    pub persons: usize,
    /// Samples per identity in a PK batch.
    pub images_per_person: usize,
    /// Camera-balanced batches hold `⌊base / C⌋` samples per camera.
    pub adversarial_batch_base: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    /// 0-based epochs from which the learning rate is multiplied by
    /// `lr_decay_factor`.
    pub lr_decay_epochs: Vec<usize>,
    pub lr_decay_factor: f64,
    pub seed: u64,
    pub hidden_widths: Vec<usize>,
    pub embedding_dim: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            scheme: Scheme::Oce,
            lambda: 1.0,
            margin: 0.3,
            persons: 32,
            images_per_person: 4,
            adversarial_batch_base: 64,
            epochs: 300,
            learning_rate: 0.1,
            lr_decay_epochs: vec![100, 200],
            lr_decay_factor: 0.1,
            seed: 0,
            hidden_widths: vec![64, 64],
            embedding_dim: 128,
        }
    }
}

impl TrainConfig {
    pub fn triplet(&self) -> Result<TripletConfig> {
        TripletConfig::new(self.margin, self.persons, self.images_per_person)
    }

    pub fn validate(&self) -> Result<()> {
        self.triplet()?;
        if !(self.lambda >= 0.0) || !self.lambda.is_finite() {
            return Err(Error::InvalidConfig(format!("lambda must be >= 0, got {}", self.lambda)));
        }
        if !(self.learning_rate > 0.0) || !self.learning_rate.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "learning rate must be positive, got {}",
                self.learning_rate
            )));
        }
        if !(self.lr_decay_factor > 0.0) || !self.lr_decay_factor.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "lr decay factor must be positive, got {}",
                self.lr_decay_factor
            )));
        }
        if self.epochs == 0 {
            return Err(Error::InvalidConfig("epochs must be positive".into()));
        }
        if self.lr_decay_epochs.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidConfig(format!(
                "lr decay epochs must be strictly increasing: {:?}",
                self.lr_decay_epochs
            )));
        }
        if let Some(&last) = self.lr_decay_epochs.last() {
            if last >= self.epochs {
                return Err(Error::InvalidConfig(format!(
                    "lr decay epoch {last} is not below the epoch count {}",
                    self.epochs
                )));
            }
        }
        if self.embedding_dim == 0 || self.hidden_widths.contains(&0) {
            return Err(Error::InvalidConfig("layer widths must be positive".into()));
        }
        if self.adversarial_batch_base == 0 {
            return Err(Error::InvalidConfig("adversarial batch base must be positive".into()));
        }
        Ok(())
    }

    /// Checks the config against a dataset: every camera must supply `P`
    /// identities and the camera-balanced quota.
    pub fn validate_for(&self, ds: &Dataset) -> Result<()> {
        self.validate()?;
        let c = ds.num_cameras();
        for camera in 0..c {
            let ids = ds.train_identities(camera).len();
            if ids < self.persons {
                return Err(Error::InvalidConfig(format!(
                    "camera {camera} has {ids} train identities, fewer than P={}",
                    self.persons
                )));
            }
        }
        if self.scheme.is_adversarial() {
            let quota = self.adversarial_batch_base / c;
            if quota == 0 {
                return Err(Error::InvalidConfig(format!(
                    "adversarial batch base {} gives no samples per camera for {c} cameras",
                    self.adversarial_batch_base
                )));
            }
            for camera in 0..c {
                let n = ds.train_samples_of_camera(camera).len();
                if n < quota {
                    return Err(Error::InvalidConfig(format!(
                        "camera {camera} has {n} train samples, fewer than the quota {quota}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Learning rate in effect during the 0-based `epoch`.
    pub fn learning_rate_at(&self, epoch: usize) -> f64 {
        let mut lr = self.learning_rate;
        for &e in &self.lr_decay_epochs {
            if epoch >= e {
                lr *= self.lr_decay_factor;
            }
        }
        lr
    }

    /// `⌈train samples / (P·K)⌉`, at least one.
    pub fn iterations_per_epoch(&self, ds: &Dataset) -> usize {
        let batch = self.persons * self.images_per_person;
        ds.num_train().div_ceil(batch).max(1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults() {
        let c = TrainConfig::default();
        assert_eq!(c.lambda, 1.0);
        assert_eq!(c.margin, 0.3);
        assert_eq!((c.persons, c.images_per_person), (32, 4));
        assert_eq!(c.epochs, 300);
        assert_eq!(c.lr_decay_epochs, vec![100, 200]);
        assert_eq!(c.lr_decay_factor, 0.1);
        assert_eq!(c.adversarial_batch_base, 64);
        assert_eq!(c.embedding_dim, 128);
        c.validate().unwrap();
    }

    #[test]
    fn schedule() {
        let c = TrainConfig { learning_rate: 0.01, ..TrainConfig::default() };
        assert_eq!(c.learning_rate_at(0), 0.01);
        assert_eq!(c.learning_rate_at(99), 0.01);
        assert_eq!(c.learning_rate_at(100), 0.01 * 0.1);
        assert_eq!(c.learning_rate_at(199), 0.01 * 0.1);
        for e in [200, 250, 299] {
            assert_eq!(c.learning_rate_at(e), c.learning_rate * 0.01);
        }
        let d = TrainConfig::default();
        assert_eq!(d.learning_rate_at(99), 0.1);
        let late = d.learning_rate_at(299);
        assert!((late - d.learning_rate * 0.01).abs() <= f64::EPSILON * late);
    }

    #[test]
    fn invalid() {
        let base = TrainConfig::default();
        for bad in [
            TrainConfig { lambda: -1.0, ..base.clone() },
            TrainConfig { margin: 0.0, ..base.clone() },
            TrainConfig { persons: 1, ..base.clone() },
            TrainConfig { lr_decay_epochs: vec![200, 100], ..base.clone() },
            TrainConfig { lr_decay_epochs: vec![100, 300], ..base.clone() },
            TrainConfig { learning_rate: 0.0, ..base.clone() },
            TrainConfig { epochs: 0, lr_decay_epochs: vec![], ..base.clone() },
        ] {
            assert!(bad.validate().is_err(), "{bad:?}");
        }
    }
}
