//! The alternating training loop.
//!
//! Every iteration first draws a camera-balanced batch and takes one SGD step
//! on the discriminator's camera-classification loss. The extractor then
//! receives the mean of one within-camera triplet loss per camera (each on
//! its own PK batch) plus the adversarial term on the camera-balanced batch,
//! evaluated against the freshly updated discriminator. Scheme `none` skips
//! both discriminator work and the adversarial term.
//!
//! Randomness comes from three ChaCha8 streams sharing the run seed:
//! stream 0 initializes the network, stream 1 draws PK batches and stream 2
//! draws camera-balanced batches. Keeping them apart means a zero adversarial
//! weight reproduces the extractor trajectory of scheme `none` exactly.

mod checkpoint;
mod config;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::{sample_camera_balanced, sample_pk_batch, Dataset};
use crate::error::{Error, Result};
use crate::numeric::{ExtractorGrads, ModelFile, Network};
use crate::objectives::{
    batch_hard_triplet, discriminator_loss, generator_adversarial_loss, grl_backward,
    AdversarialTerm,
};

pub use checkpoint::{Checkpoint, RngState};
pub use config::TrainConfig;

const INIT_STREAM: u64 = 0;
const PK_STREAM: u64 = 1;
const BALANCED_STREAM: u64 = 2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainLogEntry {
    pub epoch: usize,
    /// Iteration within the epoch.
    pub iteration: usize,
    pub triplet_loss: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub discriminator_loss: Option<f64>,
    /// λ-weighted adversarial term seen by the extractor. For gradient
    /// reversal this is `−λ` times the discriminator loss.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub adversarial_loss: Option<f64>,
    pub learning_rate: f64,
    pub active_anchor_fraction: f64,
}

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

fn check_finite(value: f64, quantity: &'static str, at: (usize, usize), snapshot: &Network) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(Error::Divergence {
            epoch: at.0,
            iteration: at.1,
            quantity,
            snapshot: Box::new(snapshot.clone()),
        })
    }
}

/// A run in progress. Owns the network and both sampling streams.
pub struct Trainer<'a> {
    ds: &'a Dataset,
    cfg: TrainConfig,
    net: Network,
    epoch: usize,
    pk_rng: ChaCha8Rng,
    balanced_rng: ChaCha8Rng,
}

impl<'a> Trainer<'a> {
    pub fn new(ds: &'a Dataset, cfg: TrainConfig) -> Result<Self> {
        cfg.validate_for(ds)?;
        let mut init = stream(cfg.seed, INIT_STREAM);
        let net = Network::random(
            ds.input_dim(),
            &cfg.hidden_widths,
            cfg.embedding_dim,
            ds.num_cameras(),
            &mut init,
        )?;
        Ok(Self {
            ds,
            net,
            epoch: 0,
            pk_rng: stream(cfg.seed, PK_STREAM),
            balanced_rng: stream(cfg.seed, BALANCED_STREAM),
            cfg,
        })
    }

    pub fn resume(ds: &'a Dataset, ckpt: &Checkpoint) -> Result<Self> {
        let cfg = ckpt.config.clone();
        cfg.validate_for(ds)?;
        let net = ckpt.model.to_network()?;
        if net.input_dim() != ds.input_dim() || net.num_cameras() != ds.num_cameras() {
            return Err(Error::InvalidConfig(format!(
                "checkpoint expects {} inputs and {} cameras, dataset has {} and {}",
                net.input_dim(),
                net.num_cameras(),
                ds.input_dim(),
                ds.num_cameras()
            )));
        }
        if net.hidden_widths() != cfg.hidden_widths || net.embedding_dim() != cfg.embedding_dim {
            return Err(Error::InvalidConfig(
                "checkpoint layer widths disagree with its config".into(),
            ));
        }
        if ckpt.epoch > cfg.epochs {
            return Err(Error::InvalidConfig(format!(
                "checkpoint is at epoch {} of {}",
                ckpt.epoch, cfg.epochs
            )));
        }
        Ok(Self {
            ds,
            net,
            epoch: ckpt.epoch,
            pk_rng: ckpt.pk_rng.restore()?,
            balanced_rng: ckpt.balanced_rng.restore()?,
            cfg,
        })
    }

    pub fn network(&self) -> &Network {
        &self.net
    }

    pub fn into_network(self) -> Network {
        self.net
    }

    pub fn config(&self) -> &TrainConfig {
        &self.cfg
    }

    /// Completed epochs.
    pub fn epoch(&self) -> usize {
        self.epoch
    }

    pub fn is_finished(&self) -> bool {
        self.epoch >= self.cfg.epochs
    }

    pub fn checkpoint(&self) -> Checkpoint {
        Checkpoint {
            model: ModelFile::new(&self.net, self.cfg.seed, self.cfg.scheme),
            epoch: self.epoch,
            config: self.cfg.clone(),
            pk_rng: RngState::capture(&self.pk_rng),
            balanced_rng: RngState::capture(&self.balanced_rng),
        }
    }

    /// Runs one epoch, handing each log entry to `log` as it is produced.
    pub fn run_epoch(&mut self, log: &mut dyn FnMut(&TrainLogEntry) -> Result<()>) -> Result<()> {
        if self.is_finished() {
            return Err(Error::InvalidArgument(format!(
                "all {} epochs already completed",
                self.cfg.epochs
            )));
        }
        let lr = self.cfg.learning_rate_at(self.epoch);
        for it in 0..self.cfg.iterations_per_epoch(self.ds) {
            let entry = self.iteration(it, lr)?;
            log(&entry)?;
        }
        self.epoch += 1;
        Ok(())
    }

    /// Runs the remaining epochs.
    pub fn run(&mut self, log: &mut dyn FnMut(&TrainLogEntry) -> Result<()>) -> Result<()> {
        while !self.is_finished() {
            self.run_epoch(log)?;
        }
        Ok(())
    }

    fn iteration(&mut self, it: usize, lr: f64) -> Result<TrainLogEntry> {
        let at = (self.epoch, it);
        let snapshot = self.net.clone();
        let ds = self.ds;
        let cfg = &self.cfg;
        let c = ds.num_cameras();

        // Discriminator step on a camera-balanced batch.
        let mut adversarial = None;
        let mut discriminator_loss_value = None;
        if cfg.scheme.is_adversarial() {
            let batch = sample_camera_balanced(ds, cfg.adversarial_batch_base, &mut self.balanced_rng)?;
            let x = ds.features(&batch.indices);
            let (emb, cache) = self.net.forward_extractor(&x)?;
            let out = self.net.forward_discriminator(&emb)?;
            let d = discriminator_loss(&out.probs, &batch.cameras)?;
            check_finite(d.loss, "discriminator_loss", at, &snapshot)?;
            let (grads, _) = self.net.backward_discriminator(&emb, &d.grad_logits)?;
            self.net.apply_discriminator_gradients(&grads, lr)?;
            discriminator_loss_value = Some(d.loss);
            adversarial = Some((batch.cameras, emb, cache));
        }

        // Within-camera triplet losses, one PK batch per camera.
        let mut grads: Option<ExtractorGrads> = None;
        let mut triplet_total = 0.0;
        let mut active = 0usize;
        let mut valid = 0usize;
        for camera in 0..c {
            let batch = sample_pk_batch(
                ds,
                cfg.persons,
                cfg.images_per_person,
                camera,
                &mut self.pk_rng,
            )?;
            let x = ds.features(&batch.indices);
            let (emb, cache) = self.net.forward_extractor(&x)?;
            let cams = vec![camera; batch.indices.len()];
            let t = batch_hard_triplet(&emb, &batch.identities, &cams, cfg.margin)?;
            check_finite(t.loss, "triplet_loss", at, &snapshot)?;
            triplet_total += t.loss;
            active += t.active_anchors;
            valid += t.valid_anchors();
            let g = self
                .net
                .backward_extractor(&cache, &t.grad_embeddings.scale(1.0 / c as f64))?;
            match grads.as_mut() {
                None => grads = Some(g),
                Some(acc) => acc.add_assign(&g)?,
            }
        }
        let mut grads = grads.expect("at least two cameras");

        // Adversarial term against the updated discriminator.
        let mut adversarial_loss = None;
        if let Some((cameras, emb, cache)) = adversarial {
            if cfg.lambda > 0.0 {
                let out = self.net.forward_discriminator(&emb)?;
                let grad_emb = match generator_adversarial_loss(cfg.scheme, &out.probs, &cameras, cfg.lambda)? {
                    AdversarialTerm::Loss(l) => {
                        check_finite(l.loss, "adversarial_loss", at, &snapshot)?;
                        adversarial_loss = Some(l.loss);
                        self.net.backward_discriminator(&emb, &l.grad_logits)?.1
                    }
                    AdversarialTerm::ReverseGradient { lambda } => {
                        let d = discriminator_loss(&out.probs, &cameras)?;
                        check_finite(d.loss, "adversarial_loss", at, &snapshot)?;
                        adversarial_loss = Some(-lambda * d.loss);
                        let (_, up) = self.net.backward_discriminator(&emb, &d.grad_logits)?;
                        grl_backward(&up, lambda)
                    }
                };
                grads.add_assign(&self.net.backward_extractor(&cache, &grad_emb)?)?;
            }
        }

        self.net.apply_extractor_gradients(&grads, lr)?;
        if !self.net.is_finite() {
            return Err(Error::Divergence {
                epoch: at.0,
                iteration: at.1,
                quantity: "parameters",
                snapshot: Box::new(snapshot),
            });
        }
        Ok(TrainLogEntry {
            epoch: at.0,
            iteration: it,
            triplet_loss: triplet_total / c as f64,
            discriminator_loss: discriminator_loss_value,
            adversarial_loss,
            learning_rate: lr,
            active_anchor_fraction: active as f64 / valid as f64,
        })
    }
}

/// Trains from scratch and returns the network with the full log.
pub fn train(ds: &Dataset, cfg: &TrainConfig) -> Result<(Network, Vec<TrainLogEntry>)> {
    let mut trainer = Trainer::new(ds, cfg.clone())?;
    let mut log = Vec::new();
    trainer.run(&mut |e| {
        log.push(e.clone());
        Ok(())
    })?;
    Ok((trainer.into_network(), log))
}

/// Mean triplet loss of each epoch, in epoch order.
pub fn epoch_triplet_means(log: &[TrainLogEntry]) -> Vec<f64> {
    let mut out: Vec<(f64, usize)> = Vec::new();
    for e in log {
        if out.len() <= e.epoch {
            out.resize(e.epoch + 1, (0.0, 0));
        }
        out[e.epoch].0 += e.triplet_loss;
        out[e.epoch].1 += 1;
    }
    out.into_iter().map(|(s, n)| if n == 0 { f64::NAN } else { s / n as f64 }).collect()
}
