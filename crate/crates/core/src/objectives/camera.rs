//! Camera-classification objectives on discriminator outputs.
//!
//! Each loss here is a cross-entropy against a target distribution over the
//! camera classes, averaged over the batch:
//!
//! | loss                 | target for a sample from camera `z`        |
//! |----------------------|--------------------------------------------|
//! | discriminator        | one-hot on `z`                             |
//! | other-camera (OCE)   | `1/(C−1)` on every class but `z`, 0 on `z` |
//! | all-camera (ACE)     | `1/C` everywhere                           |
//!
//! so the gradient w.r.t. the logits is `(probs − target) / N` in every case.

use super::scheme::Scheme;
use crate::error::{Error, Result};
use crate::numeric::Matrix;

/// Lower clamp applied to probabilities inside `ln`.
pub const LOG_EPS: f64 = 1e-12;

const ROW_SUM_TOL: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct LossOutput {
    pub loss: f64,
    /// Gradient of the batch-mean loss w.r.t. the logits that produced `probs`.
    pub grad_logits: Matrix,
}

fn validate_probs(probs: &Matrix) -> Result<()> {
    if probs.rows() == 0 {
        return Err(Error::EmptySet("probability batch has no rows".into()));
    }
    for (i, row) in probs.row_iter().enumerate() {
        let sum: f64 = row.iter().sum();
        if row.iter().any(|&p| !(p >= 0.0) || p > 1.0 + ROW_SUM_TOL)
            || (sum - 1.0).abs() > ROW_SUM_TOL
        {
            return Err(Error::InvalidArgument(format!(
                "row {i} is not a probability distribution (sum {sum})"
            )));
        }
    }
    Ok(())
}

fn validate_labels(probs: &Matrix, labels: &[usize]) -> Result<()> {
    if labels.len() != probs.rows() {
        return Err(Error::Dimension {
            op: "camera_labels",
            left: probs.shape(),
            right: (labels.len(), 1),
        });
    }
    let c = probs.cols();
    if let Some((i, &z)) = labels.iter().enumerate().find(|(_, &z)| z >= c) {
        return Err(Error::InvalidArgument(format!(
            "camera label {z} at row {i} out of range for {c} cameras"
        )));
    }
    Ok(())
}

#[inline]
fn clamped_ln(p: f64) -> f64 {
    p.max(LOG_EPS).ln()
}

/// Batch-mean cross-entropy against per-row targets written by `target`.
fn soft_target_cross_entropy<F>(probs: &Matrix, mut target: F) -> LossOutput
where
    F: FnMut(usize, &mut [f64]),
{
    let n = probs.rows();
    let c = probs.cols();
    let inv_n = 1.0 / n as f64;
    let mut grad = Matrix::zeros(n, c);
    let mut t = vec![0.0; c];
    let mut total = 0.0;
    for (i, row) in probs.row_iter().enumerate() {
        t.iter_mut().for_each(|v| *v = 0.0);
        target(i, &mut t);
        let mut sample = 0.0;
        for (&p, &w) in row.iter().zip(&t) {
            if w != 0.0 {
                sample -= w * clamped_ln(p);
            }
        }
        total += sample;
        for ((g, &p), &w) in grad.row_mut(i).iter_mut().zip(row).zip(&t) {
            *g = (p - w) * inv_n;
        }
    }
    LossOutput {
        loss: total * inv_n,
        grad_logits: grad,
    }
}

/// Mean of `−ln probs[i, z_i]`; what the discriminator minimizes.
pub fn discriminator_loss(probs: &Matrix, labels: &[usize]) -> Result<LossOutput> {
    validate_probs(probs)?;
    validate_labels(probs, labels)?;
    Ok(soft_target_cross_entropy(probs, |i, t| t[labels[i]] = 1.0))
}

/// Mean of `−(1/(C−1)) Σ_{k≠z} ln probs[k]`.
pub fn oce_loss(probs: &Matrix, labels: &[usize]) -> Result<LossOutput> {
    if probs.cols() < 2 {
        return Err(Error::InvalidArgument(
            "other-camera loss needs at least 2 cameras".into(),
        ));
    }
    validate_probs(probs)?;
    validate_labels(probs, labels)?;
    let w = 1.0 / (probs.cols() - 1) as f64;
    Ok(soft_target_cross_entropy(probs, |i, t| {
        t.iter_mut().for_each(|v| *v = w);
        t[labels[i]] = 0.0;
    }))
}

/// Mean of `−(1/C) Σ_k ln probs[k]`. Labels play no role.
pub fn ace_loss(probs: &Matrix) -> Result<LossOutput> {
    validate_probs(probs)?;
    let w = 1.0 / probs.cols() as f64;
    Ok(soft_target_cross_entropy(probs, |_, t| {
        t.iter_mut().for_each(|v| *v = w)
    }))
}

/// Gradient reversal is the identity on the forward pass.
#[inline]
pub fn grl_forward(x: &Matrix) -> &Matrix {
    x
}

/// Backward pass of gradient reversal: `−λ · upstream`.
pub fn grl_backward(upstream: &Matrix, lambda: f64) -> Matrix {
    upstream.scale(-lambda)
}

/// What the extractor should do with the adversarial term.
#[derive(Debug, Clone)]
pub enum AdversarialTerm {
    /// Minimize this (already λ-weighted) loss.
    Loss(LossOutput),
    /// Backpropagate the discriminator loss through `grl_backward(·, lambda)`.
    ReverseGradient { lambda: f64 },
}

pub fn generator_adversarial_loss(
    scheme: Scheme,
    probs: &Matrix,
    labels: &[usize],
    lambda: f64,
) -> Result<AdversarialTerm> {
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "adversarial weight must be finite and non-negative, got {lambda}"
        )));
    }
    let weighted = |mut out: LossOutput| {
        out.loss *= lambda;
        out.grad_logits = out.grad_logits.scale(lambda);
        AdversarialTerm::Loss(out)
    };
    match scheme {
        Scheme::Oce => Ok(weighted(oce_loss(probs, labels)?)),
        Scheme::Ace => {
            validate_labels(probs, labels)?;
            Ok(weighted(ace_loss(probs)?))
        }
        Scheme::Grl => {
            validate_probs(probs)?;
            validate_labels(probs, labels)?;
            Ok(AdversarialTerm::ReverseGradient { lambda })
        }
        Scheme::None => Err(Error::InvalidArgument(
            "scheme none has no adversarial term".into(),
        )),
    }
}
