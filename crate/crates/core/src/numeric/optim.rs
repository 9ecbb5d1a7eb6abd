//! Plain stochastic gradient descent.

use crate::error::{Error, Result};

/// `θ ← θ − lr·g`, elementwise.
pub fn sgd_step(params: &mut [f64], grads: &[f64], learning_rate: f64) -> Result<()> {
    if params.len() != grads.len() {
        return Err(Error::Dimension {
            op: "sgd_step",
            left: (params.len(), 1),
            right: (grads.len(), 1),
        });
    }
    if !(learning_rate > 0.0) || !learning_rate.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "learning rate must be positive and finite, got {learning_rate}"
        )));
    }
    for (p, g) in params.iter_mut().zip(grads) {
        *p -= learning_rate * g;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_gradient_leaves_parameters() {
        let mut p = [1.0, 1.0];
        sgd_step(&mut p, &[0.0, 0.0], 0.1).unwrap();
        assert_eq!(p, [1.0, 1.0]);
    }

    #[test]
    fn single_step() {
        let mut p = [1.0];
        sgd_step(&mut p, &[2.0], 0.1).unwrap();
        assert!((p[0] - 0.8).abs() < 1e-15);
    }

    #[test]
    fn quadratic_descent_follows_closed_form() {
        // f(θ) = θ², θ_t = (1 − 2μ)^t
        let mu = 0.1;
        let mut theta = [1.0];
        let mut prev = theta[0];
        for t in 1..=50 {
            let g = [2.0 * theta[0]];
            sgd_step(&mut theta, &g, mu).unwrap();
            assert!(theta[0] < prev && theta[0] > 0.0);
            assert!((theta[0] - (1.0 - 2.0 * mu).powi(t)).abs() < 1e-14);
            prev = theta[0];
        }
    }

    #[test]
    fn rejects_mismatch_and_bad_rate() {
        let mut p = [1.0, 2.0];
        assert!(sgd_step(&mut p, &[1.0], 0.1).is_err());
        assert!(sgd_step(&mut p, &[1.0, 1.0], 0.0).is_err());
        assert!(sgd_step(&mut p, &[1.0, 1.0], f64::NAN).is_err());
    }
}
