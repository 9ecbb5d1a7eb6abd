//! Central finite-difference gradient checking.

use serde::Serialize;

use crate::error::{Error, Result};

pub const DEFAULT_STEP: f64 = 1e-5;
pub const DEFAULT_TOLERANCE: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GradCheckReport {
    pub op_name: String,
    pub max_relative_error: f64,
    pub step: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl GradCheckReport {
    /// Folds several checks of the same op into one, keeping the worst error.
    pub fn merge(op_name: &str, reports: &[GradCheckReport]) -> GradCheckReport {
        let max_relative_error = reports
            .iter()
            .map(|r| r.max_relative_error)
            .fold(0.0, f64::max);
        let tolerance = reports.first().map_or(DEFAULT_TOLERANCE, |r| r.tolerance);
        GradCheckReport {
            op_name: op_name.to_string(),
            max_relative_error,
            step: reports.first().map_or(DEFAULT_STEP, |r| r.step),
            tolerance,
            passed: reports.iter().all(|r| r.passed) && !reports.is_empty(),
        }
    }
}

/// `|a − b| / max(|a|, |b|, 1e-8)`.
pub fn relative_error(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-8)
}

/// Compares `analytic` against central differences of `f` at `point`.
pub fn finite_difference_check<F>(
    op_name: &str,
    f: F,
    analytic: &[f64],
    point: &[f64],
    step: f64,
    tolerance: f64,
) -> Result<GradCheckReport>
where
    F: Fn(&[f64]) -> f64,
{
    if analytic.len() != point.len() {
        return Err(Error::Dimension {
            op: "finite_difference_check",
            left: (analytic.len(), 1),
            right: (point.len(), 1),
        });
    }
    if !(step > 0.0) {
        return Err(Error::InvalidArgument(format!("step must be positive, got {step}")));
    }
    let mut probe = point.to_vec();
    let mut worst = 0.0f64;
    for i in 0..point.len() {
        probe[i] = point[i] + step;
        let plus = f(&probe);
        probe[i] = point[i] - step;
        let minus = f(&probe);
        probe[i] = point[i];
        if !plus.is_finite() || !minus.is_finite() {
            return Err(Error::NonFinite(format!(
                "{op_name}: objective not finite at coordinate {i} ± {step}"
            )));
        }
        let numeric = (plus - minus) / (2.0 * step);
        worst = worst.max(relative_error(numeric, analytic[i]));
    }
    Ok(GradCheckReport {
        op_name: op_name.to_string(),
        max_relative_error: worst,
        step,
        tolerance,
        passed: worst <= tolerance,
    })
}
