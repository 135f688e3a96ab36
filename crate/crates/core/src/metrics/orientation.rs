//! Body-orientation error metrics: angular distance MAE and Accuracy-X.

use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use super::MetricsError;

/// Minimal angular distance between two directions in degrees, in
/// `[0, 180]`.
pub fn angular_error(pred_deg: f64, gt_deg: f64) -> f64 {
    let delta = (pred_deg - gt_deg).abs().rem_euclid(360.0);
    delta.min(360.0 - delta)
}

/// Fraction of errors within `x` degrees.
pub fn accuracy_at(errors: &[f64], x: f64) -> Result<f64, MetricsError> {
    debug_assert!((0.0..=180.0).contains(&x));
    if errors.is_empty() {
        return Err(MetricsError::EmptyInput);
    }
    let within = errors.iter().filter(|&&e| e <= x).count();
    Ok(within as f64 / errors.len() as f64)
}

/// Aggregated orientation metrics over all matched samples.
#[derive(Debug, Clone, PartialEq)]
pub struct OrientationSummary {
    pub samples: usize,
    /// Mean absolute angular error, degrees.
    pub mae_deg: f64,
    /// (threshold X, Accuracy-X) pairs in ascending X order.
    pub accuracy_at: Vec<(f64, f64)>,
}

impl OrientationSummary {
    /// Builds the summary from raw angular errors and a threshold list.
    pub fn from_errors(errors: &[f64], thresholds: &[f64]) -> Result<Self, MetricsError> {
        if errors.is_empty() {
            return Err(MetricsError::EmptyInput);
        }
        let mae_deg = errors.iter().sum::<f64>() / errors.len() as f64;
        let mut accuracy = Vec::with_capacity(thresholds.len());
        for &x in thresholds {
            accuracy.push((x, accuracy_at(errors, x)?));
        }
        Ok(Self {
            samples: errors.len(),
            mae_deg,
            accuracy_at: accuracy,
        })
    }
}

/// The threshold list used in the orientation tables.
pub const DEFAULT_ACCURACY_THRESHOLDS: [f64; 6] = [5.0, 15.0, 22.5, 30.0, 45.0, 90.0];
