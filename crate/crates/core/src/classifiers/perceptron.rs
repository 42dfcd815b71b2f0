use serde::{Deserialize, Serialize};

use crate::error::{EmgError, Result};
use crate::linalg::dot;

/// Single-layer threshold unit: fires when `w·x > t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Perceptron {
    pub weights: Vec<f64>,
    pub threshold: f64,
}

impl Perceptron {
    pub fn new(weights: Vec<f64>, threshold: f64) -> Result<Self> {
        if weights.iter().any(|w| !w.is_finite()) || !threshold.is_finite() {
            return Err(EmgError::invalid("perceptron parameters must be finite"));
        }
        Ok(Self { weights, threshold })
    }

    /// Summed input `w·x`.
    pub fn net_input(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.weights.len() {
            return Err(EmgError::DimensionMismatch {
                expected: self.weights.len(),
                actual: x.len(),
            });
        }
        Ok(dot(&self.weights, x))
    }

    pub fn predict(&self, x: &[f64]) -> Result<u8> {
        Ok(u8::from(self.net_input(x)? > self.threshold))
    }
}
