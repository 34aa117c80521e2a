//! Two-function negentropy approximation.
//!
//! For a standardized variable `y`,
//!
//! ```text
//! J(y) = k1 * E[y exp(-y²/2)]² + k2 * (E[exp(-y²/2)] - sqrt(1/2))²
//! ```
//!
//! with `k1 = 36 / (8√3 - 9)` and `k2 = 24 / (16√3 - 27)`. Expectations are
//! plain sample means accumulated in index order, so the result depends only
//! on the input values and their order.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::StandardizedSamples;

/// Minimum length for a curve handed to [`curve_negentropy`].
pub const MIN_CURVE_LEN: usize = 8;

/// Weight of the odd (skewness-like) term.
pub fn k1() -> f64 {
    36.0 / (8.0 * 3f64.sqrt() - 9.0)
}

/// Weight of the even (kurtosis-like) term.
pub fn k2() -> f64 {
    24.0 / (16.0 * 3f64.sqrt() - 27.0)
}

/// Differential entropy of a standard normal variable, `(1 + ln 2π) / 2`.
pub fn gaussian_entropy() -> f64 {
    (1.0 + (2.0 * std::f64::consts::PI).ln()) / 2.0
}

/// A negentropy estimate in nats. Never negative.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Negentropy(f64);

impl Negentropy {
    pub fn value(self) -> f64 {
        self.0
    }
}

impl From<Negentropy> for f64 {
    fn from(j: Negentropy) -> f64 {
        j.0
    }
}

/// Negentropy of standardized samples.
pub fn negentropy(samples: &StandardizedSamples) -> Result<Negentropy> {
    let values = samples.values();
    if values.len() < 2 {
        return Err(Error::TooFewSamples {
            count: values.len(),
            min: 2,
        });
    }
    let (mut odd, mut even) = (0.0f64, 0.0f64);
    for &y in values {
        let g = (-0.5 * y * y).exp();
        odd += y * g;
        even += g;
    }
    let n = values.len() as f64;
    let odd = odd / n;
    let even = even / n - std::f64::consts::FRAC_1_SQRT_2;
    Ok(Negentropy(k1() * odd * odd + k2() * even * even))
}

/// Entropy approximation `H(z) - J(y)`.
pub fn entropy_approx(samples: &StandardizedSamples) -> Result<f64> {
    Ok(gaussian_entropy() - negentropy(samples)?.value())
}

/// Standardizes a 1-D curve and returns its negentropy.
pub fn curve_negentropy(curve: &[f64]) -> Result<Negentropy> {
    if curve.len() < MIN_CURVE_LEN {
        return Err(Error::TooFewSamples {
            count: curve.len(),
            min: MIN_CURVE_LEN,
        });
    }
    let samples = StandardizedSamples::from_values(curve).ok_or(Error::ZeroVarianceCurve)?;
    negentropy(&samples)
}
