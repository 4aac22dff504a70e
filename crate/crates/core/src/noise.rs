//! Truncated normal noise.
//!
//! Sampling is by inversion: one uniform variate is drawn on every call,
//! whatever the truncation interval or variance, so replicate streams stay
//! aligned draw-for-draw.

use rand::Rng;
use thiserror::Error;

use crate::normal::{normal_cdf, normal_quantile};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NoiseError {
    #[error("truncated normal spec has a non-finite field: {0:?}")]
    NonFinite(NoiseSpec),
    #[error("truncated normal variance must be >= 0, got {0}")]
    NegativeVariance(f64),
    #[error("truncated normal bounds are inverted: lower {lower} > upper {upper}")]
    InvertedBounds { lower: f64, upper: f64 },
}

/// A normal distribution `N(mean, variance)` truncated to `[lower, upper]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    pub mean: f64,
    pub variance: f64,
    pub lower: f64,
    pub upper: f64,
}

impl NoiseSpec {
    pub fn new(mean: f64, variance: f64, lower: f64, upper: f64) -> Result<Self, NoiseError> {
        let spec = Self {
            mean,
            variance,
            lower,
            upper,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), NoiseError> {
        if !(self.mean.is_finite()
            && self.variance.is_finite()
            && self.lower.is_finite()
            && self.upper.is_finite())
        {
            return Err(NoiseError::NonFinite(*self));
        }
        if self.variance < 0.0 {
            return Err(NoiseError::NegativeVariance(self.variance));
        }
        if self.lower > self.upper {
            return Err(NoiseError::InvertedBounds {
                lower: self.lower,
                upper: self.upper,
            });
        }
        Ok(())
    }
}

/// Draws one value from `spec`, consuming exactly one uniform from `rng`.
pub fn sample_truncated_normal<R: Rng + ?Sized>(
    spec: &NoiseSpec,
    rng: &mut R,
) -> Result<f64, NoiseError> {
    spec.validate()?;
    let u: f64 = rng.random();
    Ok(invert_truncated_normal(spec, u))
}

/// Maps a uniform `u` in `[0, 1)` to the truncated normal quantile.
///
/// `spec` must already be valid. The result always lies in `[lower, upper]`.
pub(crate) fn invert_truncated_normal(spec: &NoiseSpec, u: f64) -> f64 {
    let NoiseSpec {
        mean,
        variance,
        lower,
        upper,
    } = *spec;
    if variance == 0.0 || lower == upper {
        return mean.clamp(lower, upper);
    }
    let sd = variance.sqrt();
    let a = (lower - mean) / sd;
    let b = (upper - mean) / sd;
    // Work in the lower tail, where the CDF keeps its relative precision.
    let z = if a >= 0.0 {
        -standard_truncated(-b, -a, u)
    } else {
        standard_truncated(a, b, u)
    };
    (mean + sd * z).clamp(lower, upper)
}

/// Inverse-CDF draw from a standard normal truncated to `[a, b]`, `a < 0`.
fn standard_truncated(a: f64, b: f64, u: f64) -> f64 {
    let lo = normal_cdf(a);
    let hi = normal_cdf(b);
    let mass = hi - lo;
    if mass > 0.0 && lo.is_finite() {
        let z = normal_quantile(lo + u * mass);
        return z.clamp(a, b);
    }
    // Both bounds are so far in the lower tail that the mass underflows.
    // There the density is proportional to exp(-|b| (b - x)) to leading
    // order, so invert the truncated exponential hanging off `b`.
    let rate = b.abs().max(f64::MIN_POSITIVE);
    let width = b - a;
    let cap = -(-rate * width).exp_m1();
    let offset = -(-u * cap).ln_1p() / rate;
    (b - offset).clamp(a, b)
}
