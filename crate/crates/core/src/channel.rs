//! BPSK over AWGN: bit 0 maps to +1, bit 1 to −1.

use std::ops::{Deref, DerefMut};

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::gf2::BitVector;

/// Log-likelihood ratios `ln p(y|0) / p(y|1)`, one per code bit.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LlrVector(Vec<f64>);

impl LlrVector {
    pub fn new(values: Vec<f64>) -> Self {
        Self(values)
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl From<Vec<f64>> for LlrVector {
    fn from(values: Vec<f64>) -> Self {
        Self(values)
    }
}

impl Deref for LlrVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl DerefMut for LlrVector {
    fn deref_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }
}

/// Noise standard deviation for unit-energy BPSK at the given Eb/N0.
pub fn ebn0_to_sigma(ebn0_db: f64, rate: f64) -> Result<f64> {
    if !(rate > 0.0 && rate <= 1.0) {
        return Err(Error::InvalidRate(rate));
    }
    let ebn0 = 10f64.powf(ebn0_db / 10.0);
    Ok((1.0 / (2.0 * rate * ebn0)).sqrt())
}

pub fn transmit<R: Rng + ?Sized>(c: &BitVector, sigma: f64, rng: &mut R) -> Vec<f64> {
    (0..c.len())
        .map(|i| {
            let symbol = if c.get(i) { -1.0 } else { 1.0 };
            let noise: f64 = rng.sample(StandardNormal);
            symbol + sigma * noise
        })
        .collect()
}

pub fn channel_llr(y: &[f64], sigma: f64) -> Result<LlrVector> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::InvalidSigma(sigma));
    }
    let scale = 2.0 / (sigma * sigma);
    Ok(LlrVector(y.iter().map(|&v| scale * v).collect()))
}
