//! Closed-form estimation statistics: Fisher information, sensitivity and
//! the Gaussian error envelope of a reconstruction.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::compression::truncation_bound;
use crate::sensor::{SensorConfig, VisibilityModel};
use crate::walsh::{WalshIndex, WalshSpectrum};
use crate::{Error, Result};

/// Classical Fisher information `M γ² T² v² f̂²` of `M` repetitions.
pub fn fisher_information(gamma: f64, duration: f64, v: f64, f_hat: f64, shots: u64) -> f64 {
    shots as f64 * (gamma * duration * v * f_hat).powi(2)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sensitivity {
    /// `1/(√M γ T v |f̂|)`.
    pub eta: f64,
    /// `√M · η`, independent of the number of repetitions.
    pub eta0: f64,
}

pub fn sensitivity(gamma: f64, duration: f64, v: f64, f_hat: f64, shots: u64) -> Result<Sensitivity> {
    if f_hat == 0.0 {
        return Err(Error::InfiniteSensitivity);
    }
    let eta0 = 1.0 / (gamma * duration * v * f_hat.abs());
    Ok(Sensitivity {
        eta: eta0 / (shots as f64).sqrt(),
        eta0,
    })
}

/// Standard deviation `1/(√M T γ v)` of one estimated coefficient.
pub fn coefficient_std(gamma: f64, duration: f64, v: f64, shots: u64) -> f64 {
    1.0 / ((shots as f64).sqrt() * duration * gamma * v)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeRow {
    pub t: f64,
    pub mean: f64,
    pub mean_minus_sigma: f64,
    pub mean_plus_sigma: f64,
}

/// Reconstruction from estimated coefficients with its time-independent
/// Gaussian spread.
#[derive(Debug, Clone, PartialEq)]
pub struct ReconstructionEnvelope {
    mean: WalshSpectrum,
    variance: f64,
}

impl ReconstructionEnvelope {
    /// `variance = inflation · Σ_J 1/v_α² / (M T² γ²)` over the indices `J`
    /// stored in `mean`. `inflation` scales for unmodelled systematics.
    pub fn new(
        mean: WalshSpectrum,
        shots: u64,
        cfg: &SensorConfig,
        vis: &VisibilityModel,
        inflation: f64,
    ) -> Result<Self> {
        if mean.coefficients().is_empty() {
            return Err(Error::invalid("spectrum", "no measured indices"));
        }
        if shots == 0 {
            return Err(Error::invalid("shots", "must be at least 1"));
        }
        if !(inflation >= 1.0 && inflation.is_finite()) {
            return Err(Error::invalid("inflation", format!("{inflation} must be at least 1")));
        }
        let inv_v2: f64 = mean
            .indices()
            .into_iter()
            .map(|m| vis.visibility(WalshIndex::paley(m), cfg.duration).powi(-2))
            .sum();
        let variance = inflation * inv_v2 / (shots as f64 * (cfg.duration * cfg.gamma).powi(2));
        Ok(Self { mean, variance })
    }

    pub fn variance(&self) -> f64 {
        self.variance
    }

    pub fn sigma(&self) -> f64 {
        self.variance.sqrt()
    }

    pub fn mean(&self) -> &WalshSpectrum {
        &self.mean
    }

    pub fn mean_at(&self, t: f64) -> Result<f64> {
        let set: Vec<_> = self.mean.indices().into_iter().map(WalshIndex::paley).collect();
        self.mean.partial_sum(&set, t)
    }

    /// Envelope at `points` evenly spaced cell midpoints of the window.
    pub fn rows(&self, points: usize) -> Result<Vec<EnvelopeRow>> {
        let sigma = self.sigma();
        let dt = self.mean.duration() / points as f64;
        (0..points)
            .map(|i| {
                let t = (i as f64 + 0.5) * dt;
                let mean = self.mean_at(t)?;
                Ok(EnvelopeRow {
                    t,
                    mean,
                    mean_minus_sigma: mean - sigma,
                    mean_plus_sigma: mean + sigma,
                })
            })
            .collect()
    }

    /// CSV with columns `t, mean, mean_minus_sigma, mean_plus_sigma`.
    pub fn write_csv<W: Write>(&self, out: W, points: usize) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for row in self.rows(points)? {
            w.serialize(row)?;
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TotalErrorReport {
    pub truncation_order: u32,
    /// Deterministic max-error bound from truncating at `2^n` terms.
    pub truncation_bound: f64,
    /// Statistical variance of the reconstruction at any time.
    pub variance: f64,
    pub sigma: f64,
}

/// Puts the truncation bound at order `n` next to the envelope variance.
pub fn total_error_report(
    n: u32,
    envelope: &ReconstructionEnvelope,
    sup_deriv: f64,
) -> TotalErrorReport {
    TotalErrorReport {
        truncation_order: n,
        truncation_bound: truncation_bound(n, envelope.mean.duration(), sup_deriv),
        variance: envelope.variance(),
        sigma: envelope.sigma(),
    }
}
