//! Measurement-probability simulation of a qubit sensor driven by
//! Walsh-modulated π-pulse sequences.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_PI_2;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::compression::CompressionPlan;
use crate::walsh::{walsh_coefficient, CoefficientQuadrature, FieldProfile, Provenance, WalshIndex, WalshSpectrum};
use crate::{Error, Result};

/// Electron gyromagnetic ratio of an NV centre, 2π·28 GHz/T, in rad/(s·nT).
pub const NV_ELECTRON_GAMMA: f64 = std::f64::consts::TAU * 28.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SensorConfig {
    /// Coupling strength, radians per field unit per second.
    pub gamma: f64,
    /// Acquisition window `T` in seconds.
    #[serde(rename = "T")]
    pub duration: f64,
}

impl SensorConfig {
    pub fn new(gamma: f64, duration: f64) -> Result<Self> {
        if !(gamma.is_finite() && gamma > 0.0) {
            return Err(Error::invalid("gamma", format!("{gamma} must be positive")));
        }
        if !(duration.is_finite() && duration > 0.0) {
            return Err(Error::invalid("duration", format!("{duration} must be positive")));
        }
        Ok(Self { gamma, duration })
    }

    /// `γT`, the phase per unit coefficient.
    pub fn phase_scale(&self) -> f64 {
        self.gamma * self.duration
    }

    /// Largest coefficient magnitude that can be inverted unambiguously.
    pub fn dynamic_range(&self) -> f64 {
        FRAC_PI_2 / self.phase_scale()
    }
}

impl Default for SensorConfig {
    fn default() -> Self {
        Self {
            gamma: 1.0,
            duration: 1.0,
        }
    }
}

/// Coherence loss per sequence: `v = exp(-(T/T₂)^stretch)` with
/// `T₂ = t2_base · max(pulses, 1)^pulse_exponent`. An infinite `t2_base`
/// gives `v ≡ 1`. `overrides` pins `T₂` for individual Paley indices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VisibilityModel {
    pub t2_base: f64,
    pub stretch: f64,
    pub pulse_exponent: f64,
    #[serde(default)]
    pub overrides: BTreeMap<u64, f64>,
}

impl Default for VisibilityModel {
    fn default() -> Self {
        Self::ideal()
    }
}

impl VisibilityModel {
    pub fn ideal() -> Self {
        Self {
            t2_base: f64::INFINITY,
            stretch: 1.0,
            pulse_exponent: 0.0,
            overrides: BTreeMap::new(),
        }
    }

    pub fn new(t2_base: f64, stretch: f64, pulse_exponent: f64) -> Result<Self> {
        if !(t2_base > 0.0) {
            return Err(Error::invalid("t2", format!("{t2_base} must be positive")));
        }
        if !(stretch >= 1.0) {
            return Err(Error::invalid("stretch", format!("{stretch} must be at least 1")));
        }
        if !pulse_exponent.is_finite() {
            return Err(Error::invalid("pulse_exponent", "must be finite"));
        }
        Ok(Self {
            t2_base,
            stretch,
            pulse_exponent,
            overrides: BTreeMap::new(),
        })
    }

    pub fn t2(&self, idx: WalshIndex) -> f64 {
        let m = idx.paley_index();
        if let Some(&t2) = self.overrides.get(&m) {
            return t2;
        }
        let pulses = idx.sequency_index().max(1) as f64;
        self.t2_base * pulses.powf(self.pulse_exponent)
    }

    pub fn visibility(&self, idx: WalshIndex, duration: f64) -> f64 {
        let t2 = self.t2(idx);
        if t2.is_infinite() {
            return 1.0;
        }
        (-(duration / t2).powf(self.stretch)).exp()
    }
}

/// Outcome statistics of one Walsh sequence repeated `shots` times.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasurementRecord {
    /// Paley index of the sequence.
    pub index: u64,
    #[serde(rename = "M")]
    pub shots: u64,
    pub zeros: u64,
    #[serde(rename = "v")]
    pub visibility: f64,
    pub seed: u64,
    /// Exact outcome probability, present for noiseless runs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p0: Option<f64>,
}

impl MeasurementRecord {
    /// Observed fraction of "0" outcomes, or the exact probability when
    /// the record is noiseless.
    pub fn zero_fraction(&self) -> f64 {
        self.p0.unwrap_or(self.zeros as f64 / self.shots as f64)
    }
}

/// `φ = γ T f̂_α`.
pub fn accumulated_phase(b: &FieldProfile, idx: WalshIndex, cfg: &SensorConfig) -> Result<f64> {
    check_duration(b, cfg)?;
    Ok(cfg.phase_scale() * walsh_coefficient(b, idx, &CoefficientQuadrature::default()))
}

fn check_duration(b: &FieldProfile, cfg: &SensorConfig) -> Result<()> {
    if (b.duration() - cfg.duration).abs() > 1e-12 * cfg.duration.max(1.0) {
        return Err(Error::DurationMismatch {
            left: b.duration(),
            right: cfg.duration,
        });
    }
    Ok(())
}

/// Probability of the "0" outcome, `(1 + v sin φ)/2`.
pub fn outcome_probability(phi: f64, v: f64) -> f64 {
    0.5 * (1.0 + v * phi.sin())
}

/// Mixes a master seed and an index into an independent stream seed
/// (SplitMix64 finaliser).
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    let mix = |mut z: u64| {
        z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    };
    mix(seed ^ mix(index))
}

/// Draws `zeros ~ Binomial(shots, p0)` from a ChaCha8 stream seeded by `seed`.
pub fn simulate_shots(index: u64, p0: f64, visibility: f64, shots: u64, seed: u64) -> Result<MeasurementRecord> {
    if !(0.0..=1.0).contains(&p0) {
        return Err(Error::invalid("p0", format!("{p0} is not a probability")));
    }
    if shots == 0 {
        return Err(Error::invalid("shots", "must be at least 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let zeros = Binomial::new(shots, p0)
        .map_err(|e| Error::invalid("p0", e.to_string()))?
        .sample(&mut rng);
    Ok(MeasurementRecord {
        index,
        shots,
        zeros,
        visibility,
        seed,
        p0: None,
    })
}

/// An inverted coefficient with its dynamic-range flags.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    /// `(2p̂ - 1)/v` fell outside `[-1, 1]` and was clipped.
    pub clamped: bool,
    /// `|γT f̂| ≥ π/2`: the field may lie outside the dynamic range.
    pub saturated: bool,
}

/// `f̂ = arcsin((2p̂ - 1)/v) / (γT)` with the argument clipped to `[-1, 1]`.
pub fn estimate_coefficient(rec: &MeasurementRecord, cfg: &SensorConfig) -> Estimate {
    let raw = (2.0 * rec.zero_fraction() - 1.0) / rec.visibility;
    let clamped = raw.abs() > 1.0;
    let value = raw.clamp(-1.0, 1.0).asin() / cfg.phase_scale();
    let saturated = (cfg.phase_scale() * value).abs() >= FRAC_PI_2 * (1.0 - 1e-12);
    Estimate {
        value,
        clamped,
        saturated,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ShotMode {
    /// Use exact outcome probabilities, as if `M → ∞`.
    Noiseless,
    /// Binomial shot noise.
    Sampled,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Acquisition {
    pub config: SensorConfig,
    pub plan: CompressionPlan,
    pub records: Vec<MeasurementRecord>,
    pub spectrum: WalshSpectrum,
    /// Paley indices whose estimates hit the dynamic-range limit.
    pub saturated: Vec<u64>,
    pub clamped: usize,
    /// Paley indices whose true phase was at least π/2 in magnitude, so the
    /// estimate is aliased. Only a simulation can know this.
    #[serde(default)]
    pub out_of_range: Vec<u64>,
}

impl Acquisition {
    pub fn has_range_problems(&self) -> bool {
        !self.saturated.is_empty() || !self.out_of_range.is_empty()
    }
}

/// Measures every planned coefficient of `b`. Each index draws from its own
/// stream seeded by `derive_seed(seed, index)`, so results do not depend on
/// scheduling.
pub fn run_protocol(
    b: &FieldProfile,
    cfg: &SensorConfig,
    plan: &CompressionPlan,
    vis: &VisibilityModel,
    shots: u64,
    seed: u64,
    mode: ShotMode,
) -> Result<Acquisition> {
    check_duration(b, cfg)?;
    if plan.selected_indices.is_empty() {
        return Err(Error::invalid("plan", "no indices selected"));
    }
    if shots == 0 {
        return Err(Error::invalid("shots", "must be at least 1"));
    }
    let exact = crate::compression::plan_spectrum(b, plan, &CoefficientQuadrature::default())?;
    let out_of_range = plan
        .selected_indices
        .iter()
        .copied()
        .filter(|&m| (cfg.phase_scale() * exact.get(m).expect("planned index")).abs() >= FRAC_PI_2)
        .collect();
    let outcomes: Vec<(MeasurementRecord, Estimate)> = plan
        .selected_indices
        .par_iter()
        .map(|&m| {
            let idx = WalshIndex::paley(m);
            let v = vis.visibility(idx, cfg.duration);
            let phi = cfg.phase_scale() * exact.get(m).expect("planned index");
            let p0 = outcome_probability(phi, v).clamp(0.0, 1.0);
            let stream = derive_seed(seed, m);
            let rec = match mode {
                ShotMode::Sampled => simulate_shots(m, p0, v, shots, stream)?,
                ShotMode::Noiseless => MeasurementRecord {
                    index: m,
                    shots,
                    zeros: (p0 * shots as f64).round() as u64,
                    visibility: v,
                    seed: stream,
                    p0: Some(p0),
                },
            };
            Ok((rec, estimate_coefficient(&rec, cfg)))
        })
        .collect::<Result<_>>()?;

    let spectrum = WalshSpectrum::new(
        cfg.duration,
        outcomes.iter().map(|(r, e)| (r.index, e.value)).collect(),
        Provenance::Estimated,
    );
    Ok(Acquisition {
        config: *cfg,
        plan: plan.clone(),
        saturated: outcomes.iter().filter(|(_, e)| e.saturated).map(|(r, _)| r.index).collect(),
        clamped: outcomes.iter().filter(|(_, e)| e.clamped).count(),
        out_of_range,
        records: outcomes.into_iter().map(|(r, _)| r).collect(),
        spectrum,
    })
}
