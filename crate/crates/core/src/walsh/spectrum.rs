use std::collections::BTreeMap;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::index::{cell_sign, degree, walsh_paley_unchecked, WalshIndex};
use super::profile::{FieldProfile, ProfileBody};
use super::transform::{fwht, ifwht};
use crate::quadrature::GaussLegendre;
use crate::{Error, Result};

/// Whether coefficients were computed from the field or estimated from
/// measurement records.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Exact,
    Estimated,
}

/// Per-cell Gauss–Legendre settings for coefficient integrals.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientQuadrature {
    rule: GaussLegendre,
    /// Cells are never coarser than `2^-min_level` of the window.
    pub min_level: u32,
}

impl CoefficientQuadrature {
    pub fn new(points_per_cell: usize, min_level: u32) -> Self {
        Self {
            rule: GaussLegendre::new(points_per_cell),
            min_level,
        }
    }

    pub fn rule(&self) -> &GaussLegendre {
        &self.rule
    }
}

impl Default for CoefficientQuadrature {
    fn default() -> Self {
        Self::new(8, 6)
    }
}

/// `(1/T) ∫ b(t) w_m(t/T) dt` as a signed sum of per-cell integrals. For
/// sampled profiles this is the exact coefficient of the piecewise-constant
/// interpolant.
pub fn walsh_coefficient(
    profile: &FieldProfile,
    idx: WalshIndex,
    quad: &CoefficientQuadrature,
) -> f64 {
    let m = idx.paley_index();
    let d = degree(m);
    match profile.body() {
        ProfileBody::Analytic(_) => {
            let level = d.max(quad.min_level);
            let integrals = profile.cell_integrals(level, &quad.rule);
            integrals
                .iter()
                .enumerate()
                .map(|(c, v)| f64::from(cell_sign(m, level, c as u64)) * v)
                .sum::<f64>()
                / profile.duration()
        }
        ProfileBody::Sampled { values, .. } => {
            let level = values.len().trailing_zeros();
            if d > level {
                return 0.0;
            }
            values
                .iter()
                .enumerate()
                .map(|(c, v)| f64::from(cell_sign(m, level, c as u64)) * v)
                .sum::<f64>()
                / values.len() as f64
        }
    }
}

/// A set of Walsh coefficients on a window of length `T`, keyed by Paley
/// index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WalshSpectrum {
    #[serde(rename = "T")]
    duration: f64,
    ordering: PaleyTag,
    coefficients: BTreeMap<u64, f64>,
    provenance: Provenance,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum PaleyTag {
    Paley,
}

impl WalshSpectrum {
    pub fn new(duration: f64, coefficients: BTreeMap<u64, f64>, provenance: Provenance) -> Self {
        Self {
            duration,
            ordering: PaleyTag::Paley,
            coefficients,
            provenance,
        }
    }

    /// The first `2^order` coefficients via cell integrals and one fast
    /// transform.
    pub fn exact(profile: &FieldProfile, order: u32, quad: &CoefficientQuadrature) -> Result<Self> {
        let values = exact_coefficients(profile, order, quad)?;
        Ok(Self::new(
            profile.duration(),
            values.into_iter().enumerate().map(|(m, v)| (m as u64, v)).collect(),
            Provenance::Exact,
        ))
    }

    /// Exact coefficients for an arbitrary index list, computed per index
    /// (in parallel).
    pub fn exact_for(
        profile: &FieldProfile,
        indices: &[u64],
        quad: &CoefficientQuadrature,
    ) -> Self {
        let coefficients = indices
            .par_iter()
            .map(|&m| (m, walsh_coefficient(profile, WalshIndex::paley(m), quad)))
            .collect();
        Self::new(profile.duration(), coefficients, Provenance::Exact)
    }

    pub fn duration(&self) -> f64 {
        self.duration
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn coefficients(&self) -> &BTreeMap<u64, f64> {
        &self.coefficients
    }

    pub fn get(&self, m: u64) -> Option<f64> {
        self.coefficients.get(&m).copied()
    }

    pub fn indices(&self) -> Vec<u64> {
        self.coefficients.keys().copied().collect()
    }

    /// Keeps only the listed indices.
    pub fn restrict(&self, indices: &[u64]) -> Result<Self> {
        let coefficients = indices
            .iter()
            .map(|&m| {
                self.get(m)
                    .map(|v| (m, v))
                    .ok_or(Error::MissingCoefficient { index: m })
            })
            .collect::<Result<_>>()?;
        Ok(Self::new(self.duration, coefficients, self.provenance))
    }

    /// `Σ_{idx ∈ set} f̂_idx w_idx(t/T)` at absolute time `t ∈ [0, T)`.
    pub fn partial_sum(&self, index_set: &[WalshIndex], t: f64) -> Result<f64> {
        if !(0.0..self.duration).contains(&t) {
            return Err(Error::TimeOutOfWindow {
                t,
                duration: self.duration,
            });
        }
        let u = t / self.duration;
        index_set.iter().try_fold(0.0, |acc, idx| {
            let m = idx.paley_index();
            let c = self.get(m).ok_or(Error::MissingCoefficient { index: m })?;
            Ok(acc + c * f64::from(walsh_paley_unchecked(m, u)))
        })
    }

    /// The `n`-th order reconstruction (first `2^n` terms) at `t`.
    pub fn reconstruction_at(&self, order: u32, t: f64) -> Result<f64> {
        let set: Vec<_> = (0..1u64 << order).map(WalshIndex::paley).collect();
        self.partial_sum(&set, t)
    }

    /// Smallest level whose grid resolves every stored coefficient.
    pub fn level(&self) -> u32 {
        self.coefficients.keys().map(|&m| degree(m)).max().unwrap_or(0)
    }

    /// Reconstruction from the stored coefficients as cell values on a grid
    /// of `2^level` cells; `level` must be at least [`Self::level`].
    pub fn cell_values(&self, level: u32) -> Result<Vec<f64>> {
        if level < self.level() {
            return Err(Error::invalid(
                "level",
                format!("{level} is below the spectrum's degree {}", self.level()),
            ));
        }
        let mut dense = vec![0.0; 1 << level];
        for (&m, &v) in &self.coefficients {
            dense[m as usize] = v;
        }
        ifwht(&dense)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn read_json(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

/// The first `2^order` Paley coefficients as a dense vector.
pub fn exact_coefficients(
    profile: &FieldProfile,
    order: u32,
    quad: &CoefficientQuadrature,
) -> Result<Vec<f64>> {
    let count = 1usize << order;
    let (level, integrals) = match profile.sample_level() {
        Some(sl) => (sl, profile.cell_integrals(sl, &quad.rule)),
        None => {
            let level = order.max(quad.min_level);
            (level, profile.cell_integrals(level, &quad.rule))
        }
    };
    let width = profile.duration() / (1u64 << level) as f64;
    let averages: Vec<f64> = integrals.iter().map(|v| v / width).collect();
    let mut coefficients = fwht(&averages)?;
    coefficients.resize(count.max(coefficients.len()), 0.0);
    coefficients.truncate(count);
    Ok(coefficients)
}
