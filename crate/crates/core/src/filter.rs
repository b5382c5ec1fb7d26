//! Filter functions of Walsh decoupling sequences and the coherence decay
//! they produce under a dephasing noise spectrum.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::negligibility::{negligibility, rank};
use crate::quadrature::{integrate_adaptive, AdaptiveOptions};
use crate::walsh::{cell_sign, degree};
use crate::{Error, Result};

const MAX_ORDER: u32 = 62;

/// `F_m(ωT)` on a reconstruction grid of `2^n` cells.
///
/// Closed form: `4^(n+1) sin²(ωT/2^(n+1)) Π_{j=1..n} g_j(ωT/2^(j+1))`,
/// where `g_j` is `sin²` when bit `j` of `m` (1-based, least significant
/// first) is set and `cos²` otherwise. The value does not depend on `n`
/// once `n ≥ d(m)`.
pub fn filter_function(m: u64, n: u32, omega_t: f64) -> Result<f64> {
    if n < degree(m) || n > MAX_ORDER {
        return Err(Error::invalid(
            "n",
            format!("order {n} must lie in {}..={MAX_ORDER} for index {m}", degree(m)),
        ));
    }
    if !(omega_t >= 0.0) {
        return Err(Error::invalid("omega_t", format!("{omega_t} must be non-negative")));
    }
    let mut value = 4f64.powi(n as i32 + 1) * (omega_t / f64::from(n + 1).exp2()).sin().powi(2);
    for j in 1..=n {
        let x = omega_t / f64::from(j + 1).exp2();
        let g = if m >> (j - 1) & 1 == 1 { x.sin() } else { x.cos() };
        value *= g * g;
    }
    Ok(value)
}

/// Leading small-`ωT` behaviour `(ωT)^(2(r+1)) / 4^p`.
pub fn rolloff(m: u64, omega_t: f64) -> f64 {
    omega_t.powi(2 * (rank(m) as i32 + 1)) / 4f64.powi(negligibility(m) as i32)
}

/// `∫₀¹ t^k w_m(t) dt`, summed cell by cell from exact antiderivatives.
/// Uses integer arithmetic whenever the cell endpoints' powers fit.
pub fn annihilation_integral(m: u64, k: u32) -> f64 {
    let d = degree(m);
    let power = k + 1;
    let exact_bits = u64::from(d) * u64::from(power);
    if d <= 20 && exact_bits <= 120 {
        let cells = 1u64 << d;
        let sum: i128 = (0..cells)
            .map(|c| {
                let a = i128::from(c as i64).pow(power);
                let b = i128::from(c as i64 + 1).pow(power);
                i128::from(cell_sign(m, d, c)) * (b - a)
            })
            .sum();
        // sum / (k+1) / 2^(d(k+1)), split so the scaling stays exact
        sum as f64 / f64::from(power) / (exact_bits as f64).exp2()
    } else {
        let cells = 1u64 << d.min(30);
        let h = 1.0 / cells as f64;
        (0..cells)
            .map(|c| {
                let a = c as f64 * h;
                f64::from(cell_sign(m, d.min(30), c)) * ((a + h).powi(power as i32) - a.powi(power as i32))
            })
            .sum::<f64>()
            / f64::from(power)
    }
}

/// Dephasing noise power spectral density with hard frequency cutoffs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SpectrumShape {
    /// `A ω^exponent`.
    PowerLaw { amplitude: f64, exponent: f64 },
    /// `A / (1 + (ω/ω_c)²)`.
    Lorentzian { amplitude: f64, cutoff: f64 },
    /// Linear interpolation of `(omega, density)`, zero outside the table.
    Tabulated { omega: Vec<f64>, density: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpectrum {
    pub shape: SpectrumShape,
    pub omega_min: f64,
    pub omega_max: f64,
}

impl NoiseSpectrum {
    pub fn new(shape: SpectrumShape, omega_min: f64, omega_max: f64) -> Result<Self> {
        if !(omega_min > 0.0 && omega_max > omega_min && omega_max.is_finite()) {
            return Err(Error::invalid(
                "cutoffs",
                format!("need 0 < omega_min < omega_max < ∞, got [{omega_min}, {omega_max}]"),
            ));
        }
        match &shape {
            SpectrumShape::PowerLaw { amplitude, exponent } => {
                if !(*amplitude >= 0.0) || !exponent.is_finite() {
                    return Err(Error::invalid("amplitude", "power law needs A ≥ 0 and a finite exponent"));
                }
            }
            SpectrumShape::Lorentzian { amplitude, cutoff } => {
                if !(*amplitude >= 0.0 && *cutoff > 0.0) {
                    return Err(Error::invalid("amplitude", "Lorentzian needs A ≥ 0 and ω_c > 0"));
                }
            }
            SpectrumShape::Tabulated { omega, density } => {
                if omega.len() != density.len() || omega.len() < 2 {
                    return Err(Error::invalid("table", "need at least two (omega, density) pairs"));
                }
                if omega.windows(2).any(|w| !(w[1] > w[0])) {
                    return Err(Error::invalid("table", "omega must be strictly increasing"));
                }
                if density.iter().any(|s| !(*s >= 0.0)) {
                    return Err(Error::invalid("table", "density must be non-negative"));
                }
            }
        }
        Ok(Self {
            shape,
            omega_min,
            omega_max,
        })
    }

    /// Flat spectrum of height `amplitude` on `[omega_min, omega_max]`.
    pub fn flat(amplitude: f64, omega_min: f64, omega_max: f64) -> Result<Self> {
        Self::new(
            SpectrumShape::PowerLaw {
                amplitude,
                exponent: 0.0,
            },
            omega_min,
            omega_max,
        )
    }

    pub fn density(&self, omega: f64) -> f64 {
        if omega < self.omega_min || omega > self.omega_max {
            return 0.0;
        }
        self.shape.density(omega)
    }

    /// Same spectrum with `omega_min` lowered until the integrand
    /// `S(ω) F_m(ωT)/ω²` there is below `1e-9` of its largest sampled value,
    /// or `floor` is reached.
    pub fn with_auto_lower_cutoff(&self, m: u64, duration: f64, floor: f64) -> Result<Self> {
        let n = degree(m);
        let f = |w: f64| integrand(self.shape.density(w), m, n, duration, w);
        let grid: Vec<f64> = (0..=2000)
            .map(|i| floor * (self.omega_max / floor).powf(f64::from(i) / 2000.0))
            .collect();
        let peak = grid.iter().map(|&w| f(w)).fold(0.0, f64::max);
        let mut lo = self.omega_min.min(self.omega_max / 2.0);
        while lo > floor && f(lo) >= 1e-9 * peak {
            lo /= 2.0;
        }
        Self::new(self.shape.clone(), lo.max(floor), self.omega_max)
    }
}

impl SpectrumShape {
    /// Density without the cutoffs.
    pub fn density(&self, omega: f64) -> f64 {
        match self {
            SpectrumShape::PowerLaw { amplitude, exponent } => amplitude * omega.powf(*exponent),
            SpectrumShape::Lorentzian { amplitude, cutoff } => amplitude / (1.0 + (omega / cutoff).powi(2)),
            SpectrumShape::Tabulated { omega: xs, density } => {
                if omega < xs[0] || omega > xs[xs.len() - 1] {
                    return 0.0;
                }
                let i = xs.partition_point(|&x| x <= omega).clamp(1, xs.len() - 1);
                let (x0, x1) = (xs[i - 1], xs[i]);
                let w = (omega - x0) / (x1 - x0);
                density[i - 1] * (1.0 - w) + density[i] * w
            }
        }
    }
}

/// `S(ω) F_m(ωT)/ω²`, continued to its limit at small `ωT`.
fn integrand(density: f64, m: u64, n: u32, duration: f64, omega: f64) -> f64 {
    if density == 0.0 {
        return 0.0;
    }
    let x = omega * duration;
    if x < 1e-6 {
        // F_m(x)/ω² ≈ T² x^(2r) / 4^p; tends to T² for m = 0 and 0 otherwise
        let scaled = x.powi(2 * rank(m) as i32) / 4f64.powi(negligibility(m) as i32);
        return density * duration * duration * scaled;
    }
    density * filter_function(m, n, x).expect("validated order") / (omega * omega)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Coherence {
    /// `χ = (1/π) ∫ S(ω) F_m(ωT)/ω² dω`.
    pub chi: f64,
    /// `W = e^(-χ)`.
    pub w: f64,
    pub error_estimate: f64,
    pub intervals: usize,
}

/// Decay exponent of the sequence `w_m` over a window `T`.
pub fn coherence_decay(m: u64, n: u32, duration: f64, spectrum: &NoiseSpectrum) -> Result<Coherence> {
    filter_function(m, n, 0.0)?;
    if !(duration > 0.0 && duration.is_finite()) {
        return Err(Error::invalid("duration", format!("{duration} must be positive")));
    }
    let (lo, hi) = (spectrum.omega_min, spectrum.omega_max);
    // enough initial pieces to resolve the oscillations of F
    let pieces = (((hi - lo) * duration / PI).ceil() as usize).clamp(16, 1 << 14);
    let opts = AdaptiveOptions {
        abs_tol: 1e-15,
        rel_tol: 1e-9,
        initial_pieces: pieces,
        ..AdaptiveOptions::default()
    };
    let integral = integrate_adaptive(
        |w| {
integrand(spectrum.density(w), m, n, duration, w)
        },
        lo,
        hi,
        opts,
    )?;
    let chi = integral.value / PI;
    Ok(Coherence {
        chi,
        w: (-chi).exp(),
        error_estimate: integral.error_estimate / PI,
        intervals: integral.intervals,
    })
}

/// Filter values of one index on an `ωT` grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterEvaluation {
    pub index: u64,
    pub n: u32,
    pub rank: u32,
    pub negligibility: u32,
    /// Shortest pulse spacing as a fraction of `T`, `2^-n`.
    pub t_min_fraction: f64,
    pub omega_t: Vec<f64>,
    pub values: Vec<f64>,
}

pub fn evaluate_filter(m: u64, n: u32, omega_t: &[f64]) -> Result<FilterEvaluation> {
    let values = omega_t
        .par_iter()
        .map(|&x| filter_function(m, n, x))
        .collect::<Result<Vec<_>>>()?;
    Ok(FilterEvaluation {
        index: m,
        n,
        rank: rank(m),
        negligibility: negligibility(m),
        t_min_fraction: (-f64::from(n)).exp2(),
        omega_t: omega_t.to_vec(),
        values,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChiEntry {
    pub index: u64,
    pub rank: u32,
    pub negligibility: u32,
    pub chi: f64,
    pub coherence: f64,
}

/// Indices sorted by increasing `χ` (best decoupling first); ties keep the
/// input order.
pub fn rank_by_chi(indices: &[u64], n: u32, duration: f64, spectrum: &NoiseSpectrum) -> Result<Vec<ChiEntry>> {
    let mut entries = indices
        .par_iter()
        .map(|&m| {
            let c = coherence_decay(m, n, duration, spectrum)?;
            Ok(ChiEntry {
                index: m,
                rank: rank(m),
                negligibility: negligibility(m),
                chi: c.chi,
                coherence: c.w,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    entries.sort_by(|a, b| a.chi.total_cmp(&b.chi));
    Ok(entries)
}
