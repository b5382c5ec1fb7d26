//! Field profiles `b(t)` on `[0, T]`: closed forms with exact derivatives,
//! or uniform dyadic samples.

use std::f64::consts::{PI, TAU};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::quadrature::GaussLegendre;
use crate::{Error, Result};

/// `amplitude * sin(omega * t + phase)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrigTerm {
    pub amplitude: f64,
    pub omega: f64,
    pub phase: f64,
}

impl TrigTerm {
    pub fn sin(amplitude: f64, omega: f64) -> Self {
        Self {
            amplitude,
            omega,
            phase: 0.0,
        }
    }

    pub fn cos(amplitude: f64, omega: f64) -> Self {
        Self {
            amplitude,
            omega,
            phase: PI / 2.0,
        }
    }
}

/// Closed-form profiles with derivatives of every order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Analytic {
    /// `offset + Σ a sin(ω t + φ)`.
    TrigSum { offset: f64, terms: Vec<TrigTerm> },
    /// `amplitude * exp(-rate * t)`.
    Exponential { amplitude: f64, rate: f64 },
    /// `amplitude * exp(-(t - mu)^2 / (2 sigma^2))`.
    Gaussian { amplitude: f64, mu: f64, sigma: f64 },
}

impl Analytic {
    pub fn constant(c: f64) -> Self {
        Analytic::TrigSum {
            offset: c,
            terms: Vec::new(),
        }
    }

    /// `k`-th derivative at `t`.
    pub fn derivative(&self, k: u32, t: f64) -> f64 {
        match self {
            Analytic::TrigSum { offset, terms } => {
                let base = if k == 0 { *offset } else { 0.0 };
                base + terms
                    .iter()
                    .map(|term| {
                        term.amplitude
                            * term.omega.powi(k as i32)
                            * (term.omega * t + term.phase + f64::from(k) * PI / 2.0).sin()
                    })
                    .sum::<f64>()
            }
            Analytic::Exponential { amplitude, rate } => {
                amplitude * (-rate).powi(k as i32) * (-rate * t).exp()
            }
            Analytic::Gaussian {
                amplitude,
                mu,
                sigma,
            } => {
                let scale = 1.0 / (sigma * std::f64::consts::SQRT_2);
                let x = (t - mu) * scale;
                let h = hermite(k, x);
                let sign = if k.is_multiple_of(2) { 1.0 } else { -1.0 };
                amplitude * sign * scale.powi(k as i32) * h * (-x * x).exp()
            }
        }
    }

    pub fn value(&self, t: f64) -> f64 {
        self.derivative(0, t)
    }

    /// Closed-form `sup |f^(k)|` on `[0, duration]` where one is known.
    fn derivative_sup_closed_form(&self, k: u32, duration: f64) -> Option<f64> {
        match self {
            Analytic::Exponential { amplitude, rate } => {
                let edge = if *rate >= 0.0 { 0.0 } else { duration };
                Some((amplitude * rate.powi(k as i32) * (-rate * edge).exp()).abs())
            }
            Analytic::TrigSum { offset, terms } => match terms.as_slice() {
                [] => Some(if k == 0 { offset.abs() } else { 0.0 }),
                [term] if k > 0 && term.omega.abs() * duration >= TAU => {
                    Some((term.amplitude * term.omega.powi(k as i32)).abs())
                }
                [term] if *offset == 0.0 && term.omega.abs() * duration >= TAU => {
                    Some(term.amplitude.abs())
                }
                _ => None,
            },
            Analytic::Gaussian { .. } => None,
        }
    }
}

/// Max of `g` on `[0, duration]`: a dense grid, then a golden-section
/// refinement around the best node.
fn grid_sup(g: impl Fn(f64) -> f64, duration: f64) -> f64 {
    let n = 1usize << 16;
    let h = duration / n as f64;
    let (best, value) = (0..=n)
        .map(|i| (i, g(h * i as f64)))
        .fold((0, f64::NEG_INFINITY), |acc, x| if x.1 > acc.1 { x } else { acc });
    let (mut a, mut b) = (
        h * best.saturating_sub(1) as f64,
        (h * (best + 1) as f64).min(duration),
    );
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..60 {
        let x1 = b - ratio * (b - a);
        let x2 = a + ratio * (b - a);
        if g(x1) >= g(x2) {
            b = x2;
        } else {
            a = x1;
        }
    }
    value.max(g(0.5 * (a + b)))
}

/// Physicists' Hermite polynomial `H_k(x)`.
fn hermite(k: u32, x: f64) -> f64 {
    let mut h0 = 1.0;
    if k == 0 {
        return h0;
    }
    let mut h1 = 2.0 * x;
    for j in 1..k {
        let h2 = 2.0 * x * h1 - 2.0 * f64::from(j) * h0;
        h0 = h1;
        h1 = h2;
    }
    h1
}

/// What each stored sample represents on its dyadic cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SampleConvention {
    CellAverage,
    LeftEndpoint,
    Midpoint,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ProfileBody {
    Analytic(Analytic),
    Sampled {
        values: Vec<f64>,
        convention: SampleConvention,
    },
}

/// A scalar field `b(t)` on `[0, duration]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldProfile {
    duration: f64,
    body: ProfileBody,
}

/// Names accepted by [`FieldProfile::corpus`].
pub const CORPUS_NAMES: [&str; 7] = ["f1", "f2", "f3", "f4", "f5", "exp", "sin"];

impl FieldProfile {
    pub fn analytic(duration: f64, f: Analytic) -> Result<Self> {
        check_duration(duration)?;
        Ok(Self {
            duration,
            body: ProfileBody::Analytic(f),
        })
    }

    pub fn sampled(duration: f64, values: Vec<f64>, convention: SampleConvention) -> Result<Self> {
        check_duration(duration)?;
        if values.is_empty() || !values.len().is_power_of_two() {
            return Err(Error::NotPowerOfTwo { len: values.len() });
        }
        Ok(Self {
            duration,
            body: ProfileBody::Sampled { values, convention },
        })
    }

    pub fn constant(duration: f64, c: f64) -> Result<Self> {
        Self::analytic(duration, Analytic::constant(c))
    }

    /// `cos((2π + ε) t)`, the phase-error family behind f1–f3.
    pub fn detuned_cosine(duration: f64, epsilon: f64) -> Result<Self> {
        Self::analytic(
            duration,
            Analytic::TrigSum {
                offset: 0.0,
                terms: vec![TrigTerm::cos(1.0, TAU + epsilon)],
            },
        )
    }

    /// Built-in test functions on `T = 1`.
    pub fn corpus(name: &str) -> Result<Self> {
        let f = match name {
            "f1" => return Self::detuned_cosine(1.0, 0.0),
            "f2" => return Self::detuned_cosine(1.0, 0.2),
            "f3" => return Self::detuned_cosine(1.0, 0.5),
            "f4" => Analytic::TrigSum {
                offset: 2.0,
                terms: vec![
                    TrigTerm::cos(3.0, TAU),
                    TrigTerm::cos(4.0, 2.0 * TAU),
                    TrigTerm::sin(6.0, TAU),
                    TrigTerm::sin(2.0, 2.0 * TAU),
                ],
            },
            "f5" => {
                let sigma = 0.1;
                Analytic::Gaussian {
                    amplitude: 1.0 / (sigma * (2.0 * PI).sqrt()),
                    mu: 0.3,
                    sigma,
                }
            }
            "exp" => Analytic::Exponential {
                amplitude: 1.0,
                rate: 1.0,
            },
            "sin" => Analytic::TrigSum {
                offset: 0.0,
                terms: vec![TrigTerm::sin(1.0, TAU)],
            },
            other => return Err(Error::UnknownProfile(other.to_string())),
        };
        Self::analytic(1.0, f)
    }

    pub fn duration(&self) -> f64 {
        self.duration
    }

    pub fn body(&self) -> &ProfileBody {
        &self.body
    }

    /// Number of dyadic levels of a sampled profile.
    pub fn sample_level(&self) -> Option<u32> {
        match &self.body {
            ProfileBody::Sampled { values, .. } => Some(values.len().trailing_zeros()),
            ProfileBody::Analytic(_) => None,
        }
    }

    /// Value at absolute time `t`; sampled profiles are piecewise constant.
    pub fn value(&self, t: f64) -> f64 {
        match &self.body {
            ProfileBody::Analytic(f) => f.value(t),
            ProfileBody::Sampled { values, .. } => {
                let n = values.len();
                let cell = ((t / self.duration) * n as f64).floor();
                let cell = (cell.max(0.0) as usize).min(n - 1);
                values[cell]
            }
        }
    }

    /// Integral of `b` over each of the `2^level` equal cells.
    pub fn cell_integrals(&self, level: u32, rule: &GaussLegendre) -> Vec<f64> {
        let cells = 1usize << level;
        let width = self.duration / cells as f64;
        match &self.body {
            ProfileBody::Analytic(f) => (0..cells)
                .map(|c| {
                    let a = c as f64 * width;
                    rule.integrate(a, a + width, |t| f.value(t))
                })
                .collect(),
            ProfileBody::Sampled { values, .. } => {
                let n = values.len();
                if cells >= n {
                    let per = cells / n;
                    (0..cells).map(|c| values[c / per] * width).collect()
                } else {
                    let per = n / cells;
                    values
                        .chunks_exact(per)
                        .map(|chunk| chunk.iter().sum::<f64>() * (self.duration / n as f64))
                        .collect()
                }
            }
        }
    }

    /// Discretises onto `2^level` cells.
    pub fn sample(&self, level: u32, convention: SampleConvention) -> Result<Self> {
        let cells = 1usize << level;
        let width = self.duration / cells as f64;
        let values = match convention {
            SampleConvention::CellAverage => self
                .cell_integrals(level, &GaussLegendre::new(8))
                .into_iter()
                .map(|v| v / width)
                .collect(),
            SampleConvention::LeftEndpoint => {
                (0..cells).map(|c| self.value(c as f64 * width)).collect()
            }
            SampleConvention::Midpoint => (0..cells)
                .map(|c| self.value((c as f64 + 0.5) * width))
                .collect(),
        };
        Self::sampled(self.duration, values, convention)
    }

    /// `sup |b^(k)|` over `[0, T]`. Exact for the closed forms that allow
    /// it, otherwise a dense-grid maximum of the exact derivative; for
    /// sampled profiles a finite-difference estimate.
    pub fn derivative_sup(&self, k: u32) -> f64 {
        match &self.body {
            ProfileBody::Analytic(f) => f
                .derivative_sup_closed_form(k, self.duration)
                .unwrap_or_else(|| grid_sup(|t| f.derivative(k, t).abs(), self.duration)),
            ProfileBody::Sampled { values, .. } => {
                let h = self.duration / values.len() as f64;
                let mut diffs = values.clone();
                for _ in 0..k {
                    if diffs.len() < 2 {
                        return 0.0;
                    }
                    diffs = diffs.windows(2).map(|w| (w[1] - w[0]) / h).collect();
                }
                diffs.iter().fold(0.0, |acc, v| acc.max(v.abs()))
            }
        }
    }

    /// Total variation `V_0^T[b^(k)] = ∫ |b^(k+1)|`.
    pub fn derivative_variation(&self, k: u32) -> f64 {
        match &self.body {
            ProfileBody::Analytic(f) => {
                let rule = GaussLegendre::new(8);
                let cells = 1 << 12;
                let width = self.duration / cells as f64;
                (0..cells)
                    .map(|c| {
                        let a = c as f64 * width;
                        rule.integrate(a, a + width, |t| f.derivative(k + 1, t).abs())
                    })
                    .sum()
            }
            ProfileBody::Sampled { values, .. } => {
                let h = self.duration / values.len() as f64;
                let mut diffs = values.clone();
                for _ in 0..k {
                    if diffs.len() < 2 {
                        return 0.0;
                    }
                    diffs = diffs.windows(2).map(|w| (w[1] - w[0]) / h).collect();
                }
                diffs.windows(2).map(|w| (w[1] - w[0]).abs()).sum()
            }
        }
    }

    /// Reads a `t,value` CSV with `2^n` uniformly spaced rows. Rows whose
    /// first time is zero are left-endpoint samples; a first time of half a
    /// spacing marks midpoint samples.
    pub fn from_csv_path(path: &Path, duration: Option<f64>) -> Result<Self> {
        let malformed = |reason: String| Error::MalformedProfile {
            path: path.to_path_buf(),
            reason,
        };
        let mut reader = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_reader(std::fs::File::open(path)?);
        let headers = reader.headers()?.clone();
        if headers.len() != 2 || &headers[0] != "t" || &headers[1] != "value" {
            return Err(malformed(format!(
                "expected header `t,value`, found `{}`",
                headers.iter().collect::<Vec<_>>().join(",")
            )));
        }
        let mut times = Vec::new();
        let mut values = Vec::new();
        for (row, record) in reader.records().enumerate() {
            let record = record?;
            let parse = |i: usize| {
                record[i]
                    .parse::<f64>()
                    .map_err(|e| malformed(format!("row {}: {e}", row + 1)))
            };
            times.push(parse(0)?);
            values.push(parse(1)?);
        }
        if values.is_empty() || !values.len().is_power_of_two() {
            return Err(Error::NotPowerOfTwo { len: values.len() });
        }
        let n = values.len();
        let spacing = if n >= 2 { times[1] - times[0] } else { f64::NAN };
        if n >= 2 {
            if spacing <= 0.0 {
                return Err(malformed("times must be strictly increasing".into()));
            }
            for (i, pair) in times.windows(2).enumerate() {
                if ((pair[1] - pair[0]) - spacing).abs() > 1e-9 * spacing.max(1.0) {
                    return Err(malformed(format!("non-uniform spacing at row {}", i + 2)));
                }
            }
        }
        let duration = match (duration, n) {
            (Some(d), _) => d,
            (None, 1) => return Err(malformed("single-row profile needs an explicit duration".into())),
            (None, _) => spacing * n as f64,
        };
        let width = duration / n as f64;
        let convention = if times[0].abs() <= 1e-9 * width {
            SampleConvention::LeftEndpoint
        } else if (times[0] - 0.5 * width).abs() <= 1e-9 * width.max(1.0) {
            SampleConvention::Midpoint
        } else {
            return Err(malformed(format!(
                "first time {} is neither 0 nor half a cell ({})",
                times[0],
                0.5 * width
            )));
        };
        Self::sampled(duration, values, convention)
    }

    /// Resolves a corpus name or a CSV path.
    pub fn from_spec(spec: &str, duration: Option<f64>) -> Result<Self> {
        if let Some(c) = spec.strip_prefix("const:") {
            let c = c
                .parse::<f64>()
                .map_err(|e| Error::invalid("profile", format!("bad constant `{c}`: {e}")))?;
            return Self::constant(duration.unwrap_or(1.0), c);
        }
        if CORPUS_NAMES.contains(&spec) {
            let base = Self::corpus(spec)?;
            return match duration {
                Some(d) if d != base.duration => Self::analytic(
                    d,
                    match base.body {
                        ProfileBody::Analytic(f) => f,
                        ProfileBody::Sampled { .. } => unreachable!("corpus entries are analytic"),
                    },
                ),
                _ => Ok(base),
            };
        }
        let path = Path::new(spec);
        // anything path-like is read as a file so a typo surfaces as an I/O error
        if path.exists() || spec.contains(std::path::MAIN_SEPARATOR) || path.extension().is_some() {
            return Self::from_csv_path(path, duration);
        }
        Err(Error::UnknownProfile(spec.to_string()))
    }
}

fn check_duration(duration: f64) -> Result<()> {
    if duration.is_finite() && duration > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid("duration", format!("{duration} must be positive")))
    }
}
