//! Choosing which Walsh coefficients to measure, and what that costs in
//! reconstruction error.

use serde::{Deserialize, Serialize};

use crate::negligibility::{subdegree, threshold_search};
use crate::quadrature::GaussLegendre;
use crate::walsh::{
    cpmg_indices, degree, pdd_indices, zero_crossings, CoefficientQuadrature, FieldProfile,
    WalshIndex, WalshOrdering, WalshSpectrum,
};
use crate::{Error, Result};

/// Grids used for MSQE are never coarser than this.
pub const MSQE_MIN_LEVEL: u32 = 8;
const MAX_GRID_LEVEL: u32 = 24;
const MAX_THRESHOLD: u32 = 48;

/// Per-degree sub-degree cutoff `d′(d) = d - offset`; degrees up to
/// `keep_all_through` keep every index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubDegreeRule {
    pub offset: u32,
    pub keep_all_through: u32,
}

impl Default for SubDegreeRule {
    fn default() -> Self {
        Self {
            offset: 2,
            keep_all_through: 2,
        }
    }
}

impl SubDegreeRule {
    /// `None` means no cutoff at this degree.
    pub fn cutoff(&self, d: u32) -> Option<u32> {
        if d <= self.keep_all_through || self.offset == 0 {
            None
        } else {
            Some(d.saturating_sub(self.offset))
        }
    }

    fn keeps(&self, m: u64) -> bool {
        self.cutoff(degree(m)).is_none_or(|c| subdegree(m) <= c)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum CompressionMethod {
    /// `w_0` plus the first `m` CPMG and first `m` PDD functions.
    CpmgPdd { m: u32 },
    /// Every index with negligibility at most `p0`.
    Threshold { p0: u32 },
    /// Indices of degree at most `max_degree` that pass the sub-degree rule.
    SubDegree {
        max_degree: u32,
        #[serde(default)]
        rule: SubDegreeRule,
    },
    /// The first `2^order` indices.
    Full { order: u32 },
    /// A caller-chosen index set; see [`CompressionPlan::custom`].
    Custom,
}

impl CompressionMethod {
    pub fn name(&self) -> &'static str {
        match self {
            Self::CpmgPdd { .. } => "cpmgpdd",
            Self::Threshold { .. } => "threshold",
            Self::SubDegree { .. } => "subdegree",
            Self::Full { .. } => "full",
            Self::Custom => "custom",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompressionPlan {
    pub method: CompressionMethod,
    /// Paley indices, ascending.
    pub selected_indices: Vec<u64>,
}

impl CompressionPlan {
    pub fn custom(mut indices: Vec<u64>) -> Self {
        indices.sort_unstable();
        indices.dedup();
        Self {
            method: CompressionMethod::Custom,
            selected_indices: indices,
        }
    }

    pub fn walsh_indices(&self) -> Vec<WalshIndex> {
        self.selected_indices.iter().copied().map(WalshIndex::paley).collect()
    }

    /// Degree of the finest function in the plan.
    pub fn level(&self) -> u32 {
        self.selected_indices.iter().map(|&m| degree(m)).max().unwrap_or(0)
    }

    pub fn pulse_count(&self) -> u64 {
        zero_crossings(&self.walsh_indices())
    }
}

pub fn plan_indices(method: CompressionMethod) -> Result<CompressionPlan> {
    let mut selected: Vec<u64> = match method {
        CompressionMethod::CpmgPdd { m } => {
            if m > 62 {
                return Err(Error::invalid("m", format!("{m} exceeds 62")));
            }
            std::iter::once(0)
                .chain(cpmg_indices(m, WalshOrdering::Paley).iter().map(|i| i.index))
                .chain(pdd_indices(m, WalshOrdering::Paley).iter().map(|i| i.index))
                .collect()
        }
        CompressionMethod::Threshold { p0 } => {
            if p0 > MAX_THRESHOLD {
                return Err(Error::invalid("p0", format!("{p0} exceeds {MAX_THRESHOLD}")));
            }
            threshold_search(p0).indices
        }
        CompressionMethod::SubDegree { max_degree, rule } => {
            if max_degree > MAX_GRID_LEVEL {
                return Err(Error::invalid(
                    "max_degree",
                    format!("{max_degree} exceeds {MAX_GRID_LEVEL}"),
                ));
            }
            (0..1u64 << max_degree).filter(|&m| rule.keeps(m)).collect()
        }
        CompressionMethod::Full { order } => {
            if order > MAX_GRID_LEVEL {
                return Err(Error::invalid("order", format!("{order} exceeds {MAX_GRID_LEVEL}")));
            }
            (0..1u64 << order).collect()
        }
        CompressionMethod::Custom => {
            return Err(Error::invalid("method", "custom plans are built from an index list"));
        }
    };
    selected.sort_unstable();
    selected.dedup();
    Ok(CompressionPlan {
        method,
        selected_indices: selected,
    })
}

/// `(1/T) ∫ (f - rec)^2 dt`, with `rec` the piecewise-constant
/// reconstruction from every coefficient stored in `rec`.
pub fn msqe(f: &FieldProfile, rec: &WalshSpectrum) -> Result<f64> {
    if (f.duration() - rec.duration()).abs() > 1e-12 * f.duration().max(1.0) {
        return Err(Error::DurationMismatch {
            left: f.duration(),
            right: rec.duration(),
        });
    }
    let level = rec
        .level()
        .max(MSQE_MIN_LEVEL)
        .max(f.sample_level().unwrap_or(0));
    if level > MAX_GRID_LEVEL {
        return Err(Error::invalid(
            "spectrum",
            format!("degree {level} is too fine for a dense grid"),
        ));
    }
    let cells = rec.cell_values(level)?;
    let width = f.duration() / cells.len() as f64;
    let rule = GaussLegendre::new(8);
    let total: f64 = cells
        .iter()
        .enumerate()
        .map(|(c, &v)| {
            let a = c as f64 * width;
            rule.integrate(a, a + width, |t| {
                let e = f.value(t) - v;
                e * e
            })
        })
        .sum();
    Ok(total / f.duration())
}

/// Bound on `max_t |b(t) - b_{2^n}(t)|` from `sup |b′|`.
pub fn truncation_bound(n: u32, duration: f64, sup_deriv: f64) -> f64 {
    (-f64::from(n + 1)).exp2() * duration * sup_deriv
}

/// Error from dropping the degree-`d` indices whose sub-degree exceeds `d′`.
pub fn subdegree_error_bound(d: u32, d_prime: u32, duration: f64, sup_second_deriv: f64) -> Result<f64> {
    if d < 2 || d_prime > d - 2 {
        return Err(Error::invalid(
            "d_prime",
            format!("sub-degree cutoff {d_prime} must be at most d - 2 (d = {d})"),
        ));
    }
    let (d, dp) = (f64::from(d), f64::from(d_prime));
    Ok((-dp - d - 2.0).exp2() * (1.0 - (dp - d + 1.0).exp2()) * duration * duration * sup_second_deriv)
}

/// Sum of the per-degree sub-degree bounds for every degree the rule cuts.
pub fn subdegree_plan_bound(
    max_degree: u32,
    rule: SubDegreeRule,
    duration: f64,
    sup_second_deriv: f64,
) -> Result<f64> {
    (0..=max_degree)
        .filter_map(|d| rule.cutoff(d).map(|c| (d, c)))
        .filter(|&(d, c)| d >= 2 && c + 2 <= d)
        .map(|(d, c)| subdegree_error_bound(d, c, duration, sup_second_deriv))
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub msqe: f64,
    /// Max-error bound of the full reconstruction at the plan's level.
    pub truncation_bound: Option<f64>,
    pub subdegree_bound: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompressionReport {
    pub method: &'static str,
    pub parameters: CompressionMethod,
    pub selected_indices: Vec<u64>,
    pub msqe: f64,
    pub bounds: ErrorReport,
    pub pulse_count: u64,
}

/// Exact coefficients of `f` on the plan's indices.
pub fn plan_spectrum(
    f: &FieldProfile,
    plan: &CompressionPlan,
    quad: &CoefficientQuadrature,
) -> Result<WalshSpectrum> {
    let level = plan.level();
    if level <= 16 {
        WalshSpectrum::exact(f, level, quad)?.restrict(&plan.selected_indices)
    } else {
        Ok(WalshSpectrum::exact_for(f, &plan.selected_indices, quad))
    }
}

/// Plans, reconstructs from exact coefficients and reports the error.
pub fn compress(
    f: &FieldProfile,
    method: CompressionMethod,
    quad: &CoefficientQuadrature,
) -> Result<CompressionReport> {
    compress_plan(f, plan_indices(method)?, quad)
}

/// [`compress`] for an already built plan.
pub fn compress_plan(
    f: &FieldProfile,
    plan: CompressionPlan,
    quad: &CoefficientQuadrature,
) -> Result<CompressionReport> {
    if plan.selected_indices.is_empty() {
        return Err(Error::invalid("plan", "no indices selected"));
    }
    let method = plan.method;
    let spectrum = plan_spectrum(f, &plan, quad)?;
    let msqe = msqe(f, &spectrum)?;
    let subdegree_bound = match method {
        CompressionMethod::SubDegree { max_degree, rule } => Some(subdegree_plan_bound(
            max_degree,
            rule,
            f.duration(),
            f.derivative_sup(2),
        )?),
        _ => None,
    };
    let bounds = ErrorReport {
        msqe,
        truncation_bound: Some(truncation_bound(plan.level(), f.duration(), f.derivative_sup(1))),
        subdegree_bound,
    };
    Ok(CompressionReport {
        method: method.name(),
        parameters: method,
        pulse_count: plan.pulse_count(),
        selected_indices: plan.selected_indices,
        msqe,
        bounds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::TAU;

    fn full(n: u32) -> CompressionPlan {
        plan_indices(CompressionMethod::Full { order: n }).unwrap()
    }

    #[test]
    fn plan_examples() {
        let sd = plan_indices(CompressionMethod::SubDegree {
            max_degree: 5,
            rule: SubDegreeRule::default(),
        })
        .unwrap();
        let mut expect = vec![0, 1, 2, 3, 4, 5, 8, 9, 10, 11];
        expect.extend(16..24);
        assert_eq!(sd.selected_indices, expect);
        assert_eq!(
            plan_indices(CompressionMethod::Threshold { p0: 6 }).unwrap().selected_indices,
            vec![0, 1, 2, 3, 4, 5, 8, 16]
        );
        assert_eq!(
            plan_indices(CompressionMethod::CpmgPdd { m: 1 }).unwrap().selected_indices,
            vec![0, 1, 3]
        );
        assert!(plan_indices(CompressionMethod::Threshold { p0: 99 }).is_err());
        assert!(plan_indices(CompressionMethod::Custom).is_err());
        assert_eq!(plan_indices(CompressionMethod::Full { order: 2 }).unwrap().selected_indices, vec![0, 1, 2, 3]);
        assert_eq!(CompressionPlan::custom(vec![5, 1, 5]).selected_indices, vec![1, 5]);
    }

    #[test]
    fn self_reconstruction_has_zero_error() {
        let f = FieldProfile::corpus("f4").unwrap();
        let q = CoefficientQuadrature::default();
        let s = WalshSpectrum::exact(&f, 5, &q).unwrap();
        let values = s.cell_values(5).unwrap();
        let g = FieldProfile::sampled(1.0, values, crate::walsh::SampleConvention::CellAverage).unwrap();
        let gs = WalshSpectrum::exact(&g, 5, &q).unwrap();
        assert!(msqe(&g, &gs).unwrap() < 1e-12);
    }

    #[test]
    fn msqe_is_sum_of_dropped_squares_in_span() {
        // piecewise constant on 16 cells
        let values: Vec<f64> = (0..16).map(|i| ((i * 37 % 11) as f64) - 5.0).collect();
        let g = FieldProfile::sampled(2.0, values, crate::walsh::SampleConvention::CellAverage).unwrap();
        let q = CoefficientQuadrature::default();
        let s = WalshSpectrum::exact(&g, 4, &q).unwrap();
        let keep = [0, 1, 5, 12];
        let dropped: f64 = (0..16)
            .filter(|m| !keep.contains(m))
            .map(|m| s.get(m).unwrap().powi(2))
            .sum();
        assert_relative_eq!(msqe(&g, &s.restrict(&keep).unwrap()).unwrap(), dropped, epsilon = 1e-12);
    }

    #[test]
    fn corpus_msqe_values() {
        let q = CoefficientQuadrature::default();
        let cases = [("exp", 3.51799e-5, 1.00078e-4), ("f4", 0.200046, 12.015225), ("sin", 0.0016043, 0.094715)];
        for (name, first32, thr) in cases {
            let f = FieldProfile::corpus(name).unwrap();
            let s = plan_spectrum(&f, &full(5), &q).unwrap();
            assert_relative_eq!(msqe(&f, &s).unwrap(), first32, max_relative = 1e-4);
            let r = compress(&f, CompressionMethod::Threshold { p0: 6 }, &q).unwrap();
            assert_relative_eq!(r.msqe, thr, max_relative = 1e-4);
        }
    }

    #[test]
    fn duration_mismatch() {
        let f = FieldProfile::corpus("sin").unwrap();
        let s = WalshSpectrum::exact(&FieldProfile::constant(2.0, 1.0).unwrap(), 1, &Default::default()).unwrap();
        assert!(matches!(msqe(&f, &s), Err(Error::DurationMismatch { .. })));
    }

    #[test]
    fn bound_formulas() {
        assert_eq!(truncation_bound(5, 1.0, 0.0), 0.0);
        assert_relative_eq!(truncation_bound(5, 1.0, TAU), TAU / 64.0, epsilon = 1e-15);
        assert_eq!(subdegree_error_bound(5, 3, 1.0, 0.0).unwrap(), 0.0);
        assert_relative_eq!(
            subdegree_error_bound(5, 3, 1.0, TAU * TAU).unwrap(),
            TAU * TAU / 2048.0,
            epsilon = 1e-15
        );
        assert_relative_eq!(subdegree_error_bound(4, 2, 1.0, 1.0).unwrap(), 1.0 / 512.0, epsilon = 1e-15);
        assert!(subdegree_error_bound(4, 3, 1.0, 1.0).is_err());
    }

    #[test]
    fn truncation_bound_dominates_max_error() {
        let q = CoefficientQuadrature::default();
        for name in crate::walsh::CORPUS_NAMES {
            let f = FieldProfile::corpus(name).unwrap();
            for n in 0..=8 {
                let cells = WalshSpectrum::exact(&f, n, &q).unwrap().cell_values(n).unwrap();
                let fine = 1usize << 12;
                let max_err = (0..fine)
                    .map(|i| {
                        let t = (i as f64 + 0.5) / fine as f64 * f.duration();
                        (f.value(t) - cells[i >> (12 - n)]).abs()
                    })
                    .fold(0.0, f64::max);
                let bound = truncation_bound(n, f.duration(), f.derivative_sup(1));
                assert!(max_err <= bound * (1.0 + 1e-9), "{name} n={n}: {max_err} > {bound}");
            }
        }
    }

    #[test]
    fn report_json_shape() {
        let f = FieldProfile::corpus("sin").unwrap();
        let r = compress(
            &f,
            CompressionMethod::SubDegree {
                max_degree: 5,
                rule: SubDegreeRule::default(),
            },
            &Default::default(),
        )
        .unwrap();
        let v = serde_json::to_value(&r).unwrap();
        assert_eq!(v["method"], "subdegree");
        assert_eq!(v["parameters"]["max_degree"], 5);
        assert_eq!(v["selected_indices"].as_array().unwrap().len(), 18);
        assert!(v["bounds"]["subdegree_bound"].as_f64().unwrap() > 0.0);
        assert_eq!(r.pulse_count, zero_crossings(&plan_indices(r.parameters).unwrap().walsh_indices()));
    }
}
