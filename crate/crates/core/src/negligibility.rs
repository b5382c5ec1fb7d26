//! Bit combinatorics of Paley indices: rank, degree, sub-degree,
//! negligibility and contrast, the coefficient bound they control, and the
//! threshold search over negligibility.

use serde::{Deserialize, Serialize};

use crate::walsh::degree;
use crate::{Error, Result};

/// Number of set bits.
#[inline]
pub const fn rank(m: u64) -> u32 {
    m.count_ones()
}

/// `Σ k + r(m)` over the 1-based positions `k` of the set bits of `m`.
#[inline]
pub const fn negligibility(m: u64) -> u32 {
    let mut bits = m;
    let mut sum = 0;
    while bits != 0 {
        sum += bits.trailing_zeros() + 2;
        bits &= bits - 1;
    }
    sum
}

/// 1-based position of the second-highest set bit; 0 for rank below 2.
#[inline]
pub const fn subdegree(m: u64) -> u32 {
    if m.count_ones() < 2 {
        return 0;
    }
    let rest = m & !(1u64 << (63 - m.leading_zeros()));
    degree(rest)
}

/// `c(m) = p(m-1) - p(m)`; how much negligibility drops when stepping to `m`.
pub fn contrast(m: u64) -> Option<i64> {
    let prev = m.checked_sub(1)?;
    Some(i64::from(negligibility(prev)) - i64::from(negligibility(m)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexProfile {
    pub m: u64,
    pub rank: u32,
    pub degree: u32,
    pub subdegree: u32,
    pub negligibility: u32,
    /// Undefined at `m = 0`.
    pub contrast: Option<i64>,
}

pub fn profile(m: u64) -> IndexProfile {
    IndexProfile {
        m,
        rank: rank(m),
        degree: degree(m),
        subdegree: subdegree(m),
        negligibility: negligibility(m),
        contrast: contrast(m),
    }
}

/// Upper bound on `|f̂_m|` from the `r(m)`-th derivative of `f`.
///
/// `derivative_sup` is `sup |f^(r)|` on the window; `variation`, if given,
/// is the total variation of `f^(r-1)` and yields a second bound. The
/// smaller of the available bounds is returned.
pub fn coefficient_bound(
    m: u64,
    duration: f64,
    derivative_sup: f64,
    variation: Option<f64>,
) -> Result<f64> {
    if !(derivative_sup >= 0.0) {
        return Err(Error::invalid(
            "derivative_sup",
            format!("{derivative_sup} must be non-negative"),
        ));
    }
    if !(duration > 0.0) {
        return Err(Error::invalid("duration", format!("{duration} must be positive")));
    }
    let r = rank(m) as i32;
    let factor = (-f64::from(negligibility(m))).exp2();
    let mut bound = factor * duration.powi(r) * derivative_sup;
    if let Some(v) = variation.filter(|_| r >= 1) {
        if !(v >= 0.0) {
            return Err(Error::invalid("variation", format!("{v} must be non-negative")));
        }
        bound = bound.min(2.0 * factor * duration.powi(r - 1) * v);
    }
    Ok(bound)
}

/// Indices `j ≤ limit` with `p(j-1) ≥ p(j) ≤ p(j+1)`; at `j = 0` only the
/// right neighbour is compared.
pub fn local_minima_negligibility(limit: u64) -> Vec<u64> {
    (0..=limit)
        .filter(|&j| {
            let p = negligibility(j);
            let left = j == 0 || negligibility(j - 1) >= p;
            left && p <= negligibility(j + 1)
        })
        .collect()
}

/// Local minima of the sequence `j ↦ p(j)` restricted to the local minima
/// up to `limit`, with the same one-sided rule at the first element.
pub fn minima_of_minima(limit: u64) -> Vec<u64> {
    let minima = local_minima_negligibility(limit + 4);
    let p: Vec<u32> = minima.iter().map(|&j| negligibility(j)).collect();
    (0..minima.len() - 1)
        .filter(|&i| minima[i] <= limit)
        .filter(|&i| (i == 0 || p[i - 1] >= p[i]) && p[i] <= p[i + 1])
        .map(|i| minima[i])
        .collect()
}

/// Number of local minima of `p` among the degree-`d` indices.
pub fn minima_count_at_degree(d: u32) -> usize {
    if d == 0 {
        return 1;
    }
    let lo = 1u64 << (d - 1);
    let hi = (1u64 << d) - 1;
    local_minima_negligibility(hi)
        .into_iter()
        .filter(|&j| j >= lo)
        .count()
}

/// Output of [`threshold_search`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ThresholdSearch {
    /// Sorted ascending.
    pub indices: Vec<u64>,
    /// How many negligibilities were computed, including rejected candidates.
    pub evaluations: u64,
}

/// All `m` with `p(m) ≤ p0`, found rank layer by rank layer.
///
/// The search starts from `0` and the PDD indices `2^(d-1)` with
/// `p = d + 1 ≤ p0`. A kept index is extended by one bit below its lowest
/// set bit; candidates are tried from the lowest position up and the scan
/// stops at the first one that exceeds `p0`, since `p` only grows with the
/// position of the added bit.
pub fn threshold_search(p0: u32) -> ThresholdSearch {
    let mut indices = vec![0u64];
    let mut evaluations = 1u64;
    let mut layer: Vec<(u64, u32)> = Vec::new();
    for d in 1..=u64::BITS {
        evaluations += 1;
        let p = d + 1;
        if p > p0 {
            break;
        }
        layer.push((1u64 << (d - 1), p));
    }
    while !layer.is_empty() {
        let mut next = Vec::new();
        for &(m, p) in &layer {
            indices.push(m);
            let lowest = m.trailing_zeros();
            for bit in 0..lowest {
                evaluations += 1;
                let q = p + bit + 2;
                if q > p0 {
                    break;
                }
                next.push((m | 1u64 << bit, q));
            }
        }
        layer = next;
    }
    indices.sort_unstable();
    ThresholdSearch {
        indices,
        evaluations,
    }
}

/// The two degree-`d` indices with the largest contrast, ascending.
pub fn maximal_contrast_at_degree(d: u32) -> Result<(u64, u64)> {
    if !(2..=40).contains(&d) {
        return Err(Error::invalid("degree", format!("{d} is outside 2..=40")));
    }
    let lo = 1u64 << (d - 1);
    let mut best: [(i64, u64); 2] = [(i64::MIN, 0); 2];
    for j in lo..lo << 1 {
        let c = contrast(j).expect("j >= 1");
        if c > best[0].0 {
            best = [(c, j), best[0]];
        } else if c > best[1].0 {
            best[1] = (c, j);
        }
    }
    let (a, b) = (best[0].1, best[1].1);
    Ok((a.min(b), a.max(b)))
}
