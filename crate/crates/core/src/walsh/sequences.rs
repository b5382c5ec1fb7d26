//! Decoupling-sequence families inside the Walsh basis and the π-pulse
//! timings that realise a Walsh function.

use serde::{Deserialize, Serialize};

use super::index::{cell_sign, degree, WalshIndex, WalshOrdering};
use crate::{Error, Result};

/// The first `count` CPMG functions: sequency `2^k`, Paley `3·2^(k-1)`,
/// `k = 1..=count`.
pub fn cpmg_indices(count: u32, ordering: WalshOrdering) -> Vec<WalshIndex> {
    (1..=count)
        .map(|k| WalshIndex::sequency(1u64 << k).convert(ordering))
        .collect()
}

/// The first `count` PDD functions (the Rademacher functions): sequency
/// `2^k - 1`, Paley `2^(k-1)`, `k = 1..=count`.
pub fn pdd_indices(count: u32, ordering: WalshOrdering) -> Vec<WalshIndex> {
    (1..=count)
        .map(|k| WalshIndex::sequency((1u64 << k) - 1).convert(ordering))
        .collect()
}

/// CPMG functions inside the `order`-th reconstruction (`order - 1` of them).
pub fn cpmg_within_order(order: u32, ordering: WalshOrdering) -> Vec<WalshIndex> {
    cpmg_indices(order.saturating_sub(1), ordering)
}

/// PDD functions inside the `order`-th reconstruction (`order` of them).
pub fn pdd_within_order(order: u32, ordering: WalshOrdering) -> Vec<WalshIndex> {
    pdd_indices(order, ordering)
}

/// Total π pulses needed to measure every function in the set.
pub fn zero_crossings(index_set: &[WalshIndex]) -> u64 {
    index_set.iter().map(|idx| idx.sequency_index()).sum()
}

/// π-pulse times of one Walsh-modulated acquisition window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PulseSequence {
    #[serde(rename = "T")]
    pub duration: f64,
    pub pulse_times: Vec<f64>,
}

impl PulseSequence {
    pub fn len(&self) -> usize {
        self.pulse_times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pulse_times.is_empty()
    }
}

/// Pulse times at the sign changes of `w_m` on `(0, T)`.
pub fn pulse_sequence(idx: WalshIndex, duration: f64) -> Result<PulseSequence> {
    if !(duration.is_finite() && duration > 0.0) {
        return Err(Error::invalid("duration", format!("{duration} must be positive")));
    }
    let m = idx.paley_index();
    let level = degree(m);
    if level > 40 {
        return Err(Error::invalid(
            "index",
            format!("degree {level} needs more pulses than can be listed"),
        ));
    }
    let cells = 1u64 << level;
    let width = duration / cells as f64;
    let pulse_times = (1..cells)
        .filter(|&c| cell_sign(m, level, c) != cell_sign(m, level, c - 1))
        .map(|c| c as f64 * width)
        .collect();
    Ok(PulseSequence {
        duration,
        pulse_times,
    })
}
