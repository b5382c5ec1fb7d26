use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// How a natural number labels a Walsh function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WalshOrdering {
    /// Set bits of the index select Rademacher factors directly; bit `k-1`
    /// (least significant first) selects `R_k`.
    Paley,
    /// Indexed by the number of sign changes on `(0, 1)`.
    Sequency,
}

/// One Walsh basis function (and the control sequence that realises it).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct WalshIndex {
    pub index: u64,
    pub ordering: WalshOrdering,
}

impl WalshIndex {
    pub const fn paley(index: u64) -> Self {
        Self {
            index,
            ordering: WalshOrdering::Paley,
        }
    }

    pub const fn sequency(index: u64) -> Self {
        Self {
            index,
            ordering: WalshOrdering::Sequency,
        }
    }

    /// The Paley label of the same function.
    pub fn paley_index(self) -> u64 {
        match self.ordering {
            WalshOrdering::Paley => self.index,
            WalshOrdering::Sequency => gray_code(self.index),
        }
    }

    /// The sequency label, which is also the number of π pulses.
    pub fn sequency_index(self) -> u64 {
        match self.ordering {
            WalshOrdering::Paley => inverse_gray_code(self.index),
            WalshOrdering::Sequency => self.index,
        }
    }

    pub fn convert(self, target: WalshOrdering) -> Self {
        match target {
            WalshOrdering::Paley => Self::paley(self.paley_index()),
            WalshOrdering::Sequency => Self::sequency(self.sequency_index()),
        }
    }
}

/// Binary-reflected Gray code.
#[inline]
pub const fn gray_code(m: u64) -> u64 {
    m ^ (m >> 1)
}

#[inline]
pub const fn inverse_gray_code(g: u64) -> u64 {
    let mut m = g;
    m ^= m >> 1;
    m ^= m >> 2;
    m ^= m >> 4;
    m ^= m >> 8;
    m ^= m >> 16;
    m ^= m >> 32;
    m
}

/// `min{k : 2^k > m}`, the number of binary digits of `m`.
#[inline]
pub const fn degree(m: u64) -> u32 {
    u64::BITS - m.leading_zeros()
}

fn check_unit(t: f64) -> Result<()> {
    if (0.0..1.0).contains(&t) {
        Ok(())
    } else {
        Err(Error::TimeOutOfDomain { t })
    }
}

/// `k`-th binary digit of `t ∈ [0, 1)`.
#[inline]
fn binary_digit(k: u32, t: f64) -> bool {
    // t * 2^k is exact in floating point, so the floor is the digit prefix.
    let scaled = t * f64::from(k).exp2();
    scaled.floor() % 2.0 != 0.0
}

/// Rademacher function `R_k(t)`: +1 on the first half of each of the
/// `2^(k-1)` periods and -1 on the second. Right-continuous at jumps.
pub fn rademacher(k: u32, t: f64) -> Result<i8> {
    check_unit(t)?;
    if k == 0 {
        return Ok(1);
    }
    Ok(if binary_digit(k, t) { -1 } else { 1 })
}

/// Walsh function value at `t ∈ [0, 1)`, right-continuous at jumps.
pub fn walsh(idx: WalshIndex, t: f64) -> Result<i8> {
    check_unit(t)?;
    Ok(walsh_paley_unchecked(idx.paley_index(), t))
}

pub(crate) fn walsh_paley_unchecked(m: u64, t: f64) -> i8 {
    let mut bits = m;
    let mut negative = false;
    while bits != 0 {
        let k = bits.trailing_zeros() + 1;
        negative ^= binary_digit(k, t);
        bits &= bits - 1;
    }
    if negative {
        -1
    } else {
        1
    }
}

/// Sign of Paley `m` on cell `cell` of the uniform grid of `2^level` cells.
/// Requires `degree(m) <= level`.
#[inline]
pub fn cell_sign(m: u64, level: u32, cell: u64) -> i8 {
    debug_assert!(degree(m) <= level);
    // digit t_k of the cell's left endpoint is bit (level - k) of the cell index
    let reversed = reverse_bits(m, level);
    if (reversed & cell).count_ones().is_multiple_of(2) {
        1
    } else {
        -1
    }
}

/// Reverses the lowest `width` bits of `x`.
#[inline]
pub const fn reverse_bits(x: u64, width: u32) -> u64 {
    if width == 0 {
        0
    } else {
        x.reverse_bits() >> (u64::BITS - width)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gray_code_matches_table() {
        assert_eq!(gray_code(0), 0);
        assert_eq!(gray_code(2), 0b011);
        assert_eq!(gray_code(3), 0b010);
        for m in 0..4096 {
            assert_eq!(inverse_gray_code(gray_code(m)), m);
        }
    }

    #[test]
    fn ordering_conversions() {
        assert_eq!(WalshIndex::sequency(2).convert(WalshOrdering::Paley), WalshIndex::paley(3));
        assert_eq!(WalshIndex::sequency(0).paley_index(), 0);
        assert_eq!(WalshIndex::sequency(7).paley_index(), 4);
        for k in 1..20 {
            assert_eq!(WalshIndex::sequency((1 << k) - 1).paley_index(), 1 << (k - 1));
        }
    }

    #[test]
    fn rademacher_values() {
        for t in [0.0, 0.1, 0.5, 0.99] {
            assert_eq!(rademacher(0, t).unwrap(), 1);
        }
        assert_eq!(rademacher(1, 0.25).unwrap(), 1);
        assert_eq!(rademacher(1, 0.75).unwrap(), -1);
        assert_eq!(rademacher(2, 0.3).unwrap(), -1);
        // right-continuity at a jump
        assert_eq!(rademacher(1, 0.5).unwrap(), -1);
        assert_eq!(rademacher(2, 0.5).unwrap(), 1);
    }

    #[test]
    fn rademacher_matches_sine_sign_off_jumps() {
        for k in 0..12u32 {
            for i in 0..997 {
                let t = (i as f64 + 0.37) / 997.0;
                let s = ((f64::from(k).exp2()) * std::f64::consts::PI * t).sin();
                let expect = if s > 0.0 { 1 } else { -1 };
                assert_eq!(rademacher(k, t).unwrap(), expect, "k={k} t={t}");
            }
        }
    }

    #[test]
    fn domain_errors() {
        assert!(rademacher(1, 1.0).is_err());
        assert!(rademacher(1, -0.1).is_err());
        assert!(walsh(WalshIndex::paley(3), 1.5).is_err());
    }

    #[test]
    fn walsh_values() {
        assert_eq!(walsh(WalshIndex::paley(0), 0.9).unwrap(), 1);
        assert_eq!(walsh(WalshIndex::sequency(0), 0.9).unwrap(), 1);
        assert_eq!(walsh(WalshIndex::paley(1), 0.3).unwrap(), 1);
        assert_eq!(walsh(WalshIndex::paley(1), 0.7).unwrap(), -1);
        assert_eq!(walsh(WalshIndex::paley(3), 0.3).unwrap(), -1);
    }

    #[test]
    fn cell_sign_agrees_with_pointwise_value() {
        let level = 6;
        for m in 0..64u64 {
            for c in 0..64u64 {
                let t = (c as f64 + 0.5) / 64.0;
                assert_eq!(cell_sign(m, level, c), walsh_paley_unchecked(m, t));
            }
        }
    }

    #[test]
    fn degree_definition() {
        assert_eq!(degree(0), 0);
        assert_eq!(degree(1), 1);
        assert_eq!(degree(4), 3);
        assert_eq!(degree(7), 3);
        assert_eq!(degree(8), 4);
    }
}
