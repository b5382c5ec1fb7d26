//! Fast Walsh transform between dyadic cell values and Paley-ordered
//! coefficients. Only additions and subtractions plus one final scaling.

use super::index::reverse_bits;
use crate::{Error, Result};

fn level_of(len: usize) -> Result<u32> {
    if len == 0 || !len.is_power_of_two() {
        return Err(Error::NotPowerOfTwo { len });
    }
    Ok(len.trailing_zeros())
}

/// In-place unnormalised Walsh–Hadamard butterflies (natural ordering).
fn butterflies(data: &mut [f64]) {
    let n = data.len();
    let mut half = 1;
    while half < n {
        for block in data.chunks_exact_mut(2 * half) {
            let (lo, hi) = block.split_at_mut(half);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                let (x, y) = (*a, *b);
                *a = x + y;
                *b = x - y;
            }
        }
        half *= 2;
    }
}

fn bit_reverse_permute(data: &mut [f64], level: u32) {
    for i in 0..data.len() as u64 {
        let j = reverse_bits(i, level);
        if j > i {
            data.swap(i as usize, j as usize);
        }
    }
}

/// Cell values on a grid of `2^n` cells to the first `2^n` Paley-ordered
/// coefficients, normalised by `1/2^n`.
pub fn fwht(samples: &[f64]) -> Result<Vec<f64>> {
    let level = level_of(samples.len())?;
    let mut out = samples.to_vec();
    butterflies(&mut out);
    // natural Hadamard row i is Paley function bitrev(i)
    bit_reverse_permute(&mut out, level);
    let scale = 1.0 / samples.len() as f64;
    out.iter_mut().for_each(|x| *x *= scale);
    Ok(out)
}

/// Inverse of [`fwht`]: Paley coefficients to cell values.
pub fn ifwht(coefficients: &[f64]) -> Result<Vec<f64>> {
    let level = level_of(coefficients.len())?;
    let mut out = coefficients.to_vec();
    bit_reverse_permute(&mut out, level);
    butterflies(&mut out);
    Ok(out)
}
