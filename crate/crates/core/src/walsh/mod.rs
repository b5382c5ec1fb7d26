//! Walsh and Rademacher functions, orderings, coefficients and transforms.
//!
//! Paley index `m` with binary digits `m_k` (least significant is `m_1`)
//! denotes `w_m = Π R_k^{m_k}`. All functions are right-continuous: the
//! value at a jump is the value of the dyadic cell that starts there.

mod index;
mod profile;
mod sequences;
mod spectrum;
mod transform;

pub use index::{
    cell_sign, degree, gray_code, inverse_gray_code, rademacher, reverse_bits, walsh, WalshIndex,
    WalshOrdering,
};
pub use profile::{
    Analytic, FieldProfile, ProfileBody, SampleConvention, TrigTerm, CORPUS_NAMES,
};
pub use sequences::{
    cpmg_indices, cpmg_within_order, pdd_indices, pdd_within_order, pulse_sequence,
    zero_crossings, PulseSequence,
};
pub use spectrum::{
    exact_coefficients, walsh_coefficient, CoefficientQuadrature, Provenance, WalshSpectrum,
};
pub use transform::{fwht, ifwht};
