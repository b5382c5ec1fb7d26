//! Walsh-basis reconstruction of time-varying scalar fields measured by a
//! single qubit sensor.
//!
//! The crate is organised around the acquisition pipeline:
//!
//! - [`walsh`]: Rademacher/Walsh functions, Paley and sequency orderings,
//!   coefficient quadrature, the fast Walsh transform, partial sums and the
//!   CPMG/PDD sequence families.
//! - [`negligibility`]: rank, degree, sub-degree, negligibility and contrast
//!   of Walsh indices, coefficient bounds and the threshold search.
//! - [`compression`]: CPMG/PDD, threshold and sub-degree index plans with
//!   MSQE evaluation and error bounds.
//! - [`sensor`]: measurement-probability level simulation of the
//!   Walsh-modulated Ramsey protocol.
//! - [`stats`]: Fisher information, sensitivity and the reconstruction
//!   envelope.
//! - [`filter`]: filter functions of Walsh decoupling sequences and
//!   coherence decay under a noise spectrum.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod compression;
mod error;
pub mod filter;
pub mod negligibility;
pub mod quadrature;
pub mod sensor;
pub mod stats;
pub mod walsh;

pub use error::{Error, Result};
pub use walsh::{FieldProfile, WalshIndex, WalshOrdering, WalshSpectrum};
