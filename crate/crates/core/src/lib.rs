//! Decoherence of an electron hopping on a thermally vibrating 1-D lattice.
//!
//! * [`two_level`]: averaged master equation, its closed form, spectral decay
//!   rates and a Monte-Carlo trajectory engine for the noisy two-site problem.
//! * [`chain`]: N-site tight-binding chain with independent noise on every bond.
//! * [`phonon`]: Debye-model displacement correlators in time and along the
//!   lattice, their high-temperature forms and envelope fits.
//! * [`estimates`]: Zurek, Drude and hopping timescales.
//!
//! `two_level` and `chain` work in natural units (ħ = 1). `phonon` and
//! `estimates` work in SI.

// `!(x > 0.0)` is used deliberately so that NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod chain;
pub mod density;
pub mod error;
pub mod estimates;
pub mod export;
pub mod material;
pub mod noise;
pub mod ode;
pub mod phonon;
pub mod quadrature;
pub mod rng;
pub mod two_level;
pub mod units;

pub use error::{Error, Result};
pub use material::MaterialParams;
