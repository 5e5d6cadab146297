//! Numerics and exact algebra for generalized (n-photon) squeezed states
//! `exp(r a^dag^n - r^* a^n)|0>`.
//!
//! * [`fock`]: truncated ladder operators and the squeezing generator.
//! * [`evolve`]: squeezed states, photon-number sweeps and convergence
//!   diagnostics on a truncated basis.
//! * [`algebra`]: exact normal-ordered boson algebra and the Taylor
//!   coefficients of the mean photon number.
//! * [`series`]: growth-rate fits, radius estimates and Taylor/numeric
//!   comparisons.
//! * [`verify`]: the invariant suite behind `squeezelab verify`.

pub mod algebra;
pub mod cli;
mod combinatorics;
pub mod error;
pub mod evolve;
pub mod expm;
pub mod fock;
pub mod output;
pub mod series;
pub mod state;
pub mod tridiag;
pub mod verify;

pub use combinatorics::commutator_closed_form;
pub use error::{Error, Result};
pub use fock::{FockDim, SparseOperator, SqueezeParams};
pub use state::StateVector;
