//! Quantum-noise cooling of a mechanical oscillator in a linearized
//! optomechanical cavity with intracavity (parametric) and extracavity
//! (injected) squeezing.
//!
//! Frequencies are in units of the mechanical frequency. The modules split
//! the problem the same way the numerics do:
//!
//! - [`model`]: parameter records, schemes, squeezed baths.
//! - [`response`]: susceptibility, force spectrum, rates, Stokes suppression.
//! - [`gaussian`]: drift/diffusion matrices and the Lyapunov steady state.
//! - [`cooling`]: final phonon numbers and the scheme-wise optimizers.
//! - [`fullmodel`]: classical steady state of the two-mode model and the
//!   reduction to effective parameters.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cooling;
pub mod error;
pub mod fullmodel;
pub mod gaussian;
pub mod model;
pub mod response;
mod simplex;

pub use cooling::{OptimizationResult, SearchMode, SearchSpec};
pub use error::{Error, Result};
pub use model::{make_bath, ReducedParams, Scheme, SqueezedBath};
