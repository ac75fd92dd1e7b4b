//! Giant atom coupled at two points to a nonreciprocal SSH ring.
//!
//! The crate builds single-excitation Hamiltonians ([`model`]), diagonalizes
//! them and evaluates the implicit energy equations ([`spectral`]), evaluates
//! closed-form bound-state and zero-mode profiles ([`analytic_bound`]),
//! measures localization ([`localization`]) and runs real-time evolution for
//! Lyapunov exponents ([`dynamics`]).

pub mod analytic_bound;
pub mod dynamics;
pub mod error;
pub mod localization;
pub mod model;
pub mod spectral;

pub use error::{Error, Result};
pub use model::C64;
