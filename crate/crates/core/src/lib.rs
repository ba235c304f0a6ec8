//! Radial-number algebra of Laguerre–Gauss modes.
//!
//! The radial index `p` of an LG mode with fixed OAM `ℓ` carries a discrete
//! series representation of su(1,1) with Bargmann index `k = (|ℓ|+1)/2`.
//! This crate builds the truncated ladder operators, the radial coherent
//! (Perelomov, Barut–Girardello) and intelligent states, synthesizes their
//! transverse fields on polar grids and checks the algebra numerically.

pub mod error;
pub mod export;
pub mod fields;
pub mod specfun;
pub mod states;
pub mod su11;
pub mod two_mode;
pub mod verify;

pub use error::{Error, Result};
pub use fields::{FieldMap, PolarGrid};
pub use states::{RadialState, UncertaintyReport};
pub use su11::{IrrepLabel, OperatorKind, OperatorMatrix, Truncation};
