//! Phase sensitivity of a squeezed-probe rotation sensor, lossless and open.

#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x > 0.0)` also rejects NaN

pub mod appendix;
pub mod bath;
pub mod csv;
pub mod dynamics;
pub mod error;
pub mod experiment;
pub mod fock;
pub mod gaussian;
pub mod ideal;
pub mod model;
pub mod parallel;
pub mod quad;
pub mod sensitivity;
pub mod special;

pub use error::{Error, Result};
pub use model::{FrequencyLayout, ProbeState, RotorGeometry};
pub use parallel::Execution;
