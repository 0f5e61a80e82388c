//! Normalized ground states of Choquard equations with a local power term.

pub mod bubble;
pub mod constants;
pub mod error;
pub mod functionals;
pub mod params;
pub mod solver;
pub mod special;
pub mod spectral;
pub mod sweep;
pub mod symmetry;
pub mod verify;

pub use error::{CoreError, Result};
