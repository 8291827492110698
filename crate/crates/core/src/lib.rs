//! Hecke operators on Siegel Eisenstein series of square-free level, in exact arithmetic.

pub mod characters;
pub mod combinat;
pub mod cosets;
pub mod eisenstein;
pub mod error;
pub mod exactmath;
pub mod hecke;
pub mod symplectic;
pub mod verify;

pub use error::{Error, Result};
