//! Rank-one cutting-and-stacking transformations built from continued
//! fractions, with exact arithmetic throughout.

pub mod cf;
pub mod dynamics;
pub mod eigen;
pub mod error;
pub mod gk;
pub mod interval;
pub mod nonsingular;
pub mod rational;
pub mod tower;

pub use error::{Error, Result};
