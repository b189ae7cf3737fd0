//! Stability, Harder-Narasimhan stratifications and equivariant Poincaré
//! series of moduli of quiver representations.

pub mod error;
pub mod ff;
pub mod flow;
pub mod hn;
pub mod io;
pub mod quiver;
pub mod replab;
pub mod series;
pub mod supermixed;

pub use error::{Error, Result};
