//! Finite groupoid operator algebras.

pub mod algebra;
pub mod cartan;
pub mod error;
pub mod fell;
pub mod groupoid;
pub mod harmonic;
pub mod io;
pub mod isemigroup;
pub mod linalg;
pub mod measure;
pub mod multiplier;
pub mod partial_action;
pub mod schur;
pub mod zoo;

pub use error::{Error, Result};
