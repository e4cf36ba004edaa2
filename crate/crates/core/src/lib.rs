//! Boundary measures, generalized harmonic functions and universal-function
//! witnesses on weighted rooted trees.

pub mod boundary;
pub mod cli;
pub mod density;
pub mod error;
pub mod harmonic;
pub mod io;
pub mod scalar;
pub mod tree;
pub mod universality;
pub mod value;
pub mod walk;

pub use error::{Error, Result};
pub use scalar::{ArithmeticMode, Float, Rational, Scalar};
