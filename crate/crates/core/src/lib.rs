//! Symbolic and numeric workbench for Q-conditional (nonclassical) symmetries
//! of reaction-diffusion-convection equations with power nonlinearities.

pub mod calculus;
pub mod classify;
pub mod determining;
pub mod error;
pub mod expr;
pub mod fixtures;
pub mod frac;
pub mod numeric;
pub mod poly;
pub mod verify;

pub use error::{Error, Result};
pub use expr::{parse, AffineExponent, Expr, FnAtom, Signature, Symbols, Term};
pub use frac::CoeffFrac;
