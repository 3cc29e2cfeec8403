//! Bruin-Troubetzkoy interval translation maps and the machinery around them:
//! exact simulation and finite-type classification, the Rauzy-type induction
//! and its simplicial-system presentation, the matrix cocycle with its
//! Lyapunov spectrum and contraction certificates, thermodynamic dimension
//! estimates for the parameter gasket, and a gasket rasterizer.
//!
//! Everything that decides a branch or a tie runs in exact rational or
//! big-integer arithmetic. Floating point appears only where the quantity is
//! genuinely transcendental (singular values, logarithms, pixel centers).

pub mod cocycle;
pub mod dimension;
pub mod error;
pub mod exec;
pub mod gasket;
pub mod itm;
pub mod mat3;
pub mod rational;
pub mod renorm;
pub mod simplicial;
pub mod spectrum;
pub mod verify;

pub use error::{Error, Result};
pub use exec::Execution;
