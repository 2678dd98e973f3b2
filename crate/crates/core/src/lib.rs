//! Restarted primal-dual solvers (WARPd and its square-root variant) for
//!
//! ```text
//! min  J(x) + ‖Bx‖₁   subject to   ‖Ax − b‖₂ ≤ ε
//! ```
//!
//! with J zero, a weighted ℓ¹ norm or the nuclear norm, plus the operators,
//! proximal maps, sharpness constants and problem generators around them.

pub mod error;
pub mod linops;
pub mod partial_svd;
pub mod pd_inner;
pub mod problems;
pub mod prox;
pub mod report;
pub mod restart;
pub mod sharpness;
pub mod vector;

pub use error::{Error, Result};
pub use vector::C64;
