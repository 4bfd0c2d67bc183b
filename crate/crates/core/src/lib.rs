//! Curvature of Finsler (α,β)-metrics `F = α φ(β/α)`, the Ricci-flat
//! equation for `φ`, and a verifier that checks its hypotheses and
//! conclusion on concrete geometries.

#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod alpha;
pub mod chart;
pub mod error;
pub mod fields;
pub mod finsler;
pub mod jet;
pub mod ode;
pub mod phi;
pub mod tensor;
pub mod verify;

pub use error::{Error, ErrorKind, Result};
pub use ode::TheoremParams;
pub use tensor::Tensor;
