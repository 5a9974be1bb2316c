//! Symbolic analysis of two-input affine control systems
//! `ẋ = a(x) + b₁(x)u¹ + b₂(x)u²`.
//!
//! The crate decides static feedback equivalence to a flat triangular normal
//! form built from a Brunovsky block, an extended chained block and a second
//! Brunovsky block, determines structure indices and flat outputs, and
//! transforms conforming systems into that normal form.
//!
//! All structural decisions are made at generic points: every "is this
//! function zero" question is answered by evaluating at random rational
//! points (see [`symx::ZeroTestConfig`]).
//!
//! The crate is `no_std` and only needs `alloc`.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

mod error;

pub mod fieldla;
pub mod flatness;
pub mod geom;
pub mod symx;
pub mod transform;

pub use error::{Error, Result};
