//! Spectral analysis of perturbed operators `A - B` by similarity transforms.
//!
//! A finite window of the free spectrum and the matrix of `B` in the
//! eigenbasis of `A` are reduced to block-diagonal form `A - V` by a
//! contraction iteration; every estimate is checked against a dense
//! eigensolver.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod models;
pub mod opmatrix;
pub mod similarity;
pub mod splitting;
pub mod transforms;
pub mod verify;
pub mod weighted;

pub use error::{Error, Result};
