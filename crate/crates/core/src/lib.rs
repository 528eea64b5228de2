//! Contraction laboratory for compression-layer tensor networks.
//!
//! Two geometries are modeled: a matrix product state (MPS) chain of `M·N`
//! sites, and a comb made of an `M`-site backbone with a tooth of `N` sites
//! hanging from every backbone tensor. Every site owns a compression matrix
//! `U` of shape `[D, d]` and a raw data vector of length `D`.
//!
//! The crate is split into:
//!
//! - [`tensor`]: dense row-major tensors and an instrumented pairwise
//!   contraction that counts scalar multiplications as
//!   `product(output extents) × product(contracted extents)`.
//! - [`network`]: builders for both geometries.
//! - [`engine`]: the fixed contraction schedules, their execution, and an
//!   independent naive-order value oracle.
//! - [`costmodel`]: the closed-form cost polynomials, the threshold
//!   quadratic and its roots, and parameter sweeps.
//! - [`verify`]: the grid that cross-checks all of the above.
//!
//! The crate is `no_std` and only needs `alloc`.
#![no_std]
#![warn(missing_debug_implementations)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod costmodel;
pub mod engine;
mod error;
pub mod network;
mod seed;
pub mod tensor;
pub mod verify;

pub use costmodel::{Basis, Phase, Regime, SweepRow, ThresholdResult};
pub use engine::{execute, naive_value_oracle, CostReport, ContractionPlan};
pub use error::{Error, Result};
pub use network::{Geometry, NetworkParams, NodeRole, TensorNetwork};
pub use tensor::{contract_pair, transpose, AxisPairing, StepCost, Tensor};
