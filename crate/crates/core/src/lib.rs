//! Key-rate engine for sending-or-not-sending twin-field QKD with
//! discretely phase-modulated weak coherent sources.
//!
//! * [`photon`], [`fidelity`], [`entropy`]: class probabilities of
//!   discretely randomized coherent states and the fidelities between them.
//! * [`decoy`]: analytic decoy-state bounds, the key rate, and an LP cross-check.
//! * [`channel`]: the symmetric channel, the closed-form observation model,
//!   a truncated Fock-space oracle, and the repeaterless bound.
//! * [`optimize`]: deterministic parameter search and distance scans.
//! * [`verify`]: soundness of the bounds against the Fock-space oracle.

// `!(x > 0.0)` is used on purpose so that NaN lands in the error branch
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod decoy;
pub mod entropy;
pub mod error;
pub mod exec;
pub mod fidelity;
pub mod optimize;
pub mod photon;
pub mod simplex;
pub mod verify;

pub use error::{Error, Result};
pub use exec::Execution;
