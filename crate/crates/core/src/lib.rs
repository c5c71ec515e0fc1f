//! Multi-tenant x-haul and cloud resource allocation over a TWDM-PON.
//!
//! Radio units (RUs) of several mobile operators share the link throughput
//! and DU-CU compute of Edge- and OLT-Cloud sites. The crate provides the
//! demand model ([`radio`]), deployment generation ([`topology`]), the
//! constraint system ([`feasibility`]), the min-max fair and VCG allocators
//! ([`minmax`], [`auction`]), greedy and bandit baselines ([`baselines`]),
//! exhaustive oracles ([`oracle`]), statistics ([`metrics`]) and a seeded
//! batch harness ([`scenario`], [`runner`]).

// `!(x >= 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod auction;
pub mod baselines;
pub mod error;
pub mod feasibility;
pub mod metrics;
pub mod minmax;
pub mod oracle;
pub mod radio;
pub mod runner;
pub mod scenario;
pub mod synth;
pub mod topology;

pub use error::{Error, Result};
