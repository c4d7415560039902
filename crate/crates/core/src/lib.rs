//! Simulation and reflection design for an intelligent reflecting surface
//! (IRS) mounted on a radar target.
//!
//! The crate models mono-static radar echoes off an absorber-coated target,
//! designs IRS reflection patterns that cancel (stealth), redirect
//! (spoofing) or steer toward a friendly receiver under a leakage budget
//! (covert link), estimates radar directions with MUSIC, and runs the
//! seeded case-study sweeps.
//!
//! Numeric code is generic over [`scalar::Scalar`] (`f32` or `f64`). The
//! aliases below fix the common types to `f64`, with `*32` variants.

// Negated comparisons reject NaN along with out-of-range values.
#![allow(
    clippy::neg_cmp_op_on_partial_ord,
    clippy::needless_range_loop,
    clippy::too_many_arguments,
    clippy::type_complexity
)]

pub mod error;
pub mod geometry;
pub mod propagation;
pub mod scalar;
pub mod scenario;
pub mod seeding;
pub mod linalg;
pub mod design;
pub mod recon;
pub mod covert;
pub mod harness;

pub use error::{Error, Result};

pub type Scenario = scenario::Scenario<f64>;
pub type Scenario32 = scenario::Scenario<f32>;
pub type ReflectionPattern = propagation::ReflectionPattern<f64>;
pub type ReflectionPattern32 = propagation::ReflectionPattern<f32>;
pub type ChannelSet = propagation::ChannelSet<f64>;
pub type ChannelSet32 = propagation::ChannelSet<f32>;
pub type DesignResult = design::DesignResult<f64>;
pub type DesignResult32 = design::DesignResult<f32>;
pub type CovertChannels = covert::CovertChannels<f64>;
pub type CovertChannels32 = covert::CovertChannels<f32>;
pub type SnapshotBlock = recon::SnapshotBlock<f64>;
pub type SnapshotBlock32 = recon::SnapshotBlock<f32>;
pub type AoAEstimate = recon::AoAEstimate<f64>;
pub type AoAEstimate32 = recon::AoAEstimate<f32>;
