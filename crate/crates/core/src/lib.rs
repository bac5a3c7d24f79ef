//! Moment-SOS relaxations of polynomial optimization problems that exploit
//! correlative and term sparsity, with a built-in interior-point SDP solver
//! and SDPA export.
//!
//! Everything numeric is generic over [`Scalar`] (`f64` and `f32`); the
//! aliases below fix the scalar type for the common cases.

pub mod correlative;
pub mod error;
pub mod graph;
pub mod pipeline;
pub mod poly;
pub mod relaxation;
pub mod scalar;
pub mod sdp;
pub mod term_sparsity;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type Polynomial64 = poly::Polynomial<f64>;
pub type Polynomial32 = poly::Polynomial<f32>;
pub type Pop64 = poly::PopInstance<f64>;
pub type Pop32 = poly::PopInstance<f32>;
pub type MomentSdp64 = relaxation::MomentSdp<f64>;
pub type MomentSdp32 = relaxation::MomentSdp<f32>;
pub type SdpProblem64 = sdp::SdpProblem<f64>;
pub type SdpProblem32 = sdp::SdpProblem<f32>;
pub type SolveResult64 = sdp::SolveResult<f64>;
pub type SolveResult32 = sdp::SolveResult<f32>;
pub type RunConfig64 = pipeline::RunConfig<f64>;
pub type RunConfig32 = pipeline::RunConfig<f32>;
