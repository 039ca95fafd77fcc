//! Approximate virtual broadcasting toolkit.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod broadcasting;
pub mod channels;
pub mod diamond;
pub mod error;
pub mod linalg;
pub mod scalar;
pub mod sdp;
pub mod simulator;
pub mod verify;

pub use error::{Error, Result};
pub use scalar::Real;

pub type ComplexMatrix = linalg::Matrix<f64>;
pub type HermitianOperator = linalg::Hermitian<f64>;
pub type DensityOperator = linalg::Density<f64>;
pub type Spectrum = linalg::Spectrum<f64>;
pub use linalg::SubsystemDims;

pub type ChoiOperator = channels::ChoiOperator<f64>;
pub type BroadcastDecomposition = channels::BroadcastDecomposition<f64>;
pub type SdpProblem = sdp::SdpProblem<f64>;
pub type SdpSolution = sdp::SdpSolution<f64>;
pub type SolverConfig = sdp::SolverConfig<f64>;
pub type OverheadResult = broadcasting::OverheadResult<f64>;
pub type TradeoffPoint = broadcasting::TradeoffPoint<f64>;
pub type DiamondResult = diamond::DiamondResult<f64>;
