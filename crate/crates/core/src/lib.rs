// Negated comparisons such as `!(x > 0.0)` are used on purpose so NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub(crate) mod component;
pub mod config;
pub mod error;
pub mod graph;
pub mod gwishart;
pub mod ihmm;
pub mod io;
pub(crate) mod linalg;
pub mod mixture;
pub mod numeric;
pub mod scalar;
pub mod summaries;
pub mod synth;
pub mod trace;

pub use error::{Error, Result};
pub use scalar::Real;

pub type PriorSpecF64 = gwishart::PriorSpec<f64>;
pub type PriorSpecF32 = gwishart::PriorSpec<f32>;
pub type ClusterStatsF64 = gwishart::ClusterStats<f64>;
pub type ClusterStatsF32 = gwishart::ClusterStats<f32>;
pub type MixtureStateF64 = mixture::MixtureState<f64>;
pub type MixtureStateF32 = mixture::MixtureState<f32>;
pub type HmmStateF64 = ihmm::HmmState<f64>;
pub type HmmStateF32 = ihmm::HmmState<f32>;
