//! Continuous laws and their discretization into conditional tables.

mod binning;
mod distribution;
mod synthesis;

pub use binning::{Binning, BinningPolicy};
pub use distribution::{make_distribution, Distribution};
pub use synthesis::{
    functional_cpt, prior_table, NoiseKind, NoiseModel, NoiseSelector, ParentAxis, SynthesisConfig,
};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DiscretizeError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("invalid binning: {0}")]
    InvalidBinning(String),
    #[error("{outside:.3e} of the probability mass lies outside the bin range")]
    SupportMismatch { outside: f64 },
    #[error("function is undefined on cell {cell:?} of {node}")]
    DegenerateCell { node: String, cell: Vec<usize> },
}
