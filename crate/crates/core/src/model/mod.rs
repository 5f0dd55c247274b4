//! Domain layer: ship and incident configuration, the physics relations
//! of each evidence module, and assembly of the full network.

mod build;
mod config;
pub mod nodes;
pub mod physics;
mod ship;
mod states;

pub use build::{build_network, GroundingModel};
pub use config::{
    ErrorCatalog, IncidentConfig, LoadingCondition, ModelConfig, ModuleToggles, DEFAULT_GROUND_REACTION_MAX_T,
};
pub use ship::{BottomLayer, HullType, ShipParticulars};
pub use states::{detection_tables, ihb_table, DamageStateSpec};

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bn::BnError;
use crate::discretize::DiscretizeError;

/// An input an enabled module needs but the incident does not provide.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MissingInput {
    pub module: String,
    pub input: String,
}

impl fmt::Display for MissingInput {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} needs {}", self.module, self.input)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("damage length must be positive")]
    DivisionByZeroLength,
    #[error("ground reaction {reaction_t} t is not below the ship's mass {mass_t} t")]
    GroundReactionExceedsWeight { reaction_t: f64, mass_t: f64 },
    #[error("inner-hull breach is undefined for a single hull")]
    SingleHullUnsupported,
    #[error("invalid ship particulars: {field} {reason}")]
    InvalidShip { field: String, reason: String },
    #[error("invalid model configuration: {0}")]
    InvalidModel(String),
    #[error("invalid incident configuration: {0}")]
    InvalidIncident(String),
    #[error("configuration incomplete: {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    ConfigurationIncomplete(Vec<MissingInput>),
    #[error(transparent)]
    Discretize(#[from] DiscretizeError),
    #[error(transparent)]
    Network(#[from] BnError),
}
