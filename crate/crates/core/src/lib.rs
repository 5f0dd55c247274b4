//! Near-real-time estimation of ship-bottom grounding damage with a
//! discretized Bayesian network.

// `!(x > y)` rejects NaN along with out-of-order values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bn;
pub mod cases;
pub mod discretize;
pub mod ingest;
pub mod model;
pub mod report;
pub mod session;

pub use cases::{check_case, load_case, Case, CaseError, Check, CASE_NAMES};
pub use model::{
    build_network, GroundingModel, IncidentConfig, ModelConfig, ModelError, ModuleToggles, ShipParticulars,
};
pub use report::{NodeReport, PosteriorReport};
pub use session::{Evidence, EvidenceId, EvidenceValue, IncidentSession, SessionError};
