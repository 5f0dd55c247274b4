//! Operator surfaces for grounding damage assessment: batch commands and
//! an HTTP JSON service.

pub mod commands;
pub mod server;

pub use commands::{assess, flow, run_case, AssessInput, CaseRun, CliError, Synthesis};
pub use server::{router, serve, AppState, ServeError, DATA_DIR_ENV};
