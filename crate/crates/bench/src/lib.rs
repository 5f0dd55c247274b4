//! Benchmark fixtures shared by the criterion targets.

use grounding_core::{load_case, IncidentSession};

/// Session for a bundled case with its evidence applied.
pub fn case_session(name: &str) -> IncidentSession {
    let case = load_case(name).expect("bundled case exists");
    case.session().expect("bundled case builds")
}
