//! Bundled reference incidents.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::nodes::{D_T, D_V, Y_D};
use crate::model::{IncidentConfig, ModelConfig, ModuleToggles, ShipParticulars};
use crate::report::PosteriorReport;
use crate::session::{Evidence, IncidentSession, SessionError};

pub const CASE_NAMES: [&str; 3] = ["case1", "scenarioA", "scenarioB"];

const SHIPS: [(&str, &str); 2] = [
    ("single_hull_tanker", include_str!("../fixtures/single_hull_tanker.json")),
    ("double_hull_vlcc", include_str!("../fixtures/double_hull_vlcc.json")),
];

const CASES: [(&str, &str); 3] = [
    ("case1", include_str!("../fixtures/case1.json")),
    ("scenarioA", include_str!("../fixtures/scenario_a.json")),
    ("scenarioB", include_str!("../fixtures/scenario_b.json")),
];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CaseError {
    #[error("no bundled fixture named {0}")]
    FixtureMissing(String),
    #[error("fixture {name} does not parse: {reason}")]
    Malformed { name: String, reason: String },
}

#[derive(Deserialize)]
struct CaseFile {
    name: String,
    description: String,
    ship: String,
    modules: ModuleToggles,
    #[serde(default)]
    incident: IncidentConfig,
    evidence: Vec<Evidence>,
    #[serde(default)]
    truth: BTreeMap<String, f64>,
}

/// A reference incident with its evidence and, for scenarios, the true damage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Case {
    pub name: String,
    pub description: String,
    pub ship: ShipParticulars,
    pub model: ModelConfig,
    pub incident: IncidentConfig,
    pub evidence: Vec<Evidence>,
    pub truth: BTreeMap<String, f64>,
}

impl Case {
    /// A session with all of the case's evidence applied.
    pub fn session(&self) -> Result<IncidentSession, SessionError> {
        let mut s = IncidentSession::with_id(
            self.name.clone(),
            self.ship.clone(),
            self.model.clone(),
            self.incident.clone(),
        )?;
        s.add_evidence_batch(self.evidence.clone())?;
        Ok(s)
    }

    /// This case with only `modules` enabled.
    pub fn with_modules(&self, modules: ModuleToggles) -> Case {
        let mut c = self.clone();
        c.model.modules = modules;
        c
    }
}

/// Outcome of one tolerance check on a case's posterior.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub criterion: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(criterion: &str, passed: bool, detail: String) -> Self {
        Check {
            criterion: criterion.into(),
            passed,
            detail,
        }
    }
}

/// Tolerance checks of a bundled case against its all-evidence posterior.
pub fn check_case(case: &Case, report: &PosteriorReport) -> Vec<Check> {
    let mut checks = Vec::new();
    let missing = |node: &str| Check::new(node, false, format!("{node} not in the report"));
    match case.name.as_str() {
        "case1" => {
            let Some(dt) = report.get(D_T) else {
                return vec![missing(D_T)];
            };
            let mean = dt.mean.unwrap_or(f64::NAN);
            let sd = dt.sd.unwrap_or(f64::NAN);
            let band = dt.mass_between(6.0, 10.0);
            checks.push(Check::new("D_t mean in [8.0, 9.2] m", (8.0..=9.2).contains(&mean), format!("{mean:.3} m")));
            checks.push(Check::new("D_t sd in [1.2, 2.2] m", (1.2..=2.2).contains(&sd), format!("{sd:.3} m")));
            checks.push(Check::new("P(6 m <= D_t <= 10 m) >= 0.60", band >= 0.60, format!("{band:.3}")));
        }
        "scenarioA" => {
            let Some(yd) = report.get(Y_D) else {
                return vec![missing(Y_D)];
            };
            let truth = case.truth.get(Y_D).copied().unwrap_or(f64::NAN);
            let (lo, hi) = yd.mode_interval().unwrap_or((f64::NAN, f64::NAN));
            let mode = 0.5 * (lo + hi);
            checks.push(Check::new(
                "Y_D mode within 2 m of the true location",
                (mode - truth).abs() <= 2.0,
                format!("mode bin [{lo}, {hi}) vs {truth} m"),
            ));
        }
        "scenarioB" => {
            let (Some(dv), Some(dt)) = (report.get(D_V), report.get(D_T)) else {
                return vec![missing(D_V)];
            };
            let breach = dv.inner_bottom_breach.unwrap_or(f64::NAN);
            checks.push(Check::new("P(IHB = yes) = 1", breach == 1.0, format!("{breach}")));
            let shallow = dv.mass_of("OB").unwrap_or(f64::NAN) + dv.mass_of("IB0").unwrap_or(f64::NAN);
            checks.push(Check::new("D_v mass on {OB, IB0} = 0", shallow == 0.0, format!("{shallow}")));
            let h_db = case.ship.double_bottom_height_m.unwrap_or(f64::NAN);
            let deep = dv.mass_between(h_db, f64::INFINITY);
            checks.push(Check::new("P(D_v > h_DB) >= 0.95", deep >= 0.95, format!("{deep:.4}")));
            let truth = case.truth.get(D_T).copied().unwrap_or(f64::NAN);
            let mean = dt.mean.unwrap_or(f64::NAN);
            checks.push(Check::new(
                "D_t mean within 1 m of the true width",
                (mean - truth).abs() <= 1.0,
                format!("{mean:.3} m vs {truth} m"),
            ));
            let true_bin = dt.edges.windows(2).position(|w| truth >= w[0] && truth < w[1]);
            let ok = true_bin.is_some_and(|b| b.abs_diff(dt.mode) <= 1);
            let (lo, hi) = dt.mode_interval().unwrap_or((f64::NAN, f64::NAN));
            checks.push(Check::new("D_t mode within 1 bin of the true width", ok, format!("mode bin [{lo}, {hi})")));
        }
        _ => {}
    }
    checks
}

pub fn load_ship(name: &str) -> Result<ShipParticulars, CaseError> {
    let text = SHIPS
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, t)| *t)
        .ok_or_else(|| CaseError::FixtureMissing(name.into()))?;
    serde_json::from_str(text).map_err(|e| CaseError::Malformed {
        name: name.into(),
        reason: e.to_string(),
    })
}

pub fn load_case(name: &str) -> Result<Case, CaseError> {
    let text = CASES
        .iter()
        .find(|(n, _)| n.eq_ignore_ascii_case(name))
        .map(|(_, t)| *t)
        .ok_or_else(|| CaseError::FixtureMissing(name.into()))?;
    let file: CaseFile = serde_json::from_str(text).map_err(|e| CaseError::Malformed {
        name: name.into(),
        reason: e.to_string(),
    })?;
    let model = ModelConfig {
        modules: file.modules,
        ..ModelConfig::default()
    };
    Ok(Case {
        name: file.name,
        description: file.description,
        ship: load_ship(&file.ship)?,
        model,
        incident: file.incident,
        evidence: file.evidence,
        truth: file.truth,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_case_parses() {
        for name in CASE_NAMES {
            let c = load_case(name).unwrap();
            c.ship.validate().unwrap();
            c.model.validate().unwrap();
        }
        assert!(matches!(load_case("case9"), Err(CaseError::FixtureMissing(_))));
    }
}
