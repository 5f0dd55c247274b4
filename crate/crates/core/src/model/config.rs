use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::ModelError;
use crate::discretize::{BinningPolicy, Distribution, SynthesisConfig};

/// Observation and model errors, keyed by the relation they perturb.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ErrorCatalog {
    pub grounding_force: Distribution,
    pub speed: Distribution,
    pub displacement: Distribution,
    pub damage_length: Distribution,
    pub flow_good: Distribution,
    pub flow_poor: Distribution,
    pub port_draft: Distribution,
    pub starboard_draft: Distribution,
    pub ground_reaction: Distribution,
    pub water_depth: Distribution,
    pub inspection_extent_good: Distribution,
    pub inspection_extent_poor: Distribution,
    pub inspection_location_good: Distribution,
    pub inspection_location_poor: Distribution,
}

fn ln(cov: f64) -> Distribution {
    Distribution::LognormalMedianCov { median: 1.0, cov }
}

fn n(sd: f64) -> Distribution {
    Distribution::Normal { mean: 0.0, sd }
}

impl Default for ErrorCatalog {
    fn default() -> Self {
        ErrorCatalog {
            grounding_force: ln(0.10),
            speed: n(0.24),
            displacement: ln(0.025),
            damage_length: n(5.0),
            flow_good: ln(0.10),
            flow_poor: ln(0.30),
            port_draft: n(0.25),
            starboard_draft: n(0.25),
            ground_reaction: ln(0.10),
            water_depth: n(0.75),
            inspection_extent_good: ln(0.10),
            inspection_extent_poor: ln(0.30),
            inspection_location_good: n(1.0),
            inspection_location_poor: n(2.0),
        }
    }
}

impl ErrorCatalog {
    fn entries(&self) -> [(&'static str, &Distribution, bool); 14] {
        [
            ("grounding_force", &self.grounding_force, true),
            ("speed", &self.speed, false),
            ("displacement", &self.displacement, true),
            ("damage_length", &self.damage_length, false),
            ("flow_good", &self.flow_good, true),
            ("flow_poor", &self.flow_poor, true),
            ("port_draft", &self.port_draft, false),
            ("starboard_draft", &self.starboard_draft, false),
            ("ground_reaction", &self.ground_reaction, true),
            ("water_depth", &self.water_depth, false),
            ("inspection_extent_good", &self.inspection_extent_good, true),
            ("inspection_extent_poor", &self.inspection_extent_poor, true),
            ("inspection_location_good", &self.inspection_location_good, false),
            ("inspection_location_poor", &self.inspection_location_poor, false),
        ]
    }

    fn validate(&self) -> Result<(), ModelError> {
        for (name, d, multiplicative) in self.entries() {
            d.validate().map_err(|e| ModelError::InvalidModel(format!("error law {name}: {e}")))?;
            if d.sd() <= 0.0 {
                return Err(ModelError::InvalidModel(format!("error law {name} has no spread")));
            }
            if multiplicative && d.support().0 < 0.0 {
                return Err(ModelError::InvalidModel(format!(
                    "multiplicative error law {name} must be positive"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct ModuleToggles {
    pub crashworthiness: bool,
    pub hydraulic: bool,
    pub hydrostatic: bool,
    pub inspection: bool,
}

impl Default for ModuleToggles {
    fn default() -> Self {
        ModuleToggles {
            crashworthiness: true,
            hydraulic: true,
            hydrostatic: true,
            inspection: true,
        }
    }
}

impl ModuleToggles {
    pub fn crashworthiness_only() -> Self {
        ModuleToggles {
            crashworthiness: true,
            hydraulic: false,
            hydrostatic: false,
            inspection: false,
        }
    }

    pub fn any(&self) -> bool {
        self.crashworthiness || self.hydraulic || self.hydrostatic || self.inspection
    }
}

/// Physical constants, error laws and discretization settings shared by
/// every incident.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ModelConfig {
    pub added_mass_fraction: f64,
    pub gravity: f64,
    pub seawater_density: f64,
    pub oil_density: f64,
    pub discharge_coefficient: Distribution,
    pub errors: ErrorCatalog,
    pub modules: ModuleToggles,
    /// Replaces the default bins of the named node.
    pub binning: BTreeMap<String, BinningPolicy>,
    /// Bin count for continuous nodes without a specific rule.
    pub default_bins: usize,
    /// Bin count of the heel angle.
    pub heel_bins: usize,
    /// Upper bound on flow-rate bins.
    pub max_flow_bins: usize,
    /// Beta shape of the impact-speed prior on [0, service speed].
    pub speed_prior_shape: [f64; 2],
    /// Mean damage length as a fraction of ship length.
    pub damage_length_mean_fraction: f64,
    pub synthesis: SynthesisConfig,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            added_mass_fraction: 0.05,
            gravity: 9.81,
            seawater_density: 1025.0,
            oil_density: 900.0,
            discharge_coefficient: Distribution::Normal { mean: 0.625, sd: 0.02 },
            errors: ErrorCatalog::default(),
            modules: ModuleToggles::default(),
            binning: BTreeMap::new(),
            default_bins: 24,
            heel_bins: 48,
            max_flow_bins: 400,
            speed_prior_shape: [5.0, 2.0],
            damage_length_mean_fraction: 0.22,
            synthesis: SynthesisConfig::default(),
        }
    }
}

impl ModelConfig {
    pub fn validate(&self) -> Result<(), ModelError> {
        let invalid = |m: &str| Err(ModelError::InvalidModel(m.into()));
        if !(self.seawater_density > 0.0 && self.oil_density > 0.0) {
            return invalid("densities must be positive");
        }
        if !(self.gravity > 0.0) {
            return invalid("gravity must be positive");
        }
        if !(self.added_mass_fraction >= 0.0) {
            return invalid("added-mass fraction must be non-negative");
        }
        if !self.modules.any() {
            return invalid("at least one module must be enabled");
        }
        if self.default_bins < 2 || self.heel_bins < 2 || self.max_flow_bins < 2 {
            return invalid("bin counts must be at least 2");
        }
        if self.speed_prior_shape.iter().any(|&s| !(s > 0.0)) {
            return invalid("speed prior shape parameters must be positive");
        }
        if !(self.damage_length_mean_fraction > 0.0 && self.damage_length_mean_fraction < 0.5) {
            return invalid("damage-length mean fraction must lie in (0, 0.5)");
        }
        self.discharge_coefficient
            .validate()
            .map_err(|e| ModelError::InvalidModel(format!("discharge coefficient: {e}")))?;
        self.errors.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LoadingCondition {
    Loaded,
    Ballast,
}

/// Incident-specific constants that enter the network as fixed inputs.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct IncidentConfig {
    /// Loading condition when known; otherwise LC keeps its prior.
    pub loading_condition: Option<LoadingCondition>,
    pub tank_damaged_length_m: Option<f64>,
    /// Additive Gaussian sd on the damaged tank length.
    pub tank_damaged_length_sd_m: f64,
    pub oil_level_m: Option<f64>,
    pub pressure_head_m: Option<f64>,
    pub metacentric_height_m: Option<f64>,
    pub damaged_displacement_t: Option<f64>,
    /// Applies the displacement error law to the damaged displacement.
    pub damaged_displacement_uncertain: bool,
    /// `[loaded, ballast]` prior of LC when no loading condition is given.
    pub loading_prior: Option<[f64; 2]>,
    /// `[good, poor]` prior of the flow-measurement quality.
    pub flow_quality_prior: Option<[f64; 2]>,
    /// `[good, poor]` prior of the inspection visibility.
    pub visibility_prior: Option<[f64; 2]>,
    /// Upper bound of the ground-reaction prior, tonnes.
    pub ground_reaction_max_t: Option<f64>,
    /// `[lo, hi]` of the port-draft prior.
    pub port_draft_range_m: Option<[f64; 2]>,
    /// Replaces the default prior of a root node (M, V, L_D, R, Y_D, H, T_p).
    pub priors: BTreeMap<String, Distribution>,
}

/// Default upper bound of the ground-reaction prior, tonnes.
pub const DEFAULT_GROUND_REACTION_MAX_T: f64 = 10_000.0;

impl IncidentConfig {
    pub fn ground_reaction_max(&self) -> f64 {
        self.ground_reaction_max_t.unwrap_or(DEFAULT_GROUND_REACTION_MAX_T)
    }
}

pub(crate) fn binary_prior(p: Option<[f64; 2]>, what: &str) -> Result<Vec<f64>, ModelError> {
    let [a, b] = p.unwrap_or([0.5, 0.5]);
    let s = a + b;
    if !(a >= 0.0 && b >= 0.0 && s > 0.0) || !s.is_finite() {
        return Err(ModelError::InvalidIncident(format!("{what} prior must be non-negative with positive mass")));
    }
    Ok(vec![a / s, b / s])
}
