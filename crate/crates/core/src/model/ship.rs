use serde::{Deserialize, Serialize};

use super::ModelError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HullType {
    Single,
    Double,
}

/// Smeared properties of one bottom plating layer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BottomLayer {
    pub equivalent_thickness_m: f64,
    pub flow_stress_pa: f64,
    /// Dimensionless, in (0, 1).
    pub fracture_strain: f64,
}

/// Principal particulars and double-bottom structure of the stricken ship.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShipParticulars {
    #[serde(default)]
    pub name: String,
    pub length_m: f64,
    pub breadth_m: f64,
    pub depth_m: f64,
    pub design_draft_m: f64,
    pub service_speed_kn: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_gm_m: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub double_bottom_height_m: Option<f64>,
    pub hull: HullType,
    pub outer_bottom: BottomLayer,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inner_bottom: Option<BottomLayer>,
    /// Largest draft before grounding; bounds the water depth at the rock.
    pub max_draft_m: f64,
    /// Plausible range of the pre-grounding displacement, tonnes.
    pub displacement_range_t: [f64; 2],
}

impl ShipParticulars {
    pub fn validate(&self) -> Result<(), ModelError> {
        let bad = |field: &str, reason: &str| {
            Err(ModelError::InvalidShip {
                field: field.into(),
                reason: reason.into(),
            })
        };
        for (field, v) in [
            ("length_m", self.length_m),
            ("breadth_m", self.breadth_m),
            ("depth_m", self.depth_m),
            ("design_draft_m", self.design_draft_m),
            ("service_speed_kn", self.service_speed_kn),
            ("max_draft_m", self.max_draft_m),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return bad(field, "must be positive and finite");
            }
        }
        if let Some(gm) = self.initial_gm_m {
            if !(gm > 0.0) || !gm.is_finite() {
                return bad("initial_gm_m", "must be positive and finite");
            }
        }
        if self.max_draft_m > self.depth_m {
            return bad("max_draft_m", "exceeds the depth");
        }
        let [lo, hi] = self.displacement_range_t;
        if !(lo > 0.0 && hi > lo && hi.is_finite()) {
            return bad("displacement_range_t", "must be an ascending pair of positive masses");
        }
        check_layer("outer_bottom", &self.outer_bottom)?;
        match (self.hull, &self.inner_bottom, self.double_bottom_height_m) {
            (HullType::Double, Some(inner), Some(h)) => {
                check_layer("inner_bottom", inner)?;
                if !(h > 0.0) || h >= self.depth_m {
                    return bad("double_bottom_height_m", "must lie in (0, depth)");
                }
            }
            (HullType::Double, None, _) => return bad("inner_bottom", "required for a double hull"),
            (HullType::Double, _, None) => return bad("double_bottom_height_m", "required for a double hull"),
            (HullType::Single, Some(_), _) => return bad("inner_bottom", "present on a single hull"),
            (HullType::Single, None, _) => {}
        }
        Ok(())
    }

    pub fn is_double_hull(&self) -> bool {
        self.hull == HullType::Double
    }

    /// Layers torn when the inner bottom is (or is not) breached.
    pub fn layers(&self, inner_breached: bool) -> Vec<&BottomLayer> {
        let mut v = vec![&self.outer_bottom];
        if inner_breached {
            if let Some(inner) = &self.inner_bottom {
                v.push(inner);
            }
        }
        v
    }
}

fn check_layer(field: &str, l: &BottomLayer) -> Result<(), ModelError> {
    let ok = l.equivalent_thickness_m > 0.0
        && l.flow_stress_pa > 0.0
        && l.fracture_strain > 0.0
        && l.fracture_strain < 1.0
        && l.equivalent_thickness_m.is_finite()
        && l.flow_stress_pa.is_finite();
    if ok {
        Ok(())
    } else {
        Err(ModelError::InvalidShip {
            field: field.into(),
            reason: "thickness and flow stress must be positive, fracture strain in (0, 1)".into(),
        })
    }
}
