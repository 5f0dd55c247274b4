//! Closed-form relations of the crashworthiness, hydraulic and
//! hydrostatic modules. SI units throughout, except masses in tonnes and
//! speeds in knots at the public boundary.

use super::ship::BottomLayer;
use super::ModelError;

/// Metres per second in one knot.
pub const KNOT: f64 = 0.514_444;

/// Empirical tearing-force law: `F_H = 0.77 Σ σ0 ε_f^0.71 t_eq^1.17 · D_t^0.83`.
const FORCE_COEFF: f64 = 0.77;
const STRAIN_EXP: f64 = 0.71;
const THICKNESS_EXP: f64 = 1.17;
const WIDTH_EXP: f64 = 0.83;

/// Kinetic energy (J) of a ship of `mass_t` tonnes at `speed_kn`,
/// including added mass as a fraction of the displacement.
pub fn kinetic_energy(mass_t: f64, speed_kn: f64, added_mass_fraction: f64) -> f64 {
    let v = speed_kn * KNOT;
    0.5 * (1.0 + added_mass_fraction) * mass_t * 1000.0 * v * v
}

/// Median horizontal grounding force (N) when `energy` is dissipated over
/// a stopping length `damage_length` (m).
pub fn horizontal_force(energy: f64, damage_length: f64) -> Result<f64, ModelError> {
    if !(damage_length > 0.0) {
        return Err(ModelError::DivisionByZeroLength);
    }
    Ok(energy / damage_length)
}

/// `σ0 ε_f^0.71 t_eq^1.17` of one bottom layer.
pub fn layer_resistance(layer: &BottomLayer) -> f64 {
    layer.flow_stress_pa * layer.fracture_strain.powf(STRAIN_EXP) * layer.equivalent_thickness_m.powf(THICKNESS_EXP)
}

/// Damage width (m) that a horizontal force tears through the given layers.
pub fn damage_width(force: f64, layers: &[&BottomLayer]) -> f64 {
    width_from_resistance(force, layers.iter().map(|l| layer_resistance(l)).sum())
}

/// Damage width for a summed layer resistance `resistance`.
pub fn width_from_resistance(force: f64, resistance: f64) -> f64 {
    if force <= 0.0 {
        return 0.0;
    }
    (force / (FORCE_COEFF * resistance)).powf(1.0 / WIDTH_EXP)
}

/// Force (N) needed to tear a width `width` through the given layers.
pub fn tearing_force(width: f64, layers: &[&BottomLayer]) -> f64 {
    let k: f64 = layers.iter().map(|l| layer_resistance(l)).sum();
    FORCE_COEFF * k * width.max(0.0).powf(WIDTH_EXP)
}

/// Sea-water inflow (m³/s) through an opening `length × width` under head `head`.
pub fn flooding_rate(discharge_coeff: f64, length: f64, width: f64, head: f64, gravity: f64) -> f64 {
    discharge_coeff * length * width * (2.0 * gravity * head.max(0.0)).sqrt()
}

/// Oil outflow through an inner-bottom opening.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OilOutflow {
    /// m³/s, zero once the oil column balances the sea-water head.
    pub rate: f64,
    pub equilibrium: bool,
}

#[allow(clippy::too_many_arguments)]
pub fn oil_outflow_rate(
    discharge_coeff: f64,
    length: f64,
    width: f64,
    oil_level: f64,
    water_head: f64,
    water_density: f64,
    oil_density: f64,
    gravity: f64,
) -> OilOutflow {
    let head = oil_level - water_density / oil_density * water_head;
    if head <= 0.0 {
        return OilOutflow {
            rate: 0.0,
            equilibrium: true,
        };
    }
    OilOutflow {
        rate: discharge_coeff * length * width * (2.0 * gravity * head).sqrt(),
        equilibrium: false,
    }
}

/// Heel tangent from moment balance of the ground reaction `reaction_t`
/// acting at `offset` (m, positive to port) on a ship of `mass_t`.
pub fn heel_tangent(reaction_t: f64, mass_t: f64, gm: f64, offset: f64) -> Result<f64, ModelError> {
    if reaction_t >= mass_t {
        return Err(ModelError::GroundReactionExceedsWeight {
            reaction_t,
            mass_t,
        });
    }
    Ok(reaction_t * offset / ((mass_t - reaction_t) * gm))
}

pub fn starboard_draft(port_draft: f64, heel_tangent: f64, breadth: f64) -> f64 {
    port_draft + breadth * heel_tangent
}

/// Draft at the rock: mean draft corrected for heel at transverse offset `offset`.
pub fn rock_draft(port_draft: f64, starboard_draft: f64, offset: f64, breadth: f64) -> f64 {
    0.5 * (port_draft + starboard_draft) - offset * (starboard_draft - port_draft) / breadth
}

/// Vertical penetration, small-heel form, zero when the rock sits below the keel.
pub fn penetration(rock_draft: f64, water_depth: f64) -> f64 {
    (rock_draft - water_depth).max(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    fn single_hull() -> BottomLayer {
        BottomLayer {
            equivalent_thickness_m: 0.062,
            flow_stress_pa: 300e6,
            fracture_strain: 0.41,
        }
    }

    fn vlcc_layer() -> BottomLayer {
        BottomLayer {
            equivalent_thickness_m: 0.045,
            flow_stress_pa: 427e6,
            fracture_strain: 0.25,
        }
    }

    #[test]
    fn kinetic_energy_values() {
        assert!(rel(kinetic_energy(273_000.0, 11.5, 0.05), 5.016e9) < 1e-3);
        assert!(rel(kinetic_energy(298_474.0, 4.5, 0.05), 8.40e8) < 1e-3);
        assert_eq!(kinetic_energy(273_000.0, 0.0, 0.05), 0.0);
    }

    #[test]
    fn horizontal_force_values() {
        assert!(rel(horizontal_force(5.016e9, 180.0).unwrap(), 2.787e7) < 1e-3);
        assert!(rel(horizontal_force(8.40e8, 100.0).unwrap(), 8.40e6) < 1e-12);
        assert_eq!(horizontal_force(0.0, 55.0).unwrap(), 0.0);
        assert_eq!(horizontal_force(1.0, 0.0), Err(ModelError::DivisionByZeroLength));
    }

    #[test]
    fn damage_width_values() {
        let s = single_hull();
        // independent evaluation of the closed form: 8.4514 m
        let direct = (2.787e7 / (0.77 * 300e6 * 0.41f64.powf(0.71) * 0.062f64.powf(1.17))).powf(1.0 / 0.83);
        assert!(rel(damage_width(2.787e7, &[&s]), direct) < 1e-12);
        assert!((damage_width(2.787e7, &[&s]) - 8.49).abs() < 0.05);
        let v = vlcc_layer();
        let direct = (3.047e7 / (0.77 * 2.0 * 427e6 * 0.25f64.powf(0.71) * 0.045f64.powf(1.17))).powf(1.0 / 0.83);
        assert!(rel(damage_width(3.047e7, &[&v, &v]), direct) < 1e-12);
        assert!((damage_width(3.047e7, &[&v, &v]) - 6.41).abs() < 0.05);
        assert_eq!(damage_width(0.0, &[&v]), 0.0);
    }

    #[test]
    fn tearing_force_inverts_damage_width() {
        let v = vlcc_layer();
        for w in [0.1, 1.0, 6.0, 33.3, 60.0] {
            let f = tearing_force(w, &[&v, &v]);
            assert!(rel(damage_width(f, &[&v, &v]), w) < 1e-9);
        }
    }

    #[test]
    fn hydraulic_rates() {
        assert!((flooding_rate(0.625, 35.0, 3.3, 17.8, 9.81) - 1349.0).abs() < 1.0);
        assert_eq!(flooding_rate(0.625, 35.0, 0.0, 17.8, 9.81), 0.0);
        assert_eq!(flooding_rate(0.625, 35.0, 3.3, 0.0, 9.81), 0.0);

        let q = oil_outflow_rate(0.625, 50.4, 6.0, 25.0, 19.5, 1025.0, 900.0, 9.81);
        assert!((q.rate - 1399.0).abs() < 1.0);
        assert!(!q.equilibrium);
        let eq = oil_outflow_rate(0.625, 50.4, 6.0, 1025.0 / 900.0 * 19.5, 19.5, 1025.0, 900.0, 9.81);
        assert_eq!(eq.rate, 0.0);
        assert!(eq.equilibrium);
        assert_eq!(oil_outflow_rate(0.625, 50.4, 0.0, 25.0, 19.5, 1025.0, 900.0, 9.81).rate, 0.0);
    }

    #[test]
    fn hydrostatic_chain() {
        let t = heel_tangent(9636.0, 329_765.0, 6.3, 12.9).unwrap();
        assert!((t - 0.06164).abs() < 1e-5);
        assert!((t.atan().to_degrees() - 3.53).abs() < 0.01);
        assert_eq!(heel_tangent(9636.0, 329_765.0, 6.3, 0.0).unwrap(), 0.0);
        assert_eq!(heel_tangent(9636.0, 329_765.0, 6.3, -12.9).unwrap(), -t);
        assert!(heel_tangent(5.0, 5.0, 6.3, 1.0).is_err());

        assert!((starboard_draft(17.2, 0.061667, 60.0) - 20.9).abs() < 1e-3);
        assert!((starboard_draft(19.0, -0.016667, 60.0) - 18.0).abs() < 1e-3);
        assert_eq!(starboard_draft(17.2, 0.0, 60.0), 17.2);

        assert!((rock_draft(17.2, 20.9, 12.9, 60.0) - 18.25).abs() < 0.01);
        assert!((rock_draft(17.2, 20.9, 0.0, 60.0) - 19.05).abs() < 1e-12);
        assert!((rock_draft(19.0, 18.0, -1.0, 60.0) - 18.483).abs() < 1e-3);

        assert!((penetration(18.25, 16.0) - 2.25).abs() < 1e-12);
        assert_eq!(penetration(15.0, 16.0), 0.0);
        assert!((penetration(18.483, 14.5) - 3.983).abs() < 1e-3);
    }
}
