use serde::{Deserialize, Serialize};

use super::config::ModelConfig;
use super::nodes::{D_T, Y_D};
use super::ship::ShipParticulars;
use super::ModelError;
use crate::bn::ConditionalTable;
use crate::discretize::{Binning, BinningPolicy};

/// Fraction of the double-bottom height reached by the outer-bottom state.
const OUTER_BOTTOM_FRACTION: f64 = 0.75;
/// Width of each inner-bottom state beyond IB0, as a fraction of h_DB.
const INNER_STEP_FRACTION: f64 = 0.2;
/// Vertical extent range as a fraction of the depth.
const VERTICAL_RANGE_FRACTION: f64 = 0.3;
/// Width of the vertical-extent bins of a single hull, metres.
const SINGLE_HULL_VERTICAL_STEP: f64 = 0.5;

/// P(IHB = yes) for OB, IB0, IB1, IB2, IB3; IB4 and deeper breach surely.
const BREACH_PROBABILITY: [f64; 5] = [0.0, 0.0, 0.7, 0.9, 0.95];

/// Discretization of the three damage descriptors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DamageStateSpec {
    pub width: Binning,
    pub location: Binning,
    pub vertical: Binning,
    /// OB, IB0, IB1, ... for a double hull; interval text otherwise.
    pub vertical_labels: Vec<String>,
    pub double_bottom_height: Option<f64>,
}

impl DamageStateSpec {
    /// 1 m width and location bins over `[0, B]` and `[-B/2, B/2]`, and
    /// the OB/IBk vertical states up to 0.3·D.
    pub fn for_ship(ship: &ShipParticulars) -> Result<Self, ModelError> {
        let b = ship.breadth_m;
        let width = BinningPolicy::Width { lo: 0.0, hi: b, width: 1.0 }.resolve()?;
        let location = BinningPolicy::Width {
            lo: -0.5 * b,
            hi: 0.5 * b,
            width: 1.0,
        }
        .resolve()?;
        let top = VERTICAL_RANGE_FRACTION * ship.depth_m;
        let (vertical, vertical_labels) = match ship.double_bottom_height_m.filter(|_| ship.is_double_hull()) {
            Some(h) => double_bottom_states(h, top)?,
            None => {
                let bins = BinningPolicy::Width {
                    lo: 0.0,
                    hi: top,
                    width: SINGLE_HULL_VERTICAL_STEP,
                }
                .resolve()?;
                let labels = interval_labels(&bins);
                (bins, labels)
            }
        };
        Ok(DamageStateSpec {
            width,
            location,
            vertical,
            vertical_labels,
            double_bottom_height: ship.double_bottom_height_m.filter(|_| ship.is_double_hull()),
        })
    }

    /// [`DamageStateSpec::for_ship`] with the width and location bins
    /// replaced by any `D_t` / `Y_D` overrides of `model`.
    pub fn for_config(ship: &ShipParticulars, model: &ModelConfig) -> Result<Self, ModelError> {
        let mut spec = Self::for_ship(ship)?;
        if let Some(p) = model.binning.get(D_T) {
            spec.width = p.resolve()?;
        }
        if let Some(p) = model.binning.get(Y_D) {
            spec.location = p.resolve()?;
        }
        Ok(spec)
    }

    pub fn with_width(mut self, width: Binning) -> Self {
        self.width = width;
        self
    }

    pub fn with_location(mut self, location: Binning) -> Self {
        self.location = location;
        self
    }

    /// Index of the vertical state labeled `label`.
    pub fn vertical_state(&self, label: &str) -> Option<usize> {
        self.vertical_labels.iter().position(|l| l == label)
    }
}

fn double_bottom_states(h: f64, top: f64) -> Result<(Binning, Vec<String>), ModelError> {
    if top <= OUTER_BOTTOM_FRACTION * h {
        return Err(ModelError::InvalidShip {
            field: "double_bottom_height_m".into(),
            reason: "vertical damage range does not reach past the outer-bottom state".into(),
        });
    }
    let mut edges = vec![0.0, OUTER_BOTTOM_FRACTION * h];
    let mut labels = vec!["OB".to_string()];
    let mut k = 0usize;
    loop {
        let upper = if k == 0 { h } else { h + k as f64 * INNER_STEP_FRACTION * h };
        let last = upper >= top - 1e-9 * h;
        edges.push(if last { top } else { upper });
        labels.push(format!("IB{k}"));
        if last {
            break;
        }
        k += 1;
    }
    Ok((Binning::new(edges)?, labels))
}

fn interval_labels(b: &Binning) -> Vec<String> {
    (0..b.len())
        .map(|i| {
            let (lo, hi) = b.bounds(i);
            format!("{lo:.2}-{hi:.2}")
        })
        .collect()
}

/// `P(IHB | D_v)` with states `[yes, no]`.
pub fn ihb_table(spec: &DamageStateSpec) -> Result<ConditionalTable, ModelError> {
    if spec.double_bottom_height.is_none() {
        return Err(ModelError::SingleHullUnsupported);
    }
    let values = (0..spec.vertical.len())
        .flat_map(|i| {
            let yes = BREACH_PROBABILITY.get(i).copied().unwrap_or(1.0);
            [yes, 1.0 - yes]
        })
        .collect();
    Ok(ConditionalTable::new(super::nodes::IHB, values))
}

/// `P(WI | IHB, LC)` and `P(OS | IHB, LC)`.
///
/// IHB states are `[yes, no]`, LC `[loaded, ballast]`, WI
/// `[ballast_tank, cargo_tank]` and OS `[yes, no]`; LC varies fastest.
pub fn detection_tables() -> (ConditionalTable, ConditionalTable) {
    use super::nodes::{OS, WI};
    // rows: (yes, loaded), (yes, ballast), (no, loaded), (no, ballast)
    let wi = ConditionalTable::new(WI, vec![1.0, 0.0, 0.0, 1.0, 1.0, 0.0, 1.0, 0.0]);
    let os = ConditionalTable::new(OS, vec![1.0, 0.0, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0]);
    (wi, os)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(h: f64, depth: f64) -> DamageStateSpec {
        let (vertical, vertical_labels) = double_bottom_states(h, 0.3 * depth).unwrap();
        DamageStateSpec {
            width: Binning::uniform(0.0, 60.0, 60).unwrap(),
            location: Binning::uniform(-30.0, 30.0, 60).unwrap(),
            vertical,
            vertical_labels,
            double_bottom_height: Some(h),
        }
    }

    #[test]
    fn vertical_states_of_the_vlcc() {
        let s = spec(2.7, 29.7);
        assert_eq!(s.vertical.len(), 14);
        assert_eq!(s.vertical_labels[0], "OB");
        assert_eq!(s.vertical_labels[13], "IB12");
        let e = s.vertical.edges();
        assert!((e[1] - 2.025).abs() < 1e-12);
        assert!((e[2] - 2.7).abs() < 1e-12);
        // IB2 ends at the critical penetration 1.4·h_DB
        assert!((e[4] - 1.4 * 2.7).abs() < 1e-12);
        assert!((s.vertical.hi() - 8.91).abs() < 1e-12);
        assert_eq!(s.vertical.lo(), 0.0);
    }

    #[test]
    fn breach_table_rows() {
        let s = spec(2.7, 29.7);
        let t = ihb_table(&s).unwrap();
        assert_eq!(t.row(0, 2), &[0.0, 1.0]);
        assert_eq!(t.row(1, 2), &[0.0, 1.0]);
        assert_eq!(t.row(2, 2), &[0.7, 0.30000000000000004]);
        assert_eq!(t.row(3, 2)[0], 0.9);
        assert_eq!(t.row(4, 2)[0], 0.95);
        for i in 5..14 {
            assert_eq!(t.row(i, 2), &[1.0, 0.0]);
        }
    }

    #[test]
    fn detection_rows() {
        let (wi, os) = detection_tables();
        // (loaded, IHB=yes) -> oil outflow
        assert_eq!(os.row(0, 2), &[1.0, 0.0]);
        // (ballast, IHB=yes) -> water in the cargo tank
        assert_eq!(wi.row(1, 2), &[0.0, 1.0]);
        // (loaded, IHB=no) -> water in the ballast tank
        assert_eq!(wi.row(2, 2), &[1.0, 0.0]);
        assert_eq!(os.row(3, 2), &[0.0, 1.0]);
    }
}
