//! Evidence pre-processing: tank flow rates from level soundings,
//! multi-tank aggregation, the displacement-method ground reaction, and
//! chart-depth lookup.

use std::io::Read;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IngestError {
    #[error("need at least {needed} samples in the window, found {found}")]
    InsufficientSamples { needed: usize, found: usize },
    #[error("volume curve decreases between levels {lo} m and {hi} m")]
    NonMonotoneVolumeCurve { lo: f64, hi: f64 },
    #[error("sample times must be finite and strictly increasing (sample {0})")]
    NonIncreasingTime(usize),
    #[error("ground reaction would be negative: damaged displacement {damaged_t} t is below {floating_t} t")]
    NegativeReaction { damaged_t: f64, floating_t: f64 },
    #[error("point ({lat}, {lon}) lies outside the bathymetry grid")]
    OutOfBounds { lat: f64, lon: f64 },
    #[error("invalid bathymetry grid: {0}")]
    InvalidGrid(String),
    #[error("invalid csv: {0}")]
    Csv(String),
}

impl From<csv::Error> for IngestError {
    fn from(e: csv::Error) -> Self {
        IngestError::Csv(e.to_string())
    }
}

/// Measurement quality of a flow rate, matching the states of `Q_eps`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FlowQuality {
    Good,
    Poor,
}

impl FlowQuality {
    pub fn label(self) -> &'static str {
        match self {
            FlowQuality::Good => "good",
            FlowQuality::Poor => "poor",
        }
    }
}

/// Tank volume (m³) as a function of sounding level (m).
pub trait VolumeCurve {
    fn volume(&self, level: f64) -> f64;
}

impl<F: Fn(f64) -> f64> VolumeCurve for F {
    fn volume(&self, level: f64) -> f64 {
        self(level)
    }
}

/// Non-decreasing piecewise-linear volume table, extrapolated linearly
/// from the end segments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseVolumeCurve {
    levels: Vec<f64>,
    volumes: Vec<f64>,
}

impl PiecewiseVolumeCurve {
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self, IngestError> {
        if points.len() < 2 {
            return Err(IngestError::InsufficientSamples {
                needed: 2,
                found: points.len(),
            });
        }
        for (i, w) in points.windows(2).enumerate() {
            if !(w[1].0 > w[0].0) || !w[0].0.is_finite() || !w[1].0.is_finite() {
                return Err(IngestError::NonIncreasingTime(i + 1));
            }
            if !(w[1].1 >= w[0].1) {
                return Err(IngestError::NonMonotoneVolumeCurve { lo: w[0].0, hi: w[1].0 });
            }
        }
        let (levels, volumes) = points.into_iter().unzip();
        Ok(PiecewiseVolumeCurve { levels, volumes })
    }

    /// Reads `level_m,volume_m3` rows.
    pub fn from_csv<R: Read>(reader: R) -> Result<Self, IngestError> {
        Self::new(read_pairs(reader)?)
    }
}

impl VolumeCurve for PiecewiseVolumeCurve {
    fn volume(&self, level: f64) -> f64 {
        let n = self.levels.len();
        let k = self.levels.partition_point(|&x| x <= level).clamp(1, n - 1);
        let (h0, h1) = (self.levels[k - 1], self.levels[k]);
        let (v0, v1) = (self.volumes[k - 1], self.volumes[k]);
        v0 + (v1 - v0) * (level - h0) / (h1 - h0)
    }
}

/// Level soundings of one tank.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelSeries {
    pub tank: String,
    /// `(time s, level m)` with strictly increasing times.
    pub samples: Vec<(f64, f64)>,
}

impl LevelSeries {
    pub fn new(tank: impl Into<String>, samples: Vec<(f64, f64)>) -> Result<Self, IngestError> {
        for (i, w) in samples.windows(2).enumerate() {
            if !(w[1].0 > w[0].0) || !w[1].0.is_finite() {
                return Err(IngestError::NonIncreasingTime(i + 1));
            }
        }
        Ok(LevelSeries {
            tank: tank.into(),
            samples,
        })
    }

    /// Reads `time_s,level_m` rows.
    pub fn from_csv<R: Read>(tank: impl Into<String>, reader: R) -> Result<Self, IngestError> {
        Self::new(tank, read_pairs(reader)?)
    }

    /// Mean sampling step, seconds.
    pub fn step(&self) -> Option<f64> {
        let n = self.samples.len();
        (n >= 2).then(|| (self.samples[n - 1].0 - self.samples[0].0) / (n - 1) as f64)
    }
}

fn read_pairs<R: Read>(reader: R) -> Result<Vec<(f64, f64)>, IngestError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    rdr.deserialize::<(f64, f64)>()
        .map(|r| r.map_err(IngestError::from))
        .collect()
}

/// Window-mean flow rate of one tank.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlowEstimate {
    /// m³/s, positive when the tank volume grows.
    pub rate: f64,
    /// Sample standard deviation of the per-sample rates.
    pub sd: f64,
    pub samples: usize,
    pub quality: FlowQuality,
}

/// Per-sample `Q = [V(h + Δt/2·ḣ) − V(h − Δt/2·ḣ)] / Δt` averaged over the
/// earliest `window` seconds of the series.
///
/// ḣ uses central differences inside the series and one-sided differences
/// at its ends; Δt is the local sampling step.
pub fn flow_rate_from_levels(
    series: &LevelSeries,
    curve: &dyn VolumeCurve,
    window: f64,
    quality: FlowQuality,
) -> Result<FlowEstimate, IngestError> {
    let s = &series.samples;
    let n = s.len();
    if n < 3 {
        return Err(IngestError::InsufficientSamples { needed: 3, found: n });
    }
    let t0 = s[0].0;
    let in_window = s.iter().take_while(|(t, _)| *t <= t0 + window).count();
    if in_window < 3 {
        return Err(IngestError::InsufficientSamples {
            needed: 3,
            found: in_window,
        });
    }
    let mut rates = Vec::with_capacity(in_window);
    for i in 0..in_window {
        let (lo, hi) = match i {
            0 => (0, 1),
            i if i == n - 1 => (n - 2, n - 1),
            i => (i - 1, i + 1),
        };
        let dt = (s[hi].0 - s[lo].0) / (hi - lo) as f64;
        let rate = (s[hi].1 - s[lo].1) / (s[hi].0 - s[lo].0);
        let half = 0.5 * dt * rate;
        let level = s[i].1;
        let (v_up, v_down) = (curve.volume(level + half), curve.volume(level - half));
        if (v_up - v_down) * half < 0.0 {
            return Err(IngestError::NonMonotoneVolumeCurve {
                lo: level - half.abs(),
                hi: level + half.abs(),
            });
        }
        rates.push((v_up - v_down) / dt);
    }
    let k = rates.len() as f64;
    let mean = rates.iter().sum::<f64>() / k;
    let sd = (rates.iter().map(|q| (q - mean).powi(2)).sum::<f64>() / (k - 1.0)).sqrt();
    Ok(FlowEstimate {
        rate: mean,
        sd,
        samples: rates.len(),
        quality,
    })
}

/// Total flow over several tanks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlowTotal {
    pub rate: f64,
    /// Worst quality of the inputs; `None` when there are none.
    pub quality: Option<FlowQuality>,
    pub no_measurements: bool,
}

pub fn sum_tank_flows(rates: &[FlowEstimate]) -> FlowTotal {
    FlowTotal {
        rate: rates.iter().map(|r| r.rate).sum(),
        quality: rates.iter().map(|r| r.quality).max(),
        no_measurements: rates.is_empty(),
    }
}

/// Ground reaction (t) by the displacement method: the loss of buoyancy
/// between the damaged displacement and that at the observed drafts.
pub fn ground_reaction_displacement(damaged_t: f64, floating_t: f64) -> Result<f64, IngestError> {
    if damaged_t < floating_t {
        return Err(IngestError::NegativeReaction { damaged_t, floating_t });
    }
    Ok(damaged_t - floating_t)
}

/// Depth raster with cell-centre coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BathymetryGrid {
    /// Strictly increasing latitudes of the rows.
    lats: Vec<f64>,
    /// Strictly increasing longitudes of the columns.
    lons: Vec<f64>,
    /// Row-major, `depths[row * lons.len() + col]`, metres.
    depths: Vec<f64>,
    #[serde(default)]
    pub datum: String,
}

impl BathymetryGrid {
    /// Rows may be given in either latitude order; they are stored ascending.
    pub fn new(lats: Vec<f64>, lons: Vec<f64>, depths: Vec<f64>) -> Result<Self, IngestError> {
        let bad = |m: &str| Err(IngestError::InvalidGrid(m.into()));
        if lats.is_empty() || lons.is_empty() {
            return bad("grid has no cells");
        }
        if depths.len() != lats.len() * lons.len() {
            return bad("depth count does not match the coordinates");
        }
        if depths.iter().any(|d| !d.is_finite()) {
            return bad("depths must be finite");
        }
        if !lons.windows(2).all(|w| w[1] > w[0]) {
            return bad("longitudes must be strictly increasing");
        }
        let (lats, depths) = if lats.windows(2).all(|w| w[1] < w[0]) && lats.len() > 1 {
            let rows: Vec<&[f64]> = depths.chunks(lons.len()).rev().collect();
            (lats.into_iter().rev().collect(), rows.concat())
        } else {
            (lats, depths)
        };
        if !lats.windows(2).all(|w| w[1] > w[0]) {
            return bad("latitudes must be strictly monotone");
        }
        Ok(BathymetryGrid {
            lats,
            lons,
            depths,
            datum: String::new(),
        })
    }

    /// Header row of longitudes after a leading label cell; each further
    /// row is a latitude followed by depths.
    pub fn from_csv<R: Read>(reader: R) -> Result<Self, IngestError> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let mut records = rdr.records();
        let header = records
            .next()
            .ok_or_else(|| IngestError::InvalidGrid("empty file".into()))??;
        let num = |s: &str| {
            s.parse::<f64>()
                .map_err(|_| IngestError::InvalidGrid(format!("not a number: {s:?}")))
        };
        let lons = header.iter().skip(1).map(num).collect::<Result<Vec<_>, _>>()?;
        let mut lats = Vec::new();
        let mut depths = Vec::new();
        for rec in records {
            let rec = rec?;
            let mut cells = rec.iter();
            lats.push(num(cells.next().unwrap_or(""))?);
            for c in cells {
                depths.push(num(c)?);
            }
        }
        Self::new(lats, lons, depths)
    }

    fn depth(&self, row: usize, col: usize) -> f64 {
        self.depths[row * self.lons.len() + col]
    }
}

/// Index `k` and fraction `f` with `x = axis[k] + f·(axis[k+1] − axis[k])`.
fn bracket(axis: &[f64], x: f64) -> Option<(usize, f64)> {
    if axis.len() == 1 {
        return (x == axis[0]).then_some((0, 0.0));
    }
    if !(x >= axis[0] && x <= axis[axis.len() - 1]) {
        return None;
    }
    let k = axis.partition_point(|&a| a <= x).clamp(1, axis.len() - 1) - 1;
    Some((k, (x - axis[k]) / (axis[k + 1] - axis[k])))
}

/// Charted depth (m) at a position by bilinear interpolation of cell centres.
pub fn bathymetry_lookup(grid: &BathymetryGrid, lat: f64, lon: f64) -> Result<f64, IngestError> {
    let oob = IngestError::OutOfBounds { lat, lon };
    let (r, fr) = bracket(&grid.lats, lat).ok_or(oob.clone())?;
    let (c, fc) = bracket(&grid.lons, lon).ok_or(oob)?;
    let r1 = (r + 1).min(grid.lats.len() - 1);
    let c1 = (c + 1).min(grid.lons.len() - 1);
    let bottom = grid.depth(r, c) * (1.0 - fc) + grid.depth(r, c1) * fc;
    let top = grid.depth(r1, c) * (1.0 - fc) + grid.depth(r1, c1) * fc;
    Ok(bottom * (1.0 - fr) + top * fr)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prismatic_tank_is_exact() {
        let s = LevelSeries::new("t", (0..30).map(|i| (2.0 * i as f64, 1.0 + 0.2 * i as f64)).collect()).unwrap();
        let curve = |h: f64| 1000.0 * h;
        let q = flow_rate_from_levels(&s, &curve, 50.0, FlowQuality::Good).unwrap();
        assert!((q.rate - 100.0).abs() < 1e-9);
        assert!(q.sd < 1e-9);
        assert_eq!(q.samples, 26);
    }

    #[test]
    fn two_samples_are_insufficient() {
        let s = LevelSeries::new("t", vec![(0.0, 1.0), (2.0, 1.2)]).unwrap();
        let err = flow_rate_from_levels(&s, &|h: f64| h, 40.0, FlowQuality::Good).unwrap_err();
        assert_eq!(err, IngestError::InsufficientSamples { needed: 3, found: 2 });
    }

    #[test]
    fn piecewise_curve_interpolates_and_rejects_decrease() {
        let c = PiecewiseVolumeCurve::new(vec![(0.0, 0.0), (1.0, 10.0), (3.0, 50.0)]).unwrap();
        assert_eq!(c.volume(0.5), 5.0);
        assert_eq!(c.volume(2.0), 30.0);
        assert_eq!(c.volume(4.0), 70.0);
        assert!(matches!(
            PiecewiseVolumeCurve::new(vec![(0.0, 5.0), (1.0, 4.0)]),
            Err(IngestError::NonMonotoneVolumeCurve { .. })
        ));
    }

    #[test]
    fn csv_inputs() {
        let c = PiecewiseVolumeCurve::from_csv("level_m,volume_m3\n0,0\n10,5000\n".as_bytes()).unwrap();
        assert_eq!(c.volume(1.0), 500.0);
        let s = LevelSeries::from_csv("p3", "time_s,level_m\n0,1.0\n2,1.1\n4,1.2\n".as_bytes()).unwrap();
        assert_eq!(s.step(), Some(2.0));
        let g = BathymetryGrid::from_csv("lat\\lon,10.0,10.1\n60.1,14,18\n60.0,14,18\n".as_bytes()).unwrap();
        assert!((bathymetry_lookup(&g, 60.05, 10.05).unwrap() - 16.0).abs() < 1e-12);
    }

    #[test]
    fn sums_and_reactions() {
        let est = |rate, quality| FlowEstimate {
            rate,
            sd: 0.0,
            samples: 3,
            quality,
        };
        let t = sum_tank_flows(&[est(700.0, FlowQuality::Good), est(650.0, FlowQuality::Poor)]);
        assert_eq!(t.rate, 1350.0);
        assert_eq!(t.quality, Some(FlowQuality::Poor));
        let empty = sum_tank_flows(&[]);
        assert_eq!(empty.rate, 0.0);
        assert!(empty.no_measurements);

        assert_eq!(ground_reaction_displacement(329_765.0, 320_129.0).unwrap(), 9636.0);
        assert_eq!(ground_reaction_displacement(293_474.0, 275_954.0).unwrap(), 17520.0);
        assert_eq!(ground_reaction_displacement(5.0, 5.0).unwrap(), 0.0);
        assert!(ground_reaction_displacement(5.0, 6.0).is_err());
    }

    #[test]
    fn bathymetry_cases() {
        let g = BathymetryGrid::new(vec![0.0, 1.0], vec![0.0, 1.0, 2.0], vec![10.0, 12.0, 14.0, 10.0, 12.0, 18.0]).unwrap();
        assert_eq!(bathymetry_lookup(&g, 1.0, 2.0).unwrap(), 18.0);
        assert_eq!(bathymetry_lookup(&g, 0.0, 0.5).unwrap(), 11.0);
        assert_eq!(bathymetry_lookup(&g, 0.5, 0.0).unwrap(), 10.0);
        assert!(matches!(bathymetry_lookup(&g, 1.5, 0.0), Err(IngestError::OutOfBounds { .. })));
    }
}
