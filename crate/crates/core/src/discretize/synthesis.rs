//! Turns priors and "deterministic function plus error" relations into
//! row-stochastic tables over interval states.
//!
//! Parent cells are covered with stratified samples (interval midpoints,
//! Latin-hypercube paired across dimensions), and each sample's child
//! value is spread over the child bins with the error law's exact cdf.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{Binning, DiscretizeError, Distribution};
use crate::bn::ConditionalTable;

/// Mass below which the cdf of an error law is treated as exactly 0 (or 1).
const NOISE_TAIL: f64 = 1e-16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseKind {
    /// child = f(parents) * error
    Multiplicative,
    /// child = f(parents) + error
    Additive,
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub kind: NoiseKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<Distribution>,
}

impl NoiseModel {
    pub fn none() -> Self {
        NoiseModel {
            kind: NoiseKind::None,
            error: None,
        }
    }

    pub fn additive(error: Distribution) -> Self {
        NoiseModel {
            kind: NoiseKind::Additive,
            error: Some(error),
        }
    }

    pub fn multiplicative(error: Distribution) -> Result<Self, DiscretizeError> {
        let m = NoiseModel {
            kind: NoiseKind::Multiplicative,
            error: Some(error),
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<(), DiscretizeError> {
        match (self.kind, &self.error) {
            (NoiseKind::None, _) => Ok(()),
            (_, None) => Err(DiscretizeError::InvalidParameter("noise model lacks an error law".into())),
            (NoiseKind::Additive, Some(d)) => d.validate(),
            (NoiseKind::Multiplicative, Some(d)) => {
                d.validate()?;
                if d.support().0 < 0.0 || d.cdf(0.0) > 0.0 {
                    return Err(DiscretizeError::InvalidParameter(
                        "multiplicative error needs strictly positive support".into(),
                    ));
                }
                Ok(())
            }
        }
    }
}

/// Noise applied to a child, possibly switched by a categorical parent
/// (flow-measurement quality, inspection visibility).
#[derive(Debug, Clone, PartialEq)]
pub enum NoiseSelector {
    Fixed(NoiseModel),
    /// `models[s]` applies when categorical parent `parent` is in state `s`.
    ByParent { parent: usize, models: Vec<NoiseModel> },
}

impl NoiseSelector {
    fn pick(&self, coords: &[usize]) -> &NoiseModel {
        match self {
            NoiseSelector::Fixed(m) => m,
            NoiseSelector::ByParent { parent, models } => &models[coords[*parent]],
        }
    }
}

impl From<NoiseModel> for NoiseSelector {
    fn from(m: NoiseModel) -> Self {
        NoiseSelector::Fixed(m)
    }
}

/// One parent dimension of a synthesized table.
#[derive(Debug, Clone, PartialEq)]
pub enum ParentAxis {
    /// Continuous parent discretized into intervals; sampled inside each cell.
    Interval(Binning),
    /// Categorical parent; the function sees the state index as `f64`.
    Categorical(usize),
}

impl ParentAxis {
    fn len(&self) -> usize {
        match self {
            ParentAxis::Interval(b) => b.len(),
            ParentAxis::Categorical(n) => *n,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SynthesisConfig {
    pub samples_per_cell: usize,
    pub seed: u64,
}

impl Default for SynthesisConfig {
    fn default() -> Self {
        SynthesisConfig {
            samples_per_cell: 256,
            seed: 20_250_101,
        }
    }
}

/// Probability of each bin under `dist`.
///
/// With `truncate` the law is renormalized to the bin range. Without it,
/// up to 1e-3 of outside mass is folded into the boundary bins and more
/// than that is an error.
pub fn prior_table(dist: &Distribution, bins: &Binning, truncate: bool) -> Result<Vec<f64>, DiscretizeError> {
    let edges = bins.edges();
    let cdf: Vec<f64> = edges.iter().map(|&e| dist.cdf(e)).collect();
    let inside = cdf[cdf.len() - 1] - cdf[0];
    let outside = 1.0 - inside;
    if !truncate && outside > 1e-3 {
        return Err(DiscretizeError::SupportMismatch { outside });
    }
    if !(inside > 0.0) {
        return Err(DiscretizeError::SupportMismatch { outside: 1.0 });
    }
    let mut masses: Vec<f64> = cdf.windows(2).map(|w| (w[1] - w[0]).max(0.0)).collect();
    if !truncate {
        let n = masses.len();
        masses[0] += cdf[0];
        masses[n - 1] += 1.0 - cdf[n];
    }
    let total: f64 = masses.iter().sum();
    masses.iter_mut().for_each(|m| *m /= total);
    Ok(masses)
}

/// FNV-1a, used to give each node its own random stream.
fn stream_key(name: &str) -> u64 {
    name.bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| {
        (h ^ u64::from(b)).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

/// Counter-based stream: the generator for a cell depends only on the
/// seed, the node and the cell index, never on evaluation order.
fn cell_rng(seed: u64, node: &str, cell: usize) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&stream_key(node).to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(cell as u64);
    rng
}

/// Synthesizes `p(child | parents)` for `child = f(parents, aux) ∘ noise`.
///
/// `f` receives one value per parent (categorical parents as their state
/// index) followed by one draw per auxiliary law. Child mass beyond the
/// bin range lands in the boundary bins.
#[allow(clippy::too_many_arguments)]
pub fn functional_cpt<F>(
    child_id: &str,
    child: &Binning,
    parents: &[ParentAxis],
    auxiliary: &[Distribution],
    noise: &NoiseSelector,
    f: F,
    cfg: &SynthesisConfig,
) -> Result<ConditionalTable, DiscretizeError>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    if cfg.samples_per_cell == 0 {
        return Err(DiscretizeError::InvalidParameter("samples per cell must be at least 1".into()));
    }
    match noise {
        NoiseSelector::Fixed(m) => m.validate()?,
        NoiseSelector::ByParent { parent, models } => {
            match parents.get(*parent) {
                Some(ParentAxis::Categorical(n)) if *n == models.len() => {}
                _ => {
                    return Err(DiscretizeError::InvalidParameter(
                        "noise selector must name a categorical parent with one model per state".into(),
                    ))
                }
            }
            for m in models {
                m.validate()?;
            }
        }
    }

    let cards: Vec<usize> = parents.iter().map(ParentAxis::len).collect();
    let rows: usize = cards.iter().product();
    let sampled_dims = parents.iter().filter(|p| matches!(p, ParentAxis::Interval(_))).count() + auxiliary.len();
    let samples = if sampled_dims == 0 { 1 } else { cfg.samples_per_cell };

    let table: Result<Vec<Vec<f64>>, DiscretizeError> = (0..rows)
        .into_par_iter()
        .map(|row| {
            let mut coords = vec![0usize; cards.len()];
            let mut r = row;
            for k in (0..cards.len()).rev() {
                coords[k] = r % cards[k];
                r /= cards[k];
            }
            let model = noise.pick(&coords);
            let support = noise_support(model);

            // stratum assignment per sampled dimension
            let strata: Vec<Vec<usize>> = if sampled_dims <= 1 {
                vec![(0..samples).collect(); sampled_dims]
            } else {
                let mut rng = cell_rng(cfg.seed, child_id, row);
                (0..sampled_dims)
                    .map(|d| {
                        let mut s: Vec<usize> = (0..samples).collect();
                        if d > 0 {
                            s.shuffle(&mut rng);
                        }
                        s
                    })
                    .collect()
            };

            let mut mass = vec![0.0; child.len()];
            let mut cdf = vec![0.0; child.len() + 1];
            let mut values = vec![0.0; parents.len() + auxiliary.len()];
            let n = samples as f64;
            // `s` indexes one column across every stratum row.
            #[allow(clippy::needless_range_loop)]
            for s in 0..samples {
                let mut dim = 0;
                for (k, p) in parents.iter().enumerate() {
                    values[k] = match p {
                        ParentAxis::Categorical(_) => coords[k] as f64,
                        ParentAxis::Interval(b) => {
                            let (lo, hi) = b.bounds(coords[k]);
                            let u = (strata[dim][s] as f64 + 0.5) / n;
                            dim += 1;
                            lo + u * (hi - lo)
                        }
                    };
                }
                for (a, law) in auxiliary.iter().enumerate() {
                    let u = (strata[dim][s] as f64 + 0.5) / n;
                    dim += 1;
                    values[parents.len() + a] = law.quantile(u);
                }
                let y = f(&values);
                if !y.is_finite() {
                    return Err(DiscretizeError::DegenerateCell {
                        node: child_id.to_string(),
                        cell: coords.clone(),
                    });
                }
                spread(child, model, support, y, &mut cdf);
                for (m, w) in mass.iter_mut().zip(cdf.windows(2)) {
                    *m += (w[1] - w[0]).max(0.0);
                }
            }
            let total: f64 = mass.iter().sum();
            mass.iter_mut().for_each(|m| *m /= total);
            Ok(mass)
        })
        .collect();

    Ok(ConditionalTable::new(child_id, table?.concat()))
}

fn noise_support(model: &NoiseModel) -> (f64, f64) {
    match &model.error {
        Some(d) if model.kind != NoiseKind::None => (d.quantile(NOISE_TAIL), d.quantile(1.0 - NOISE_TAIL)),
        _ => (0.0, 0.0),
    }
}

/// Writes `P(child < edge)` for every edge into `cdf`, with the outermost
/// entries pinned to 0 and 1 so boundary bins absorb the tails.
fn spread(child: &Binning, model: &NoiseModel, (tail_lo, tail_hi): (f64, f64), y: f64, cdf: &mut [f64]) {
    let edges = child.edges();
    let last = edges.len() - 1;
    cdf[0] = 0.0;
    cdf[last] = 1.0;
    let step = |cdf: &mut [f64], at: f64| {
        for (k, &e) in edges.iter().enumerate().take(last).skip(1) {
            cdf[k] = if e > at { 1.0 } else { 0.0 };
        }
    };
    match (model.kind, &model.error) {
        (NoiseKind::None, _) | (_, None) => {
            // a point mass at y, placed by the same rule as Binning::locate
            let k = child.locate_clamped(y);
            for (j, c) in cdf.iter_mut().enumerate().take(last).skip(1) {
                *c = if j > k { 1.0 } else { 0.0 };
            }
        }
        (NoiseKind::Additive, Some(d)) => {
            let (a, b) = (y + tail_lo, y + tail_hi);
            for k in 1..last {
                let e = edges[k];
                cdf[k] = if e <= a {
                    0.0
                } else if e >= b {
                    1.0
                } else {
                    d.cdf(e - y)
                };
            }
        }
        (NoiseKind::Multiplicative, Some(d)) => {
            if y == 0.0 {
                step(cdf, 0.0);
            } else if y > 0.0 {
                let (a, b) = (y * tail_lo, y * tail_hi);
                for k in 1..last {
                    let e = edges[k];
                    cdf[k] = if e <= a {
                        0.0
                    } else if e >= b {
                        1.0
                    } else {
                        d.cdf(e / y)
                    };
                }
            } else {
                for k in 1..last {
                    cdf[k] = 1.0 - d.cdf(edges[k] / y);
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> SynthesisConfig {
        SynthesisConfig::default()
    }

    #[test]
    fn uniform_into_unit_bins() {
        let p = prior_table(
            &Distribution::uniform(0.0, 10.0).unwrap(),
            &Binning::uniform(0.0, 10.0, 10).unwrap(),
            true,
        )
        .unwrap();
        for m in p {
            assert!((m - 0.1).abs() < 1e-15);
        }
    }

    #[test]
    fn support_mismatch_without_truncation() {
        let err = prior_table(
            &Distribution::normal(0.0, 1.0).unwrap(),
            &Binning::uniform(-1.0, 1.0, 4).unwrap(),
            false,
        )
        .unwrap_err();
        assert!(matches!(err, DiscretizeError::SupportMismatch { .. }));
        // tiny tails are folded into the boundary bins instead
        let p = prior_table(
            &Distribution::normal(0.0, 1.0).unwrap(),
            &Binning::new(vec![-6.0, 0.0, 6.0]).unwrap(),
            false,
        )
        .unwrap();
        assert!((p[0] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn additive_noise_around_zero_splits_evenly() {
        let child = Binning::new(vec![-8.0, 0.0, 8.0]).unwrap();
        let t = functional_cpt(
            "X",
            &child,
            &[ParentAxis::Categorical(2)],
            &[],
            &NoiseModel::additive(Distribution::normal(0.0, 1.0).unwrap()).into(),
            |_| 0.0,
            &cfg(),
        )
        .unwrap();
        assert_eq!(t.values, vec![0.5, 0.5, 0.5, 0.5]);
    }

    #[test]
    fn identity_without_noise_splits_cell() {
        let parent = Binning::uniform(0.0, 1.0, 2).unwrap();
        let child = Binning::new(vec![0.0, 0.25, 0.5, 1.0]).unwrap();
        let t = functional_cpt(
            "Y",
            &child,
            &[ParentAxis::Interval(parent)],
            &[],
            &NoiseModel::none().into(),
            |v| v[0],
            &cfg(),
        )
        .unwrap();
        assert_eq!(t.row(0, 3), &[0.5, 0.5, 0.0]);
        assert_eq!(t.row(1, 3), &[0.0, 0.0, 1.0]);
    }

    #[test]
    fn doubling_pushes_uniform_cell_forward() {
        let parent = Binning::new(vec![0.0, 1.0, 2.0]).unwrap();
        let child = Binning::uniform(0.0, 8.0, 8).unwrap();
        let t = functional_cpt(
            "Y",
            &child,
            &[ParentAxis::Interval(parent)],
            &[],
            &NoiseModel::none().into(),
            |v| 2.0 * v[0],
            &cfg(),
        )
        .unwrap();
        assert_eq!(t.row(1, 8), &[0.0, 0.0, 0.5, 0.5, 0.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn out_of_range_values_clamp_to_boundary_bins() {
        let t = functional_cpt(
            "Y",
            &Binning::uniform(0.0, 2.0, 2).unwrap(),
            &[ParentAxis::Categorical(2)],
            &[],
            &NoiseModel::none().into(),
            |v| if v[0] == 0.0 { -5.0 } else { 50.0 },
            &cfg(),
        )
        .unwrap();
        assert_eq!(t.values, vec![1.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn multiplicative_median_split() {
        // degenerate parent at 5.0 sitting on an edge: half the mass either side
        let child = Binning::uniform(0.0, 10.0, 10).unwrap();
        let noise = NoiseModel::multiplicative(Distribution::lognormal_median_cov(1.0, 0.1).unwrap()).unwrap();
        let t = functional_cpt(
            "Z",
            &child,
            &[ParentAxis::Categorical(2)],
            &[],
            &noise.into(),
            |_| 5.0,
            &cfg(),
        )
        .unwrap();
        let row = t.row(0, 10);
        let below: f64 = row[..5].iter().sum();
        assert!((below - 0.5).abs() < 1e-12);
    }

    #[test]
    fn multiplicative_noise_requires_positive_support() {
        assert!(NoiseModel::multiplicative(Distribution::normal(1.0, 0.1).unwrap()).is_err());
    }

    #[test]
    fn non_finite_function_flags_cell() {
        let err = functional_cpt(
            "W",
            &Binning::uniform(0.0, 2.0, 2).unwrap(),
            &[ParentAxis::Interval(Binning::uniform(0.0, 2.0, 2).unwrap())],
            &[],
            &NoiseModel::none().into(),
            |v| if v[0] > 1.0 { f64::NAN } else { 0.5 },
            &cfg(),
        )
        .unwrap_err();
        assert_eq!(
            err,
            DiscretizeError::DegenerateCell {
                node: "W".into(),
                cell: vec![1]
            }
        );
    }

    #[test]
    fn selector_switches_noise_by_quality() {
        let good = NoiseModel::additive(Distribution::normal(0.0, 0.5).unwrap());
        let poor = NoiseModel::additive(Distribution::normal(0.0, 3.0).unwrap());
        let t = functional_cpt(
            "Q",
            &Binning::new(vec![-10.0, -1.0, 1.0, 10.0]).unwrap(),
            &[ParentAxis::Categorical(2)],
            &[],
            &NoiseSelector::ByParent { parent: 0, models: vec![good, poor] },
            |_| 0.0,
            &cfg(),
        )
        .unwrap();
        assert!(t.row(0, 3)[1] > 0.95);
        assert!(t.row(1, 3)[1] < 0.3);
    }

    #[test]
    fn seeded_synthesis_is_reproducible() {
        let run = || {
            functional_cpt(
                "P",
                &Binning::uniform(0.0, 4.0, 16).unwrap(),
                &[
                    ParentAxis::Interval(Binning::uniform(0.0, 2.0, 4).unwrap()),
                    ParentAxis::Interval(Binning::uniform(0.0, 2.0, 4).unwrap()),
                ],
                &[Distribution::normal(1.0, 0.05).unwrap()],
                &NoiseModel::none().into(),
                |v| v[0] * v[2] + v[1],
                &SynthesisConfig { samples_per_cell: 64, seed: 7 },
            )
            .unwrap()
        };
        let (a, b) = (run(), run());
        assert!(a.values.iter().zip(&b.values).all(|(x, y)| x.to_bits() == y.to_bits()));
    }
}
