//! Posterior summaries in the shape served to clients.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::bn::State;
use crate::model::nodes::{D_V, IHB};
use crate::model::GroundingModel;

/// Posterior of one node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeReport {
    pub node: String,
    pub labels: Vec<String>,
    /// Bin edges of a continuous node; empty for a categorical one.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub edges: Vec<f64>,
    pub masses: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mean: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sd: Option<f64>,
    /// Index of the most probable state.
    pub mode: usize,
    /// `P(X >= edge)` for each interior edge of a continuous node.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub exceedance: Vec<Exceedance>,
    /// `P(IHB = yes)`, reported alongside the vertical extent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inner_bottom_breach: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Exceedance {
    pub threshold: f64,
    pub probability: f64,
}

impl NodeReport {
    /// Summary of `masses` over the states of `node` in `model`.
    pub fn new(model: &GroundingModel, node: &str, masses: &[f64]) -> Self {
        let states = model.network().node(node).map(|n| n.states.clone()).unwrap_or_default();
        let labels = match (node, model.network().node(node)) {
            (D_V, Some(_)) if model.spec().vertical_labels.len() == masses.len() => model.spec().vertical_labels.clone(),
            _ => states.iter().map(State::to_string).collect(),
        };
        let edges = model.binning(node).map(|b| b.edges().to_vec()).unwrap_or_default();
        let mode = masses
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map_or(0, |(i, _)| i);
        let (mean, sd, exceedance) = if edges.len() == masses.len() + 1 {
            let (mean, sd) = moments(&edges, masses);
            let mut tail = 1.0;
            let exceed = edges[1..edges.len() - 1]
                .iter()
                .zip(masses)
                .map(|(&threshold, p)| {
                    tail -= p;
                    Exceedance {
                        threshold,
                        probability: tail.max(0.0),
                    }
                })
                .collect();
            (Some(mean), Some(sd), exceed)
        } else {
            (None, None, Vec::new())
        };
        NodeReport {
            node: node.to_string(),
            labels,
            edges,
            masses: masses.to_vec(),
            mean,
            sd,
            mode,
            exceedance,
            inner_bottom_breach: None,
        }
    }

    /// Lower and upper edge of the modal bin.
    pub fn mode_interval(&self) -> Option<(f64, f64)> {
        (self.edges.len() > self.mode + 1).then(|| (self.edges[self.mode], self.edges[self.mode + 1]))
    }

    /// Probability mass on `[lo, hi]`, counting whole bins that lie inside it.
    pub fn mass_between(&self, lo: f64, hi: f64) -> f64 {
        self.edges
            .windows(2)
            .zip(&self.masses)
            .filter(|(w, _)| w[0] >= lo - 1e-9 && w[1] <= hi + 1e-9)
            .map(|(_, p)| p)
            .sum()
    }

    /// Mass of the state labeled `label`.
    pub fn mass_of(&self, label: &str) -> Option<f64> {
        self.labels.iter().position(|l| l == label).map(|i| self.masses[i])
    }
}

/// Mean and standard deviation of a histogram with mass at bin midpoints.
pub fn moments(edges: &[f64], masses: &[f64]) -> (f64, f64) {
    let mids: Vec<f64> = edges.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
    let total: f64 = masses.iter().sum();
    let mean = mids.iter().zip(masses).map(|(x, p)| x * p).sum::<f64>() / total;
    let var = mids.iter().zip(masses).map(|(x, p)| p * (x - mean).powi(2)).sum::<f64>() / total;
    (mean, var.max(0.0).sqrt())
}

/// Posteriors of the requested nodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PosteriorReport {
    pub nodes: BTreeMap<String, NodeReport>,
}

impl PosteriorReport {
    /// Reports `nodes` out of `marginals`, attaching `P(IHB = yes)` to `D_v`
    /// when IHB is among the marginals.
    pub fn new(model: &GroundingModel, marginals: &BTreeMap<String, Vec<f64>>, nodes: &[String]) -> Self {
        let breach = marginals.get(IHB).map(|m| m[0]);
        let nodes = nodes
            .iter()
            .filter_map(|n| marginals.get(n).map(|m| (n, m)))
            .map(|(n, m)| {
                let mut r = NodeReport::new(model, n, m);
                if n == D_V {
                    r.inner_bottom_breach = breach;
                }
                (n.clone(), r)
            })
            .collect();
        PosteriorReport { nodes }
    }

    pub fn get(&self, node: &str) -> Option<&NodeReport> {
        self.nodes.get(node)
    }

    /// `node,lo,hi,label,mass` rows for every reported state.
    pub fn histogram_csv(&self) -> String {
        let mut out = String::from("node,lo,hi,label,mass\n");
        for r in self.nodes.values() {
            for (i, p) in r.masses.iter().enumerate() {
                let (lo, hi) = if r.edges.len() > i + 1 {
                    (r.edges[i].to_string(), r.edges[i + 1].to_string())
                } else {
                    (String::new(), String::new())
                };
                out.push_str(&format!("{},{lo},{hi},{},{p}\n", r.node, r.labels[i]));
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn moments_of_a_two_bin_histogram() {
        let (m, s) = moments(&[0.0, 2.0, 4.0], &[0.5, 0.5]);
        assert!((m - 2.0).abs() < 1e-12);
        assert!((s - 1.0).abs() < 1e-12);
    }
}
