use serde::{Deserialize, Serialize};

use super::DiscretizeError;
use crate::bn::State;

/// How a continuous range is cut into interval states.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BinningPolicy {
    /// Bins of fixed width from `lo`; the last bin ends at `hi` and may be narrower.
    Width { lo: f64, hi: f64, width: f64 },
    /// `count` equal bins over `[lo, hi]`.
    Count { lo: f64, hi: f64, count: usize },
    Edges { edges: Vec<f64> },
}

impl BinningPolicy {
    pub fn resolve(&self) -> Result<Binning, DiscretizeError> {
        match *self {
            BinningPolicy::Width { lo, hi, width } => {
                if !(width > 0.0) || !width.is_finite() {
                    return Err(DiscretizeError::InvalidBinning(format!("bin width {width} must be positive")));
                }
                let span = hi - lo;
                let mut count = (span / width).ceil() as usize;
                // absorb floating-point slivers such as 60/1 = 60.000000001
                if count > 1 && lo + (count - 1) as f64 * width >= hi - 1e-9 * width {
                    count -= 1;
                }
                let mut edges: Vec<f64> = (0..count).map(|i| lo + i as f64 * width).collect();
                edges.push(hi);
                Binning::new(edges)
            }
            BinningPolicy::Count { lo, hi, count } => Binning::uniform(lo, hi, count),
            BinningPolicy::Edges { ref edges } => Binning::new(edges.clone()),
        }
    }
}

/// Resolved, strictly ascending bin edges.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Binning {
    edges: Vec<f64>,
}

impl Binning {
    pub fn new(edges: Vec<f64>) -> Result<Self, DiscretizeError> {
        if edges.len() < 3 {
            return Err(DiscretizeError::InvalidBinning("at least two bins are required".into()));
        }
        if edges.iter().any(|e| !e.is_finite()) || edges.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(DiscretizeError::InvalidBinning(
                "edges must be finite and strictly ascending".into(),
            ));
        }
        Ok(Binning { edges })
    }

    pub fn uniform(lo: f64, hi: f64, count: usize) -> Result<Self, DiscretizeError> {
        if count < 2 || !(hi > lo) {
            return Err(DiscretizeError::InvalidBinning(format!(
                "{count} bins over [{lo}, {hi}]"
            )));
        }
        let w = (hi - lo) / count as f64;
        let mut edges: Vec<f64> = (0..count).map(|i| lo + i as f64 * w).collect();
        edges.push(hi);
        Binning::new(edges)
    }

    pub fn edges(&self) -> &[f64] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.edges.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn lo(&self) -> f64 {
        self.edges[0]
    }

    pub fn hi(&self) -> f64 {
        *self.edges.last().unwrap()
    }

    pub fn bounds(&self, i: usize) -> (f64, f64) {
        (self.edges[i], self.edges[i + 1])
    }

    pub fn midpoints(&self) -> Vec<f64> {
        self.edges.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
    }

    /// Bin holding `x`; the upper end of the range belongs to the last bin.
    pub fn locate(&self, x: f64) -> Option<usize> {
        if !(x >= self.lo() && x <= self.hi()) {
            return None;
        }
        Some(self.locate_clamped(x))
    }

    /// Like [`Binning::locate`] but sends out-of-range values to the boundary bins.
    pub fn locate_clamped(&self, x: f64) -> usize {
        let k = self.edges.partition_point(|&e| e <= x);
        k.clamp(1, self.len()) - 1
    }

    pub fn states(&self) -> Vec<State> {
        self.edges
            .windows(2)
            .map(|w| State::Interval { lo: w[0], hi: w[1] })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn width_policy_covers_range() {
        let b = BinningPolicy::Width { lo: 0.0, hi: 60.0, width: 1.0 }.resolve().unwrap();
        assert_eq!(b.len(), 60);
        assert_eq!(b.hi(), 60.0);
        let b = BinningPolicy::Width { lo: 0.0, hi: 52.4, width: 1.0 }.resolve().unwrap();
        assert_eq!(b.len(), 53);
        assert_eq!(b.bounds(52), (52.0, 52.4));
    }

    #[test]
    fn locate_is_half_open_with_closed_top() {
        let b = Binning::uniform(0.0, 4.0, 4).unwrap();
        assert_eq!(b.locate(0.0), Some(0));
        assert_eq!(b.locate(1.0), Some(1));
        assert_eq!(b.locate(3.999), Some(3));
        assert_eq!(b.locate(4.0), Some(3));
        assert_eq!(b.locate(4.1), None);
        assert_eq!(b.locate(-0.1), None);
        assert_eq!(b.locate_clamped(-7.0), 0);
        assert_eq!(b.locate_clamped(9.0), 3);
    }

    #[test]
    fn bad_edges_rejected() {
        assert!(Binning::new(vec![0.0, 1.0]).is_err());
        assert!(Binning::new(vec![0.0, 2.0, 1.0]).is_err());
        assert!(Binning::uniform(0.0, 1.0, 1).is_err());
    }
}
