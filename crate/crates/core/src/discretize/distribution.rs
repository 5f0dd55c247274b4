use rand::Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{Beta, ContinuousCDF, Normal};

use super::DiscretizeError;

/// A parameterized continuous law.
///
/// Every family exposes a closed-form (or special-function) cdf and
/// quantile; sampling is by inversion so it only needs a uniform stream.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Distribution {
    Uniform { lo: f64, hi: f64 },
    /// Beta(alpha, beta) stretched onto `[lo, hi]`.
    ScaledBeta { alpha: f64, beta: f64, lo: f64, hi: f64 },
    Normal { mean: f64, sd: f64 },
    /// Lognormal given by its median and coefficient of variation.
    LognormalMedianCov { median: f64, cov: f64 },
    /// Exponential with the given rate, truncated to `[lo, hi]`.
    TruncExp { rate: f64, lo: f64, hi: f64 },
    /// Piecewise-uniform density over `edges` with the given bin masses.
    EmpiricalHistogram { edges: Vec<f64>, masses: Vec<f64> },
}

fn invalid(msg: impl Into<String>) -> DiscretizeError {
    DiscretizeError::InvalidParameter(msg.into())
}

fn finite(xs: &[f64]) -> bool {
    xs.iter().all(|x| x.is_finite())
}

/// Validates a distribution description.
pub fn make_distribution(spec: Distribution) -> Result<Distribution, DiscretizeError> {
    spec.validate()?;
    Ok(spec)
}

impl Distribution {
    pub fn uniform(lo: f64, hi: f64) -> Result<Self, DiscretizeError> {
        make_distribution(Distribution::Uniform { lo, hi })
    }

    pub fn scaled_beta(alpha: f64, beta: f64, lo: f64, hi: f64) -> Result<Self, DiscretizeError> {
        make_distribution(Distribution::ScaledBeta { alpha, beta, lo, hi })
    }

    pub fn normal(mean: f64, sd: f64) -> Result<Self, DiscretizeError> {
        make_distribution(Distribution::Normal { mean, sd })
    }

    pub fn lognormal_median_cov(median: f64, cov: f64) -> Result<Self, DiscretizeError> {
        make_distribution(Distribution::LognormalMedianCov { median, cov })
    }

    pub fn trunc_exp(rate: f64, lo: f64, hi: f64) -> Result<Self, DiscretizeError> {
        make_distribution(Distribution::TruncExp { rate, lo, hi })
    }

    /// Truncated exponential on `[lo, hi]` whose mean equals `mean`.
    ///
    /// The truncated mean decreases monotonically from the midpoint (rate
    /// → 0) to `lo` (rate → ∞), so the rate is found by bisection.
    pub fn trunc_exp_with_mean(lo: f64, hi: f64, mean: f64) -> Result<Self, DiscretizeError> {
        let width = hi - lo;
        let target = mean - lo;
        if !(width > 0.0) || !(target > 0.0 && target < width / 2.0) {
            return Err(invalid(format!(
                "truncated exponential mean {mean} must lie strictly between {lo} and the midpoint {}",
                lo + width / 2.0
            )));
        }
        let mean_at = |rate: f64| trunc_exp_moments(rate, width).0;
        let (mut a, mut b) = (1e-12 / width, 1.0 / width);
        while mean_at(b) > target {
            b *= 2.0;
        }
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if mean_at(m) > target {
                a = m;
            } else {
                b = m;
            }
        }
        Self::trunc_exp(0.5 * (a + b), lo, hi)
    }

    pub fn histogram(edges: Vec<f64>, masses: Vec<f64>) -> Result<Self, DiscretizeError> {
        make_distribution(Distribution::EmpiricalHistogram { edges, masses })
    }

    pub fn validate(&self) -> Result<(), DiscretizeError> {
        match self {
            Distribution::Uniform { lo, hi } => {
                if !finite(&[*lo, *hi]) || !(hi > lo) {
                    return Err(invalid(format!("uniform needs hi > lo, got [{lo}, {hi}]")));
                }
            }
            Distribution::ScaledBeta { alpha, beta, lo, hi } => {
                if !finite(&[*alpha, *beta, *lo, *hi]) || !(hi > lo) || !(*alpha > 0.0 && *beta > 0.0) {
                    return Err(invalid("scaled beta needs alpha, beta > 0 and hi > lo"));
                }
            }
            Distribution::Normal { mean, sd } => {
                if !finite(&[*mean, *sd]) || !(*sd > 0.0) {
                    return Err(invalid(format!("normal needs sd > 0, got {sd}")));
                }
            }
            Distribution::LognormalMedianCov { median, cov } => {
                if !finite(&[*median, *cov]) || !(*median > 0.0) || !(*cov > 0.0) {
                    return Err(invalid("lognormal needs median > 0 and cov > 0"));
                }
            }
            Distribution::TruncExp { rate, lo, hi } => {
                if !finite(&[*rate, *lo, *hi]) || !(hi > lo) || !(*rate > 0.0) {
                    return Err(invalid("truncated exponential needs rate > 0 and hi > lo"));
                }
            }
            Distribution::EmpiricalHistogram { edges, masses } => {
                if edges.len() < 2 || masses.len() + 1 != edges.len() {
                    return Err(invalid("histogram needs n+1 edges for n masses"));
                }
                if !finite(edges) || edges.windows(2).any(|w| !(w[1] > w[0])) {
                    return Err(invalid("histogram edges must be finite and strictly ascending"));
                }
                if masses.iter().any(|m| !(*m >= 0.0)) {
                    return Err(invalid("histogram masses must be nonnegative"));
                }
                let total: f64 = masses.iter().sum();
                if (total - 1.0).abs() > 1e-12 {
                    return Err(invalid(format!("histogram masses sum to {total}, not 1")));
                }
            }
        }
        Ok(())
    }

    /// Sigma and mu of the underlying normal of a lognormal law.
    fn log_params(median: f64, cov: f64) -> (f64, f64) {
        (median.ln(), (1.0 + cov * cov).ln().sqrt())
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match self {
            Distribution::Uniform { lo, hi } => ((x - lo) / (hi - lo)).clamp(0.0, 1.0),
            Distribution::ScaledBeta { alpha, beta, lo, hi } => {
                let u = (x - lo) / (hi - lo);
                if u <= 0.0 {
                    0.0
                } else if u >= 1.0 {
                    1.0
                } else {
                    beta_law(*alpha, *beta).cdf(u)
                }
            }
            Distribution::Normal { mean, sd } => std_normal().cdf((x - mean) / sd),
            Distribution::LognormalMedianCov { median, cov } => {
                if x <= 0.0 {
                    0.0
                } else {
                    let (mu, sigma) = Self::log_params(*median, *cov);
                    std_normal().cdf((x.ln() - mu) / sigma)
                }
            }
            Distribution::TruncExp { rate, lo, hi } => {
                if x <= *lo {
                    0.0
                } else if x >= *hi {
                    1.0
                } else {
                    (-rate * (x - lo)).exp_m1() / (-rate * (hi - lo)).exp_m1()
                }
            }
            Distribution::EmpiricalHistogram { edges, masses } => {
                if x <= edges[0] {
                    return 0.0;
                }
                let mut acc = 0.0;
                for (i, m) in masses.iter().enumerate() {
                    let (a, b) = (edges[i], edges[i + 1]);
                    if x < b {
                        return (acc + m * (x - a) / (b - a)).min(1.0);
                    }
                    acc += m;
                }
                1.0
            }
        }
    }

    /// Inverse cdf for `p` in `[0, 1]`.
    pub fn quantile(&self, p: f64) -> f64 {
        let p = p.clamp(0.0, 1.0);
        match self {
            Distribution::Uniform { lo, hi } => lo + p * (hi - lo),
            Distribution::ScaledBeta { alpha, beta, lo, hi } => {
                lo + (hi - lo) * beta_law(*alpha, *beta).inverse_cdf(p)
            }
            Distribution::Normal { mean, sd } => mean + sd * std_normal().inverse_cdf(p),
            Distribution::LognormalMedianCov { median, cov } => {
                let (mu, sigma) = Self::log_params(*median, *cov);
                (mu + sigma * std_normal().inverse_cdf(p)).exp()
            }
            Distribution::TruncExp { rate, lo, hi } => {
                lo - (p * (-rate * (hi - lo)).exp_m1()).ln_1p() / rate
            }
            Distribution::EmpiricalHistogram { edges, masses } => {
                let mut acc = 0.0;
                for (i, &m) in masses.iter().enumerate() {
                    if m > 0.0 && acc + m >= p {
                        let t = ((p - acc) / m).clamp(0.0, 1.0);
                        return edges[i] + t * (edges[i + 1] - edges[i]);
                    }
                    acc += m;
                }
                *edges.last().expect("validated")
            }
        }
    }

    pub fn mean(&self) -> f64 {
        match self {
            Distribution::Uniform { lo, hi } => 0.5 * (lo + hi),
            Distribution::ScaledBeta { alpha, beta, lo, hi } => lo + (hi - lo) * alpha / (alpha + beta),
            Distribution::Normal { mean, .. } => *mean,
            Distribution::LognormalMedianCov { median, cov } => median * (1.0 + cov * cov).sqrt(),
            Distribution::TruncExp { rate, lo, hi } => lo + trunc_exp_moments(*rate, hi - lo).0,
            Distribution::EmpiricalHistogram { edges, masses } => masses
                .iter()
                .enumerate()
                .map(|(i, m)| m * 0.5 * (edges[i] + edges[i + 1]))
                .sum(),
        }
    }

    pub fn sd(&self) -> f64 {
        match self {
            Distribution::Uniform { lo, hi } => (hi - lo) / 12f64.sqrt(),
            Distribution::ScaledBeta { alpha, beta, lo, hi } => {
                let s = alpha + beta;
                (hi - lo) * (alpha * beta / (s * s * (s + 1.0))).sqrt()
            }
            Distribution::Normal { sd, .. } => *sd,
            Distribution::LognormalMedianCov { cov, .. } => self.mean() * cov,
            Distribution::TruncExp { rate, lo, hi } => trunc_exp_moments(*rate, hi - lo).1.sqrt(),
            Distribution::EmpiricalHistogram { edges, masses } => {
                let mean = self.mean();
                masses
                    .iter()
                    .enumerate()
                    .map(|(i, m)| {
                        let (a, b) = (edges[i], edges[i + 1]);
                        let mid = 0.5 * (a + b);
                        m * ((b - a).powi(2) / 12.0 + (mid - mean).powi(2))
                    })
                    .sum::<f64>()
                    .sqrt()
            }
        }
    }

    /// Smallest and largest values with nonzero density.
    pub fn support(&self) -> (f64, f64) {
        match self {
            Distribution::Uniform { lo, hi }
            | Distribution::ScaledBeta { lo, hi, .. }
            | Distribution::TruncExp { lo, hi, .. } => (*lo, *hi),
            Distribution::Normal { .. } => (f64::NEG_INFINITY, f64::INFINITY),
            Distribution::LognormalMedianCov { .. } => (0.0, f64::INFINITY),
            Distribution::EmpiricalHistogram { edges, .. } => (edges[0], *edges.last().unwrap()),
        }
    }

    /// Draw by inversion.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.random();
        // keep strictly inside (0, 1) so unbounded families stay finite
        self.quantile(u.clamp(f64::EPSILON, 1.0 - f64::EPSILON))
    }
}

/// Mean and variance of an exponential with `rate` truncated to `[0, width]`.
fn trunc_exp_moments(rate: f64, width: f64) -> (f64, f64) {
    let lw = rate * width;
    let c = -(-lw).exp_m1();
    let e = (-lw).exp();
    let m1 = (1.0 / rate - (width + 1.0 / rate) * e) / c;
    let m2 = (2.0 / (rate * rate) - (width * width + 2.0 * width / rate + 2.0 / (rate * rate)) * e) / c;
    (m1, (m2 - m1 * m1).max(0.0))
}

fn std_normal() -> Normal {
    Normal::standard()
}

fn beta_law(alpha: f64, beta: f64) -> Beta {
    Beta::new(alpha, beta).expect("validated beta parameters")
}
