use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Significance level for the uniformity tests.
pub const CHI_SQUARE_ALPHA: f64 = 1e-3;

/// Empirical frequency against an expected probability, with 3-sigma bounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinomialCheck {
    pub trials: u64,
    pub hits: u64,
    pub frequency: f64,
    pub expected: f64,
    pub sigma: f64,
    pub lower: f64,
    pub upper: f64,
    pub within: bool,
}

pub fn binomial_check(hits: u64, trials: u64, expected: f64) -> BinomialCheck {
    let n = trials.max(1) as f64;
    let frequency = hits as f64 / n;
    let sigma = (expected * (1.0 - expected) / n).sqrt();
    let lower = (expected - 3.0 * sigma).max(0.0);
    let upper = (expected + 3.0 * sigma).min(1.0);
    BinomialCheck {
        trials,
        hits,
        frequency,
        expected,
        sigma,
        lower,
        upper,
        within: frequency >= lower && frequency <= upper,
    }
}

/// 3-sigma interval around an observed frequency.
pub fn empirical_interval(hits: u64, trials: u64) -> (f64, f64) {
    let n = trials.max(1) as f64;
    let f = hits as f64 / n;
    let s = (f * (1.0 - f) / n).sqrt();
    ((f - 3.0 * s).max(0.0), (f + 3.0 * s).min(1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChiSquareUniform {
    pub samples: u64,
    pub bins: usize,
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
    pub alpha: f64,
    pub passed: bool,
}

/// Pearson goodness-of-fit of `counts` against the uniform distribution.
pub fn chi_square_uniform(counts: &[u64]) -> ChiSquareUniform {
    let samples: u64 = counts.iter().sum();
    let expected = samples as f64 / counts.len() as f64;
    let statistic = counts
        .iter()
        .map(|&c| {
            let d = c as f64 - expected;
            d * d / expected
        })
        .sum::<f64>();
    let dof = counts.len() - 1;
    let dist = ChiSquared::new(dof as f64).expect("at least two bins");
    let p_value = 1.0 - dist.cdf(statistic);
    ChiSquareUniform {
        samples,
        bins: counts.len(),
        statistic,
        dof,
        p_value,
        alpha: CHI_SQUARE_ALPHA,
        passed: p_value > CHI_SQUARE_ALPHA,
    }
}

/// Least-squares line through `(x, y)`; the residual is the largest
/// `|y - fit| / |y|` over the samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub max_relative_residual: f64,
    pub points: Vec<(f64, f64)>,
}

pub fn linear_fit(points: &[(f64, f64)]) -> LinearFit {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = if sxx == 0.0 { 0.0 } else { sxy / sxx };
    let intercept = my - slope * mx;
    let max_relative_residual = points
        .iter()
        .map(|&(x, y)| {
            let r = (y - (slope * x + intercept)).abs();
            if y == 0.0 {
                r
            } else {
                r / y.abs()
            }
        })
        .fold(0.0, f64::max);
    LinearFit {
        slope,
        intercept,
        max_relative_residual,
        points: points.to_vec(),
    }
}
