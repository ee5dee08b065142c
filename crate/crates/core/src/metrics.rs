//! Comparison of attribution maps against ground truth.

use alloc::vec;
use alloc::vec::Vec;

use crate::ground_truth::ResponsibilityMap;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MetricError {
    #[error("score {index} is not finite")]
    NonFinite { index: usize },
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("ground truth has no non-zero entry")]
    EmptyGroundTruth,
    #[error("no values to aggregate")]
    Empty,
}

/// Non-negative weights summing to 1.
#[derive(Debug, Clone, PartialEq)]
pub struct Distribution(Vec<f64>);

impl Distribution {
    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Absolute scores divided by their L1 norm; uniform when the norm is 0.
pub fn normalize(scores: &[f64]) -> Result<Distribution, MetricError> {
    if let Some(index) = scores.iter().position(|v| !v.is_finite()) {
        return Err(MetricError::NonFinite { index });
    }
    let total: f64 = scores.iter().map(|v| v.abs()).sum();
    if total > 0.0 && total.is_finite() {
        Ok(Distribution(scores.iter().map(|v| v.abs() / total).collect()))
    } else if total > 0.0 {
        // Overflowing sum: rescale by the largest magnitude first.
        let max = scores.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let scaled: Vec<f64> = scores.iter().map(|v| v / max).collect();
        normalize(&scaled)
    } else {
        let n = scores.len();
        Ok(Distribution(vec![1.0 / n as f64; n]))
    }
}

/// Ground truth as a distribution.
pub fn normalize_ground_truth(gt: &ResponsibilityMap) -> Distribution {
    normalize(&gt.to_f64()).expect("responsibilities are finite")
}

fn half_kl_term(p: f64, m: f64) -> f64 {
    if p > 0.0 {
        p * libm::log2(p / m)
    } else {
        0.0
    }
}

/// Jensen-Shannon divergence with base-2 logarithms, in `[0, 1]`.
pub fn jsd(p: &Distribution, q: &Distribution) -> Result<f64, MetricError> {
    if p.len() != q.len() {
        return Err(MetricError::LengthMismatch {
            left: p.len(),
            right: q.len(),
        });
    }
    let total: f64 = p
        .0
        .iter()
        .zip(&q.0)
        .map(|(&a, &b)| {
            let m = 0.5 * (a + b);
            half_kl_term(a, m) + half_kl_term(b, m)
        })
        .sum();
    Ok((0.5 * total).clamp(0.0, 1.0))
}

/// True when the `k = |support(gt)|` largest `|score|` positions are exactly
/// the support of `gt`, with every support score strictly above every other
/// score.
pub fn topk_perfect_overlap(scores: &[f64], gt: &ResponsibilityMap) -> Result<bool, MetricError> {
    if scores.len() != gt.width() {
        return Err(MetricError::LengthMismatch {
            left: scores.len(),
            right: gt.width(),
        });
    }
    if let Some(index) = scores.iter().position(|v| !v.is_finite()) {
        return Err(MetricError::NonFinite { index });
    }
    let relevant = gt.support();
    if relevant.is_empty() {
        return Err(MetricError::EmptyGroundTruth);
    }
    let mut inside = f64::INFINITY;
    let mut outside = f64::NEG_INFINITY;
    for (i, s) in scores.iter().enumerate() {
        let s = s.abs();
        if gt.get(i).is_some_and(|r| !r.is_zero()) {
            inside = inside.min(s);
        } else {
            outside = outside.max(s);
        }
    }
    Ok(inside > outside)
}

/// Mean, sample standard deviation and normal 95% interval half-width.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AggregateStat {
    pub mean: f64,
    pub std: f64,
    pub ci95_half_width: f64,
    pub n: usize,
}

pub fn aggregate(xs: &[f64]) -> Result<AggregateStat, MetricError> {
    let n = xs.len();
    if n == 0 {
        return Err(MetricError::Empty);
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    let std = if n == 1 {
        0.0
    } else {
        let ss: f64 = xs.iter().map(|x| (x - mean) * (x - mean)).sum();
        libm::sqrt(ss / (n - 1) as f64)
    };
    Ok(AggregateStat {
        mean,
        std,
        ci95_half_width: 1.96 * std / libm::sqrt(n as f64),
        n,
    })
}
