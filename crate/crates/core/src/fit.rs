//! Least-squares slopes and window-split growth exponents.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual.
    pub rms: f64,
}

pub fn linear_fit(x: &[f64], y: &[f64]) -> Result<LinearFit> {
    let m = x.len();
    if m < 2 || y.len() != m {
        return Err(Error::InsufficientWindow(format!(
            "need at least 2 matching samples, got {m}"
        )));
    }
    let mx = x.iter().sum::<f64>() / m as f64;
    let my = y.iter().sum::<f64>() / m as f64;
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::InsufficientWindow("abscissae coincide".into()));
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rms = (x
        .iter()
        .zip(y)
        .map(|(a, b)| (b - intercept - slope * a).powi(2))
        .sum::<f64>()
        / m as f64)
        .sqrt();
    Ok(LinearFit { slope, intercept, rms })
}

/// Tolerance beyond which the window split is considered to disagree.
pub const SPLIT_TOLERANCE: f64 = 0.05;

/// Fitted scaling exponent with its window and window-split variants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthEstimate {
    /// Headline exponent: the full-window slope, or `sup` when the window
    /// split disagrees by more than [`SPLIT_TOLERANCE`].
    pub exponent: f64,
    /// Full-window least-squares slope.
    pub full_exponent: f64,
    pub sup_exponent: f64,
    pub inf_exponent: f64,
    pub window: [f64; 2],
    pub residual: f64,
    pub low_confidence: bool,
}

/// Growth exponent of `y` against `x` (both already logarithmic) over radii
/// `radii`; the split variants are the slopes on the first and last thirds.
pub fn growth_estimate(radii: &[f64], x: &[f64], y: &[f64]) -> Result<GrowthEstimate> {
    let full = linear_fit(x, y)?;
    let m = x.len();
    let third = (m / 3).max(2);
    let mut slopes = vec![full.slope];
    if m >= 4 {
        slopes.push(linear_fit(&x[..third], &y[..third])?.slope);
        slopes.push(linear_fit(&x[m - third..], &y[m - third..])?.slope);
    }
    let sup = slopes.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let inf = slopes.iter().copied().fold(f64::INFINITY, f64::min);
    let r_lo = radii.iter().copied().fold(f64::INFINITY, f64::min);
    let r_hi = radii.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exponent = if sup - inf > SPLIT_TOLERANCE { sup } else { full.slope };
    Ok(GrowthEstimate {
        exponent,
        full_exponent: full.slope,
        sup_exponent: sup,
        inf_exponent: inf,
        window: [r_lo, r_hi],
        residual: full.rms,
        low_confidence: (r_hi / r_lo).log10() < 2.0,
    })
}

/// `count` geometric radii from `lo` to `hi` inclusive.
pub fn geometric_radii(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..count)
        .map(|i| {
            if i == 0 {
                lo
            } else if i + 1 == count {
                hi
            } else {
                (a + (b - a) * i as f64 / (count - 1) as f64).exp()
            }
        })
        .collect()
}
