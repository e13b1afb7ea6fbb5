//! Growth of ball integrals against a power of `R`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::calculus::{gradient, laplacian_power_slice, LaplacianMethod};
use crate::error::{Error, Result};
use crate::fields::{Dimension, ScalarField};
use crate::fit::linear_fit;
use crate::quad::{gauss_legendre, unit_sphere_area, SphereRule};

/// Default gap below the threshold required for `little_o`.
pub const DEFAULT_MARGIN: f64 = 0.25;
/// Slopes this close below the threshold already count as reaching it;
/// absorbs quadrature and finite-window bias.
pub const THRESHOLD_SLACK: f64 = 0.02;
/// Smallest number of samples the classifier accepts.
pub const MIN_SAMPLES: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GrowthClass {
    LittleO,
    NotLittleO,
    Inconclusive,
}

impl GrowthClass {
    pub fn as_str(self) -> &'static str {
        match self {
            GrowthClass::LittleO => "little_o",
            GrowthClass::NotLittleO => "not_little_o",
            GrowthClass::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthVerdict {
    pub fitted_exponent: f64,
    pub threshold: f64,
    pub margin: f64,
    pub verdict: GrowthClass,
    /// Radii of the fitted (upper) half of the samples.
    pub window: [f64; 2],
}

/// Classifies `I(R) = o(R^threshold)` from samples `(R, I(R))` by the slope
/// of `log I` against `log R` over the upper half of the radii.
pub fn growth_classifier(samples: &[(f64, f64)], threshold: f64, margin: f64) -> Result<GrowthVerdict> {
    if samples.len() < MIN_SAMPLES {
        return Err(Error::InsufficientWindow(format!(
            "{} samples; the classifier needs at least {MIN_SAMPLES}",
            samples.len()
        )));
    }
    if let Some(&(r, _)) = samples.iter().find(|(r, _)| !(*r > 0.0) || !r.is_finite()) {
        return Err(Error::Precondition(format!("radius {r} is not positive")));
    }
    if let Some(&(_, v)) = samples.iter().find(|(_, v)| !(*v >= 0.0)) {
        return Err(Error::Precondition(format!("ball integral {v} is negative")));
    }
    let mut s = samples.to_vec();
    s.sort_by(|a, b| a.0.total_cmp(&b.0));
    let window = [s[s.len() / 2].0, s[s.len() - 1].0];
    if s.iter().all(|(_, v)| *v == 0.0) {
        return Ok(GrowthVerdict {
            fitted_exponent: f64::NEG_INFINITY,
            threshold,
            margin,
            verdict: GrowthClass::LittleO,
            window,
        });
    }
    let top = &s[s.len() / 2..];
    if top.iter().any(|(_, v)| *v == 0.0) {
        // vanishing somewhere in the upper window but not everywhere
        return Ok(GrowthVerdict {
            fitted_exponent: f64::NAN,
            threshold,
            margin,
            verdict: GrowthClass::Inconclusive,
            window,
        });
    }
    let x: Vec<f64> = top.iter().map(|(r, _)| r.ln()).collect();
    let y: Vec<f64> = top.iter().map(|(_, v)| v.ln()).collect();
    let slope = linear_fit(&x, &y)?.slope;
    let verdict = if slope <= threshold - margin {
        GrowthClass::LittleO
    } else if slope >= threshold - THRESHOLD_SLACK {
        GrowthClass::NotLittleO
    } else {
        GrowthClass::Inconclusive
    };
    Ok(GrowthVerdict {
        fitted_exponent: slope,
        threshold,
        margin,
        verdict,
        window,
    })
}

/// Radii `2^2, ..., 2^15`.
pub fn dyadic_radii() -> Vec<f64> {
    (2..=15).map(|k| 2f64.powi(k)).collect()
}

/// Sphere rule order used for non-radial ball integrals.
fn sphere_order(n: usize) -> usize {
    match n {
        2 => 32,
        4 => 6,
        _ => 4,
    }
}

/// `int_{B_R} g` for every `R` in `radii` (ascending), accumulated panel by
/// panel: Gauss–Legendre in `r` on `[0, 1]` and in `t = log r` beyond.
pub fn ball_integrals<G>(dim: Dimension, radial: bool, radii: &[f64], g: G) -> Result<Vec<f64>>
where
    G: Fn(&[f64]) -> Result<f64> + Sync,
{
    if radii.iter().any(|r| !(*r > 0.0)) || radii.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Precondition("radii must be positive and increasing".into()));
    }
    let n = dim.get();
    let area = unit_sphere_area(n);
    let rule = if radial {
        None
    } else {
        Some(SphereRule::new(n, sphere_order(n)))
    };
    let shell = |r: f64| -> Result<f64> {
        match &rule {
            None => {
                let mut x = vec![0.0; n];
                x[0] = r;
                g(&x)
            }
            Some(rule) => {
                let mut x = vec![0.0; n];
                rule.mean(|om| {
                    for i in 0..n {
                        x[i] = r * om[i];
                    }
                    g(&x)
                })
            }
        }
    };
    // panel endpoints: r in [0, 1] (linear), then t = log r
    #[derive(Clone, Copy)]
    enum Panel {
        R(f64, f64),
        T(f64, f64),
    }
    let r_max = *radii.last().unwrap_or(&1.0);
    let mut cuts_r: Vec<f64> = vec![0.0, 0.25, 0.5, 0.75, 1.0];
    cuts_r.extend(radii.iter().copied().filter(|r| *r < 1.0));
    cuts_r.retain(|r| *r <= r_max);
    if !cuts_r.contains(&r_max) && r_max < 1.0 {
        cuts_r.push(r_max);
    }
    cuts_r.sort_by(f64::total_cmp);
    cuts_r.dedup();
    let mut panels: Vec<Panel> = cuts_r.windows(2).map(|w| Panel::R(w[0], w[1])).collect();
    if r_max > 1.0 {
        let t_max = r_max.ln();
        let mut cuts: Vec<f64> = vec![0.0];
        let mut k = 0.5;
        while k < t_max {
            cuts.push(k);
            k += 0.5;
        }
        cuts.extend(radii.iter().filter(|r| **r > 1.0).map(|r| r.ln()));
        cuts.sort_by(f64::total_cmp);
        cuts.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
        panels.extend(cuts.windows(2).map(|w| Panel::T(w[0], w[1])));
    }
    let values = panels
        .par_iter()
        .map(|p| -> Result<(f64, f64)> {
            match *p {
                Panel::R(a, b) => {
                    let gl = gauss_legendre(16);
                    let (h, c) = (0.5 * (b - a), 0.5 * (b + a));
                    let mut s = 0.0;
                    for (x, w) in gl.0.iter().zip(&gl.1) {
                        let r = c + h * x;
                        s += w * shell(r)? * r.powi(n as i32 - 1);
                    }
                    Ok((b, s * h * area))
                }
                Panel::T(a, b) => {
                    let gl = gauss_legendre(8);
                    let (h, c) = (0.5 * (b - a), 0.5 * (b + a));
                    let mut s = 0.0;
                    for (x, w) in gl.0.iter().zip(&gl.1) {
                        let t = c + h * x;
                        s += w * shell(t.exp())? * (n as f64 * t).exp();
                    }
                    Ok((b.exp(), s * h * area))
                }
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let mut out = Vec::with_capacity(radii.len());
    let mut acc = 0.0;
    let mut next = 0;
    for (end, v) in values {
        acc += v;
        while next < radii.len() && (end - radii[next]).abs() <= 1e-9 * radii[next] {
            out.push(acc);
            next += 1;
        }
    }
    if out.len() != radii.len() {
        return Err(Error::Domain("ball integral panels do not end on every radius".into()));
    }
    Ok(out)
}

fn require_n4(dim: Dimension, what: &str) -> Result<()> {
    if dim.get() < 4 {
        return Err(Error::UnsupportedDimension {
            n: dim.get(),
            msg: format!("{what} is stated for n >= 4"),
        });
    }
    Ok(())
}

fn classify(
    dim: Dimension,
    radial: bool,
    radii: &[f64],
    threshold: f64,
    g: impl Fn(&[f64]) -> Result<f64> + Sync,
) -> Result<GrowthVerdict> {
    let vals = ball_integrals(dim, radial, radii, g)?;
    let samples: Vec<(f64, f64)> = radii.iter().copied().zip(vals).collect();
    growth_classifier(&samples, threshold, DEFAULT_MARGIN)
}

/// `int_{B_R} |Δw| = o(R^n)`.
pub fn normality_condition_a(w: &ScalarField, radii: &[f64]) -> Result<GrowthVerdict> {
    require_n4(w.dim(), "condition (a)")?;
    laplacian_growth(w, radii)
}

/// `int_{B_R} |Δu|` against `R^n` without the dimension gate.
pub fn laplacian_growth(w: &ScalarField, radii: &[f64]) -> Result<GrowthVerdict> {
    let n = w.dim().get() as f64;
    classify(w.dim(), w.is_radial(), radii, n, |x| {
        Ok(laplacian_power_slice(w, x, 1, LaplacianMethod::Auto)?.abs())
    })
}

/// `int_{B_R} |w| = o(R^{n+2})`.
pub fn normality_condition_b(w: &ScalarField, radii: &[f64]) -> Result<GrowthVerdict> {
    require_n4(w.dim(), "condition (b)")?;
    let n = w.dim().get() as f64;
    classify(w.dim(), w.is_radial(), radii, n + 2.0, |x| Ok(w.eval_slice(x)?.abs()))
}

/// `int_{B_R} R_g^- e^{2u} = o(R^n)`.
pub fn normality_scalar_criterion(u: &ScalarField, radii: &[f64]) -> Result<GrowthVerdict> {
    require_n4(u.dim(), "the scalar curvature criterion")?;
    let n = u.dim().get() as f64;
    classify(u.dim(), u.is_radial(), radii, n, |x| {
        // R_g^- e^{2u} = 2(n-1) max(Δu + (n-2)/2 |∇u|^2, 0)
        let lap = laplacian_power_slice(u, x, 1, LaplacianMethod::Auto)?;
        let g = gradient(u, x)?;
        let g2: f64 = g.iter().map(|v| v * v).sum();
        Ok(2.0 * (n - 1.0) * (lap + 0.5 * (n - 2.0) * g2).max(0.0))
    })
}
