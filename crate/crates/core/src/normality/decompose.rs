//! Least-squares split `w = L(f) + P` with `P` a polynomial.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::calculus::poly::{monomials_up_to, MultiIndex};
use crate::calculus::Polynomial;
use crate::error::{Error, Result};
use crate::fields::{random_unit, Dimension, ScalarField};
use crate::fit::geometric_radii;
use crate::potential::{PotentialConfig, PotentialEvaluator};

/// Radii per standard sample set.
pub const SAMPLE_RADII: usize = 12;
/// Directions per radius in the standard sample set (raised when needed).
pub const SAMPLE_DIRECTIONS: usize = 8;
/// Radius window of the standard sample set: four decades.
pub const SAMPLE_WINDOW: [f64; 2] = [0.1, 1e3];
/// A coefficient of positive degree is significant beyond this many standard errors...
pub const SIGNIFICANCE: f64 = 10.0;
/// ...and beyond this absolute size.
pub const COEFFICIENT_FLOOR: f64 = 1e-6;
/// Relative rms residual above which the polynomial model is rejected.
pub const RESIDUAL_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleSet {
    pub points: Vec<Vec<f64>>,
    pub radii: Vec<f64>,
    pub directions: usize,
    pub seed: u64,
}

impl SampleSet {
    /// 12 geometric radii over four decades times seeded random directions,
    /// with at least `min_points` points.
    pub fn standard(dim: Dimension, seed: u64, min_points: usize) -> Self {
        let radii = geometric_radii(SAMPLE_WINDOW[0], SAMPLE_WINDOW[1], SAMPLE_RADII);
        let directions = SAMPLE_DIRECTIONS.max(min_points.div_ceil(SAMPLE_RADII));
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut points = Vec::with_capacity(radii.len() * directions);
        for &r in &radii {
            for _ in 0..directions {
                let d = random_unit(dim.get(), &mut rng);
                points.push(d.iter().map(|v| r * v).collect());
            }
        }
        SampleSet {
            points,
            radii,
            directions,
            seed,
        }
    }

    pub fn describe(&self) -> String {
        format!(
            "{} radii in [{}, {}] x {} directions, seed {}",
            self.radii.len(),
            self.radii.first().copied().unwrap_or(0.0),
            self.radii.last().copied().unwrap_or(0.0),
            self.directions,
            self.seed
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Coefficient {
    pub monomial: String,
    pub degree: u32,
    pub value: f64,
    pub std_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Decomposition {
    #[serde(skip)]
    pub polynomial_part: Option<Polynomial>,
    pub coefficients: Vec<Coefficient>,
    pub max_degree: u32,
    /// Root-mean-square residual of the fit.
    pub fit_residual: f64,
    /// `fit_residual / (1 + rms of the fitted data)`.
    pub relative_residual: f64,
    /// Some coefficient of positive degree is significant.
    pub nonconstant: bool,
    /// The residual rejects the polynomial model.
    pub poor_fit: bool,
    pub sample_set: String,
    pub sample_count: usize,
}

impl Decomposition {
    /// `P` is constant and the model fits.
    pub fn is_constant(&self) -> bool {
        !self.nonconstant && !self.poor_fit
    }

    pub fn coefficient(&self, a: &[u32]) -> f64 {
        self.polynomial_part.as_ref().map_or(0.0, |p| p.coeff(a))
    }
}

pub(crate) fn monomial_name(a: &[u32]) -> String {
    let mut parts = Vec::new();
    for (i, e) in a.iter().enumerate() {
        match e {
            0 => {}
            1 => parts.push(format!("x{}", i + 1)),
            _ => parts.push(format!("x{}^{}", i + 1, e)),
        }
    }
    if parts.is_empty() {
        "1".into()
    } else {
        parts.join("*")
    }
}

/// Fits `w - L(f)` in the monomials of degree `<= max_degree`.
pub fn decompose(w: &ScalarField, f: &ScalarField, samples: &SampleSet, max_degree: u32) -> Result<Decomposition> {
    let ev = PotentialEvaluator::new(f, PotentialConfig::default())?;
    decompose_with(w, &ev, samples, max_degree)
}

pub fn decompose_with(
    w: &ScalarField,
    ev: &PotentialEvaluator,
    samples: &SampleSet,
    max_degree: u32,
) -> Result<Decomposition> {
    let dim = w.dim();
    if ev.dim() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim.get(),
            got: ev.dim().get(),
        });
    }
    let basis: Vec<MultiIndex> = monomials_up_to(dim.get(), max_degree);
    let m = samples.points.len();
    let p = basis.len();
    if m < 3 * p {
        return Err(Error::Precondition(format!(
            "{m} samples for {p} monomials; need at least {}",
            3 * p
        )));
    }
    let data = samples
        .points
        .par_iter()
        .map(|x| Ok(w.eval_slice(x)? - ev.eval(x)?))
        .collect::<Result<Vec<f64>>>()?;
    let mut a = DMatrix::<f64>::zeros(m, p);
    for (i, x) in samples.points.iter().enumerate() {
        for (j, mono) in basis.iter().enumerate() {
            a[(i, j)] = mono.iter().zip(x).map(|(e, v)| v.powi(*e as i32)).product();
        }
    }
    // column scaling
    let scales: Vec<f64> = (0..p).map(|j| a.column(j).norm().max(f64::MIN_POSITIVE)).collect();
    for (j, s) in scales.iter().enumerate() {
        a.column_mut(j).scale_mut(1.0 / s);
    }
    let b = DVector::from_vec(data.clone());
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if !(smin > 1e-12 * smax) {
        return Err(Error::Precondition(
            "sample set does not determine the polynomial".into(),
        ));
    }
    let sol = svd.solve(&b, 0.0).map_err(|e| Error::Domain(e.to_string()))?;
    let resid = &b - &a * &sol;
    let rss = resid.norm_squared();
    let fit_residual = (rss / m as f64).sqrt();
    let dof = (m - p).max(1) as f64;
    let sigma2 = rss / dof;
    // cov = sigma^2 V S^{-2} V^T in scaled coordinates
    let v_t = svd.v_t.as_ref().expect("requested V");
    let mut coefficients = Vec::with_capacity(p);
    let mut poly = Polynomial::zero(dim);
    let mut nonconstant = false;
    for (j, mono) in basis.iter().enumerate() {
        let mut var = 0.0;
        for k in 0..p {
            let s = svd.singular_values[k];
            var += (v_t[(k, j)] / s).powi(2);
        }
        let value = sol[j] / scales[j];
        let std_error = (sigma2 * var).sqrt() / scales[j];
        let degree: u32 = mono.iter().sum();
        if degree >= 1 && value.abs() > SIGNIFICANCE * std_error && value.abs() > COEFFICIENT_FLOOR {
            nonconstant = true;
        }
        poly.add_term(mono.clone(), value);
        coefficients.push(Coefficient {
            monomial: monomial_name(mono),
            degree,
            value,
            std_error,
        });
    }
    let data_rms = (data.iter().map(|v| v * v).sum::<f64>() / m as f64).sqrt();
    let relative_residual = fit_residual / (1.0 + data_rms);
    Ok(Decomposition {
        polynomial_part: Some(poly),
        coefficients,
        max_degree,
        fit_residual,
        relative_residual,
        nonconstant,
        poor_fit: relative_residual > RESIDUAL_TOLERANCE,
        sample_set: samples.describe(),
        sample_count: m,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::norm;
    use crate::potential::fast_potential_field;

    fn d(n: i64) -> Dimension {
        Dimension::new(n).unwrap()
    }

    #[test]
    fn disk_potential_has_zero_polynomial_part() {
        let f = ScalarField::from_fn(d(2), "2*1_{B_1}", true, Some(1.0), |x| {
            Ok(if norm(x) <= 1.0 { 2.0 } else { 0.0 })
        })
        .unwrap();
        let w = ScalarField::parse("-0.5 - log(r)", d(2)).unwrap();
        // outside the unit ball the potential is -1/2 - log r
        let mut s = SampleSet::standard(d(2), 7, 3);
        s.points.retain(|x| norm(x) > 1.0);
        let dec = decompose(&w, &f, &s, 0).unwrap();
        assert!(dec.coefficient(&[0, 0]).abs() < 1e-6);
        assert!(dec.fit_residual < 1e-6);
        assert!(dec.is_constant());
    }

    #[test]
    fn planted_quadratic_in_four_dimensions() {
        let f = ScalarField::parse("exp(-r^2)", d(4)).unwrap();
        let l = fast_potential_field(&f).unwrap();
        let p = ScalarField::parse("-x1^2 + 3", d(4)).unwrap();
        let w = ScalarField::sum(vec![l, p]).unwrap();
        let s = SampleSet::standard(d(4), 11, 3 * 15);
        let dec = decompose(&w, &f, &s, 2).unwrap();
        assert!((dec.coefficient(&[2, 0, 0, 0]) + 1.0).abs() < 1e-4);
        assert!((dec.coefficient(&[0, 0, 0, 0]) - 3.0).abs() < 1e-4);
        assert!(dec.fit_residual < 1e-4);
        assert!(dec.nonconstant);
    }

    #[test]
    fn missing_degree_is_flagged() {
        let f = ScalarField::parse("exp(-r^2)", d(2)).unwrap();
        let l = fast_potential_field(&f).unwrap();
        let w = ScalarField::sum(vec![l, ScalarField::parse("x1", d(2)).unwrap()]).unwrap();
        let s = SampleSet::standard(d(2), 3, 9);
        let low = decompose(&w, &f, &s, 0).unwrap();
        assert!(low.poor_fit && !low.is_constant());
        let ok = decompose(&w, &f, &s, 1).unwrap();
        assert!((ok.coefficient(&[1, 0]) - 1.0).abs() < 1e-6);
        assert!(ok.nonconstant && !ok.poor_fit);
    }

    #[test]
    fn underdetermined_sets_are_rejected() {
        let f = ScalarField::parse("exp(-r^2)", d(4)).unwrap();
        let w = ScalarField::zero(d(4));
        let mut s = SampleSet::standard(d(4), 1, 0);
        s.points.truncate(20);
        assert!(matches!(decompose(&w, &f, &s, 2), Err(Error::Precondition(_))));
    }
}
