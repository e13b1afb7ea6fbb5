//! Spline tables of a radial potential and its Laplacian chain.

use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fields::radial::{CubicSpline, DEFAULT_R_MAX, DEFAULT_R_MIN, NODES_PER_DECADE};
use crate::fields::{norm, FieldSource, RadialProfile, ScalarField};
use crate::potential::PotentialEvaluator;

/// `L(f)` and `Δ^k L(f)`, `k < n/2`, as cubic splines in `log r` on
/// `[1e-6, 1e6]`; `Δ^{n/2} L(f) = (-1)^{n/2} f` is evaluated directly.
///
/// Beyond the last node the value continues linearly in `log r` and each
/// `Δ^k`, `k >= 1`, decays like `r^{-2k}`, which is exact once `f` has
/// vanished. Below the first node every level is held constant.
#[derive(Debug)]
pub struct TabulatedPotential {
    ev: Arc<PotentialEvaluator>,
    levels: Vec<CubicSpline>,
    t_min: f64,
    t_max: f64,
    origin: Vec<f64>,
}

impl TabulatedPotential {
    pub fn build(ev: Arc<PotentialEvaluator>) -> Result<Self> {
        if !ev.density().is_radial() {
            return Err(Error::NotRadial("only radial potentials can be tabulated".into()));
        }
        let half = ev.dim().half();
        let (t_min, t_max) = (DEFAULT_R_MIN.ln(), DEFAULT_R_MAX.ln());
        let count = ((DEFAULT_R_MAX / DEFAULT_R_MIN).log10() * NODES_PER_DECADE as f64).round() as usize + 1;
        let ts: Vec<f64> = (0..count)
            .map(|i| t_min + (t_max - t_min) * i as f64 / (count - 1) as f64)
            .collect();
        let mut levels = Vec::with_capacity(half);
        let mut origin = Vec::with_capacity(half);
        for k in 0..half {
            let level = |r: f64| {
                if k == 0 {
                    ev.eval_radius(r)
                } else {
                    ev.radial_laplacian_power(r, k)
                }
            };
            let ys = ts.par_iter().map(|t| level(t.exp())).collect::<Result<Vec<f64>>>()?;
            origin.push(level(0.0)?);
            levels.push(CubicSpline::new(ts.clone(), ys)?);
        }
        Ok(TabulatedPotential {
            ev,
            levels,
            t_min,
            t_max,
            origin,
        })
    }

    pub fn evaluator(&self) -> &Arc<PotentialEvaluator> {
        &self.ev
    }

    /// `Δ^k L(f)` at radius `r`, `k <= n/2`.
    pub fn level(&self, r: f64, k: usize) -> Result<f64> {
        let half = self.ev.dim().half();
        if k == half {
            let sign = if half % 2 == 1 { -1.0 } else { 1.0 };
            return Ok(sign * self.ev.density().radial_value(r)?);
        }
        if k > half {
            return Err(Error::Precondition(format!("Laplacian power {k} exceeds {half}")));
        }
        let s = &self.levels[k];
        if r == 0.0 {
            return Ok(self.origin[k]);
        }
        let t = r.ln();
        if t < self.t_min {
            return Ok(s.eval(self.t_min));
        }
        if t > self.t_max {
            let edge = s.eval(self.t_max);
            return Ok(if k == 0 {
                edge + s.derivative(self.t_max) * (t - self.t_max)
            } else {
                edge * (-2.0 * k as f64 * (t - self.t_max)).exp()
            });
        }
        Ok(s.eval(t))
    }

    /// `d L(f) / dr`.
    pub fn derivative(&self, r: f64) -> f64 {
        let s = &self.levels[0];
        if r == 0.0 {
            return 0.0;
        }
        let t = r.ln();
        if t < self.t_min {
            // smooth at the origin: the slope vanishes linearly
            return s.derivative(self.t_min) / self.t_min.exp() * (r / self.t_min.exp());
        }
        s.derivative(t.min(self.t_max)) / r
    }

    /// Value profile for [`crate::geometry::MetricContext`].
    pub fn profile(&self) -> Result<RadialProfile> {
        let s = &self.levels[0];
        let mut nodes: Vec<(f64, f64)> = s.knots().iter().zip(s.values()).map(|(t, v)| (t.exp(), *v)).collect();
        nodes.push((0.0, self.origin[0]));
        RadialProfile::from_nodes(&nodes)
    }

    pub fn field(self) -> ScalarField {
        let dim = self.ev.dim();
        ScalarField::from_source(dim, Arc::new(self))
    }
}

impl FieldSource for TabulatedPotential {
    fn eval(&self, x: &[f64]) -> Result<f64> {
        self.level(norm(x), 0)
    }
    fn is_radial(&self) -> bool {
        true
    }
    fn chain_len(&self) -> usize {
        self.ev.dim().half()
    }
    fn laplacian_power(&self, x: &[f64], k: usize) -> Option<Result<f64>> {
        if k == 0 || k > self.ev.dim().half() {
            return None;
        }
        Some(self.level(norm(x), k))
    }
    fn gradient(&self, x: &[f64]) -> Option<Result<Vec<f64>>> {
        let r = norm(x);
        if r == 0.0 {
            return Some(Ok(vec![0.0; x.len()]));
        }
        let d = self.derivative(r);
        Some(Ok(x.iter().map(|v| d * v / r).collect()))
    }
    fn is_zero(&self) -> bool {
        self.ev.density().is_zero()
    }
    fn describe(&self) -> String {
        format!("L[{}]", self.ev.density().describe())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::Dimension;
    use crate::potential::PotentialConfig;

    #[test]
    fn table_matches_exact_sphere_potential() {
        let f = ScalarField::parse("6*(2/(1+r^2))^4", Dimension::new(4).unwrap()).unwrap();
        let ev = Arc::new(PotentialEvaluator::new(&f, PotentialConfig::default()).unwrap());
        let tab = TabulatedPotential::build(ev).unwrap();
        for r in [0.0f64, 1e-7, 0.37, 2.5, 4e3, 1e8] {
            let exact = -(1.0 + r * r).ln();
            assert!(
                (tab.level(r, 0).unwrap() - exact).abs() < 1e-7 * (1.0 + exact.abs()),
                "r={r}"
            );
            let lap = -(8.0 + 4.0 * r * r) / (1.0 + r * r).powi(2);
            assert!(
                (tab.level(r, 1).unwrap() - lap).abs() < 1e-7 * lap.abs(),
                "r={r}: {} vs {lap}",
                tab.level(r, 1).unwrap()
            );
            let d = -2.0 * r / (1.0 + r * r);
            assert!(
                (tab.derivative(r) - d).abs() < 1e-9 + 1e-5 * d.abs(),
                "r={r}: {} vs {d}",
                tab.derivative(r)
            );
        }
    }
}
