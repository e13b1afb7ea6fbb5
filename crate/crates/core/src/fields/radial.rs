//! Radial profiles: cubic splines in `log r` on a geometric grid.

use crate::error::{Error, Result};
use crate::fields::{rotation_check, ScalarField};

/// Nodes per decade of the default profile grid.
pub const NODES_PER_DECADE: usize = 64;
pub const DEFAULT_R_MIN: f64 = 1e-6;
pub const DEFAULT_R_MAX: f64 = 1e6;

/// Clamped cubic spline on strictly increasing knots.
#[derive(Debug, Clone, PartialEq)]
pub struct CubicSpline {
    x: Vec<f64>,
    y: Vec<f64>,
    m: Vec<f64>,
}

impl CubicSpline {
    /// Spline with end slopes taken from one-sided fourth-order differences.
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        let n = x.len();
        if n < 5 || y.len() != n {
            return Err(Error::Precondition("spline needs at least 5 matching knots".into()));
        }
        if x.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Precondition("spline knots must increase".into()));
        }
        let d0 = one_sided_slope(&x[..5], &y[..5]);
        let xr: Vec<f64> = x[n - 5..].iter().rev().copied().collect();
        let yr: Vec<f64> = y[n - 5..].iter().rev().copied().collect();
        let d1 = one_sided_slope(&xr, &yr);
        // Second derivatives m_i from the clamped tridiagonal system.
        let mut a = vec![0.0; n];
        let mut b = vec![0.0; n];
        let mut c = vec![0.0; n];
        let mut r = vec![0.0; n];
        let h0 = x[1] - x[0];
        b[0] = h0 / 3.0;
        c[0] = h0 / 6.0;
        r[0] = (y[1] - y[0]) / h0 - d0;
        for i in 1..n - 1 {
            let (hl, hr) = (x[i] - x[i - 1], x[i + 1] - x[i]);
            a[i] = hl / 6.0;
            b[i] = (hl + hr) / 3.0;
            c[i] = hr / 6.0;
            r[i] = (y[i + 1] - y[i]) / hr - (y[i] - y[i - 1]) / hl;
        }
        let hn = x[n - 1] - x[n - 2];
        a[n - 1] = hn / 6.0;
        b[n - 1] = hn / 3.0;
        r[n - 1] = d1 - (y[n - 1] - y[n - 2]) / hn;
        // Thomas algorithm
        for i in 1..n {
            let w = a[i] / b[i - 1];
            b[i] -= w * c[i - 1];
            r[i] -= w * r[i - 1];
        }
        let mut m = vec![0.0; n];
        m[n - 1] = r[n - 1] / b[n - 1];
        for i in (0..n - 1).rev() {
            m[i] = (r[i] - c[i] * m[i + 1]) / b[i];
        }
        Ok(CubicSpline { x, y, m })
    }

    fn locate(&self, t: f64) -> usize {
        let n = self.x.len();
        match self.x.binary_search_by(|v| v.partial_cmp(&t).unwrap()) {
            Ok(i) => i.min(n - 2),
            Err(0) => 0,
            Err(i) => (i - 1).min(n - 2),
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        let i = self.locate(t);
        let h = self.x[i + 1] - self.x[i];
        let a = (self.x[i + 1] - t) / h;
        let b = (t - self.x[i]) / h;
        a * self.y[i]
            + b * self.y[i + 1]
            + ((a * a * a - a) * self.m[i] + (b * b * b - b) * self.m[i + 1]) * h * h / 6.0
    }

    pub fn derivative(&self, t: f64) -> f64 {
        let i = self.locate(t);
        let h = self.x[i + 1] - self.x[i];
        let a = (self.x[i + 1] - t) / h;
        let b = (t - self.x[i]) / h;
        (self.y[i + 1] - self.y[i]) / h
            + ((1.0 - 3.0 * a * a) * self.m[i] + (3.0 * b * b - 1.0) * self.m[i + 1]) * h / 6.0
    }

    pub fn second_derivative(&self, t: f64) -> f64 {
        let i = self.locate(t);
        let h = self.x[i + 1] - self.x[i];
        let a = (self.x[i + 1] - t) / h;
        let b = (t - self.x[i]) / h;
        a * self.m[i] + b * self.m[i + 1]
    }

    pub fn knots(&self) -> &[f64] {
        &self.x
    }

    pub fn values(&self) -> &[f64] {
        &self.y
    }
}

/// Derivative at `x[0]` of the quartic through five points.
fn one_sided_slope(x: &[f64], y: &[f64]) -> f64 {
    let mut d = 0.0;
    for j in 0..5 {
        // derivative of the Lagrange basis polynomial l_j at x[0]
        let mut lj = 0.0;
        if j == 0 {
            for k in 1..5 {
                lj += 1.0 / (x[0] - x[k]);
            }
        } else {
            let mut num = 1.0;
            let mut den = 1.0;
            for k in 0..5 {
                if k != j {
                    den *= x[j] - x[k];
                    if k != 0 {
                        num *= x[0] - x[k];
                    }
                }
            }
            lj = num / den;
        }
        d += y[j] * lj;
    }
    d
}

/// Radial profile `phi(r)`, interpolated by a cubic spline in `t = log r`.
///
/// Below the first node the profile is continued evenly through the stored
/// origin value, `phi(r) = phi(0) + (phi(r_min) - phi(0)) (r / r_min)^2`.
/// Above the last node it is extrapolated linearly in `log r`.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialProfile {
    spline: CubicSpline,
    origin_value: f64,
    r_min: f64,
    r_max: f64,
}

impl RadialProfile {
    /// Tabulates `phi` on `nodes_per_decade` geometric nodes spanning [r_min, r_max].
    pub fn tabulate<F>(mut phi: F, r_min: f64, r_max: f64, nodes_per_decade: usize) -> Result<Self>
    where
        F: FnMut(f64) -> Result<f64>,
    {
        if !(r_min > 0.0 && r_max > r_min) {
            return Err(Error::Precondition(format!(
                "profile range [{r_min}, {r_max}] is degenerate"
            )));
        }
        let (t0, t1) = (r_min.ln(), r_max.ln());
        let decades = (r_max / r_min).log10();
        let count = ((decades * nodes_per_decade as f64).round() as usize).max(4) + 1;
        let ts: Vec<f64> = (0..count)
            .map(|i| t0 + (t1 - t0) * i as f64 / (count - 1) as f64)
            .collect();
        let ys: Vec<f64> = ts.iter().map(|t| phi(t.exp())).collect::<Result<_>>()?;
        let origin_value = phi(0.0)?;
        Ok(RadialProfile {
            spline: CubicSpline::new(ts, ys)?,
            origin_value,
            r_min,
            r_max,
        })
    }

    /// Profile from explicit `(r, value)` nodes; `r = 0` may be included.
    pub fn from_nodes(nodes: &[(f64, f64)]) -> Result<Self> {
        let mut pos: Vec<(f64, f64)> = nodes.iter().copied().filter(|p| p.0 > 0.0).collect();
        pos.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        if nodes.iter().any(|p| p.0 < 0.0 || !p.0.is_finite() || !p.1.is_finite()) {
            return Err(Error::Precondition("radial nodes must be finite with r >= 0".into()));
        }
        if pos.len() < 5 {
            return Err(Error::Precondition("need at least 5 nodes with r > 0".into()));
        }
        let origin_value = nodes.iter().find(|p| p.0 == 0.0).map(|p| p.1).unwrap_or(pos[0].1);
        let ts: Vec<f64> = pos.iter().map(|p| p.0.ln()).collect();
        let ys: Vec<f64> = pos.iter().map(|p| p.1).collect();
        Ok(RadialProfile {
            r_min: pos[0].0,
            r_max: pos[pos.len() - 1].0,
            spline: CubicSpline::new(ts, ys)?,
            origin_value,
        })
    }

    pub fn r_min(&self) -> f64 {
        self.r_min
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    pub fn spline(&self) -> &CubicSpline {
        &self.spline
    }

    pub fn eval(&self, r: f64) -> f64 {
        if r < self.r_min {
            let v_min = self.spline.values()[0];
            let s = r / self.r_min;
            return self.origin_value + (v_min - self.origin_value) * s * s;
        }
        let t = r.ln();
        let t_max = self.r_max.ln();
        if t > t_max {
            return self.spline.eval(t_max) + self.spline.derivative(t_max) * (t - t_max);
        }
        self.spline.eval(t)
    }

    /// `d phi / dr`.
    pub fn derivative(&self, r: f64) -> f64 {
        if r < self.r_min {
            let v_min = self.spline.values()[0];
            return 2.0 * (v_min - self.origin_value) * r / (self.r_min * self.r_min);
        }
        let t = r.ln().min(self.r_max.ln());
        self.spline.derivative(t) / r
    }

    /// `phi''(r) + (n - 1) phi'(r) / r` from the spline's derivatives in `log r`.
    pub fn laplacian(&self, r: f64, n: usize) -> f64 {
        if r < self.r_min {
            let v_min = self.spline.values()[0];
            return 2.0 * n as f64 * (v_min - self.origin_value) / (self.r_min * self.r_min);
        }
        let t = r.ln();
        if t > self.r_max.ln() {
            let d1 = self.spline.derivative(self.r_max.ln());
            return (n as f64 - 2.0) * d1 / (r * r);
        }
        let (d1, d2) = (self.spline.derivative(t), self.spline.second_derivative(t));
        (d2 + (n as f64 - 2.0) * d1) / (r * r)
    }

    /// Largest relative deviation from `phi` at the midpoints between nodes.
    pub fn validate<F>(&self, mut phi: F) -> Result<f64>
    where
        F: FnMut(f64) -> Result<f64>,
    {
        let ts = self.spline.knots();
        let mut worst: f64 = 0.0;
        for w in ts.windows(2) {
            let r = (0.5 * (w[0] + w[1])).exp();
            let exact = phi(r)?;
            worst = worst.max((self.eval(r) - exact).abs() / (1.0 + exact.abs()));
        }
        Ok(worst)
    }
}

/// Relative tolerance for off-node interpolation checks in [`restrict_radial`].
pub const PROFILE_TOLERANCE: f64 = 1e-6;

/// Radial profile of `f` on the default grid, after a rotation check at
/// tolerance 1e-10 and an off-node interpolation check.
pub fn restrict_radial(f: &ScalarField) -> Result<RadialProfile> {
    rotation_check(f, 50, 1e-10, 0xa11ce)?;
    let profile = RadialProfile::tabulate(|r| f.radial_value(r), DEFAULT_R_MIN, DEFAULT_R_MAX, NODES_PER_DECADE)?;
    let err = profile.validate(|r| f.radial_value(r))?;
    if err > PROFILE_TOLERANCE {
        return Err(Error::Precondition(format!(
            "radial profile interpolation error {err:e} exceeds {PROFILE_TOLERANCE:e}"
        )));
    }
    Ok(profile)
}
