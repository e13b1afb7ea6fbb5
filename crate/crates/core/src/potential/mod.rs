//! The logarithmic potential
//! `L(f)(x) = c_n int log(|y| / |x - y|) f(y) dy`, `c_n = 2 / ((n-1)! |S^n|)`,
//! its total mass and its asymptotics.

pub mod kernel;
pub mod tabulated;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::calculus::{ball_mean, SphereConstants};
use crate::error::{Error, Result};
use crate::fields::{norm, Dimension, FieldSource, Point, ScalarField};
use crate::fit::linear_fit;
use crate::quad::{integrate, log_tail_integral, sphere_mean_adaptive, QuadConfig, TailOutcome};

pub use kernel::{angular_log_kernel, AngularKernel, GridSpec, KernelTable};
pub use tabulated::TabulatedPotential;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PotentialConfig {
    /// Relative tolerance of the spherical-mean (non-radial) path.
    pub rel_tol: f64,
    /// Relative tolerance of the one-dimensional radial path.
    pub radial_rel_tol: f64,
    pub max_panels: usize,
    /// Largest angular order for spherical means.
    pub max_sphere_order: usize,
}

impl Default for PotentialConfig {
    fn default() -> Self {
        PotentialConfig {
            rel_tol: 1e-8,
            radial_rel_tol: 1e-11,
            max_panels: 2000,
            max_sphere_order: 64,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlphaMethod {
    MassIntegral,
    AsymptoteFit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlphaEstimate {
    pub alpha_hat: f64,
    /// Sample window of an asymptote fit; absent for mass integrals.
    pub window: Option<[f64; 2]>,
    /// Fit rms (asymptote) or quadrature error estimate (mass integral).
    pub residual: f64,
    pub method: AlphaMethod,
    /// Window-split variants of an asymptote fit.
    pub sup: Option<f64>,
    pub inf: Option<f64>,
}

/// Quadrature engine for `L(f)` with a fixed density.
#[derive(Debug)]
pub struct PotentialEvaluator {
    f: ScalarField,
    cfg: PotentialConfig,
    consts: SphereConstants,
    kernel: AngularKernel,
    alpha: AlphaEstimate,
    /// `int log|y| f(y) dy` (non-radial path only).
    log_moment: f64,
    support: Option<f64>,
}

impl PotentialEvaluator {
    /// Checks integrability, computes the total mass and, for non-radial
    /// densities, the logarithmic moment.
    pub fn new(f: &ScalarField, cfg: PotentialConfig) -> Result<Self> {
        let dim = f.dim();
        let consts = SphereConstants::new(dim);
        let alpha = total_mass_alpha_cfg(f, &cfg)?;
        let mut ev = PotentialEvaluator {
            f: f.clone(),
            cfg,
            consts,
            kernel: AngularKernel::new(dim),
            alpha,
            log_moment: 0.0,
            support: f.caps().support_radius,
        };
        if !f.is_radial() && !f.is_zero() {
            ev.log_moment = ev.polar_integral(&vec![0.0; dim.get()], |rho| rho.ln(), 0.0)?;
        }
        Ok(ev)
    }

    pub fn dim(&self) -> Dimension {
        self.f.dim()
    }

    pub fn density(&self) -> &ScalarField {
        &self.f
    }

    pub fn alpha(&self) -> &AlphaEstimate {
        &self.alpha
    }

    fn radial_cfg(&self) -> QuadConfig {
        QuadConfig {
            rel_tol: self.cfg.radial_rel_tol,
            abs_tol: 1e-15,
            max_panels: self.cfg.max_panels,
        }
    }

    fn sphere_cfg(&self) -> QuadConfig {
        QuadConfig {
            rel_tol: self.cfg.rel_tol,
            abs_tol: 1e-13,
            max_panels: self.cfg.max_panels,
        }
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim().get() {
            return Err(Error::DimensionMismatch {
                expected: self.dim().get(),
                got: x.len(),
            });
        }
        if self.f.is_zero() {
            return Ok(0.0);
        }
        if self.f.is_radial() {
            return self.radial_value(norm(x));
        }
        self.general_value(x)
    }

    /// `int_a^b g(s) f(s) s^{n-1} ds` for the radial density, with the range
    /// above `s = 1` integrated in `t = log s`; `b = inf` uses the dyadic tail test.
    fn radial_moment<G: Fn(f64) -> f64>(&self, a: f64, b: f64, g: G) -> Result<f64> {
        let n = self.dim().get();
        let b = match self.support {
            Some(rho) => b.min(rho),
            None => b,
        };
        if !(b > a) {
            return Ok(0.0);
        }
        let cfg = self.radial_cfg();
        let f = &self.f;
        let mut total = 0.0;
        if a < 1.0 {
            let hi = b.min(1.0);
            let (v, _) = integrate(
                |s| Ok(g(s) * f.radial_value(s)? * s.powi(n as i32 - 1)),
                a,
                hi,
                &[],
                &cfg,
            )?;
            total += v;
        }
        let ta = a.max(1.0).ln();
        if b > 1.0 {
            let integrand = |t: f64| -> Result<f64> {
                let w = f.radial_scaled(t, n as f64)?;
                Ok(if w == 0.0 { 0.0 } else { g(t.exp()) * w })
            };
            if b.is_finite() {
                let tb = b.ln();
                let breaks: Vec<f64> = (ta.ceil() as i64..=tb.floor() as i64).map(|k| k as f64).collect();
                total += integrate(integrand, ta, tb, &breaks, &cfg)?.0;
            } else {
                match log_tail_integral(integrand, ta, &cfg)? {
                    TailOutcome::Finite(v) => total += v,
                    other => return Err(Error::NonIntegrable(format!("potential integrand tail is {other:?}"))),
                }
            }
        }
        Ok(total)
    }

    /// `L(f)` at radius `r` for radial densities.
    pub fn eval_radius(&self, r: f64) -> Result<f64> {
        if !self.f.is_radial() {
            return Err(Error::NotRadial(format!("{} is not radial", self.f.describe())));
        }
        if self.f.is_zero() {
            return Ok(0.0);
        }
        self.radial_value(r)
    }

    fn radial_value(&self, r: f64) -> Result<f64> {
        if r == 0.0 {
            return Ok(0.0);
        }
        let k = &self.kernel;
        // log s - k_n(r, s): below r it is log(s/r) - P(s/r), above it -P(r/s)
        let inner = self.radial_moment(0.0, r, |s| (s / r).ln() - k.correction(s / r))?;
        let outer = if self.dim().get() > 2 {
            -self.radial_moment(r, f64::INFINITY, |s| k.correction(r / s))?
        } else {
            0.0
        };
        Ok(self.consts.green_constant * self.consts.boundary_area * (inner + outer))
    }

    /// `d L(f) / dr` for radial densities.
    pub fn radial_derivative(&self, r: f64) -> Result<f64> {
        if r == 0.0 || self.f.is_zero() {
            return Ok(0.0);
        }
        let k = &self.kernel;
        let inner = self.radial_moment(0.0, r, |s| (1.0 - k.correction_log_derivative(s / r)) / r)?;
        let outer = if self.dim().get() > 2 {
            self.radial_moment(r, f64::INFINITY, |s| k.correction_log_derivative(r / s) / r)?
        } else {
            0.0
        };
        Ok(-self.consts.green_constant * self.consts.boundary_area * (inner + outer))
    }

    /// `Δ^k L(f)` at radius `r` for radial densities, `1 <= k <= n/2`:
    /// `Δ^{n/2} L(f) = (-1)^{n/2} f` and lower powers follow from the radial
    /// Newtonian potential `v(r) = -1/(n-2) int v'(t) t^{n-1} max(r,t)^{2-n} dt`.
    pub fn radial_laplacian_power(&self, r: f64, k: usize) -> Result<f64> {
        let half = self.dim().half();
        if k == 0 || k > half {
            return Err(Error::Precondition(format!("Laplacian power {k} outside 1..={half}")));
        }
        self.chain_level(r, k)
    }

    fn chain_level(&self, r: f64, k: usize) -> Result<f64> {
        let n = self.dim().get();
        let half = n / 2;
        if k == half {
            let sign = if half % 2 == 1 { -1.0 } else { 1.0 };
            return Ok(sign * self.f.radial_value(r)?);
        }
        let nf = n as f64;
        let next = |t: f64| self.chain_level(t, k + 1);
        // r^{2-n} int_0^r v t^{n-1} dt
        let inner = if r > 0.0 {
            self.split_integral(|t| Ok(next(t)? * (t / r).powi(n as i32 - 2) * t), 0.0, r)?
        } else {
            0.0
        };
        // int_r^inf v t dt
        let outer = self.split_integral(|t| Ok(next(t)? * t), r, f64::INFINITY)?;
        Ok(-(inner + outer) / (nf - 2.0))
    }

    /// `int_a^b g(t) dt`, cut at the support of `f`, with the range above
    /// `t = 1` integrated in `log t`; `b = inf` goes through the tail test.
    fn split_integral<G: Fn(f64) -> Result<f64>>(&self, g: G, a: f64, b: f64) -> Result<f64> {
        let b = match self.support {
            Some(rho) => b.min(rho),
            None => b,
        };
        if !(b > a) {
            return Ok(0.0);
        }
        let cfg = self.radial_cfg();
        let mut total = 0.0;
        if a < 1.0 {
            total += integrate(&g, a, b.min(1.0), &[], &cfg)?.0;
        }
        if b > 1.0 {
            let sa = a.max(1.0).ln();
            let h = |s: f64| -> Result<f64> {
                let t = s.exp();
                let v = g(t)?;
                Ok(if v == 0.0 { 0.0 } else { v * t })
            };
            if b.is_finite() {
                let sb = b.ln();
                let breaks: Vec<f64> = (sa.floor() as i64 + 1..=sb.ceil() as i64 - 1)
                    .map(|k| k as f64)
                    .collect();
                total += integrate(h, sa, sb, &breaks, &cfg)?.0;
            } else {
                match log_tail_integral(h, sa, &cfg)? {
                    TailOutcome::Finite(v) => total += v,
                    other => return Err(Error::NonIntegrable(format!("Laplacian chain tail is {other:?}"))),
                }
            }
        }
        Ok(total)
    }

    /// `|S^{n-1}| int_0^inf w(rho) M(rho) rho^{n-1} drho` where `M(rho)` is the
    /// spherical mean of `f` about `c` and `w` the radial weight; the range
    /// below `rho_min` is skipped.
    fn polar_integral<W: Fn(f64) -> f64>(&self, c: &[f64], w: W, rho_min: f64) -> Result<f64> {
        let n = self.dim().get();
        let cfg = self.sphere_cfg();
        let f = &self.f;
        let tol = self.cfg.rel_tol;
        let max_order = self.cfg.max_sphere_order;
        let mean = |rho: f64| -> Result<f64> {
            let mut y = vec![0.0; n];
            sphere_mean_adaptive(
                n,
                |om| {
                    for i in 0..n {
                        y[i] = c[i] + rho * om[i];
                    }
                    f.eval_slice(&y)
                },
                tol,
                8,
                max_order,
            )
        };
        let upper = self.support.map(|s| s + norm(c));
        let mut total = 0.0;
        let hi1 = upper.map_or(1.0, |u| u.min(1.0));
        if hi1 > rho_min {
            let (v, _) = integrate(
                |rho| Ok(w(rho) * mean(rho)? * rho.powi(n as i32 - 1)),
                rho_min,
                hi1,
                &[],
                &cfg,
            )?;
            total += v;
        }
        let t0 = rho_min.max(1.0).ln();
        let g = |t: f64| -> Result<f64> {
            let rho = t.exp();
            let m = mean(rho)?;
            if m == 0.0 {
                return Ok(0.0);
            }
            Ok(w(rho) * m * (n as f64 * t).exp())
        };
        match upper {
            Some(u) if u <= 1.0 => {}
            Some(u) => {
                let tb = u.ln();
                if tb > t0 {
                    let breaks: Vec<f64> = (t0.ceil() as i64..=tb.floor() as i64).map(|k| k as f64).collect();
                    total += integrate(g, t0, tb, &breaks, &cfg)?.0;
                }
            }
            None => match log_tail_integral(g, t0, &cfg)? {
                TailOutcome::Finite(v) => total += v,
                other => return Err(Error::NonIntegrable(format!("density tail is {other:?}"))),
            },
        }
        Ok(self.consts.boundary_area * total)
    }

    fn general_value(&self, x: &[f64]) -> Result<f64> {
        let n = self.dim().get();
        let nf = n as f64;
        let eps = (1.0f64).min(1.0 / (1.0 + norm(x)));
        let fx = self.f.eval_slice(x)?;
        // inner ball: f(x) int_{B_eps} log|z| dz + int_{B_eps} log|z| (f(x+z) - f(x)) dz
        let ball_log = self.consts.unit_ball_volume * eps.powf(nf) * (eps.ln() - 1.0 / nf);
        let cfg = self.sphere_cfg();
        let f = &self.f;
        let tol = self.cfg.rel_tol;
        let mut y = vec![0.0; n];
        let (remainder, _) = integrate(
            |rho| {
                if rho == 0.0 {
                    return Ok(0.0);
                }
                let m = sphere_mean_adaptive(
                    n,
                    |om| {
                        for i in 0..n {
                            y[i] = x[i] + rho * om[i];
                        }
                        f.eval_slice(&y)
                    },
                    tol,
                    8,
                    self.cfg.max_sphere_order,
                )?;
                Ok(rho.ln() * (m - fx) * rho.powi(n as i32 - 1))
            },
            0.0,
            eps,
            &[],
            &cfg,
        )?;
        let inner = fx * ball_log + self.consts.boundary_area * remainder;
        let outer = self.polar_integral(x, |rho| rho.ln(), eps)?;
        Ok(self.consts.green_constant * (self.log_moment - inner - outer))
    }

    /// The potential as a [`ScalarField`] with its Laplacian chain.
    pub fn field(self: &Arc<Self>) -> ScalarField {
        ScalarField::from_source(self.dim(), Arc::new(PotentialSource { ev: self.clone() }))
    }
}

#[derive(Debug)]
struct PotentialSource {
    ev: Arc<PotentialEvaluator>,
}

impl FieldSource for PotentialSource {
    fn eval(&self, x: &[f64]) -> Result<f64> {
        self.ev.eval(x)
    }
    fn is_radial(&self) -> bool {
        self.ev.f.is_radial()
    }
    fn chain_len(&self) -> usize {
        if self.ev.f.is_radial() {
            self.ev.dim().half()
        } else {
            0
        }
    }
    fn laplacian_power(&self, x: &[f64], k: usize) -> Option<Result<f64>> {
        let half = self.ev.dim().half();
        if self.ev.f.is_radial() {
            return Some(self.ev.radial_laplacian_power(norm(x), k));
        }
        if k == half {
            let sign = if half % 2 == 1 { -1.0 } else { 1.0 };
            return Some(self.ev.f.eval_slice(x).map(|v| sign * v));
        }
        None
    }
    fn gradient(&self, x: &[f64]) -> Option<Result<Vec<f64>>> {
        if !self.ev.f.is_radial() {
            return None;
        }
        let r = norm(x);
        Some(self.ev.radial_derivative(r).map(|d| {
            if r == 0.0 {
                vec![0.0; x.len()]
            } else {
                x.iter().map(|v| d * v / r).collect()
            }
        }))
    }
    fn is_zero(&self) -> bool {
        self.ev.f.is_zero()
    }
    fn describe(&self) -> String {
        format!("L[{}]", self.ev.f.describe())
    }
}

/// `L(f)` as a field, with a default-configured evaluator.
pub fn potential_field(f: &ScalarField) -> Result<ScalarField> {
    Ok(Arc::new(PotentialEvaluator::new(f, PotentialConfig::default())?).field())
}

/// `L(f)` for a radial density as a spline-tabulated field with its
/// Laplacian chain; non-radial densities get the direct evaluator.
pub fn fast_potential_field(f: &ScalarField) -> Result<ScalarField> {
    let ev = Arc::new(PotentialEvaluator::new(f, PotentialConfig::default())?);
    if f.is_radial() {
        Ok(TabulatedPotential::build(ev)?.field())
    } else {
        Ok(ev.field())
    }
}

/// `L(f)(x)`.
pub fn log_potential(f: &ScalarField, x: &Point) -> Result<f64> {
    PotentialEvaluator::new(f, PotentialConfig::default())?.eval(x.coords())
}

/// `alpha = c_n int f`.
pub fn total_mass_alpha(f: &ScalarField) -> Result<AlphaEstimate> {
    total_mass_alpha_cfg(f, &PotentialConfig::default())
}

fn total_mass_alpha_cfg(f: &ScalarField, cfg: &PotentialConfig) -> Result<AlphaEstimate> {
    let dim = f.dim();
    let consts = SphereConstants::new(dim);
    let estimate = |mass: f64, err: f64| AlphaEstimate {
        alpha_hat: consts.green_constant * mass,
        window: None,
        residual: consts.green_constant * err,
        method: AlphaMethod::MassIntegral,
        sup: None,
        inf: None,
    };
    if f.is_zero() {
        return Ok(estimate(0.0, 0.0));
    }
    let n = dim.get();
    let support = f.caps().support_radius;
    let qcfg = QuadConfig {
        rel_tol: if f.is_radial() { cfg.radial_rel_tol } else { cfg.rel_tol },
        abs_tol: 1e-15,
        max_panels: cfg.max_panels,
    };
    let area = consts.boundary_area;
    if f.is_radial() {
        let head_hi = support.map_or(1.0, |s| s.min(1.0));
        let (head, head_err) = integrate(
            |s| Ok(f.radial_value(s)? * s.powi(n as i32 - 1)),
            0.0,
            head_hi,
            &[],
            &qcfg,
        )?;
        let mut mass = head;
        let mut err = head_err;
        match support {
            Some(rho) if rho <= 1.0 => {}
            Some(rho) => {
                let tb = rho.ln();
                let breaks: Vec<f64> = (1..=tb.floor() as i64).map(|k| k as f64).collect();
                let (v, e) = integrate(|t| f.radial_scaled(t, n as f64), 0.0, tb, &breaks, &qcfg)?;
                mass += v;
                err += e;
            }
            None => {
                // absolute integrability first, then the signed mass
                let abs = log_tail_integral(|t| Ok(f.radial_scaled(t, n as f64)?.abs()), 0.0, &qcfg)?;
                if !matches!(abs, TailOutcome::Finite(_)) {
                    return Err(Error::NonIntegrable(format!(
                        "dyadic tail sums of |f| fail the ratio test ({abs:?})"
                    )));
                }
                match log_tail_integral(|t| f.radial_scaled(t, n as f64), 0.0, &qcfg)? {
                    TailOutcome::Finite(v) => mass += v,
                    other => {
                        return Err(Error::NonIntegrable(format!(
                            "dyadic tail sums fail the ratio test ({other:?})"
                        )))
                    }
                }
            }
        }
        return Ok(estimate(area * mass, area * err));
    }
    // Non-radial: spherical means about the origin.
    let tol = cfg.rel_tol;
    let max_order = cfg.max_sphere_order;
    let mean = |rho: f64| -> Result<f64> {
        let mut y = vec![0.0; n];
        sphere_mean_adaptive(
            n,
            |om| {
                for i in 0..n {
                    y[i] = rho * om[i];
                }
                f.eval_slice(&y)
            },
            tol,
            8,
            max_order,
        )
    };
    let head_hi = support.map_or(1.0, |s| s.min(1.0));
    let (head, err) = integrate(|s| Ok(mean(s)? * s.powi(n as i32 - 1)), 0.0, head_hi, &[], &qcfg)?;
    let mut mass = head;
    let g = |t: f64| -> Result<f64> {
        let m = mean(t.exp())?;
        Ok(if m == 0.0 { 0.0 } else { m * (n as f64 * t).exp() })
    };
    match support {
        Some(rho) if rho <= 1.0 => {}
        Some(rho) => {
            let tb = rho.ln();
            let breaks: Vec<f64> = (1..=tb.floor() as i64).map(|k| k as f64).collect();
            mass += integrate(g, 0.0, tb, &breaks, &qcfg)?.0;
        }
        None => match log_tail_integral(g, 0.0, &qcfg)? {
            TailOutcome::Finite(v) => mass += v,
            other => {
                return Err(Error::NonIntegrable(format!(
                    "dyadic tail sums fail the ratio test ({other:?})"
                )))
            }
        },
    }
    Ok(estimate(area * mass, area * err))
}

/// Slope of `r -> mean_{B_1(r e_1)} L(f)` against `log r`; `alpha_hat = -slope`.
pub fn potential_asymptote(f: &ScalarField, radii: &[f64]) -> Result<AlphaEstimate> {
    check_window(radii)?;
    let n = f.dim();
    let field = potential_field(f)?;
    let means: Vec<f64> = radii
        .iter()
        .map(|&r| ball_mean(&field, &Point::on_axis(n, r), 1.0))
        .collect::<Result<_>>()?;
    let x: Vec<f64> = radii.iter().map(|r| r.ln()).collect();
    let fit = linear_fit(&x, &means)?;
    let m = radii.len();
    let third = (m / 3).max(2);
    let (mut sup, mut inf) = (None, None);
    if m >= 4 {
        let a = -linear_fit(&x[..third], &means[..third])?.slope;
        let b = -linear_fit(&x[m - third..], &means[m - third..])?.slope;
        sup = Some(a.max(b).max(-fit.slope));
        inf = Some(a.min(b).min(-fit.slope));
    }
    Ok(AlphaEstimate {
        alpha_hat: -fit.slope,
        window: Some([radii[0], radii[m - 1]]),
        residual: fit.rms,
        method: AlphaMethod::AsymptoteFit,
        sup,
        inf,
    })
}

pub(crate) fn check_window(radii: &[f64]) -> Result<()> {
    if radii.len() < 3 {
        return Err(Error::InsufficientWindow(format!(
            "need at least 3 radii, got {}",
            radii.len()
        )));
    }
    if radii.iter().any(|r| !(*r > 0.0) || !r.is_finite()) {
        return Err(Error::Precondition("radii must be positive and finite".into()));
    }
    let lo = radii.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = radii.iter().copied().fold(0.0, f64::max);
    if (hi / lo).log10() < 2.0 - 1e-12 {
        return Err(Error::InsufficientWindow(format!(
            "radii span {lo:e}..{hi:e}, less than 2 decades"
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sign {
    Plus,
    Minus,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundMargins {
    pub sign: Sign,
    pub alpha: f64,
    /// Largest and smallest `L(f)(x) + alpha log|x|` over the samples.
    pub max: f64,
    pub min: f64,
    /// `(|x|, L(f)(x) + alpha log|x|)` pairs.
    pub samples: Vec<[f64; 2]>,
    /// Radius beyond which the designated part of `f` vanishes.
    pub part_support: f64,
}

/// Numerical support radius of `f^+` (or `f^-`): the largest sampled radius
/// in `[1e-3, 1e6]` where that part is nonzero.
fn part_support(f: &ScalarField, sign: Sign) -> Result<f64> {
    if let Some(rho) = f.caps().support_radius {
        return Ok(rho);
    }
    let n = f.dim().get();
    let dirs: Vec<Vec<f64>> = if f.is_radial() {
        let mut e = vec![0.0; n];
        e[0] = 1.0;
        vec![e]
    } else {
        crate::quad::SphereRule::new(n, 4).points.clone()
    };
    let mut last = 0.0;
    let mut y = vec![0.0; n];
    for k in -24..=48 {
        let r = 10f64.powf(k as f64 / 8.0);
        for d in &dirs {
            for i in 0..n {
                y[i] = r * d[i];
            }
            let v = f.eval_slice(&y)?;
            let on = match sign {
                Sign::Plus => v > 0.0,
                Sign::Minus => v < 0.0,
            };
            if on {
                last = r;
            }
        }
    }
    if last >= 1e6 {
        return Err(Error::Precondition(format!(
            "the {} part of the density is not compactly supported",
            if sign == Sign::Plus { "positive" } else { "negative" }
        )));
    }
    Ok(last)
}

/// Samples `L(f)(x) + alpha log|x|` on `|x| in radii` (first axis).
pub fn potential_bound_check(f: &ScalarField, sign: Sign, radii: &[f64]) -> Result<BoundMargins> {
    let support = part_support(f, sign)?;
    let ev = PotentialEvaluator::new(f, PotentialConfig::default())?;
    let alpha = ev.alpha().alpha_hat;
    let n = f.dim();
    let mut samples = Vec::with_capacity(radii.len());
    for &r in radii {
        if !(r > 0.0) {
            return Err(Error::Precondition("sample radii must be positive".into()));
        }
        let v = ev.eval(Point::on_axis(n, r).coords())? + alpha * r.ln();
        samples.push([r, v]);
    }
    let max = samples.iter().map(|s| s[1]).fold(f64::NEG_INFINITY, f64::max);
    let min = samples.iter().map(|s| s[1]).fold(f64::INFINITY, f64::min);
    Ok(BoundMargins {
        sign,
        alpha,
        max,
        min,
        samples,
        part_support: support,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{E, PI};

    fn d(n: i64) -> Dimension {
        Dimension::new(n).unwrap()
    }

    fn disk(n: Dimension) -> ScalarField {
        ScalarField::from_fn(n, "2*1_{B_1}", true, Some(1.0), |x| {
            Ok(if norm(x) <= 1.0 { 2.0 } else { 0.0 })
        })
        .unwrap()
    }

    #[test]
    fn mass_examples() {
        assert_eq!(total_mass_alpha(&ScalarField::zero(d(2))).unwrap().alpha_hat, 0.0);
        let a = total_mass_alpha(&disk(d(2))).unwrap().alpha_hat;
        assert!((a - 1.0).abs() < 1e-10, "{a}");
        let s = ScalarField::parse("4/(1+r^2)^2", d(2)).unwrap();
        let a = total_mass_alpha(&s).unwrap().alpha_hat;
        assert!((a - 2.0).abs() < 1e-9, "{a}");
    }

    #[test]
    fn non_integrable_density() {
        let f = ScalarField::parse("1/(1+r^2)", d(2)).unwrap();
        assert!(matches!(total_mass_alpha(&f), Err(Error::NonIntegrable(_))));
    }

    #[test]
    fn disk_potential_closed_form() {
        let ev = PotentialEvaluator::new(&disk(d(2)), PotentialConfig::default()).unwrap();
        for r in [E, 10.0, 100.0] {
            let v = ev.eval(&[r, 0.0]).unwrap();
            assert!((v - (-0.5 - r.ln())).abs() < 1e-9, "r={r}: {v}");
        }
        assert_eq!(ev.eval(&[0.0, 0.0]).unwrap(), 0.0);
    }

    #[test]
    fn sphere_density_potential() {
        // L(4/(1+r^2)^2) = -log(1 + r^2) in the plane
        let s = ScalarField::parse("4/(1+r^2)^2", d(2)).unwrap();
        let ev = PotentialEvaluator::new(&s, PotentialConfig::default()).unwrap();
        for r in [0.3, 1.0, 7.0, 1e3] {
            let v = ev.eval(&[r, 0.0]).unwrap();
            assert!((v + (1.0 + r * r).ln()).abs() < 1e-8, "r={r}: {v}");
            let dv = ev.radial_derivative(r).unwrap();
            assert!((dv + 2.0 * r / (1.0 + r * r)).abs() < 1e-8, "r={r}: {dv}");
        }
    }

    #[test]
    fn four_dimensional_sphere_potential() {
        // Q e^{4u} = 6 e^{4u} for u = log(2/(1+r^2)); L(6 e^{4u}) = u - log 2
        let f = ScalarField::parse("6*(2/(1+r^2))^4", d(4)).unwrap();
        let ev = Arc::new(PotentialEvaluator::new(&f, PotentialConfig::default()).unwrap());
        assert!((ev.alpha().alpha_hat - 2.0).abs() < 1e-9);
        for r in [0.5, 2.0, 30.0] {
            let v = ev.eval(&[r, 0.0, 0.0, 0.0]).unwrap();
            assert!((v + (1.0 + r * r).ln()).abs() < 1e-8, "r={r}: {v}");
            // Δ log(1/(1+r^2)) in R^4
            let lap = ev.radial_laplacian_power(r, 1).unwrap();
            let exact = -(4.0 * 2.0 + 4.0 * r * r) / (1.0 + r * r).powi(2);
            assert!(
                (lap - exact).abs() < 1e-8 * (1.0 + exact.abs()),
                "r={r}: {lap} vs {exact}"
            );
        }
    }

    #[test]
    fn general_path_agrees_with_radial_path() {
        let g = ScalarField::parse("exp(-r^2)", d(2)).unwrap();
        let ev = PotentialEvaluator::new(&g, PotentialConfig::default()).unwrap();
        // same density, hidden behind a closure that does not claim radial symmetry
        let h = ScalarField::from_fn(d(2), "gauss", false, None, |x| Ok((-(x[0] * x[0] + x[1] * x[1])).exp())).unwrap();
        let eh = PotentialEvaluator::new(&h, PotentialConfig::default()).unwrap();
        assert!((ev.alpha().alpha_hat - PI / (2.0 * PI)).abs() < 1e-9);
        for x in [[0.5, 0.2], [3.0, -1.0]] {
            let a = ev.eval(&x).unwrap();
            let b = eh.eval(&x).unwrap();
            assert!((a - b).abs() < 1e-6, "{x:?}: {a} vs {b}");
        }
    }

    #[test]
    fn asymptote_and_bounds() {
        let radii = crate::fit::geometric_radii(10.0, 1e4, 7);
        let a = potential_asymptote(&disk(d(2)), &radii).unwrap();
        assert!((a.alpha_hat - 1.0).abs() < 0.02);
        let m = potential_bound_check(&disk(d(2)), Sign::Plus, &radii).unwrap();
        assert!((m.max + 0.5).abs() < 1e-6 && (m.min + 0.5).abs() < 1e-6);
        let z = potential_bound_check(&ScalarField::zero(d(2)), Sign::Minus, &radii).unwrap();
        assert_eq!((z.max, z.min), (0.0, 0.0));
        assert!(matches!(
            potential_asymptote(&disk(d(2)), &[10.0, 20.0, 50.0]),
            Err(Error::InsufficientWindow(_))
        ));
    }
}
