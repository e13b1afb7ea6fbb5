//! Volumes, distances and growth exponents of `g = e^{2u}|dx|^2`.

pub mod dijkstra;

use serde::{Deserialize, Serialize};

use crate::calculus::SphereConstants;
use crate::error::{Error, Result};
use crate::fields::{norm, Dimension, GridBox, Point, RadialProfile, ScalarField};
use crate::fit::{growth_estimate, GrowthEstimate};
use crate::quad::{integrate, log_tail_integral, sphere_mean_adaptive, QuadConfig, TailOutcome};

pub use dijkstra::{GridGraph, MIN_RESOLUTION};

/// Largest `n u` (or `u` along rays) accepted before reporting overflow.
pub const EXP_LIMIT: f64 = 700.0;

/// Relative tolerance of volume quadrature.
pub const VOLUME_REL_TOL: f64 = 1e-6;
/// Relative tolerance of ray quadrature.
pub const RAY_REL_TOL: f64 = 1e-10;

/// Default cells per axis of the grid distance solver.
pub const DEFAULT_RESOLUTION: usize = 64;

#[derive(Debug, Clone)]
pub struct MetricContext {
    pub u: ScalarField,
    pub radial_profile: Option<RadialProfile>,
    /// User-asserted completeness, recorded rather than decided.
    pub completeness_hint: Option<bool>,
}

impl MetricContext {
    pub fn new(u: ScalarField) -> Self {
        MetricContext {
            u,
            radial_profile: None,
            completeness_hint: None,
        }
    }

    /// Attaches a profile used for every radial evaluation of `u`.
    pub fn with_profile(mut self, p: RadialProfile) -> Result<Self> {
        if !self.u.is_radial() {
            return Err(Error::NotRadial(
                "a radial profile needs a radial conformal factor".into(),
            ));
        }
        self.radial_profile = Some(p);
        Ok(self)
    }

    pub fn with_completeness_hint(mut self, hint: Option<bool>) -> Self {
        self.completeness_hint = hint;
        self
    }

    pub fn dim(&self) -> Dimension {
        self.u.dim()
    }

    pub fn is_radial(&self) -> bool {
        self.u.is_radial()
    }

    /// `u` at radius `r` for radial metrics.
    pub fn u_radial(&self, r: f64) -> Result<f64> {
        match &self.radial_profile {
            Some(p) => Ok(p.eval(r)),
            None => self.u.radial_value(r),
        }
    }

    fn u_at(&self, x: &[f64]) -> Result<f64> {
        if self.radial_profile.is_some() {
            return self.u_radial(norm(x));
        }
        self.u.eval_slice(x)
    }

    /// `e^{k u(x)}`, with overflow reported instead of clipped.
    fn exp_u(&self, x: &[f64], k: f64) -> Result<f64> {
        checked_exp(k * self.u_at(x)?)
    }

    /// `exp(k u(e^t) + w t)` for radial metrics.
    fn exp_radial_scaled(&self, t: f64, k: f64, w: f64) -> Result<f64> {
        let v = k * self.u_radial(t.exp())?;
        if v > EXP_LIMIT {
            return Err(overflow(v));
        }
        Ok((v + w * t).exp())
    }
}

fn overflow(v: f64) -> Error {
    Error::Overflow(format!("exponent {v:.3} exceeds {EXP_LIMIT}"))
}

fn checked_exp(v: f64) -> Result<f64> {
    if v > EXP_LIMIT {
        return Err(overflow(v));
    }
    Ok(v.exp())
}

fn volume_cfg() -> QuadConfig {
    QuadConfig {
        rel_tol: VOLUME_REL_TOL,
        abs_tol: 1e-300,
        max_panels: 4000,
    }
}

fn ray_cfg() -> QuadConfig {
    QuadConfig {
        rel_tol: RAY_REL_TOL,
        abs_tol: 1e-300,
        max_panels: 4000,
    }
}

fn unit_breaks(a: f64, b: f64) -> Vec<f64> {
    if !(b > a) || !b.is_finite() {
        return Vec::new();
    }
    (a.floor() as i64 + 1..=b.ceil() as i64 - 1).map(|k| k as f64).collect()
}

/// Convergence class of an improper integral.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IntegralClass {
    Finite,
    Infinite,
    Inconclusive,
}

impl IntegralClass {
    pub fn as_str(self) -> &'static str {
        match self {
            IntegralClass::Finite => "finite",
            IntegralClass::Infinite => "infinite",
            IntegralClass::Inconclusive => "inconclusive",
        }
    }
}

/// Classification with the value when it is finite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Classified {
    pub class: IntegralClass,
    pub value: Option<f64>,
}

impl From<TailOutcome> for Classified {
    fn from(t: TailOutcome) -> Self {
        match t {
            TailOutcome::Finite(v) => Classified {
                class: IntegralClass::Finite,
                value: Some(v),
            },
            TailOutcome::Infinite => Classified {
                class: IntegralClass::Infinite,
                value: None,
            },
            TailOutcome::Inconclusive(_) => Classified {
                class: IntegralClass::Inconclusive,
                value: None,
            },
        }
    }
}

/// Spherical-mean tolerance and largest angular order of volume integrals.
const VOLUME_MEAN_TOL: f64 = VOLUME_REL_TOL;
const VOLUME_MAX_ORDER: usize = 64;

fn ball_volume(ctx: &MetricContext, center: &[f64], radius: f64) -> Result<f64> {
    shell_volume(ctx, center, 0.0, radius)
}

/// `|S^{n-1}| int_a^b m(r) r^{n-1} dr` with `m` the spherical mean of
/// `e^{nu}` about `center`, split at `r = 1` into `r` and `log r` variables.
fn shell_volume(ctx: &MetricContext, center: &[f64], a: f64, b: f64) -> Result<f64> {
    let n = ctx.dim().get();
    let nf = n as f64;
    let consts = SphereConstants::new(ctx.dim());
    let cfg = volume_cfg();
    let at_origin = center.iter().all(|c| *c == 0.0);
    let mut total = 0.0;
    if ctx.is_radial() && at_origin {
        if a < 1.0 {
            total += integrate(
                |r| Ok(checked_exp(nf * ctx.u_radial(r)?)? * r.powi(n as i32 - 1)),
                a,
                b.min(1.0),
                &[],
                &cfg,
            )?
            .0;
        }
        if b > 1.0 {
            let (ta, tb) = (a.max(1.0).ln(), b.ln());
            total += integrate(|t| ctx.exp_radial_scaled(t, nf, nf), ta, tb, &unit_breaks(ta, tb), &cfg)?.0;
        }
        return Ok(consts.boundary_area * total);
    }
    let mean = |r: f64| -> Result<f64> {
        if r == 0.0 {
            return ctx.exp_u(center, nf);
        }
        let mut y = vec![0.0; n];
        sphere_mean_adaptive(
            n,
            |w| {
                for i in 0..n {
                    y[i] = center[i] + r * w[i];
                }
                ctx.exp_u(&y, nf)
            },
            VOLUME_MEAN_TOL,
            4,
            VOLUME_MAX_ORDER,
        )
    };
    if a < 1.0 {
        total += integrate(|r| Ok(mean(r)? * r.powi(n as i32 - 1)), a, b.min(1.0), &[], &cfg)?.0;
    }
    if b > 1.0 {
        let (ta, tb) = (a.max(1.0).ln(), b.ln());
        total += integrate(
            |t| {
                let m = mean(t.exp())?;
                Ok(if m == 0.0 { 0.0 } else { (m.ln() + nf * t).exp() })
            },
            ta,
            tb,
            &unit_breaks(ta, tb),
            &cfg,
        )?
        .0;
    }
    Ok(consts.boundary_area * total)
}

/// `V_g(B_R(center)) = int_{B_R(center)} e^{nu} dx`.
pub fn conformal_volume(ctx: &MetricContext, radius: f64, center: Option<&Point>) -> Result<f64> {
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(Error::Precondition(format!(
            "ball radius must be positive and finite, got {radius}"
        )));
    }
    let n = ctx.dim().get();
    let origin = vec![0.0; n];
    let c = match center {
        Some(p) => {
            if p.dim() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: p.dim(),
                });
            }
            p.coords()
        }
        None => &origin,
    };
    ball_volume(ctx, c, radius)
}

/// Total volume `int_{R^n} e^{nu}` by the dyadic tail test.
pub fn total_volume(ctx: &MetricContext) -> Result<Classified> {
    let n = ctx.dim().get();
    let nf = n as f64;
    let consts = SphereConstants::new(ctx.dim());
    let cfg = volume_cfg();
    let head = ball_volume(ctx, &vec![0.0; n], 1.0)?;
    let outcome = if ctx.is_radial() {
        log_tail_integral(|t| ctx.exp_radial_scaled(t, nf, nf), 0.0, &cfg)?
    } else {
        let mean = |t: f64| -> Result<f64> {
            let r = t.exp();
            let mut y = vec![0.0; n];
            let m = sphere_mean_adaptive(
                n,
                |w| {
                    for i in 0..n {
                        y[i] = r * w[i];
                    }
                    ctx.exp_u(&y, nf)
                },
                VOLUME_MEAN_TOL,
                4,
                VOLUME_MAX_ORDER,
            )?;
            Ok(if m == 0.0 { 0.0 } else { (m.ln() + nf * t).exp() })
        };
        log_tail_integral(mean, 0.0, &cfg)?
    };
    let mut c = Classified::from(outcome);
    if let Some(v) = c.value.as_mut() {
        *v = head + consts.boundary_area * *v;
    }
    Ok(c)
}

/// Slope of `log V_g(B_R)` against `log |B_R|`.
pub fn volume_growth(ctx: &MetricContext, radii: &[f64]) -> Result<GrowthEstimate> {
    check_radii(radii)?;
    let consts = SphereConstants::new(ctx.dim());
    let nf = ctx.dim().get() as f64;
    let mut x = Vec::with_capacity(radii.len());
    let mut y = Vec::with_capacity(radii.len());
    let origin = vec![0.0; ctx.dim().get()];
    // cumulative shells: each range is integrated once
    let mut v = 0.0;
    let mut inner = 0.0;
    for &r in radii {
        v += shell_volume(ctx, &origin, inner, r)?;
        inner = r;
        if !(v > 0.0) {
            return Err(Error::Domain(format!(
                "conformal volume {v} at R = {r} is not positive"
            )));
        }
        x.push(consts.unit_ball_volume.ln() + nf * r.ln());
        y.push(v.ln());
    }
    growth_estimate(radii, &x, &y)
}

fn check_radii(radii: &[f64]) -> Result<()> {
    if radii.len() < 3 {
        return Err(Error::InsufficientWindow(format!(
            "need at least 3 radii, got {}",
            radii.len()
        )));
    }
    if radii.iter().any(|r| !(*r > 0.0) || !r.is_finite()) {
        return Err(Error::Precondition("radii must be positive and finite".into()));
    }
    if radii.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Precondition("radii must be strictly increasing".into()));
    }
    Ok(())
}

/// `delta(x, y) = V_g(B_{|x-y|/2}((x+y)/2))^{1/n}`.
pub fn measure_distance(ctx: &MetricContext, x: &Point, y: &Point) -> Result<f64> {
    let n = ctx.dim().get();
    for p in [x, y] {
        if p.dim() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: p.dim(),
            });
        }
    }
    let (a, b) = (x.coords(), y.coords());
    let half = 0.5 * a.iter().zip(b).map(|(p, q)| (p - q) * (p - q)).sum::<f64>().sqrt();
    if half == 0.0 {
        return Err(Error::Precondition("measure distance needs distinct points".into()));
    }
    let mid: Vec<f64> = a.iter().zip(b).map(|(p, q)| 0.5 * (p + q)).collect();
    Ok(ball_volume(ctx, &mid, half)?.powf(1.0 / n as f64))
}

/// Length of a ray segment, with the convergence class when `r1 = inf`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RayLength {
    /// Integral value (`inf` when divergent, partial sum when inconclusive).
    pub value: f64,
    pub class: IntegralClass,
}

impl RayLength {
    pub fn divergent(&self) -> bool {
        self.class == IntegralClass::Infinite
    }
}

/// `int_{r0}^{r1} e^{u(t d)} dt` for a unit direction `d`; `r1` may be infinite.
pub fn ray_length(ctx: &MetricContext, direction: &[f64], r0: f64, r1: f64) -> Result<RayLength> {
    let n = ctx.dim().get();
    if direction.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: direction.len(),
        });
    }
    let dn = norm(direction);
    if (dn - 1.0).abs() > 1e-12 {
        return Err(Error::Precondition(format!(
            "direction must be a unit vector, |d| = {dn}"
        )));
    }
    if !(r0 >= 0.0) || !(r1 > r0) {
        return Err(Error::Precondition(format!("need 0 <= r0 < r1, got {r0}, {r1}")));
    }
    let cfg = ray_cfg();
    let radial = ctx.is_radial();
    let u_at = |t: f64| -> Result<f64> {
        if radial {
            ctx.u_radial(t)
        } else {
            let y: Vec<f64> = direction.iter().map(|d| t * d).collect();
            ctx.u.eval_slice(&y)
        }
    };
    // e^{u} dt = exp(u(e^s) + s) ds
    let scaled = |s: f64| -> Result<f64> {
        let v = u_at(s.exp())?;
        if v > EXP_LIMIT {
            return Err(overflow(v));
        }
        Ok((v + s).exp())
    };
    let mut total = 0.0;
    if r0 < 1.0 {
        let hi = r1.min(1.0);
        total += integrate(|t| checked_exp(u_at(t)?), r0, hi, &[], &cfg)?.0;
    }
    if r1 <= 1.0 {
        return Ok(RayLength {
            value: total,
            class: IntegralClass::Finite,
        });
    }
    let s0 = r0.max(1.0).ln();
    if r1.is_finite() {
        let s1 = r1.ln();
        total += integrate(scaled, s0, s1, &unit_breaks(s0, s1), &cfg)?.0;
        return Ok(RayLength {
            value: total,
            class: IntegralClass::Finite,
        });
    }
    Ok(match log_tail_integral(scaled, s0, &cfg)? {
        TailOutcome::Finite(v) => RayLength {
            value: total + v,
            class: IntegralClass::Finite,
        },
        TailOutcome::Infinite => RayLength {
            value: f64::INFINITY,
            class: IntegralClass::Infinite,
        },
        TailOutcome::Inconclusive(v) => RayLength {
            value: total + v,
            class: IntegralClass::Inconclusive,
        },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistanceMethod {
    RadialRay,
    GridDijkstra,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceResult {
    pub value: f64,
    pub method: DistanceMethod,
    pub resolution: Option<GridBox>,
    /// True for path-based (upper bound) estimates.
    pub upper_bound_flag: bool,
}

/// How [`geodesic_distance`] should proceed.
#[derive(Debug, Clone, PartialEq)]
pub enum DistanceRequest {
    /// Radial ray when possible, otherwise a grid around the two points.
    Auto,
    RadialRay,
    Grid(GridBox),
}

/// Box around `x` and `y` padded by half their separation (at least 1).
pub fn default_box(x: &[f64], y: &[f64], cells: usize) -> Result<GridBox> {
    let sep = x.iter().zip(y).map(|(p, q)| (p - q) * (p - q)).sum::<f64>().sqrt();
    let pad = (0.5 * sep).max(1.0);
    let lo = x.iter().zip(y).map(|(p, q)| p.min(*q) - pad).collect();
    let hi = x.iter().zip(y).map(|(p, q)| p.max(*q) + pad).collect();
    GridBox::new(lo, hi, cells)
}

pub fn geodesic_distance(ctx: &MetricContext, x: &Point, y: &Point, req: &DistanceRequest) -> Result<DistanceResult> {
    let n = ctx.dim().get();
    for p in [x, y] {
        if p.dim() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: p.dim(),
            });
        }
    }
    let (a, b) = (x.coords(), y.coords());
    let ray_ok = ctx.is_radial() && (norm(a) == 0.0 || norm(b) == 0.0);
    match req {
        DistanceRequest::RadialRay => {
            if !ray_ok {
                return Err(Error::Precondition(
                    "ray distances need a radial metric and an endpoint at the origin".into(),
                ));
            }
            radial_distance(ctx, a, b)
        }
        DistanceRequest::Auto if ray_ok => radial_distance(ctx, a, b),
        DistanceRequest::Auto => {
            let grid = default_box(a, b, DEFAULT_RESOLUTION)?;
            grid_distance(ctx, a, b, &grid)
        }
        DistanceRequest::Grid(grid) => grid_distance(ctx, a, b, grid),
    }
}

fn radial_distance(ctx: &MetricContext, a: &[f64], b: &[f64]) -> Result<DistanceResult> {
    let r = norm(a).max(norm(b));
    let value = if r == 0.0 {
        0.0
    } else {
        let mut d = vec![0.0; a.len()];
        d[0] = 1.0;
        ray_length(ctx, &d, 0.0, r)?.value
    };
    Ok(DistanceResult {
        value,
        method: DistanceMethod::RadialRay,
        resolution: None,
        upper_bound_flag: false,
    })
}

fn grid_distance(ctx: &MetricContext, a: &[f64], b: &[f64], grid: &GridBox) -> Result<DistanceResult> {
    if grid.dim() != a.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            got: grid.dim(),
        });
    }
    let w = |p: &[f64]| ctx.exp_u(p, 1.0);
    for p in [a, b] {
        if !grid.contains(p) {
            return Err(Error::OutOfBox(format!("{p:?} lies outside the grid box")));
        }
    }
    let graph = GridGraph::build(grid, &w)?;
    Ok(DistanceResult {
        value: graph.distance(&w, a, b)?,
        method: DistanceMethod::GridDijkstra,
        resolution: Some(grid.clone()),
        upper_bound_flag: true,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiameterEstimate {
    pub class: IntegralClass,
    /// Origin-to-infinity ray length (antipodal distance for radial metrics).
    pub value: Option<f64>,
    /// Twice the longest ray, an upper bound for the diameter.
    pub upper_bound: Option<f64>,
}

/// Finite/infinite diameter from rays leaving the origin.
pub fn diameter_estimate(ctx: &MetricContext) -> Result<DiameterEstimate> {
    let n = ctx.dim().get();
    let dirs: Vec<Vec<f64>> = if ctx.is_radial() {
        let mut e = vec![0.0; n];
        e[0] = 1.0;
        vec![e]
    } else {
        let mut v = Vec::new();
        for i in 0..n {
            for s in [1.0, -1.0] {
                let mut e = vec![0.0; n];
                e[i] = s;
                v.push(e);
            }
        }
        let c = 1.0 / (n as f64).sqrt();
        v.push(vec![c; n]);
        v.push(vec![-c; n]);
        v
    };
    let mut rays = Vec::with_capacity(dirs.len());
    for d in &dirs {
        rays.push(ray_length(ctx, d, 0.0, f64::INFINITY)?);
    }
    if rays.iter().all(|r| r.class == IntegralClass::Finite) {
        let longest = rays.iter().map(|r| r.value).fold(0.0, f64::max);
        return Ok(DiameterEstimate {
            class: IntegralClass::Finite,
            value: Some(longest),
            upper_bound: Some(2.0 * longest),
        });
    }
    let class = if rays.iter().all(|r| r.class == IntegralClass::Infinite) {
        IntegralClass::Infinite
    } else {
        IntegralClass::Inconclusive
    };
    Ok(DiameterEstimate {
        class,
        value: None,
        upper_bound: None,
    })
}

/// Growth exponent of `R -> d_g(p, p + R e_1)`.
///
/// Radial metrics with `p = 0` use exact ray lengths and fit the increments
/// `d(R_{k+1}) - d(R_k)`, clamped at zero: this has the same limit as
/// `log d / log R` but no additive constant to bias finite windows.
/// Otherwise grid distances are fitted directly.
pub fn distance_growth_exponent(ctx: &MetricContext, p: &Point, radii: &[f64]) -> Result<GrowthEstimate> {
    check_radii(radii)?;
    let n = ctx.dim();
    if p.dim() != n.get() {
        return Err(Error::DimensionMismatch {
            expected: n.get(),
            got: p.dim(),
        });
    }
    let x: Vec<f64> = radii.iter().map(|r| r.ln()).collect();
    if ctx.is_radial() && p.norm() == 0.0 {
        let mut e = vec![0.0; n.get()];
        e[0] = 1.0;
        let mut lx = Vec::new();
        let mut ly = Vec::new();
        let mut prev = ray_length(ctx, &e, 0.0, radii[0])?.value;
        let mut start = radii[0];
        for &r in &radii[1..] {
            let inc = ray_length(ctx, &e, start, r)?.value;
            if inc > 0.0 {
                // midpoint radius of the increment in log scale
                lx.push(0.5 * (start.ln() + r.ln()));
                ly.push(inc.ln() - (r / start).ln().ln());
            }
            prev += inc;
            start = r;
        }
        if prev == 0.0 || lx.len() < 2 {
            return Err(Error::Domain("ray distances vanish on the window".into()));
        }
        let mut est = growth_estimate(radii, &lx, &ly)?;
        // increments per unit log R scale like R^p; bounded distances give p < 0
        for v in [
            &mut est.exponent,
            &mut est.full_exponent,
            &mut est.sup_exponent,
            &mut est.inf_exponent,
        ] {
            *v = v.max(0.0);
        }
        return Ok(est);
    }
    let mut y = Vec::with_capacity(radii.len());
    for &r in radii {
        let mut q = p.coords().to_vec();
        q[0] += r;
        let q = Point::new(n, q)?;
        let d = geodesic_distance(ctx, p, &q, &DistanceRequest::Auto)?.value;
        y.push(d.ln());
    }
    growth_estimate(radii, &x, &y)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatioStats {
    pub min: f64,
    pub max: f64,
    pub mean: f64,
    pub count: usize,
}

/// Statistics of `d_g / delta` over point pairs.
pub fn strong_ainfty_ratio(ctx: &MetricContext, pairs: &[(Point, Point)]) -> Result<RatioStats> {
    if pairs.is_empty() {
        return Err(Error::Precondition("no point pairs given".into()));
    }
    let mut ratios = Vec::with_capacity(pairs.len());
    for (x, y) in pairs {
        if x == y {
            return Err(Error::Precondition("identical points in a pair".into()));
        }
        let d = geodesic_distance(ctx, x, y, &DistanceRequest::Auto)?.value;
        let delta = measure_distance(ctx, x, y)?;
        ratios.push(d / delta);
    }
    Ok(RatioStats {
        min: ratios.iter().copied().fold(f64::INFINITY, f64::min),
        max: ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        mean: ratios.iter().sum::<f64>() / ratios.len() as f64,
        count: ratios.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fit::geometric_radii;
    use std::f64::consts::PI;

    fn d2() -> Dimension {
        Dimension::new(2).unwrap()
    }

    fn ctx(src: &str) -> MetricContext {
        MetricContext::new(ScalarField::parse(src, d2()).unwrap())
    }

    fn cone(a: f64) -> MetricContext {
        ctx(&format!("-({a}/2)*log(1+r^2)"))
    }

    const SPHERE: &str = "log(2/(1+r^2))";

    #[test]
    fn volume_examples() {
        assert!((conformal_volume(&ctx("0"), 1.0, None).unwrap() - PI).abs() < 1e-9);
        let s = ctx(SPHERE);
        assert!((conformal_volume(&s, 1.0, None).unwrap() - 2.0 * PI).abs() < 1e-8);
        let big = conformal_volume(&s, 1e4, None).unwrap();
        assert!((big - 4.0 * PI).abs() < 1e-4 * 4.0 * PI);
        let t = total_volume(&s).unwrap();
        assert_eq!(t.class, IntegralClass::Finite);
        assert!((t.value.unwrap() - 4.0 * PI).abs() < 1e-6);
        assert_eq!(total_volume(&ctx("0")).unwrap().class, IntegralClass::Infinite);
    }

    #[test]
    fn off_centre_volume_matches_radial_path() {
        // flat ball off the origin, and the sphere ball about the origin via the nested path
        let p = Point::new(d2(), vec![3.0, -1.0]).unwrap();
        assert!((conformal_volume(&ctx("0"), 2.0, Some(&p)).unwrap() - 4.0 * PI).abs() < 1e-6);
        let s = ctx(SPHERE);
        let hidden = MetricContext::new(
            ScalarField::from_fn(d2(), "sphere", false, None, |x| {
                Ok((2.0 / (1.0 + x[0] * x[0] + x[1] * x[1])).ln())
            })
            .unwrap(),
        );
        let a = conformal_volume(&s, 3.0, None).unwrap();
        let b = conformal_volume(&hidden, 3.0, None).unwrap();
        assert!((a - b).abs() < 1e-6 * a);
    }

    #[test]
    fn growth_examples() {
        let radii = geometric_radii(1e6, 1e30, 13);
        let flat = volume_growth(&ctx("0"), &radii).unwrap();
        assert!((flat.exponent - 1.0).abs() < 0.01);
        let c = volume_growth(&cone(0.5), &radii).unwrap();
        assert!((c.exponent - 0.5).abs() < 0.05);
        let s = volume_growth(&ctx(SPHERE), &radii).unwrap();
        assert!(s.exponent.abs() < 0.05);
    }

    #[test]
    fn measure_distance_examples() {
        let x = Point::new(d2(), vec![0.3, 0.1]).unwrap();
        let y = Point::new(d2(), vec![-1.0, 2.0]).unwrap();
        let flat = measure_distance(&ctx("0"), &x, &y).unwrap();
        let sep = (1.3f64 * 1.3 + 1.9 * 1.9).sqrt();
        assert!((flat - PI.sqrt() * sep / 2.0).abs() < 1e-8);
        let s = ctx(SPHERE);
        let a = measure_distance(&s, &x, &y).unwrap();
        let b = measure_distance(&s, &y, &x).unwrap();
        assert!((a - b).abs() < 1e-12 * a);
        assert!(measure_distance(&s, &x, &x).is_err());
    }

    #[test]
    fn sphere_measure_distance_against_brute_force() {
        // 10^7-point midpoint rule in polar coordinates about (1, 0)
        let (nr, nt) = (2000usize, 5000usize);
        let mut sum = 0.0;
        for i in 0..nr {
            let rho = (i as f64 + 0.5) / nr as f64;
            let mut ring = 0.0;
            for j in 0..nt {
                let th = 2.0 * PI * (j as f64 + 0.5) / nt as f64;
                let (x, y) = (1.0 + rho * th.cos(), rho * th.sin());
                ring += 4.0 / (1.0 + x * x + y * y).powi(2);
            }
            sum += ring * rho;
        }
        let golden = (sum * (2.0 * PI / nt as f64) / nr as f64).sqrt();
        let got = measure_distance(
            &ctx(SPHERE),
            &Point::origin(d2()),
            &Point::new(d2(), vec![2.0, 0.0]).unwrap(),
        )
        .unwrap();
        assert!((got - golden).abs() < 1e-6 * golden, "{got} vs {golden}");
    }

    #[test]
    fn ray_examples() {
        let e = [1.0, 0.0];
        let f = ray_length(&ctx("0"), &e, 0.5, 3.0).unwrap();
        assert!((f.value - 2.5).abs() < 1e-12);
        let s = ray_length(&ctx(SPHERE), &e, 0.0, f64::INFINITY).unwrap();
        assert!((s.value - PI).abs() < 1e-9);
        let c = ray_length(&cone(2.0), &e, 0.0, f64::INFINITY).unwrap();
        assert!((c.value - PI / 2.0).abs() < 1e-9);
        assert!(ray_length(&cone(0.5), &e, 0.0, f64::INFINITY).unwrap().divergent());
        assert!(ray_length(&ctx("0"), &[1.0, 1.0], 0.0, 1.0).is_err());
    }

    #[test]
    fn geodesic_examples() {
        let o = Point::origin(d2());
        let y = Point::new(d2(), vec![1.0, 0.0]).unwrap();
        let flat = geodesic_distance(
            &ctx("x1*0"),
            &o,
            &y,
            &DistanceRequest::Grid(GridBox::cube(2, 2.0, 16).unwrap()),
        )
        .unwrap();
        assert!(flat.upper_bound_flag);
        assert!(flat.value >= 1.0 - 1e-12 && flat.value <= 1.03);
        let s = ctx(SPHERE);
        let d = geodesic_distance(&s, &o, &y, &DistanceRequest::Auto).unwrap();
        assert_eq!(d.method, DistanceMethod::RadialRay);
        assert!((d.value - PI / 2.0).abs() < 1e-10);
        let far = Point::new(d2(), vec![0.0, 1e3]).unwrap();
        let d = geodesic_distance(&s, &far, &o, &DistanceRequest::RadialRay).unwrap();
        assert!((d.value - 2.0 * 1e3f64.atan()).abs() < 1e-10);
        let g = GridBox::cube(2, 1.0, 7).unwrap();
        assert!(geodesic_distance(&s, &o, &y, &DistanceRequest::Grid(g)).is_err());
        let g = GridBox::cube(2, 0.5, 8).unwrap();
        assert!(matches!(
            geodesic_distance(&s, &o, &y, &DistanceRequest::Grid(g)),
            Err(Error::OutOfBox(_))
        ));
    }

    #[test]
    fn grid_agrees_with_rays_on_the_sphere() {
        let s = ctx(SPHERE);
        let o = Point::origin(d2());
        let y = Point::new(d2(), vec![1.5, 0.5]).unwrap();
        let g = geodesic_distance(&s, &o, &y, &DistanceRequest::Grid(GridBox::cube(2, 3.0, 64).unwrap())).unwrap();
        let r = geodesic_distance(&s, &o, &y, &DistanceRequest::RadialRay).unwrap();
        assert!(
            g.value >= r.value * (1.0 - 1e-6) && g.value <= 1.03 * r.value,
            "{} vs {}",
            g.value,
            r.value
        );
    }

    #[test]
    fn diameter_examples() {
        let s = diameter_estimate(&ctx(SPHERE)).unwrap();
        assert_eq!(s.class, IntegralClass::Finite);
        assert!((s.value.unwrap() - PI).abs() < 1e-6);
        assert_eq!(diameter_estimate(&ctx("0")).unwrap().class, IntegralClass::Infinite);
    }

    #[test]
    fn distance_exponent_examples() {
        let radii = geometric_radii(10.0, 1e4, 13);
        let o = Point::origin(d2());
        let f = distance_growth_exponent(&ctx("0"), &o, &radii).unwrap();
        assert!((f.exponent - 1.0).abs() < 0.01);
        let c = distance_growth_exponent(&cone(0.5), &o, &radii).unwrap();
        assert!((c.exponent - 0.5).abs() < 0.05, "{c:?}");
        let s = distance_growth_exponent(&ctx(SPHERE), &o, &radii).unwrap();
        assert!(s.exponent.abs() < 0.05);
    }

    #[test]
    fn ainfty_ratio_flat() {
        let f = ctx("x1*0");
        let pairs = vec![
            (
                Point::new(d2(), vec![0.0, 0.0]).unwrap(),
                Point::new(d2(), vec![1.0, 0.0]).unwrap(),
            ),
            (
                Point::new(d2(), vec![2.0, 1.0]).unwrap(),
                Point::new(d2(), vec![2.0, -3.0]).unwrap(),
            ),
        ];
        let r = strong_ainfty_ratio(&f, &pairs).unwrap();
        let exact = 2.0 / PI.sqrt();
        assert!(r.min >= exact * (1.0 - 1e-6) && r.max <= exact * 1.03, "{r:?}");
        let same = vec![(pairs[0].0.clone(), pairs[0].0.clone())];
        assert!(strong_ainfty_ratio(&f, &same).is_err());
    }
}
