//! Iterated Laplacians, curvature of conformal factors and polyharmonic
//! polynomials.

pub mod pizzetti;
pub mod poly;

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::{norm, Dimension, FieldSource, Point, ScalarField};
use crate::jet::Jet;
use crate::quad::gamma;

pub use pizzetti::{ball_mean, pizzetti_check, pizzetti_coeffs, PizzettiCoefficients};
pub use poly::{apply_laplacian_poly, ph_dimension, ph_dimension_closed_form, Polynomial};

/// Sphere and ball constants of R^n.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SphereConstants {
    pub n: usize,
    /// `|S^n| = 2 pi^{(n+1)/2} / Gamma((n+1)/2)`.
    pub sphere_volume: f64,
    /// `2 / ((n-1)! |S^n|)`.
    pub green_constant: f64,
    /// Volume of the unit ball of R^n.
    pub unit_ball_volume: f64,
    /// `|S^{n-1}|`, the area of the unit sphere of R^n.
    pub boundary_area: f64,
}

impl SphereConstants {
    pub fn new(dim: Dimension) -> Self {
        let n = dim.get();
        let nf = n as f64;
        let sphere_volume = 2.0 * PI.powf((nf + 1.0) / 2.0) / gamma((nf + 1.0) / 2.0);
        let fact: f64 = (1..n).map(|k| k as f64).product();
        SphereConstants {
            n,
            sphere_volume,
            green_constant: 2.0 / (fact * sphere_volume),
            unit_ball_volume: PI.powf(nf / 2.0) / gamma(nf / 2.0 + 1.0),
            boundary_area: 2.0 * PI.powf(nf / 2.0) / gamma(nf / 2.0),
        }
    }

    /// `(n-1)! |S^n| / 2`, the reciprocal of the Green constant.
    pub fn total_curvature_unit(&self) -> f64 {
        1.0 / self.green_constant
    }
}

/// How [`laplacian_power`] differentiates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum LaplacianMethod {
    /// Closed-form chain or exact Taylor jets; errors when unavailable.
    Analytic,
    /// Composed centred stencils; `None` uses the default step.
    FiniteDifference(Option<f64>),
    /// Radial recursion `phi'' + (n-1)/r phi'`.
    Radial,
    /// Best available: analytic, then radial, then finite differences.
    Auto,
}

/// Default finite-difference step `max(1e-2, 1e-2 (1 + |x|))`.
pub fn default_step(x: &[f64]) -> f64 {
    (1e-2 * (1.0 + norm(x))).max(1e-2)
}

/// `Δ^m f(x)`.
pub fn laplacian_power(f: &ScalarField, x: &Point, m: usize, method: LaplacianMethod) -> Result<f64> {
    laplacian_power_slice(f, x.coords(), m, method)
}

pub fn laplacian_power_slice(f: &ScalarField, x: &[f64], m: usize, method: LaplacianMethod) -> Result<f64> {
    let n = f.dim().get();
    if x.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: x.len(),
        });
    }
    if m == 0 {
        return f.eval_slice(x);
    }
    if f.is_zero() {
        return Ok(0.0);
    }
    if let Some(rho) = f.source().support_radius() {
        // Stencils straddling the support boundary still need evaluation.
        if norm(x) > rho && !matches!(method, LaplacianMethod::FiniteDifference(_)) {
            return Ok(0.0);
        }
    }
    match method {
        LaplacianMethod::Analytic => analytic(f, x, m)?.ok_or_else(|| {
            Error::MissingCapability(format!(
                "no closed-form Laplacian chain of length {m} for {}",
                f.describe()
            ))
        }),
        LaplacianMethod::Radial => {
            if !f.is_radial() {
                return Err(Error::NotRadial(format!(
                    "radial Laplacian requested for {}",
                    f.describe()
                )));
            }
            let r = norm(x);
            if let Some(v) = radial_jet_chain(f, r, m) {
                return v;
            }
            radial_fd(f, r, m, default_step(x))
        }
        LaplacianMethod::FiniteDifference(h) => {
            let h = h.unwrap_or_else(|| default_step(x));
            fd_power(f, x, m, h)
        }
        LaplacianMethod::Auto => {
            if let Some(v) = analytic(f, x, m)? {
                return Ok(v);
            }
            if f.is_radial() {
                return radial_fd(f, norm(x), m, default_step(x));
            }
            // Exact Δ from jets where possible, composed with stencils.
            let h = default_step(x);
            if f.caps().taylor {
                return fd_power_of(|y| exact_taylor_laplacian(f, y), x, m - 1, h);
            }
            fd_power(f, x, m, h)
        }
    }
}

/// Closed-form `Δ^m f(x)` when the field offers one.
fn analytic(f: &ScalarField, x: &[f64], m: usize) -> Result<Option<f64>> {
    let src = f.source();
    if let Some(v) = src.laplacian_power(x, m) {
        return v.map(Some);
    }
    if f.is_radial() {
        if let Some(v) = radial_jet_chain(f, norm(x), m) {
            return v.map(Some);
        }
    }
    if f.caps().taylor {
        let v = if m == 1 {
            exact_taylor_laplacian(f, x)
        } else {
            exact_taylor_power(f, x, m)
        };
        return v.map(Some);
    }
    Ok(None)
}

/// `Δ^m f(x)` from directional jets: averaging `(w . grad)^{2m}` over the
/// unit sphere gives `K Δ^m` with `K = (1/2)_m / (n/2)_m`, and a sphere rule
/// exact to degree `2m` makes the average exact.
fn exact_taylor_power(f: &ScalarField, x: &[f64], m: usize) -> Result<f64> {
    let n = x.len();
    let rule = crate::quad::SphereRule::new(n, m + 2);
    let mut k = 1.0;
    let mut fact = 1.0;
    for j in 0..m {
        k *= (0.5 + j as f64) / (n as f64 / 2.0 + j as f64);
    }
    for j in 1..=2 * m {
        fact *= j as f64;
    }
    let avg = rule.mean(|w| {
        let j = f
            .source()
            .line_jet(x, w, 2 * m)
            .ok_or_else(|| Error::MissingCapability("Taylor jets".into()))??;
        Ok(j.c[2 * m])
    })?;
    Ok(fact * avg / k)
}

fn exact_taylor_laplacian(f: &ScalarField, x: &[f64]) -> Result<f64> {
    let n = x.len();
    let mut s = 0.0;
    let mut e = vec![0.0; n];
    for i in 0..n {
        e[i] = 1.0;
        let j = f
            .source()
            .line_jet(x, &e, 2)
            .ok_or_else(|| Error::MissingCapability("Taylor jets".into()))??;
        s += 2.0 * j.c[2];
        e[i] = 0.0;
    }
    Ok(s)
}

/// `(D - a)(D - b)` applied to a jet in the log variable.
fn log_factor(j: &Jet, a: f64, b: f64) -> Jet {
    let d1 = j.derivative_jet();
    let d2 = d1.derivative_jet();
    d2.sub(&d1.scale(a + b)).add(&j.scale(a * b))
}

/// `r^{2m} Δ^m phi` at `r = e^t` for a radial field with log-radial jets.
///
/// With `psi(t) = phi(e^t)`, `Δ` acting on `r^{-2k} chi(t)` gives
/// `r^{-2k-2} (D - 2k)(D - 2k + n - 2) chi`, so the whole chain is a
/// constant-coefficient operator in `D = d/dt`.
pub fn log_scaled_chain(f: &ScalarField, t: f64, m: usize) -> Option<Result<f64>> {
    let n = f.dim().get() as f64;
    let jet = match f.source().log_radial_jet(t, 2 * m)? {
        Ok(j) => j,
        Err(e) => return Some(Err(e)),
    };
    let mut j = jet;
    for k in 0..m {
        let a = 2.0 * k as f64;
        j = log_factor(&j, a, a + 2.0 - n);
    }
    let v = j.c[0];
    if !v.is_finite() {
        return Some(Err(Error::Overflow(format!("r^{{2m}} Δ^m at log r = {t}"))));
    }
    Some(Ok(v))
}

/// `Δ^m phi(r)` by Taylor jets: in `log r` for `r >= 1`, in `r` below.
pub fn radial_jet_chain(f: &ScalarField, r: f64, m: usize) -> Option<Result<f64>> {
    if r >= 1.0 {
        let t = r.ln();
        return Some(log_scaled_chain(f, t, m)?.map(|v| v * (-2.0 * m as f64 * t).exp()));
    }
    let n = f.dim().get();
    let order = 2 * m + 2;
    let mut x0 = vec![0.0; n];
    x0[0] = r;
    let mut e = vec![0.0; n];
    e[0] = 1.0;
    let mut j = match f.source().line_jet(&x0, &e, order)? {
        Ok(j) => j,
        Err(err) => return Some(Err(err)),
    };
    let rj = Jet::variable(r, order);
    for _ in 0..m {
        let d1 = j.derivative_jet();
        let d2 = d1.derivative_jet();
        let q = match d1.div(&rj) {
            Ok(q) => q,
            Err(err) => return Some(Err(err)),
        };
        j = d2.add(&q.scale((n - 1) as f64));
    }
    Some(Ok(j.c[0]))
}

/// Radial recursion with centred differences in `r`; even extension at 0.
fn radial_fd(f: &ScalarField, r: f64, m: usize, h: f64) -> Result<f64> {
    let n = f.dim().get() as f64;
    fn level(f: &ScalarField, r: f64, k: usize, h: f64, n: f64) -> Result<f64> {
        if k == 0 {
            return f.radial_value(r.abs());
        }
        let r = r.abs();
        let c = level(f, r, k - 1, h, n)?;
        let p = level(f, r + h, k - 1, h, n)?;
        if r < 0.5 * h {
            // removable singularity: Δphi(0) = n phi''(0)
            return Ok(n * 2.0 * (p - c) / (h * h));
        }
        let q = level(f, r - h, k - 1, h, n)?;
        Ok((p - 2.0 * c + q) / (h * h) + (n - 1.0) / r * (p - q) / (2.0 * h))
    }
    check_step(r, h)?;
    level(f, r, m, h, n)
}

fn check_step(x: f64, h: f64) -> Result<()> {
    if !(h > 0.0) || x + h == x || !h.is_finite() {
        return Err(Error::Precondition(format!(
            "finite-difference step {h:e} underflows at scale {x:e}"
        )));
    }
    Ok(())
}

/// Offsets (in units of `h`) and weights of the composed `m`-fold 5-point stencil.
fn stencil(n: usize, m: usize) -> Arc<Vec<(Vec<i32>, f64)>> {
    use std::sync::{Mutex, OnceLock};
    static CACHE: OnceLock<Mutex<HashMap<(usize, usize), Arc<Vec<(Vec<i32>, f64)>>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(s) = cache.lock().unwrap().get(&(n, m)) {
        return s.clone();
    }
    let mut cur: HashMap<Vec<i32>, f64> = HashMap::new();
    cur.insert(vec![0; n], 1.0);
    for _ in 0..m {
        let mut next: HashMap<Vec<i32>, f64> = HashMap::new();
        for (off, w) in &cur {
            *next.entry(off.clone()).or_insert(0.0) += -2.0 * n as f64 * w;
            for i in 0..n {
                for s in [-1, 1] {
                    let mut o = off.clone();
                    o[i] += s;
                    *next.entry(o).or_insert(0.0) += w;
                }
            }
        }
        cur = next;
    }
    let mut v: Vec<(Vec<i32>, f64)> = cur.into_iter().filter(|(_, w)| *w != 0.0).collect();
    v.sort_by(|a, b| a.0.cmp(&b.0));
    let v = Arc::new(v);
    cache.lock().unwrap().insert((n, m), v.clone());
    v
}

fn fd_power(f: &ScalarField, x: &[f64], m: usize, h: f64) -> Result<f64> {
    fd_power_of(|y| f.eval_slice(y), x, m, h)
}

/// `Δ_h^m g(x)` with the composed centred stencil.
pub fn fd_power_of<G: FnMut(&[f64]) -> Result<f64>>(mut g: G, x: &[f64], m: usize, h: f64) -> Result<f64> {
    if m == 0 {
        return g(x);
    }
    check_step(norm(x), h)?;
    let st = stencil(x.len(), m);
    let mut y = x.to_vec();
    let mut s = 0.0;
    for (off, w) in st.iter() {
        for i in 0..x.len() {
            y[i] = x[i] + off[i] as f64 * h;
        }
        s += w * g(&y)?;
    }
    Ok(s / h.powi(2 * m as i32))
}

/// Gradient from jets, the source, or centred differences.
pub fn gradient(f: &ScalarField, x: &[f64]) -> Result<Vec<f64>> {
    let n = x.len();
    if let Some(g) = f.source().gradient(x) {
        return g;
    }
    if f.caps().taylor {
        let mut g = vec![0.0; n];
        let mut e = vec![0.0; n];
        for i in 0..n {
            e[i] = 1.0;
            let j = f.source().line_jet(x, &e, 1).expect("taylor capability")?;
            g[i] = j.c[1];
            e[i] = 0.0;
        }
        return Ok(g);
    }
    let h = 6e-6 * (1.0 + norm(x));
    let mut y = x.to_vec();
    let mut g = vec![0.0; n];
    for i in 0..n {
        y[i] = x[i] + h;
        let p = f.eval_slice(&y)?;
        y[i] = x[i] - h;
        let q = f.eval_slice(&y)?;
        y[i] = x[i];
        g[i] = (p - q) / (2.0 * h);
    }
    Ok(g)
}

/// `(-Δ)^{n/2} u(x)`, the curvature density `Q_g e^{nu}`.
pub fn q_density(u: &ScalarField, x: &[f64]) -> Result<f64> {
    let m = u.dim().half();
    let v = laplacian_power_slice(u, x, m, LaplacianMethod::Auto)?;
    Ok(if m % 2 == 1 { -v } else { v })
}

/// `Q_g(x) = e^{-nu} (-Δ)^{n/2} u(x)`.
pub fn q_curvature(u: &ScalarField, x: &Point) -> Result<f64> {
    let n = u.dim().get() as f64;
    let uv = u.eval(x)?;
    if n * uv < -700.0 {
        return Err(Error::Overflow(format!(
            "e^(-nu) with nu = {} at {:?}",
            n * uv,
            x.coords()
        )));
    }
    Ok((-n * uv).exp() * q_density(u, x.coords())?)
}

/// `R_g = 2(n-1) e^{-2u} (-Δu - (n-2)/2 |∇u|^2)`, for `n >= 4`.
pub fn scalar_curvature(u: &ScalarField, x: &Point) -> Result<f64> {
    let n = u.dim().get();
    if n < 4 {
        return Err(Error::UnsupportedDimension {
            n,
            msg: "scalar curvature is used for n >= 4; use q_curvature (Gaussian curvature) for n = 2".into(),
        });
    }
    let uv = u.eval(x)?;
    if 2.0 * uv < -700.0 {
        return Err(Error::Overflow(format!(
            "e^(-2u) with 2u = {} at {:?}",
            2.0 * uv,
            x.coords()
        )));
    }
    Ok((-2.0 * uv).exp() * scalar_curvature_density(u, x.coords())?)
}

/// `R_g e^{2u} = 2(n-1)(-Δu - (n-2)/2 |∇u|^2)`.
pub fn scalar_curvature_density(u: &ScalarField, x: &[f64]) -> Result<f64> {
    let n = u.dim().get() as f64;
    let lap = laplacian_power_slice(u, x, 1, LaplacianMethod::Auto)?;
    let g = gradient(u, x)?;
    let g2: f64 = g.iter().map(|v| v * v).sum();
    Ok(2.0 * (n - 1.0) * (-lap - 0.5 * (n - 2.0) * g2))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvatureReport {
    pub point: Vec<f64>,
    pub q_value: f64,
    pub scalar_value: Option<f64>,
}

pub fn curvature_report(u: &ScalarField, x: &Point) -> Result<CurvatureReport> {
    let scalar_value = if u.dim().get() >= 4 {
        Some(scalar_curvature(u, x)?)
    } else {
        None
    };
    Ok(CurvatureReport {
        point: x.coords().to_vec(),
        q_value: q_curvature(u, x)?,
        scalar_value,
    })
}

/// `(-Δ)^{n/2} u` as a field; radial factors keep their radial structure so
/// that `f(e^t) e^{wt}` is available without overflow.
pub fn density_field(u: &ScalarField) -> ScalarField {
    if u.is_zero() || (u.source().chain_len() >= u.dim().half() && is_const(u)) {
        return ScalarField::zero(u.dim());
    }
    ScalarField::from_source(u.dim(), Arc::new(DensitySource { u: u.clone() }))
}

fn is_const(u: &ScalarField) -> bool {
    u.source().laplacian_power(&vec![0.0; u.dim().get()], 1) == Some(Ok(0.0)) && u.source().chain_len() == usize::MAX
}

#[derive(Debug)]
struct DensitySource {
    u: ScalarField,
}

impl FieldSource for DensitySource {
    fn eval(&self, x: &[f64]) -> Result<f64> {
        q_density(&self.u, x)
    }
    fn is_radial(&self) -> bool {
        self.u.is_radial()
    }
    fn support_radius(&self) -> Option<f64> {
        self.u.source().support_radius()
    }
    fn radial_scaled(&self, t: f64, w: f64) -> Option<Result<f64>> {
        if !self.u.is_radial() {
            return None;
        }
        let m = self.u.dim().half();
        // f e^{wt} = (-1)^m (r^{2m} Δ^m u) e^{(w - 2m) t}
        let v = log_scaled_chain(&self.u, t, m)?;
        let sign = if m % 2 == 1 { -1.0 } else { 1.0 };
        Some(v.and_then(|v| {
            if v == 0.0 {
                return Ok(0.0);
            }
            let out = sign * v * ((w - 2.0 * m as f64) * t).exp();
            if out.is_finite() {
                Ok(out)
            } else {
                Err(Error::Overflow(format!("scaled density at log r = {t}")))
            }
        }))
    }
    fn describe(&self) -> String {
        format!("(-Δ)^{}({})", self.u.dim().half(), self.u.describe())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(n: i64) -> Dimension {
        Dimension::new(n).unwrap()
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + b.abs())
    }

    #[test]
    fn constants() {
        let c4 = SphereConstants::new(d(4));
        assert!((c4.green_constant - 1.0 / (8.0 * PI * PI)).abs() <= 1e-14 * c4.green_constant);
        let c2 = SphereConstants::new(d(2));
        assert!((c2.green_constant - 1.0 / (2.0 * PI)).abs() <= 1e-15);
        assert!((c2.unit_ball_volume - PI).abs() < 1e-15);
        assert!((c4.unit_ball_volume - PI * PI / 2.0).abs() < 1e-14);
    }

    #[test]
    fn laplacian_examples() {
        for n in [2, 4, 6] {
            let f = ScalarField::parse("r^2", d(n)).unwrap();
            let x = Point::new(d(n), vec![0.3; n as usize]).unwrap();
            for method in [
                LaplacianMethod::Analytic,
                LaplacianMethod::Radial,
                LaplacianMethod::Auto,
            ] {
                let v = laplacian_power(&f, &x, 1, method).unwrap();
                assert!(close(v, 2.0 * n as f64, 1e-12), "n={n} {method:?}: {v}");
            }
        }
        let f = ScalarField::parse("r^4", d(4)).unwrap();
        for r in [0.0, 0.4, 2.0] {
            let x = Point::on_axis(d(4), r);
            let v = laplacian_power(&f, &x, 2, LaplacianMethod::Analytic).unwrap();
            assert!(close(v, 192.0, 1e-12), "r={r}: {v}");
        }
        let f = ScalarField::parse("log(1+r^2)", d(2)).unwrap();
        let v = laplacian_power(&f, &Point::on_axis(d(2), 1.0), 1, LaplacianMethod::Analytic).unwrap();
        assert!(close(v, 1.0, 1e-14));
    }

    #[test]
    fn finite_differences_converge_at_second_order() {
        let f = ScalarField::parse("log(2/(1+r^2))", d(2)).unwrap();
        let x = Point::new(d(2), vec![0.4, 0.3]).unwrap();
        let exact = laplacian_power(&f, &x, 1, LaplacianMethod::Analytic).unwrap();
        let e1 = (laplacian_power(&f, &x, 1, LaplacianMethod::FiniteDifference(Some(0.02))).unwrap() - exact).abs();
        let e2 = (laplacian_power(&f, &x, 1, LaplacianMethod::FiniteDifference(Some(0.01))).unwrap() - exact).abs();
        let ratio = e1 / e2;
        assert!((ratio - 4.0).abs() < 0.2, "ratio {ratio}");
    }

    #[test]
    fn curvature_examples() {
        let zero = ScalarField::zero(d(2));
        assert_eq!(q_curvature(&zero, &Point::origin(d(2))).unwrap(), 0.0);
        let sphere = ScalarField::parse("log(2/(1+r^2))", d(2)).unwrap();
        for r in [0.0, 0.5, 3.0, 100.0] {
            let q = q_curvature(&sphere, &Point::on_axis(d(2), r)).unwrap();
            assert!(close(q, 1.0, 1e-9), "r={r}: {q}");
        }
        let cone = ScalarField::parse("-(0.5/2)*log(1+r^2)", d(2)).unwrap();
        assert!(close(q_curvature(&cone, &Point::origin(d(2))).unwrap(), 1.0, 1e-12));

        let s4 = ScalarField::parse("log(2/(1+r^2))", d(4)).unwrap();
        let x = Point::new(d(4), vec![0.3, -1.0, 2.0, 0.1]).unwrap();
        assert!(close(scalar_curvature(&s4, &x).unwrap(), 12.0, 1e-10));
        assert!(close(q_curvature(&s4, &x).unwrap(), 6.0, 1e-8));
        let planted = ScalarField::parse("-x1^2", d(4)).unwrap();
        assert!(close(
            scalar_curvature(&planted, &Point::origin(d(4))).unwrap(),
            12.0,
            1e-12
        ));
        assert!(matches!(
            scalar_curvature(&sphere, &Point::origin(d(2))),
            Err(Error::UnsupportedDimension { n: 2, .. })
        ));
    }

    #[test]
    fn missing_chain_is_reported() {
        let f = ScalarField::from_fn(d(2), "x1^3", false, None, |x| Ok(x[0].powi(3))).unwrap();
        let x = Point::new(d(2), vec![0.5, 0.5]).unwrap();
        assert!(matches!(
            laplacian_power(&f, &x, 1, LaplacianMethod::Analytic),
            Err(Error::MissingCapability(_))
        ));
        let v = laplacian_power(&f, &x, 1, LaplacianMethod::FiniteDifference(None)).unwrap();
        assert!(close(v, 3.0, 1e-3));
        assert!(laplacian_power(&f, &x, 1, LaplacianMethod::FiniteDifference(Some(0.0))).is_err());
    }

    #[test]
    fn density_field_scaled() {
        let s = ScalarField::parse("log(2/(1+r^2))", d(2)).unwrap();
        let f = density_field(&s);
        // f = 4 / (1 + r^2)^2, so f r^2 at r = e^t
        let t: f64 = 3.0;
        let r = t.exp();
        let exact = 4.0 / (1.0 + r * r).powi(2) * r * r;
        assert!(close(f.radial_scaled(t, 2.0).unwrap(), exact, 1e-12));
        // large radii stay finite
        let v = f.radial_scaled(300.0, 2.0).unwrap();
        assert!(close(v, 4.0 * (-600.0f64).exp(), 1e-12));
    }

    #[test]
    fn higher_powers_from_directional_jets() {
        // Δ^2 (x1^2 x2^2) = 8 in the plane
        let f = ScalarField::parse("x1^2*x2^2 + x1", d(2)).unwrap();
        let x = Point::new(d(2), vec![0.3, -1.2]).unwrap();
        assert!(close(
            laplacian_power(&f, &x, 2, LaplacianMethod::Analytic).unwrap(),
            8.0,
            1e-12
        ));
        // Δ^3 (x1^2 x2^2 x3^2) = 48 in R^6
        let g = ScalarField::parse("x1^2*x2^2*x3^2 + exp(x4)", d(6)).unwrap();
        let y = Point::new(d(6), vec![0.1, 0.2, -0.3, 0.4, 0.0, 1.0]).unwrap();
        let v = laplacian_power(&g, &y, 3, LaplacianMethod::Analytic).unwrap();
        assert!(close(v, 48.0 + 0.4f64.exp(), 1e-10), "{v}");
        // sums keep the exact path when one part is only known through a chain
        let h = ScalarField::sum(vec![f.clone(), ScalarField::parse("x2^4", d(2)).unwrap()]).unwrap();
        assert!(close(
            laplacian_power(&h, &x, 2, LaplacianMethod::Analytic).unwrap(),
            32.0,
            1e-12
        ));
        assert_eq!(f.caps().analytic_laplacian_chain, 1);
    }
}
