//! Scalar fields on R^n: conformal factors `u`, densities `f`, cutoffs.

pub mod expr;
pub mod grid;
pub mod radial;
pub mod spec;

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jet::Jet;

pub use expr::{parse_field, FieldExpression};
pub use grid::{sample_grid, GridBox, GridField};
pub use radial::{restrict_radial, RadialProfile};

/// Ambient dimension; always even and at least 2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "i64")]
pub struct Dimension(usize);

impl TryFrom<i64> for Dimension {
    type Error = Error;
    fn try_from(n: i64) -> Result<Self> {
        Dimension::new(n)
    }
}

impl Dimension {
    pub fn new(n: i64) -> Result<Self> {
        if n >= 2 && n % 2 == 0 {
            Ok(Dimension(n as usize))
        } else {
            Err(Error::InvalidDimension(n))
        }
    }

    pub fn get(self) -> usize {
        self.0
    }

    /// n / 2, the order of the polyharmonic operator.
    pub fn half(self) -> usize {
        self.0 / 2
    }
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Point(Vec<f64>);

impl Point {
    pub fn new(dim: Dimension, coords: Vec<f64>) -> Result<Self> {
        if coords.len() != dim.get() {
            return Err(Error::DimensionMismatch {
                expected: dim.get(),
                got: coords.len(),
            });
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::Domain("point coordinates must be finite".into()));
        }
        Ok(Point(coords))
    }

    pub fn origin(dim: Dimension) -> Self {
        Point(vec![0.0; dim.get()])
    }

    /// `r * e_1`.
    pub fn on_axis(dim: Dimension, r: f64) -> Self {
        let mut v = vec![0.0; dim.get()];
        v[0] = r;
        Point(v)
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn norm(&self) -> f64 {
        norm(&self.0)
    }
}

pub fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// What a field can offer beyond point evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Capabilities {
    pub is_radial: bool,
    /// Number of Laplacian powers `Δ^k`, `k = 1..=len`, available in closed form.
    pub analytic_laplacian_chain: usize,
    pub analytic_gradient: bool,
    /// Exact Taylor expansion along lines (expression fields).
    pub taylor: bool,
    pub support_radius: Option<f64>,
}

/// Backing implementation of a [`ScalarField`].
pub trait FieldSource: Send + Sync + fmt::Debug {
    fn eval(&self, x: &[f64]) -> Result<f64>;

    fn is_radial(&self) -> bool {
        false
    }

    fn support_radius(&self) -> Option<f64> {
        None
    }

    /// Taylor jet of `h -> f(x0 + h dir)`.
    fn line_jet(&self, _x0: &[f64], _dir: &[f64], _order: usize) -> Option<Result<Jet>> {
        None
    }

    /// Taylor jet of `h -> phi(e^{t0 + h})` for radial fields.
    fn log_radial_jet(&self, _t0: f64, _order: usize) -> Option<Result<Jet>> {
        None
    }

    fn chain_len(&self) -> usize {
        0
    }

    /// Closed-form `Δ^k f(x)` for `1 <= k <= chain_len()`.
    fn laplacian_power(&self, _x: &[f64], _k: usize) -> Option<Result<f64>> {
        None
    }

    fn gradient(&self, _x: &[f64]) -> Option<Result<Vec<f64>>> {
        None
    }

    /// `phi(e^t) e^{w t}` for radial fields, computed without intermediate
    /// overflow where the implementation can.
    fn radial_scaled(&self, _t: f64, _w: f64) -> Option<Result<f64>> {
        None
    }

    /// Structured representation of `Δ^k f`, when one exists.
    fn laplacian_field(&self, _k: usize) -> Option<ScalarField> {
        None
    }

    /// True when the field is identically zero.
    fn is_zero(&self) -> bool {
        false
    }

    fn describe(&self) -> String;
}

/// Immutable, shareable scalar function on R^n.
#[derive(Clone)]
pub struct ScalarField {
    dim: Dimension,
    src: Arc<dyn FieldSource>,
}

impl fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ScalarField(n={}, {})", self.dim, self.src.describe())
    }
}

impl ScalarField {
    pub fn from_source(dim: Dimension, src: Arc<dyn FieldSource>) -> Self {
        ScalarField { dim, src }
    }

    pub fn dim(&self) -> Dimension {
        self.dim
    }

    pub fn source(&self) -> &Arc<dyn FieldSource> {
        &self.src
    }

    pub fn caps(&self) -> Capabilities {
        let n = self.dim.get();
        let taylor = self.src.line_jet(&vec![0.5; n], &unit(n, 0), 1).is_some();
        let is_radial = self.src.is_radial();
        // Taylor-capable fields get every Laplacian power exactly from jets.
        let chain = if self.src.chain_len() > 0 {
            self.src.chain_len().min(self.dim.half())
        } else if taylor {
            self.dim.half()
        } else {
            0
        };
        Capabilities {
            is_radial,
            analytic_laplacian_chain: chain,
            analytic_gradient: taylor || self.src.gradient(&vec![0.5; n]).is_some(),
            taylor,
            support_radius: self.src.support_radius(),
        }
    }

    pub fn is_radial(&self) -> bool {
        self.src.is_radial()
    }

    pub fn is_zero(&self) -> bool {
        self.src.is_zero()
    }

    pub fn describe(&self) -> String {
        self.src.describe()
    }

    pub fn eval(&self, x: &Point) -> Result<f64> {
        self.eval_slice(x.coords())
    }

    pub fn eval_slice(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim.get() {
            return Err(Error::DimensionMismatch {
                expected: self.dim.get(),
                got: x.len(),
            });
        }
        if let Some(rho) = self.src.support_radius() {
            if norm(x) > rho {
                return Ok(0.0);
            }
        }
        self.src.eval(x)
    }

    /// Value of a radial field at radius `r` (evaluated on the first axis).
    pub fn radial_value(&self, r: f64) -> Result<f64> {
        let mut x = vec![0.0; self.dim.get()];
        x[0] = r;
        self.eval_slice(&x)
    }

    /// `phi(e^t) e^{w t}` for radial fields.
    pub fn radial_scaled(&self, t: f64, w: f64) -> Result<f64> {
        if let Some(v) = self.src.radial_scaled(t, w) {
            return v;
        }
        let r = t.exp();
        if let Some(rho) = self.src.support_radius() {
            if r > rho {
                return Ok(0.0);
            }
        }
        let v = self.radial_value(r)?;
        if v == 0.0 {
            return Ok(0.0);
        }
        let out = v * (w * t).exp();
        if !out.is_finite() {
            return Err(Error::Overflow(format!("phi(e^{t}) e^({w} t) is not representable")));
        }
        Ok(out)
    }

    // ---- constructors ----

    pub fn zero(dim: Dimension) -> Self {
        Self::constant(dim, 0.0)
    }

    pub fn constant(dim: Dimension, c: f64) -> Self {
        ScalarField {
            dim,
            src: Arc::new(ConstSource(c)),
        }
    }

    pub fn from_expression(expr: FieldExpression) -> Result<Self> {
        let dim = Dimension::new(expr.dim as i64)?;
        let syntactic = expr.uses_only_norm();
        let mut src = ExprSource {
            expr,
            radial: syntactic,
            src_text: String::new(),
        };
        src.src_text = src.expr.to_string();
        let mut field = ScalarField {
            dim,
            src: Arc::new(src.clone()),
        };
        if !syntactic && rotation_check(&field, 50, 1e-10, 0x5eed).is_ok() {
            src.radial = true;
            field.src = Arc::new(src);
        }
        Ok(field)
    }

    pub fn parse(src: &str, dim: Dimension) -> Result<Self> {
        Self::from_expression(parse_field(src, dim.get())?)
    }

    /// Wraps a closure. `radial` is verified by rotation sampling.
    pub fn from_fn<F>(dim: Dimension, name: &str, radial: bool, support_radius: Option<f64>, f: F) -> Result<Self>
    where
        F: Fn(&[f64]) -> Result<f64> + Send + Sync + 'static,
    {
        if let Some(rho) = support_radius {
            if !(rho > 0.0) {
                return Err(Error::Precondition("support radius must be positive".into()));
            }
        }
        let field = ScalarField {
            dim,
            src: Arc::new(FnSource {
                name: name.to_string(),
                radial,
                support_radius,
                f: Box::new(f),
            }),
        };
        if radial {
            rotation_check(&field, 50, 1e-10, 0x5eed)?;
        }
        Ok(field)
    }

    pub fn sum(parts: Vec<ScalarField>) -> Result<Self> {
        let dim = parts
            .first()
            .map(|p| p.dim)
            .ok_or_else(|| Error::Precondition("empty sum".into()))?;
        if let Some(p) = parts.iter().find(|p| p.dim != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim.get(),
                got: p.dim.get(),
            });
        }
        let parts: Vec<ScalarField> = parts.into_iter().filter(|p| !p.is_zero()).collect();
        if parts.is_empty() {
            return Ok(ScalarField::zero(dim));
        }
        if parts.len() == 1 {
            return Ok(parts.into_iter().next().unwrap());
        }
        Ok(ScalarField {
            dim,
            src: Arc::new(SumSource { parts }),
        })
    }

    pub fn scaled(&self, s: f64) -> ScalarField {
        if s == 1.0 {
            return self.clone();
        }
        if s == 0.0 || self.is_zero() {
            return ScalarField::zero(self.dim);
        }
        ScalarField {
            dim: self.dim,
            src: Arc::new(ScaledSource { inner: self.clone(), s }),
        }
    }
}

fn unit(n: usize, i: usize) -> Vec<f64> {
    let mut v = vec![0.0; n];
    v[i] = 1.0;
    v
}

/// Random rotation in R^n (Gram–Schmidt on a Gaussian matrix).
pub(crate) fn random_rotation(n: usize, rng: &mut impl Rng) -> Vec<Vec<f64>> {
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(n);
    while rows.len() < n {
        let mut v: Vec<f64> = (0..n).map(|_| gaussian(rng)).collect();
        for q in &rows {
            let d: f64 = v.iter().zip(q).map(|(a, b)| a * b).sum();
            for (vi, qi) in v.iter_mut().zip(q) {
                *vi -= d * qi;
            }
        }
        let nv = norm(&v);
        if nv > 1e-8 {
            rows.push(v.iter().map(|x| x / nv).collect());
        }
    }
    rows
}

pub(crate) fn gaussian(rng: &mut impl Rng) -> f64 {
    // Box–Muller
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

pub(crate) fn random_unit(n: usize, rng: &mut impl Rng) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| gaussian(rng)).collect();
        let nv = norm(&v);
        if nv > 1e-8 {
            return v.iter().map(|x| x / nv).collect();
        }
    }
}

/// Checks `|f(Rx) - f(x)| <= tol (1 + |f(x)|)` for random rotations `R` at
/// `samples` random points with radii spread over [1e-2, 1e2].
pub fn rotation_check(f: &ScalarField, samples: usize, tol: f64, seed: u64) -> Result<()> {
    let n = f.dim().get();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..samples {
        let r = 10f64.powf(rng.gen_range(-2.0..2.0));
        let x: Vec<f64> = random_unit(n, &mut rng).iter().map(|v| v * r).collect();
        let rot = random_rotation(n, &mut rng);
        let y: Vec<f64> = rot
            .iter()
            .map(|row| row.iter().zip(&x).map(|(a, b)| a * b).sum())
            .collect();
        let (fx, fy) = match (f.eval_slice(&x), f.eval_slice(&y)) {
            (Ok(a), Ok(b)) => (a, b),
            (Err(e), _) | (_, Err(e)) => {
                return Err(Error::NotRadial(format!(
                    "evaluation failed during rotation check: {e}"
                )))
            }
        };
        if (fx - fy).abs() > tol * (1.0 + fx.abs()) {
            return Err(Error::NotRadial(format!("f(x) = {fx}, f(Rx) = {fy} at |x| = {r:.4}")));
        }
    }
    Ok(())
}

// ---- sources ----

#[derive(Debug)]
struct ConstSource(f64);

impl FieldSource for ConstSource {
    fn eval(&self, _x: &[f64]) -> Result<f64> {
        Ok(self.0)
    }
    fn is_radial(&self) -> bool {
        true
    }
    fn line_jet(&self, _x0: &[f64], _dir: &[f64], order: usize) -> Option<Result<Jet>> {
        Some(Ok(Jet::constant(self.0, order)))
    }
    fn log_radial_jet(&self, _t0: f64, order: usize) -> Option<Result<Jet>> {
        Some(Ok(Jet::constant(self.0, order)))
    }
    fn chain_len(&self) -> usize {
        usize::MAX
    }
    fn laplacian_power(&self, _x: &[f64], _k: usize) -> Option<Result<f64>> {
        Some(Ok(0.0))
    }
    fn gradient(&self, x: &[f64]) -> Option<Result<Vec<f64>>> {
        Some(Ok(vec![0.0; x.len()]))
    }
    fn radial_scaled(&self, t: f64, w: f64) -> Option<Result<f64>> {
        if self.0 == 0.0 {
            return Some(Ok(0.0));
        }
        Some(Ok(self.0 * (w * t).exp()))
    }
    fn is_zero(&self) -> bool {
        self.0 == 0.0
    }
    fn describe(&self) -> String {
        format!("{}", self.0)
    }
}

#[derive(Debug, Clone)]
struct ExprSource {
    expr: FieldExpression,
    radial: bool,
    src_text: String,
}

impl FieldSource for ExprSource {
    fn eval(&self, x: &[f64]) -> Result<f64> {
        self.expr.eval(x)
    }
    fn is_radial(&self) -> bool {
        self.radial
    }
    fn line_jet(&self, x0: &[f64], dir: &[f64], order: usize) -> Option<Result<Jet>> {
        let xs: Vec<Jet> = x0
            .iter()
            .zip(dir)
            .map(|(a, d)| {
                let mut j = Jet::constant(*a, order);
                if order >= 1 {
                    j.c[1] = *d;
                }
                j
            })
            .collect();
        Some(self.expr.eval_jet(&xs))
    }
    fn log_radial_jet(&self, t0: f64, order: usize) -> Option<Result<Jet>> {
        if !self.radial {
            return None;
        }
        let mut xs = vec![Jet::constant(0.0, order); self.expr.dim];
        xs[0] = Jet::variable(t0, order).exp();
        Some(self.expr.eval_jet(&xs))
    }
    fn describe(&self) -> String {
        self.src_text.clone()
    }
}

struct FnSource {
    name: String,
    radial: bool,
    support_radius: Option<f64>,
    f: Box<dyn Fn(&[f64]) -> Result<f64> + Send + Sync>,
}

impl fmt::Debug for FnSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FnSource({})", self.name)
    }
}

impl FieldSource for FnSource {
    fn eval(&self, x: &[f64]) -> Result<f64> {
        (self.f)(x)
    }
    fn is_radial(&self) -> bool {
        self.radial
    }
    fn support_radius(&self) -> Option<f64> {
        self.support_radius
    }
    fn describe(&self) -> String {
        self.name.clone()
    }
}

#[derive(Debug)]
struct SumSource {
    parts: Vec<ScalarField>,
}

impl FieldSource for SumSource {
    fn eval(&self, x: &[f64]) -> Result<f64> {
        let mut s = 0.0;
        for p in &self.parts {
            s += p.eval_slice(x)?;
        }
        Ok(s)
    }
    fn is_radial(&self) -> bool {
        self.parts.iter().all(|p| p.is_radial())
    }
    fn support_radius(&self) -> Option<f64> {
        let mut m: f64 = 0.0;
        for p in &self.parts {
            m = m.max(p.src.support_radius()?);
        }
        Some(m)
    }
    fn line_jet(&self, x0: &[f64], dir: &[f64], order: usize) -> Option<Result<Jet>> {
        let mut acc = Jet::constant(0.0, order);
        for p in &self.parts {
            match p.src.line_jet(x0, dir, order)? {
                Ok(j) => acc = acc.add(&j),
                Err(e) => return Some(Err(e)),
            }
        }
        Some(Ok(acc))
    }
    fn log_radial_jet(&self, t0: f64, order: usize) -> Option<Result<Jet>> {
        let mut acc = Jet::constant(0.0, order);
        for p in &self.parts {
            match p.src.log_radial_jet(t0, order)? {
                Ok(j) => acc = acc.add(&j),
                Err(e) => return Some(Err(e)),
            }
        }
        Some(Ok(acc))
    }
    fn chain_len(&self) -> usize {
        self.parts
            .iter()
            .map(|p| p.caps().analytic_laplacian_chain)
            .min()
            .unwrap_or(0)
    }
    fn laplacian_power(&self, x: &[f64], k: usize) -> Option<Result<f64>> {
        use crate::calculus::{laplacian_power_slice, LaplacianMethod};
        let mut s = 0.0;
        for p in &self.parts {
            match laplacian_power_slice(p, x, k, LaplacianMethod::Analytic) {
                Ok(v) => s += v,
                Err(Error::MissingCapability(_)) => return None,
                Err(e) => return Some(Err(e)),
            }
        }
        Some(Ok(s))
    }
    fn gradient(&self, x: &[f64]) -> Option<Result<Vec<f64>>> {
        if !self.parts.iter().all(|p| p.caps().analytic_gradient) {
            return None;
        }
        let mut g = vec![0.0; x.len()];
        for p in &self.parts {
            match crate::calculus::gradient(p, x) {
                Ok(v) => g.iter_mut().zip(v).for_each(|(a, b)| *a += b),
                Err(e) => return Some(Err(e)),
            }
        }
        Some(Ok(g))
    }
    fn radial_scaled(&self, t: f64, w: f64) -> Option<Result<f64>> {
        if !self.is_radial() {
            return None;
        }
        let mut s = 0.0;
        for p in &self.parts {
            match p.radial_scaled(t, w) {
                Ok(v) => s += v,
                Err(e) => return Some(Err(e)),
            }
        }
        Some(Ok(s))
    }
    fn laplacian_field(&self, k: usize) -> Option<ScalarField> {
        let mut out = Vec::new();
        for p in &self.parts {
            out.push(p.src.laplacian_field(k)?);
        }
        ScalarField::sum(out).ok()
    }
    fn describe(&self) -> String {
        self.parts
            .iter()
            .map(|p| format!("({})", p.describe()))
            .collect::<Vec<_>>()
            .join(" + ")
    }
}

#[derive(Debug)]
struct ScaledSource {
    inner: ScalarField,
    s: f64,
}

impl FieldSource for ScaledSource {
    fn eval(&self, x: &[f64]) -> Result<f64> {
        Ok(self.s * self.inner.eval_slice(x)?)
    }
    fn is_radial(&self) -> bool {
        self.inner.is_radial()
    }
    fn support_radius(&self) -> Option<f64> {
        self.inner.src.support_radius()
    }
    fn line_jet(&self, x0: &[f64], dir: &[f64], order: usize) -> Option<Result<Jet>> {
        Some(self.inner.src.line_jet(x0, dir, order)?.map(|j| j.scale(self.s)))
    }
    fn log_radial_jet(&self, t0: f64, order: usize) -> Option<Result<Jet>> {
        Some(self.inner.src.log_radial_jet(t0, order)?.map(|j| j.scale(self.s)))
    }
    fn chain_len(&self) -> usize {
        self.inner.caps().analytic_laplacian_chain
    }
    fn laplacian_power(&self, x: &[f64], k: usize) -> Option<Result<f64>> {
        use crate::calculus::{laplacian_power_slice, LaplacianMethod};
        match laplacian_power_slice(&self.inner, x, k, LaplacianMethod::Analytic) {
            Ok(v) => Some(Ok(v * self.s)),
            Err(Error::MissingCapability(_)) => None,
            Err(e) => Some(Err(e)),
        }
    }
    fn gradient(&self, x: &[f64]) -> Option<Result<Vec<f64>>> {
        if !self.inner.caps().analytic_gradient {
            return None;
        }
        Some(crate::calculus::gradient(&self.inner, x).map(|g| g.into_iter().map(|v| v * self.s).collect()))
    }
    fn radial_scaled(&self, t: f64, w: f64) -> Option<Result<f64>> {
        if !self.inner.is_radial() {
            return None;
        }
        Some(self.inner.radial_scaled(t, w).map(|v| v * self.s))
    }
    fn laplacian_field(&self, k: usize) -> Option<ScalarField> {
        Some(self.inner.src.laplacian_field(k)?.scaled(self.s))
    }
    fn is_zero(&self) -> bool {
        self.s == 0.0 || self.inner.is_zero()
    }
    fn describe(&self) -> String {
        format!("{} * ({})", self.s, self.inner.describe())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(n: i64) -> Dimension {
        Dimension::new(n).unwrap()
    }

    #[test]
    fn dimension_validation() {
        assert!(Dimension::new(2).is_ok());
        assert!(Dimension::new(6).is_ok());
        assert!(matches!(Dimension::new(3), Err(Error::InvalidDimension(3))));
        assert!(Dimension::new(0).is_err());
        assert!(Dimension::new(-4).is_err());
    }

    #[test]
    fn point_validation() {
        assert!(Point::new(d(2), vec![1.0]).is_err());
        assert!(Point::new(d(2), vec![1.0, f64::NAN]).is_err());
        assert!(Point::new(d(2), vec![1.0, 2.0]).is_ok());
    }

    #[test]
    fn eval_examples() {
        let zero = ScalarField::parse("0", d(2)).unwrap();
        assert_eq!(zero.eval(&Point::new(d(2), vec![3.0, -1.0]).unwrap()).unwrap(), 0.0);

        let sphere = ScalarField::parse("log(2/(1+r^2))", d(2)).unwrap();
        let p = Point::new(d(2), vec![0.6, 0.8]).unwrap();
        assert!(sphere.eval(&p).unwrap().abs() < 1e-15);

        let cone = ScalarField::parse("-(0.5/2)*log(1+r^2)", d(2)).unwrap();
        let p = Point::new(d(2), vec![3f64.sqrt(), 0.0]).unwrap();
        let v = cone.eval(&p).unwrap();
        assert!((v + 0.25 * 4f64.ln()).abs() < 1e-15);
        assert!((v + 0.3466).abs() < 1e-4);
    }

    #[test]
    fn dimension_mismatch_on_eval() {
        let f = ScalarField::parse("x1", d(2)).unwrap();
        assert!(matches!(
            f.eval_slice(&[1.0, 2.0, 3.0]),
            Err(Error::DimensionMismatch { expected: 2, got: 3 })
        ));
    }

    #[test]
    fn radial_detection() {
        assert!(ScalarField::parse("log(1+r^2)", d(4)).unwrap().is_radial());
        assert!(ScalarField::parse("x1^2+x2^2", d(2)).unwrap().is_radial());
        assert!(!ScalarField::parse("x1", d(2)).unwrap().is_radial());
        assert!(!ScalarField::parse("x1^2", d(4)).unwrap().is_radial());
    }

    #[test]
    fn closures_claiming_radial_are_checked() {
        let bad = ScalarField::from_fn(d(2), "x1", true, None, |x| Ok(x[0]));
        assert!(matches!(bad, Err(Error::NotRadial(_))));
    }

    #[test]
    fn compact_support_is_exact_zero() {
        let f = ScalarField::from_fn(d(4), "one", true, Some(1.5), |_| Ok(1.0)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let r = rng.gen_range(1.5001..100.0);
            let x: Vec<f64> = random_unit(4, &mut rng).iter().map(|v| v * r).collect();
            assert_eq!(f.eval_slice(&x).unwrap(), 0.0);
        }
    }

    #[test]
    fn sums_and_scaling() {
        let a = ScalarField::parse("r^2", d(2)).unwrap();
        let b = ScalarField::parse("1", d(2)).unwrap();
        let s = ScalarField::sum(vec![a.scaled(2.0), b]).unwrap();
        assert!((s.eval_slice(&[1.0, 1.0]).unwrap() - 5.0).abs() < 1e-14);
        assert!(s.is_radial());
    }
}
