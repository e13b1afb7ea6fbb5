//! Built-in metric families with their known closed-form quantities.

pub mod run;
pub mod suite;

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::calculus::{Polynomial, SphereConstants};
use crate::error::{Error, Result};
use crate::fields::radial::{DEFAULT_R_MAX, DEFAULT_R_MIN, NODES_PER_DECADE};
use crate::fields::{norm, Dimension, FieldSource, RadialProfile, ScalarField};
use crate::geometry::MetricContext;
use crate::potential::{PotentialConfig, PotentialEvaluator, TabulatedPotential};
use crate::quad::{gamma, unit_sphere_area};

pub use run::{context_from_spec, run_analysis, run_analysis_str, sweep, SWEEP_HEADER};
pub use suite::{run_verification_suite, Check, CheckStatus, Expected, SuiteSummary, VerificationCase};

/// Where a closed-form fact comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum FactOrigin {
    /// Stated in the literature the construction follows.
    Published { quote: String },
    /// Immediate from the definitions.
    Immediate,
    /// Worked out by hand or by an independent computation.
    Computed { oracle: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", untagged)]
pub enum FactValue {
    Number(f64),
    Class(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClosedFormFact {
    pub quantity: String,
    pub value: FactValue,
    pub tolerance: f64,
    pub origin: FactOrigin,
}

fn number(quantity: &str, value: f64, tolerance: f64, origin: FactOrigin) -> ClosedFormFact {
    ClosedFormFact {
        quantity: quantity.into(),
        value: FactValue::Number(value),
        tolerance,
        origin,
    }
}

fn class(quantity: &str, value: &str, origin: FactOrigin) -> ClosedFormFact {
    ClosedFormFact {
        quantity: quantity.into(),
        value: FactValue::Class(value.into()),
        tolerance: 0.0,
        origin,
    }
}

fn computed(oracle: &str) -> FactOrigin {
    FactOrigin::Computed { oracle: oracle.into() }
}

fn published(quote: &str) -> FactOrigin {
    FactOrigin::Published { quote: quote.into() }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamRange {
    pub name: String,
    pub default: f64,
    pub min: f64,
    pub max: f64,
    pub note: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GalleryEntry {
    pub name: String,
    pub description: String,
    /// Supported dimensions (all even `n >= 2` unless listed).
    pub dims: Vec<usize>,
    pub params: Vec<ParamRange>,
}

fn param(name: &str, default: f64, min: f64, max: f64, note: &str) -> ParamRange {
    ParamRange {
        name: name.into(),
        default,
        min,
        max,
        note: note.into(),
    }
}

/// Every built-in family.
pub fn gallery_entries() -> Vec<GalleryEntry> {
    vec![
        GalleryEntry {
            name: "flat".into(),
            description: "u = 0".into(),
            dims: vec![],
            params: vec![],
        },
        GalleryEntry {
            name: "sphere".into(),
            description: "u = log(2/(1+r^2)), the round sphere minus a point".into(),
            dims: vec![],
            params: vec![],
        },
        GalleryEntry {
            name: "cone".into(),
            description: "u = -(a/2) log(1+r^2); total curvature alpha0 = a".into(),
            dims: vec![],
            params: vec![param(
                "a",
                0.5,
                0.0,
                4.0,
                "a > 1 gives an incomplete metric of finite diameter",
            )],
        },
        GalleryEntry {
            name: "huber".into(),
            description: "u = (1 - cutoff(r,10,20)) (-log r + c log log r); alpha0 = 1".into(),
            dims: vec![],
            params: vec![param(
                "c",
                0.0,
                -4.0,
                2.0,
                "finite diameter iff c < -1, finite volume iff c < -1/n",
            )],
        },
        GalleryEntry {
            name: "gaussian_source".into(),
            description: "u = L(f) for a Gaussian f of total curvature alpha0 = mass".into(),
            dims: vec![],
            params: vec![param("mass", 0.5, 0.0, 4.0, "alpha0 of the metric")],
        },
        GalleryEntry {
            name: "planted".into(),
            description: "u = L(f) + P with f Gaussian of mass 1/2 and a random polynomial P <= C".into(),
            dims: vec![],
            params: vec![
                param("seed", 1.0, 0.0, 1e9, "integer seed of P"),
                param(
                    "degree",
                    2.0,
                    0.0,
                    2.0,
                    "0 (constant P, normal) or 2 (quadratic P, not normal); at most n - 2",
                ),
            ],
        },
    ]
}

/// A configured gallery metric with its known quantities.
#[derive(Debug, Clone)]
pub struct GalleryMetric {
    pub context: MetricContext,
    pub facts: Vec<ClosedFormFact>,
    /// Warnings about the parameter choice.
    pub flags: Vec<String>,
    /// Planted polynomial part, for `planted`.
    pub polynomial: Option<Polynomial>,
}

fn get_param(entry: &GalleryEntry, params: &BTreeMap<String, f64>) -> Result<BTreeMap<String, f64>> {
    if let Some(k) = params.keys().find(|k| !entry.params.iter().any(|p| &p.name == *k)) {
        return Err(Error::Schema {
            pointer: format!("/params/{k}"),
            msg: format!("`{}` takes no parameter `{k}`", entry.name),
        });
    }
    let mut out = BTreeMap::new();
    for p in &entry.params {
        let v = params.get(&p.name).copied().unwrap_or(p.default);
        if !(v >= p.min && v <= p.max) {
            return Err(Error::Schema {
                pointer: format!("/params/{}", p.name),
                msg: format!("{} = {v} outside [{}, {}]", p.name, p.min, p.max),
            });
        }
        out.insert(p.name.clone(), v);
    }
    Ok(out)
}

/// `MetricContext` of a built-in family.
pub fn gallery(name: &str, params: &BTreeMap<String, f64>, dim: Dimension) -> Result<MetricContext> {
    Ok(gallery_metric(name, params, dim)?.context)
}

/// `int_0^inf (1+r^2)^{-a/2} dr` for `a > 1`.
fn cone_ray(a: f64) -> f64 {
    PI.sqrt() * gamma((a - 1.0) / 2.0) / (2.0 * gamma(a / 2.0))
}

/// `int_{R^n} (1+r^2)^{-na/2}` for `a > 1`.
fn cone_volume(n: usize, a: f64) -> f64 {
    let nf = n as f64;
    unit_sphere_area(n) / 2.0 * gamma(nf / 2.0) * gamma(nf * (a - 1.0) / 2.0) / gamma(nf * a / 2.0)
}

fn gaussian_density(dim: Dimension, mass: f64) -> Result<ScalarField> {
    // alpha = c_n * k * pi^{n/2}
    let consts = SphereConstants::new(dim);
    let k = mass / (consts.green_constant * PI.powf(dim.get() as f64 / 2.0));
    ScalarField::parse(&format!("{k}*exp(-r^2)"), dim)
}

fn tabulated_potential(f: &ScalarField) -> Result<TabulatedPotential> {
    TabulatedPotential::build(Arc::new(PotentialEvaluator::new(f, PotentialConfig::default())?))
}

/// Random `P(x) = (x - x0)^T A (x - x0) + c` with `A` negative definite,
/// or the constant `c` for degree 0.
pub fn planted_polynomial(dim: Dimension, seed: u64, degree: u32) -> Result<Polynomial> {
    let n = dim.get();
    if degree != 0 && degree != 2 {
        return Err(Error::Schema {
            pointer: "/params/degree".into(),
            msg: format!("planted degree must be 0 or 2, got {degree}"),
        });
    }
    if degree as usize + 2 > n {
        return Err(Error::Schema {
            pointer: "/params/degree".into(),
            msg: format!("planted degree {degree} exceeds n - 2 = {}", n - 2),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let c: f64 = rng.gen_range(-2.0..2.0);
    let mut p = Polynomial::constant(dim, c);
    if degree == 0 {
        return Ok(p);
    }
    let mut a = vec![vec![0.0; n]; n];
    for _ in 0..n {
        let lambda: f64 = rng.gen_range(0.2..1.0) / n as f64;
        let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        for i in 0..n {
            for j in 0..n {
                a[i][j] -= lambda * v[i] * v[j];
            }
        }
    }
    let x0: Vec<f64> = (0..n).map(|_| rng.gen_range(-0.25..0.25)).collect();
    let shifted: Vec<Polynomial> = (0..n)
        .map(|i| Polynomial::coordinate(dim, i).add(&Polynomial::constant(dim, -x0[i])))
        .collect();
    for i in 0..n {
        for j in 0..n {
            p = p.add(&shifted[i].mul(&shifted[j]).scale(a[i][j]));
        }
    }
    Ok(p)
}

/// Gallery metric with facts and flags.
pub fn gallery_metric(name: &str, params: &BTreeMap<String, f64>, dim: Dimension) -> Result<GalleryMetric> {
    let entry = gallery_entries()
        .into_iter()
        .find(|e| e.name == name)
        .ok_or_else(|| Error::Schema {
            pointer: "/name".into(),
            msg: format!("unknown gallery entry `{name}`"),
        })?;
    let p = get_param(&entry, params)?;
    let n = dim.get();
    let nf = n as f64;
    let mut flags = Vec::new();
    let mut polynomial = None;
    let (context, facts) = match name {
        "flat" => (
            MetricContext::new(ScalarField::zero(dim)),
            vec![
                number("alpha0", 0.0, 1e-9, FactOrigin::Immediate),
                number("tau", 1.0, 0.05, FactOrigin::Immediate),
                class("diameter_class", "infinite", FactOrigin::Immediate),
                class("volume_class", "infinite", FactOrigin::Immediate),
                number("distance_exponent", 1.0, 0.1, FactOrigin::Immediate),
            ],
        ),
        "sphere" => {
            let u = ScalarField::parse("log(2/(1+r^2))", dim)?;
            let area = 2.0 * PI.powf((nf + 1.0) / 2.0) / gamma((nf + 1.0) / 2.0);
            let mut facts = vec![
                number(
                    "alpha0",
                    2.0,
                    1e-3,
                    computed("stereographic projection: Q = (n-1)! constant on the round sphere"),
                ),
                number("tau", 0.0, 0.05, computed("finite volume")),
                number("identity_residual", 0.0, 0.05, computed("(1 - 2)^+ = 0")),
                class("diameter_class", "finite", computed("antipodal ray length")),
                number("diameter", PI, 1e-6, computed("int_0^inf 2/(1+r^2) dr = pi")),
                class("volume_class", "finite", computed("area of the round sphere")),
                number(
                    "volume",
                    area,
                    1e-4,
                    computed("|S^n| = 2 pi^{(n+1)/2} / Gamma((n+1)/2)"),
                ),
                number("distance_exponent", 0.0, 0.1, computed("bounded distances")),
                class("verdict", "normal", computed("u = L(Q e^{nu}) + log 2")),
            ];
            if n == 2 {
                facts.push(number(
                    "cohn_vossen_total",
                    4.0 * PI,
                    1e-3,
                    computed("Gauss-Bonnet on the sphere"),
                ));
            }
            if n >= 4 {
                facts.push(number(
                    "scalar_curvature",
                    nf * (nf - 1.0),
                    1e-4,
                    computed("R = n(n-1) on the unit sphere"),
                ));
            }
            (MetricContext::new(u), facts)
        }
        "cone" => {
            let a = p["a"];
            let u = ScalarField::parse(&format!("-({a}/2)*log(1+r^2)"), dim)?;
            let mut facts = vec![
                number(
                    "alpha0",
                    a,
                    1e-3,
                    computed("density (-Δ)^{n/2} of -(a/2)log(1+r^2) is a times the sphere density"),
                ),
                number("tau", (1.0 - a).max(0.0), 0.05, computed("(1 - alpha0)^+")),
                number("identity_residual", 0.0, 0.05, computed("normal metric")),
                number(
                    "distance_exponent",
                    (1.0 - a).max(0.0),
                    0.1,
                    computed("ray length grows like R^{1-a}"),
                ),
            ];
            if a > 1.0 {
                flags.push("incomplete: finite diameter".to_string());
                facts.push(class(
                    "diameter_class",
                    "finite",
                    computed("int (1+r^2)^{-a/2} converges for a > 1"),
                ));
                facts.push(number(
                    "diameter",
                    cone_ray(a),
                    1e-6,
                    computed("sqrt(pi) Gamma((a-1)/2) / (2 Gamma(a/2))"),
                ));
                facts.push(class(
                    "volume_class",
                    "finite",
                    computed("int (1+r^2)^{-na/2} r^{n-1} converges for a > 1"),
                ));
                facts.push(number(
                    "volume",
                    cone_volume(n, a),
                    1e-4,
                    computed("|S^{n-1}| B(n/2, n(a-1)/2) / 2"),
                ));
                if n == 2 {
                    facts.push(number(
                        "cohn_vossen_total",
                        2.0 * PI * a,
                        1e-3,
                        computed("alpha0 / c_2 = 2 pi a"),
                    ));
                }
            } else {
                facts.push(class(
                    "diameter_class",
                    "infinite",
                    computed("int (1+r^2)^{-a/2} diverges for a <= 1"),
                ));
                facts.push(class(
                    "volume_class",
                    "infinite",
                    computed("int (1+r^2)^{-na/2} r^{n-1} diverges for a <= 1"),
                ));
            }
            facts.push(class("verdict", "normal", computed("u = L(Q e^{nu})")));
            (MetricContext::new(u), facts)
        }
        "huber" => {
            let c = p["c"];
            let u = ScalarField::parse(
                &format!("(1 - cutoff(r, 10, 20))*(-log(max(r, 10)) + ({c})*log(log(max(r, 10))))"),
                dim,
            )?;
            let diam = if c < -1.0 { "finite" } else { "infinite" };
            let vol = if c < -1.0 / nf { "finite" } else { "infinite" };
            let mut facts = vec![
                number(
                    "alpha0",
                    1.0,
                    0.02,
                    published("we must have total curvature (n-1)!|S^n|/2"),
                ),
                class("diameter_class", diam, published("if c < -1, the diameter is finite")),
                class("volume_class", vol, published("the volume is finite for c < -1/n")),
                number("tau", 0.0, 0.05, computed("V(B_R) grows at most like (log R)^{nc+1}")),
            ];
            if n == 2 && c < -0.5 {
                facts.push(number(
                    "cohn_vossen_total",
                    2.0 * PI,
                    1e-3,
                    computed("alpha0 = 1 gives total 2 pi"),
                ));
            }
            (MetricContext::new(u), facts)
        }
        "gaussian_source" => {
            let mass = p["mass"];
            let f = gaussian_density(dim, mass)?;
            let tab = tabulated_potential(&f)?;
            let profile = tab.profile()?;
            let u = tab.field();
            let mut facts = vec![
                number("alpha0", mass, 1e-3, computed("normalised Gaussian mass")),
                number(
                    "tau",
                    (1.0 - mass).max(0.0),
                    0.05,
                    computed("L(f) = -alpha log r + const outside the bulk of f"),
                ),
                number("identity_residual", 0.0, 0.05, computed("normal metric")),
                class("verdict", "normal", computed("u = L(f)")),
            ];
            let (dc, vc) = if mass > 1.0 {
                ("finite", "finite")
            } else {
                ("infinite", "infinite")
            };
            facts.push(class("diameter_class", dc, computed("e^u decays like r^{-alpha}")));
            facts.push(class("volume_class", vc, computed("e^{nu} decays like r^{-n alpha}")));
            (MetricContext::new(u).with_profile(profile)?, facts)
        }
        "planted" => {
            let seed = p["seed"];
            if seed.fract() != 0.0 {
                return Err(Error::Schema {
                    pointer: "/params/seed".into(),
                    msg: "seed must be an integer".into(),
                });
            }
            let degree = p["degree"];
            if degree.fract() != 0.0 {
                return Err(Error::Schema {
                    pointer: "/params/degree".into(),
                    msg: "degree must be an integer".into(),
                });
            }
            let poly = planted_polynomial(dim, seed as u64, degree as u32)?;
            let f = gaussian_density(dim, 0.5)?;
            let tab = tabulated_potential(&f)?;
            let nonconstant = degree > 0.0;
            let u = ScalarField::sum(vec![tab.field(), poly.field()])?;
            let mut facts = vec![number(
                "alpha0",
                0.5,
                1e-3,
                computed("Δ^{n/2} P = 0, so the density is f"),
            )];
            if nonconstant {
                facts.push(class(
                    "verdict",
                    "non_normal",
                    computed("planted nonconstant polynomial part"),
                ));
                if n >= 4 {
                    facts.push(class(
                        "condition_a",
                        "not_little_o",
                        computed("|ΔP| = 2|tr A| > 0 everywhere"),
                    ));
                    facts.push(class(
                        "scalar_criterion",
                        "not_little_o",
                        computed("|∇P|^2 grows quadratically"),
                    ));
                }
            } else {
                facts.push(class("verdict", "normal", computed("constant polynomial part")));
                facts.push(number("tau", 0.5, 0.05, computed("(1 - alpha0)^+")));
                if n >= 4 {
                    facts.push(class("condition_a", "little_o", computed("Δu = ΔL(f) = O(r^{-2})")));
                }
            }
            polynomial = Some(poly);
            let ctx = MetricContext::new(u.clone());
            let ctx = if u.is_radial() {
                ctx.with_profile(RadialProfile::tabulate(
                    |r| u.radial_value(r),
                    DEFAULT_R_MIN,
                    DEFAULT_R_MAX,
                    NODES_PER_DECADE,
                )?)?
            } else {
                ctx
            };
            (ctx, facts)
        }
        _ => unreachable!("entry list and match arms agree"),
    };
    Ok(GalleryMetric {
        context,
        facts,
        flags,
        polynomial,
    })
}

/// Radial field backed by a tabulated profile, with its Laplacian and gradient.
#[derive(Debug)]
pub struct ProfileSource {
    pub profile: RadialProfile,
    pub dim: usize,
}

impl ProfileSource {
    pub fn field(profile: RadialProfile, dim: Dimension) -> ScalarField {
        ScalarField::from_source(
            dim,
            Arc::new(ProfileSource {
                profile,
                dim: dim.get(),
            }),
        )
    }
}

impl FieldSource for ProfileSource {
    fn eval(&self, x: &[f64]) -> Result<f64> {
        Ok(self.profile.eval(norm(x)))
    }
    fn is_radial(&self) -> bool {
        true
    }
    fn chain_len(&self) -> usize {
        1
    }
    fn laplacian_power(&self, x: &[f64], k: usize) -> Option<Result<f64>> {
        (k == 1).then(|| Ok(self.profile.laplacian(norm(x), self.dim)))
    }
    fn gradient(&self, x: &[f64]) -> Option<Result<Vec<f64>>> {
        let r = norm(x);
        if r == 0.0 {
            return Some(Ok(vec![0.0; x.len()]));
        }
        let d = self.profile.derivative(r);
        Some(Ok(x.iter().map(|v| d * v / r).collect()))
    }
    fn describe(&self) -> String {
        format!("radial table on [{}, {}]", self.profile.r_min(), self.profile.r_max())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(n: i64) -> Dimension {
        Dimension::new(n).unwrap()
    }

    fn params(kv: &[(&str, f64)]) -> BTreeMap<String, f64> {
        kv.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    }

    #[test]
    fn entries_and_examples() {
        let flat = gallery("flat", &BTreeMap::new(), d(2)).unwrap();
        assert!(flat.u.is_zero());
        let s = gallery_metric("sphere", &BTreeMap::new(), d(2)).unwrap();
        assert_eq!(s.context.u.eval_slice(&[1.0, 0.0]).unwrap(), 0.0);
        assert!(s
            .facts
            .iter()
            .any(|f| f.quantity == "alpha0" && f.value == FactValue::Number(2.0)));
        let h = gallery_metric("huber", &params(&[("c", -2.0)]), d(2)).unwrap();
        assert!(h
            .facts
            .iter()
            .any(|f| f.quantity == "diameter_class" && f.value == FactValue::Class("finite".into())));
        let c = gallery_metric("cone", &params(&[("a", 2.0)]), d(2)).unwrap();
        assert!(!c.flags.is_empty());
        assert!((cone_ray(2.0) - PI / 2.0).abs() < 1e-12);
        assert!((cone_volume(2, 2.0) - PI).abs() < 1e-12);
    }

    #[test]
    fn rejections() {
        assert!(matches!(
            gallery("torus", &BTreeMap::new(), d(2)),
            Err(Error::Schema { .. })
        ));
        match gallery("cone", &params(&[("a", -1.0)]), d(2)) {
            Err(Error::Schema { pointer, .. }) => assert_eq!(pointer, "/params/a"),
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            gallery("cone", &params(&[("b", 1.0)]), d(2)),
            Err(Error::Schema { .. })
        ));
        assert!(matches!(
            gallery("planted", &params(&[("degree", 2.0)]), d(2)),
            Err(Error::Schema { .. })
        ));
    }

    #[test]
    fn planted_polynomial_is_bounded_above() {
        let p = planted_polynomial(d(4), 3, 2).unwrap();
        assert_eq!(p.degree(), Some(2));
        // negative definite: the Laplacian 2 tr A is negative
        assert!(p.laplacian().eval(&[0.0; 4]) < 0.0);
        assert_eq!(planted_polynomial(d(4), 3, 2).unwrap(), p);
    }
}
