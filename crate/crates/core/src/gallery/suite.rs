//! Verification cases: gallery facts against computed values, plus the
//! potential, polyharmonic, decomposition and determinism checks.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::calculus::poly::{monomials_up_to, ph_dimension, ph_dimension_closed_form};
use crate::calculus::{
    laplacian_power_slice, pizzetti_check, scalar_curvature, LaplacianMethod, Polynomial, SphereConstants,
};
use crate::error::Result;
use crate::fields::spec::MetricSpec;
use crate::fields::{norm, random_unit, Dimension, Point, ScalarField};
use crate::normality::criteria::laplacian_growth;
use crate::normality::{decompose_with, dyadic_radii, GrowthClass, NormalityReport, SampleSet};
use crate::potential::{PotentialConfig, PotentialEvaluator};

use super::{gallery_metric, planted_polynomial, run_analysis, tabulated_potential, FactValue};

/// Labels that tie a check to the property it exercises.
pub const ANCHORS: [&str; 13] = [
    "entropy identity",
    "distance exponent",
    "bounded diameter",
    "potential golden",
    "potential volume growth",
    "decomposition",
    "scalar criterion",
    "curvature lower bound",
    "log-log family thresholds",
    "polyharmonic dimensions",
    "green inverse",
    "determinism",
    "closed form",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Expected {
    Number(f64),
    Text(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckStatus {
    Passed,
    Failed,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub quantity: String,
    pub expected: Expected,
    pub tolerance: f64,
    pub anchor: String,
    pub actual: Option<Expected>,
    pub status: CheckStatus,
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationCase {
    pub id: String,
    /// Metric specification, when the case analyses a metric.
    pub spec: Option<serde_json::Value>,
    pub checks: Vec<Check>,
    pub status: CheckStatus,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteSummary {
    pub passed: usize,
    pub failed: usize,
    pub inconclusive: usize,
    pub cases: Vec<VerificationCase>,
}

fn check_number(quantity: &str, expected: f64, tol: f64, anchor: &str, actual: Option<f64>) -> Check {
    let status = match actual {
        Some(v) if (v - expected).abs() <= tol => CheckStatus::Passed,
        _ => CheckStatus::Failed,
    };
    Check {
        quantity: quantity.into(),
        expected: Expected::Number(expected),
        tolerance: tol,
        anchor: anchor.into(),
        actual: actual.map(Expected::Number),
        status,
        note: None,
    }
}

fn check_at_most(quantity: &str, bound: f64, anchor: &str, actual: Option<f64>) -> Check {
    let mut c = check_number(quantity, 0.0, bound, anchor, actual);
    c.status = match actual {
        Some(v) if v.abs() <= bound => CheckStatus::Passed,
        _ => CheckStatus::Failed,
    };
    c
}

fn check_text(quantity: &str, expected: &str, anchor: &str, actual: Option<&str>) -> Check {
    let status = match actual {
        Some(a) if a == expected => CheckStatus::Passed,
        Some("inconclusive") => CheckStatus::Inconclusive,
        _ => CheckStatus::Failed,
    };
    Check {
        quantity: quantity.into(),
        expected: Expected::Text(expected.into()),
        tolerance: 0.0,
        anchor: anchor.into(),
        actual: actual.map(|a| Expected::Text(a.into())),
        status,
        note: None,
    }
}

fn case_status(checks: &[Check]) -> CheckStatus {
    if checks.iter().any(|c| c.status == CheckStatus::Failed) {
        CheckStatus::Failed
    } else if checks.iter().any(|c| c.status == CheckStatus::Inconclusive) {
        CheckStatus::Inconclusive
    } else {
        CheckStatus::Passed
    }
}

fn failure(quantity: &str, anchor: &str, msg: String) -> Check {
    Check {
        quantity: quantity.into(),
        expected: Expected::Text("computed".into()),
        tolerance: 0.0,
        anchor: anchor.into(),
        actual: None,
        status: CheckStatus::Failed,
        note: Some(msg),
    }
}

// ---------------------------------------------------------------------------
// Gallery metric cases

struct MetricCase {
    id: String,
    name: &'static str,
    params: Vec<(&'static str, f64)>,
    n: usize,
    anchor: &'static str,
}

fn metric_cases() -> Vec<MetricCase> {
    let mut v = Vec::new();
    let mut push =
        |id: String, name: &'static str, params: Vec<(&'static str, f64)>, n: usize, anchor: &'static str| {
            v.push(MetricCase {
                id,
                name,
                params,
                n,
                anchor,
            })
        };
    push("flat-n2".into(), "flat", vec![], 2, "closed form");
    push("sphere-n2".into(), "sphere", vec![], 2, "entropy identity");
    for a in [0.25, 0.5, 0.75, 2.0] {
        push(format!("cone-a{a}-n2"), "cone", vec![("a", a)], 2, "entropy identity");
    }
    for c in [-2.0, -0.75, 0.0] {
        push(
            format!("huber-c{c}-n2"),
            "huber",
            vec![("c", c)],
            2,
            "log-log family thresholds",
        );
    }
    for m in [0.5, 1.0, 2.0] {
        push(
            format!("gaussian-source-m{m}-n2"),
            "gaussian_source",
            vec![("mass", m)],
            2,
            "potential volume growth",
        );
    }
    push("flat-n4".into(), "flat", vec![], 4, "scalar criterion");
    push("sphere-n4".into(), "sphere", vec![], 4, "scalar criterion");
    push("cone-a0.5-n4".into(), "cone", vec![("a", 0.5)], 4, "scalar criterion");
    push(
        "gaussian-source-m0.5-n4".into(),
        "gaussian_source",
        vec![("mass", 0.5)],
        4,
        "scalar criterion",
    );
    push(
        "planted-seed1-deg2-n4".into(),
        "planted",
        vec![("seed", 1.0), ("degree", 2.0)],
        4,
        "decomposition",
    );
    push(
        "planted-seed2-deg0-n4".into(),
        "planted",
        vec![("seed", 2.0), ("degree", 0.0)],
        4,
        "decomposition",
    );
    v
}

fn anchor_for(quantity: &str, default: &str) -> String {
    match quantity {
        "identity_residual" => "entropy identity",
        "distance_exponent" => "distance exponent",
        "diameter" => "bounded diameter",
        "cohn_vossen_total" | "cohn_vossen_satisfied" => "curvature lower bound",
        "scalar_curvature" | "scalar_criterion" | "scalar_criterion_agreement" => "scalar criterion",
        "condition_a" => "decomposition",
        _ => default,
    }
    .to_string()
}

fn report_number(r: &NormalityReport, quantity: &str) -> Option<f64> {
    match quantity {
        "alpha0" => r.alpha0,
        "tau" => r.tau.as_ref().map(|t| t.exponent),
        "identity_residual" => r.identity_residual,
        "diameter" => r.diameter.value,
        "volume" => r.volume.value,
        "distance_exponent" => r.distance_exponent,
        "cohn_vossen_total" => r.cohn_vossen.as_ref().and_then(|c| c.total),
        _ => None,
    }
}

fn report_text(r: &NormalityReport, quantity: &str) -> Option<String> {
    match quantity {
        "diameter_class" => Some(r.diameter.class.as_str().into()),
        "volume_class" => Some(r.volume.class.as_str().into()),
        "verdict" => Some(r.verdict.clone()),
        q => r.criteria.get(q).map(|c| c.verdict.clone()),
    }
}

/// Largest `|R_g - expected|` at 20 seeded points with `|x| <= 3`.
fn scalar_curvature_deviation(u: &ScalarField, expected: f64) -> Result<f64> {
    let n = u.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let r: f64 = rng.gen_range(0.0..3.0);
        let d = random_unit(n.get(), &mut rng);
        let x = Point::new(n, d.iter().map(|v| r * v).collect())?;
        worst = worst.max((scalar_curvature(u, &x)? - expected).abs());
    }
    Ok(worst)
}

fn run_metric_case(mc: &MetricCase) -> VerificationCase {
    let params: BTreeMap<String, f64> = mc.params.iter().map(|(k, v)| (k.to_string(), *v)).collect();
    let spec_value = serde_json::json!({"n": mc.n, "kind": "builtin", "name": mc.name, "params": params});
    let mut checks = Vec::new();
    let done = |checks: Vec<Check>| VerificationCase {
        id: mc.id.clone(),
        spec: Some(spec_value.clone()),
        status: case_status(&checks),
        checks,
    };
    let spec = match MetricSpec::from_value(&spec_value) {
        Ok(s) => s,
        Err(e) => return done(vec![failure("spec", mc.anchor, e.to_string())]),
    };
    let metric = match gallery_metric(mc.name, &params, spec.dimension()) {
        Ok(m) => m,
        Err(e) => return done(vec![failure("gallery", mc.anchor, e.to_string())]),
    };
    let report = match run_analysis(&spec, None) {
        Ok(r) => r,
        Err(e) => return done(vec![failure("report", mc.anchor, e.to_string())]),
    };
    for fact in &metric.facts {
        let anchor = anchor_for(&fact.quantity, mc.anchor);
        match (&fact.value, fact.quantity.as_str()) {
            (FactValue::Number(v), "scalar_curvature") => {
                let dev = scalar_curvature_deviation(&metric.context.u, *v);
                let mut c = check_at_most("scalar_curvature", fact.tolerance, &anchor, dev.as_ref().ok().copied());
                c.expected = Expected::Number(*v);
                if let Err(e) = dev {
                    c.note = Some(e.to_string());
                }
                checks.push(c);
            }
            (FactValue::Number(v), q) => {
                checks.push(check_number(q, *v, fact.tolerance, &anchor, report_number(&report, q)));
            }
            (FactValue::Class(s), q) => {
                checks.push(check_text(q, s, &anchor, report_text(&report, q).as_deref()));
            }
        }
        if fact.quantity == "cohn_vossen_total" {
            let sat = report
                .cohn_vossen
                .as_ref()
                .and_then(|c| c.satisfied)
                .map(|b| b.to_string());
            checks.push(check_text("cohn_vossen_satisfied", "true", &anchor, sat.as_deref()));
        }
    }
    if mc.n >= 4 {
        // compared only where the entropy criterion is conclusive
        let sc = report.criteria.get("scalar_criterion").map(|c| c.verdict.as_str());
        let entropy = report.criteria.get("entropy").map(|c| c.verdict.as_str());
        let agrees = match (sc, entropy) {
            (_, Some("inconclusive")) | (_, None) => None,
            (Some("little_o"), Some("normal")) | (Some("not_little_o"), Some("non_normal")) => Some("agree"),
            (Some("inconclusive"), _) => Some("inconclusive"),
            _ => Some("disagree"),
        };
        if let Some(a) = agrees {
            checks.push(check_text(
                "scalar_criterion_agreement",
                "agree",
                "scalar criterion",
                Some(a),
            ));
        }
    }
    let mut case = done(checks);
    if !report.errors.is_empty() {
        if let Some(c) = case.checks.first_mut() {
            c.note = Some(format!("report errors: {:?}", report.errors));
        }
    }
    case
}

// ---------------------------------------------------------------------------
// Standalone cases

fn potential_golden() -> Vec<Check> {
    let dim = Dimension::new(2).expect("2 is even");
    let f = ScalarField::from_fn(dim, "2*1_{B_1}", true, Some(1.0), |x| {
        Ok(if norm(x) <= 1.0 { 2.0 } else { 0.0 })
    });
    let ev = f.and_then(|f| PotentialEvaluator::new(&f, PotentialConfig::default()));
    let ev = match ev {
        Ok(ev) => ev,
        Err(e) => return vec![failure("potential", "potential golden", e.to_string())],
    };
    [std::f64::consts::E, 10.0, 100.0]
        .iter()
        .map(|&r| {
            let got = ev.eval(&[r, 0.0]).ok();
            check_number(&format!("L(f)({r})"), -0.5 - r.ln(), 1e-5, "potential golden", got)
        })
        .collect()
}

/// `(-Δ) L(f) = f` by Richardson-extrapolated central differences.
fn green_inverse() -> Vec<Check> {
    let dim = Dimension::new(2).expect("2 is even");
    let mut out = Vec::new();
    for src in ["cutoff(r, 0.25, 1)", "cutoff(r, 0.25, 1)*(1 + 0.5*x1)"] {
        let run = || -> Result<f64> {
            let f = ScalarField::parse(src, dim)?;
            // grazing circles through the cutoff transition need fine angular rules
            let cfg = PotentialConfig {
                max_sphere_order: 1024,
                ..PotentialConfig::default()
            };
            let ev = PotentialEvaluator::new(&f, cfg)?;
            let l = |x: &[f64]| ev.eval(x);
            let mut rng = ChaCha8Rng::seed_from_u64(11);
            let mut worst: f64 = 0.0;
            for _ in 0..20 {
                let r: f64 = rng.gen_range(0.0..0.6);
                let d = random_unit(2, &mut rng);
                let x: Vec<f64> = d.iter().map(|v| r * v).collect();
                let h = 0.04;
                let coarse = crate::calculus::fd_power_of(l, &x, 1, h)?;
                let fine = crate::calculus::fd_power_of(l, &x, 1, h / 2.0)?;
                let lap = (4.0 * fine - coarse) / 3.0;
                let fx = f.eval_slice(&x)?;
                worst = worst.max((-lap - fx).abs() / fx.abs());
            }
            Ok(worst)
        };
        let res = run();
        let mut c = check_at_most(
            &format!("relative error for f = {src}"),
            1e-3,
            "green inverse",
            res.as_ref().ok().copied(),
        );
        if let Err(e) = res {
            c.note = Some(e.to_string());
        }
        out.push(c);
    }
    out
}

fn polyharmonic_dimensions() -> Vec<Check> {
    let mut out = Vec::new();
    for n in [2, 4, 6] {
        let dim = Dimension::new(n as i64).expect("even");
        let mismatches = (0..=10)
            .filter(|&d| ph_dimension(dim, d as f64) != ph_dimension_closed_form(dim, d as f64))
            .count();
        out.push(check_number(
            &format!("rank mismatches n={n}"),
            0.0,
            0.0,
            "polyharmonic dimensions",
            Some(mismatches as f64),
        ));
    }
    out
}

/// Random polynomial annihilated by `Δ^{n/2}`: degree below `n` plus a
/// harmonic `Re (x1 + i x2)^k`.
pub fn random_polyharmonic(dim: Dimension, rng: &mut ChaCha8Rng) -> Polynomial {
    let n = dim.get();
    let mut p = Polynomial::zero(dim);
    for a in monomials_up_to(n, n as u32 - 1) {
        if rng.gen_bool(0.4) {
            p.add_term(a, rng.gen_range(-1.0..1.0));
        }
    }
    let k: u32 = rng.gen_range(n as u32..n as u32 + 4);
    let s: f64 = rng.gen_range(-1.0..1.0);
    // Re (x1 + i x2)^k = sum_j C(k, 2j) (-1)^j x1^{k-2j} x2^{2j}
    let mut binom = 1.0;
    for m in 0..=k {
        if m > 0 {
            binom = binom * (k - m + 1) as f64 / m as f64;
        }
        if m % 2 == 0 {
            let sign = if (m / 2) % 2 == 0 { 1.0 } else { -1.0 };
            let mut a = vec![0; n];
            a[0] = k - m;
            a[1] = m;
            p.add_term(a, s * sign * binom);
        }
    }
    p
}

fn pizzetti_residuals() -> Vec<Check> {
    let mut out = Vec::new();
    for n in [2, 4, 6] {
        let dim = Dimension::new(n as i64).expect("even");
        let mut rng = ChaCha8Rng::seed_from_u64(100 + n as u64);
        let mut worst: f64 = 0.0;
        let mut err = None;
        for _ in 0..50 {
            let p = random_polyharmonic(dim, &mut rng);
            let c: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let radius = rng.gen_range(0.1..1.0);
            match Point::new(dim, c).and_then(|c| pizzetti_check(&p, &c, radius)) {
                Ok(v) => worst = worst.max(v),
                Err(e) => err = Some(e.to_string()),
            }
        }
        let mut c = check_at_most(
            &format!("Pizzetti residual n={n}"),
            1e-10,
            "polyharmonic dimensions",
            Some(worst),
        );
        if let Some(e) = err {
            c.status = CheckStatus::Failed;
            c.note = Some(e);
        }
        out.push(c);
    }
    out
}

/// Gaussian `k exp(-(r/s)^2)` of total curvature `mass`.
pub fn scaled_gaussian(dim: Dimension, mass: f64, width: f64) -> Result<ScalarField> {
    let consts = SphereConstants::new(dim);
    let nf = dim.get() as f64;
    let k = mass / (consts.green_constant * std::f64::consts::PI.powf(nf / 2.0) * width.powf(nf));
    ScalarField::parse(&format!("{k}*exp(-(r/{width})^2)"), dim)
}

/// Outcome of one planted decomposition case.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantedOutcome {
    pub n: usize,
    pub degree: u32,
    pub max_coefficient_error: f64,
    pub nonconstant_flag: bool,
    pub condition_a: GrowthClass,
}

/// Case `index` of the planted family: `n = 2` for even, `n = 4` for odd
/// indices; in `n = 4` every other case carries a quadratic part.
pub fn planted_case(index: u64) -> Result<PlantedOutcome> {
    let n: usize = if index % 2 == 0 { 2 } else { 4 };
    let dim = Dimension::new(n as i64).expect("even");
    let degree = if n == 4 && index % 4 == 1 { 2 } else { 0 };
    let mut rng = ChaCha8Rng::seed_from_u64(7000 + index);
    let mass = rng.gen_range(0.2..2.0);
    let width = rng.gen_range(0.5..2.0);
    let f = scaled_gaussian(dim, mass, width)?;
    let p = planted_polynomial(dim, 9000 + index, degree)?;
    let tab = tabulated_potential(&f)?;
    let w = ScalarField::sum(vec![tab.field(), p.field()])?;
    let deg = n as u32 - 2;
    let basis = monomials_up_to(n, deg);
    let samples = SampleSet::standard(dim, 31 + index, 3 * basis.len());
    let ev = PotentialEvaluator::new(&f, PotentialConfig::default())?;
    let dec = decompose_with(&w, &ev, &samples, deg)?;
    let max_coefficient_error = basis
        .iter()
        .map(|a| (dec.coefficient(a) - p.coeff(a)).abs())
        .fold(0.0, f64::max);
    let condition_a = laplacian_growth(&w, &dyadic_radii())?.verdict;
    Ok(PlantedOutcome {
        n,
        degree,
        max_coefficient_error,
        nonconstant_flag: dec.nonconstant,
        condition_a,
    })
}

fn planted_decompositions() -> Vec<Check> {
    let outcomes: Vec<Result<PlantedOutcome>> = (0..50u64).into_par_iter().map(planted_case).collect();
    let mut worst: f64 = 0.0;
    let mut mismatches = 0usize;
    let mut errors = Vec::new();
    for (i, o) in outcomes.iter().enumerate() {
        match o {
            Ok(o) => {
                worst = worst.max(o.max_coefficient_error);
                let expect_not = o.degree > 0;
                if (o.condition_a == GrowthClass::NotLittleO) != expect_not || o.nonconstant_flag != expect_not {
                    mismatches += 1;
                }
            }
            Err(e) => errors.push(format!("case {i}: {e}")),
        }
    }
    let mut a = check_at_most("max coefficient error", 1e-3, "decomposition", Some(worst));
    let mut b = check_number(
        "condition (a) mismatches",
        0.0,
        0.0,
        "decomposition",
        Some(mismatches as f64),
    );
    if !errors.is_empty() {
        a.status = CheckStatus::Failed;
        a.note = Some(errors.join("; "));
        b.status = CheckStatus::Failed;
    }
    vec![a, b]
}

fn determinism() -> Vec<Check> {
    let text = r#"{"n": 2, "kind": "builtin", "name": "cone", "params": {"a": 0.75}}"#;
    let run = || -> Result<String> { crate::gallery::run_analysis_str(text, None)?.to_json() };
    let same = match (run(), run()) {
        (Ok(a), Ok(b)) => Some(if a == b { "identical" } else { "different" }),
        _ => None,
    };
    vec![check_text("repeated report bytes", "identical", "determinism", same)]
}

fn laplacian_check() -> Vec<Check> {
    // the sphere density in n = 4 is 6 (2/(1+r^2))^4; at the origin 96
    let dim = Dimension::new(4).expect("even");
    let v = ScalarField::parse("log(2/(1+r^2))", dim)
        .and_then(|u| laplacian_power_slice(&u, &[0.0; 4], 2, LaplacianMethod::Auto))
        .ok();
    vec![check_number("Δ^2 u(0), sphere n=4", 96.0, 1e-8, "closed form", v)]
}

type Runner = fn() -> Vec<Check>;

fn standalone_cases() -> Vec<(&'static str, Runner)> {
    vec![
        ("potential-disk-golden", potential_golden as Runner),
        ("potential-green-inverse", green_inverse),
        ("polyharmonic-dimensions", polyharmonic_dimensions),
        ("polyharmonic-pizzetti", pizzetti_residuals),
        ("decomposition-planted", planted_decompositions),
        ("determinism-run-analysis", determinism),
        ("sphere-n4-density", laplacian_check),
    ]
}

/// Ids of every case, in run order.
pub fn case_ids() -> Vec<String> {
    metric_cases()
        .into_iter()
        .map(|m| m.id)
        .chain(standalone_cases().into_iter().map(|(id, _)| id.to_string()))
        .collect()
}

/// Runs every case whose id contains `filter`.
pub fn run_verification_suite(filter: Option<&str>) -> SuiteSummary {
    let keep = |id: &str| filter.map_or(true, |f| id.contains(f));
    let metric: Vec<MetricCase> = metric_cases().into_iter().filter(|m| keep(&m.id)).collect();
    let standalone: Vec<(&str, Runner)> = standalone_cases().into_iter().filter(|(id, _)| keep(id)).collect();
    let mut cases: Vec<VerificationCase> = metric.par_iter().map(run_metric_case).collect();
    cases.extend(
        standalone
            .par_iter()
            .map(|(id, run)| {
                let checks = run();
                VerificationCase {
                    id: id.to_string(),
                    spec: None,
                    status: case_status(&checks),
                    checks,
                }
            })
            .collect::<Vec<_>>(),
    );
    let count = |s: CheckStatus| cases.iter().filter(|c| c.status == s).count();
    SuiteSummary {
        passed: count(CheckStatus::Passed),
        failed: count(CheckStatus::Failed),
        inconclusive: count(CheckStatus::Inconclusive),
        cases,
    }
}
