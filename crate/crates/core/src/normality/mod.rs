//! Normal solutions: decomposition, growth criteria and the aggregated report.

pub mod criteria;
pub mod decompose;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::calculus::poly::monomials_up_to;
use crate::calculus::{density_field, SphereConstants};
use crate::error::{Error, Result};
use crate::fields::{rotation_check, Point, ScalarField};
use crate::fit::{geometric_radii, GrowthEstimate};
use crate::geometry::{
    diameter_estimate, distance_growth_exponent, total_volume, volume_growth, Classified, IntegralClass, MetricContext,
};
use crate::potential::{total_mass_alpha, PotentialConfig, PotentialEvaluator};
use crate::quad::{integrate, log_tail_integral, QuadConfig};

pub use criteria::{
    ball_integrals, dyadic_radii, growth_classifier, normality_condition_a, normality_condition_b,
    normality_scalar_criterion, GrowthClass, GrowthVerdict, DEFAULT_MARGIN, THRESHOLD_SLACK,
};
pub use decompose::{decompose, decompose_with, Coefficient, Decomposition, SampleSet};

/// Largest `|tau - (1 - alpha0)^+|` read as agreement.
pub const IDENTITY_TOLERANCE: f64 = 0.05;
/// Slack of the curvature lower bound.
pub const COHN_VOSSEN_TOLERANCE: f64 = 1e-3;

// ---------------------------------------------------------------------------
// Lower bound on total curvature

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CohnVossen {
    /// `int Q_g e^{nu}`, when the density is integrable.
    pub total: Option<f64>,
    /// `(n-1)! |S^n| / 2`.
    pub bound: f64,
    /// `None` when a hypothesis fails or cannot be decided.
    pub satisfied: Option<bool>,
    /// Verdict per hypothesis: `holds`, `fails` or `undecided: ...`.
    pub preconditions: BTreeMap<String, String>,
}

/// `int max(-f, 0)` as a convergence class (radial densities only).
fn negative_part_mass(f: &ScalarField) -> Result<Classified> {
    if f.is_zero() {
        return Ok(Classified {
            class: IntegralClass::Finite,
            value: Some(0.0),
        });
    }
    let n = f.dim().get();
    let cfg = QuadConfig::with_rel(1e-9);
    let (head, _) = integrate(
        |s| Ok((-f.radial_value(s)?).max(0.0) * s.powi(n as i32 - 1)),
        0.0,
        1.0,
        &[],
        &cfg,
    )?;
    let tail = log_tail_integral(|t| Ok((-f.radial_scaled(t, n as f64)?).max(0.0)), 0.0, &cfg)?;
    let mut c = Classified::from(tail);
    if let Some(v) = c.value.as_mut() {
        *v = SphereConstants::new(f.dim()).boundary_area * (head + *v);
    }
    Ok(c)
}

/// Density of `u` flagged radial when sampling confirms it.
pub fn analysis_density(u: &ScalarField) -> Result<ScalarField> {
    let f = density_field(u);
    if f.is_radial() || f.is_zero() {
        return Ok(f);
    }
    if rotation_check(&f, 20, 1e-8, 0xd1ce).is_ok() {
        let inner = f.clone();
        return ScalarField::from_fn(u.dim(), &f.describe(), true, None, move |x| inner.eval_slice(x));
    }
    Ok(f)
}

pub fn cohn_vossen_check(u: &ScalarField) -> Result<CohnVossen> {
    cohn_vossen_check_ctx(&MetricContext::new(u.clone()))
}

/// Total `Q`-curvature against `(n-1)!|S^n|/2` for finite-volume metrics.
pub fn cohn_vossen_check_ctx(ctx: &MetricContext) -> Result<CohnVossen> {
    let density = analysis_density(&ctx.u)?;
    let alpha = total_mass_alpha(&density);
    let volume = total_volume(ctx);
    Ok(assemble_cohn_vossen(
        ctx,
        &density,
        alpha.as_ref().map(|a| a.alpha_hat).map_err(Clone::clone),
        volume,
    ))
}

fn assemble_cohn_vossen(
    ctx: &MetricContext,
    density: &ScalarField,
    alpha: Result<f64>,
    volume: Result<Classified>,
) -> CohnVossen {
    let consts = SphereConstants::new(ctx.dim());
    let bound = 1.0 / consts.green_constant;
    let mut pre = BTreeMap::new();
    let mut ok = true;
    let mut note = |key: &str, holds: Result<bool>| {
        let v = match holds {
            Ok(true) => "holds".to_string(),
            Ok(false) => {
                ok = false;
                "fails".to_string()
            }
            Err(e) => {
                ok = false;
                format!("undecided: {e}")
            }
        };
        pre.insert(key.to_string(), v);
    };
    note(
        "finite_volume",
        volume.and_then(|v| match v.class {
            IntegralClass::Finite => Ok(true),
            IntegralClass::Infinite => Ok(false),
            IntegralClass::Inconclusive => Err(Error::Domain("volume tail test inconclusive".into())),
        }),
    );
    let q_minus = if density.is_radial() || density.is_zero() {
        negative_part_mass(density).and_then(|c| match c.class {
            IntegralClass::Finite => Ok(true),
            IntegralClass::Infinite => Ok(false),
            IntegralClass::Inconclusive => Err(Error::Domain("tail test of Q^- inconclusive".into())),
        })
    } else {
        // the signed mass is only computed after the absolute test passes
        alpha.as_ref().map(|_| true).map_err(Clone::clone)
    };
    note("q_minus_integrable", q_minus);
    if ctx.dim().get() >= 4 {
        let v = criteria::laplacian_growth(&ctx.u, &dyadic_radii()).and_then(|v| match v.verdict {
            GrowthClass::LittleO => Ok(true),
            GrowthClass::NotLittleO => Ok(false),
            GrowthClass::Inconclusive => Err(Error::Domain(format!(
                "|Δu| ball integrals grow with exponent {:.3}",
                v.fitted_exponent
            ))),
        });
        note("laplacian_growth", v);
    }
    let total = alpha.ok().map(|a| a * bound);
    let satisfied = match (ok, total) {
        (true, Some(t)) => Some(t >= bound - COHN_VOSSEN_TOLERANCE),
        _ => None,
    };
    CohnVossen {
        total,
        bound,
        satisfied,
        preconditions: pre,
    }
}

// ---------------------------------------------------------------------------
// Report

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisConfig {
    pub seed: u64,
    /// Volume-growth radii for radial metrics.
    pub volume_radii: Vec<f64>,
    /// Volume-growth radii for non-radial metrics.
    pub general_volume_radii: Vec<f64>,
    pub criteria_radii: Vec<f64>,
    pub distance_radii: Vec<f64>,
    /// Polynomial degree of the decomposition; `n - 2` when absent.
    pub max_degree: Option<u32>,
    pub decompose: bool,
    /// Echoed into the report provenance.
    pub spec: serde_json::Value,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig {
            seed: 0x5eed,
            volume_radii: geometric_radii(1e6, 1e30, 13),
            general_volume_radii: geometric_radii(10.0, 1e4, 7),
            criteria_radii: dyadic_radii(),
            distance_radii: geometric_radii(10.0, 1e4, 7),
            max_degree: None,
            decompose: true,
            spec: serde_json::Value::Null,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TauReport {
    pub exponent: f64,
    pub sup: f64,
    pub inf: f64,
    pub window: [f64; 2],
    pub residual: f64,
}

impl From<&GrowthEstimate> for TauReport {
    fn from(g: &GrowthEstimate) -> Self {
        TauReport {
            exponent: g.exponent,
            sup: g.sup_exponent,
            inf: g.inf_exponent,
            window: g.window,
            residual: g.residual,
        }
    }
}

/// One entry of the criteria map. Non-finite exponents are stored as `None`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionEntry {
    /// `little_o`, `not_little_o`, `inconclusive`, `normal`, `non_normal`,
    /// `not_applicable` or `error`.
    pub verdict: String,
    pub fitted_exponent: Option<f64>,
    pub threshold: Option<f64>,
    pub margin: Option<f64>,
    pub detail: Option<String>,
}

impl CriterionEntry {
    fn from_growth(v: &GrowthVerdict) -> Self {
        CriterionEntry {
            verdict: v.verdict.as_str().into(),
            fitted_exponent: v.fitted_exponent.is_finite().then_some(v.fitted_exponent),
            threshold: Some(v.threshold),
            margin: Some(v.margin),
            detail: None,
        }
    }

    fn plain(verdict: &str, detail: String) -> Self {
        CriterionEntry {
            verdict: verdict.into(),
            fitted_exponent: None,
            threshold: None,
            margin: None,
            detail: Some(detail),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub spec: serde_json::Value,
    pub seed: u64,
    pub tolerances: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecompositionSummary {
    pub max_degree: u32,
    pub coefficients: Vec<Coefficient>,
    pub fit_residual: f64,
    pub relative_residual: f64,
    pub nonconstant: bool,
    pub poor_fit: bool,
    pub sample_set: String,
}

impl From<&Decomposition> for DecompositionSummary {
    fn from(d: &Decomposition) -> Self {
        DecompositionSummary {
            max_degree: d.max_degree,
            coefficients: d.coefficients.clone(),
            fit_residual: d.fit_residual,
            relative_residual: d.relative_residual,
            nonconstant: d.nonconstant,
            poor_fit: d.poor_fit,
            sample_set: d.sample_set.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalityReport {
    pub n: usize,
    pub alpha0: Option<f64>,
    pub tau: Option<TauReport>,
    pub identity_residual: Option<f64>,
    /// `normal`, `non_normal` or `inconclusive`.
    pub verdict: String,
    pub criteria: BTreeMap<String, CriterionEntry>,
    pub cohn_vossen: Option<CohnVossen>,
    pub diameter: Classified,
    pub volume: Classified,
    pub provenance: Provenance,
    pub distance_exponent: Option<f64>,
    /// `hint` (user-asserted), `rays` (divergent rays) or `unknown`.
    pub completeness: String,
    pub decomposition: Option<DecompositionSummary>,
    /// Failed sub-computations by field name.
    pub errors: BTreeMap<String, String>,
}

impl NormalityReport {
    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Schema {
            pointer: "/".into(),
            msg: e.to_string(),
        })
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Schema {
            pointer: format!("line {} column {}", e.line(), e.column()),
            msg: e.to_string(),
        })
    }
}

fn tolerances() -> BTreeMap<String, f64> {
    BTreeMap::from([
        ("classifier_margin".to_string(), DEFAULT_MARGIN),
        ("classifier_slack".to_string(), THRESHOLD_SLACK),
        ("cohn_vossen".to_string(), COHN_VOSSEN_TOLERANCE),
        ("identity".to_string(), IDENTITY_TOLERANCE),
        ("decomposition_significance".to_string(), decompose::SIGNIFICANCE),
        (
            "decomposition_coefficient_floor".to_string(),
            decompose::COEFFICIENT_FLOOR,
        ),
        ("decomposition_residual".to_string(), decompose::RESIDUAL_TOLERANCE),
        (
            "potential_rel_tol".to_string(),
            PotentialConfig::default().radial_rel_tol,
        ),
        ("volume_rel_tol".to_string(), crate::geometry::VOLUME_REL_TOL),
    ])
}

fn positive_part(x: f64) -> f64 {
    x.max(0.0)
}

/// Runs every applicable computation on `ctx`; failures are recorded in
/// `errors` and the report is still produced.
pub fn analyze_normality(ctx: &MetricContext, config: &AnalysisConfig) -> NormalityReport {
    let dim = ctx.dim();
    let n = dim.get();
    let mut errors = BTreeMap::new();
    let mut record = |key: &str, e: &Error| {
        errors.insert(key.to_string(), e.to_string());
    };

    let density = match analysis_density(&ctx.u) {
        Ok(f) => Some(f),
        Err(e) => {
            record("density", &e);
            None
        }
    };
    let alpha = density.as_ref().map(total_mass_alpha);
    let alpha0 = match &alpha {
        Some(Ok(a)) => Some(a.alpha_hat),
        Some(Err(e)) => {
            record("alpha0", e);
            None
        }
        None => None,
    };

    let radii = if ctx.is_radial() {
        &config.volume_radii
    } else {
        &config.general_volume_radii
    };
    let (tau_est, tau_overflow) = match volume_growth(ctx, radii) {
        Ok(g) => (Some(g), false),
        Err(e) => {
            record("tau", &e);
            (None, matches!(e, Error::Overflow(_)))
        }
    };
    let identity_residual = match (&tau_est, alpha0) {
        (Some(t), Some(a)) => Some((t.exponent - positive_part(1.0 - a)).abs()),
        _ => None,
    };

    let volume_res = total_volume(ctx);
    let volume = match &volume_res {
        Ok(c) => *c,
        Err(e) => {
            record("volume", e);
            Classified {
                class: IntegralClass::Inconclusive,
                value: None,
            }
        }
    };
    let diameter = match diameter_estimate(ctx) {
        Ok(d) => Classified {
            class: d.class,
            value: d.value,
        },
        Err(e) => {
            record("diameter", &e);
            Classified {
                class: IntegralClass::Inconclusive,
                value: None,
            }
        }
    };
    let distance_exponent = if ctx.is_radial() {
        match distance_growth_exponent(ctx, &Point::origin(dim), &config.distance_radii) {
            Ok(g) => Some(g.exponent),
            Err(e) => {
                record("distance_exponent", &e);
                None
            }
        }
    } else {
        None
    };
    let (complete, completeness) = match ctx.completeness_hint {
        Some(h) => (Some(h), "hint"),
        None if diameter.class == IntegralClass::Infinite => (Some(true), "rays"),
        None => (None, "unknown"),
    };

    // entropy criterion: normal => tau = (1 - alpha0)^+; complete with
    // finite entropy => normal
    let mut criteria = BTreeMap::new();
    let entropy = if tau_overflow {
        CriterionEntry::plain("non_normal", "conformal volumes overflow: infinite entropy".into())
    } else if let Some(t) = &tau_est {
        let mut e = match identity_residual {
            Some(r) if r > IDENTITY_TOLERANCE => {
                CriterionEntry::plain("non_normal", format!("entropy misses (1 - alpha0)^+ by {r:.4}"))
            }
            _ if complete == Some(true) => {
                CriterionEntry::plain("normal", format!("finite entropy, completeness from {completeness}"))
            }
            _ => CriterionEntry::plain("inconclusive", "finite entropy but completeness undecided".into()),
        };
        e.fitted_exponent = Some(t.exponent);
        e
    } else {
        CriterionEntry::plain("error", "entropy not computed".into())
    };
    criteria.insert("entropy".to_string(), entropy.clone());

    let gated = |name: &str, run: &dyn Fn() -> Result<GrowthVerdict>| -> (CriterionEntry, Option<Error>) {
        if n < 4 {
            return (
                CriterionEntry::plain("not_applicable", format!("{name} is stated for n >= 4")),
                None,
            );
        }
        match run() {
            Ok(v) => (CriterionEntry::from_growth(&v), None),
            Err(e) => (CriterionEntry::plain("error", e.to_string()), Some(e)),
        }
    };
    let radii = &config.criteria_radii;
    for (key, run) in [
        (
            "condition_a",
            &(|| normality_condition_a(&ctx.u, radii)) as &dyn Fn() -> Result<GrowthVerdict>,
        ),
        ("condition_b", &|| normality_condition_b(&ctx.u, radii)),
        ("scalar_criterion", &|| normality_scalar_criterion(&ctx.u, radii)),
    ] {
        let (entry, err) = gated(key, run);
        if let Some(e) = err {
            record(key, &e);
        }
        criteria.insert(key.to_string(), entry);
    }

    let decomposition = match (&density, config.decompose) {
        (Some(f), true) => {
            let deg = config.max_degree.unwrap_or(n as u32 - 2);
            let count = monomials_up_to(n, deg).len();
            let samples = SampleSet::standard(dim, config.seed, 3 * count);
            let res = PotentialEvaluator::new(f, PotentialConfig::default())
                .and_then(|ev| decompose_with(&ctx.u, &ev, &samples, deg));
            match res {
                Ok(d) => Some(d),
                Err(e) => {
                    record("decomposition", &e);
                    None
                }
            }
        }
        _ => None,
    };

    let verdict = match (&decomposition, entropy.verdict.as_str()) {
        (Some(d), _) if !d.is_constant() => "non_normal",
        (Some(_), "non_normal") => "inconclusive",
        (Some(_), _) => "normal",
        (None, "normal") => "normal",
        (None, "non_normal") => "non_normal",
        (None, _) => "inconclusive",
    };

    let cohn_vossen = density.as_ref().map(|f| {
        let a = match &alpha {
            Some(Ok(a)) => Ok(a.alpha_hat),
            Some(Err(e)) => Err(e.clone()),
            None => Err(Error::Domain("no density".into())),
        };
        assemble_cohn_vossen(ctx, f, a, volume_res.clone())
    });

    NormalityReport {
        n,
        alpha0,
        tau: tau_est.as_ref().map(TauReport::from),
        identity_residual,
        verdict: verdict.into(),
        criteria,
        cohn_vossen,
        diameter,
        volume,
        provenance: Provenance {
            spec: config.spec.clone(),
            seed: config.seed,
            tolerances: tolerances(),
        },
        distance_exponent,
        completeness: completeness.into(),
        decomposition: decomposition.as_ref().map(DecompositionSummary::from),
        errors,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::Dimension;
    use std::f64::consts::PI;

    fn d(n: i64) -> Dimension {
        Dimension::new(n).unwrap()
    }

    #[test]
    fn cohn_vossen_examples() {
        let sphere = ScalarField::parse("log(2/(1+r^2))", d(2)).unwrap();
        let cv = cohn_vossen_check(&sphere).unwrap();
        assert!((cv.total.unwrap() - 4.0 * PI).abs() < 1e-3);
        assert!((cv.bound - 2.0 * PI).abs() < 1e-12);
        assert_eq!(cv.satisfied, Some(true));
        let cone = ScalarField::parse("log(2) - log(1+r^2)", d(2)).unwrap();
        let cv = cohn_vossen_check(&cone).unwrap();
        assert!((cv.total.unwrap() - 4.0 * PI).abs() < 1e-3);
        assert_eq!(cv.satisfied, Some(true));
        let flat = ScalarField::zero(d(2));
        let cv = cohn_vossen_check(&flat).unwrap();
        assert_eq!(cv.satisfied, None);
        assert_eq!(cv.preconditions["finite_volume"], "fails");
    }

    #[test]
    fn sphere_report() {
        let u = ScalarField::parse("log(2/(1+r^2))", d(2)).unwrap();
        let rep = analyze_normality(&MetricContext::new(u), &AnalysisConfig::default());
        assert!(rep.errors.is_empty(), "{:?}", rep.errors);
        assert!((rep.alpha0.unwrap() - 2.0).abs() < 1e-3);
        assert!(rep.tau.as_ref().unwrap().exponent.abs() < 0.05);
        assert!(rep.identity_residual.unwrap() <= 0.05);
        assert_eq!(rep.diameter.class, IntegralClass::Finite);
        assert!((rep.diameter.value.unwrap() - PI).abs() < 1e-6);
        assert_eq!(rep.volume.class, IntegralClass::Finite);
        assert!((rep.volume.value.unwrap() - 4.0 * PI).abs() < 1e-4);
        assert_eq!(rep.verdict, "normal");
        assert_eq!(rep.criteria["condition_a"].verdict, "not_applicable");
        let json = rep.to_json().unwrap();
        let back = NormalityReport::from_json(&json).unwrap();
        assert_eq!(back.to_json().unwrap(), json);
    }
}
