//! Spec documents to reports and parameter sweeps.

use crate::error::{Error, Result};
use crate::fields::spec::{MetricSpec, SpecKind};
use crate::fields::{RadialProfile, ScalarField};
use crate::geometry::MetricContext;
use crate::normality::{analyze_normality, AnalysisConfig, NormalityReport};

use super::{gallery, ProfileSource};

/// Fixed CSV header of [`sweep`].
pub const SWEEP_HEADER: [&str; 8] = [
    "value",
    "alpha0",
    "tau",
    "identity_residual",
    "distance_exponent",
    "diameter_class",
    "volume_class",
    "error",
];

/// Builds the metric described by a validated spec.
pub fn context_from_spec(spec: &MetricSpec) -> Result<MetricContext> {
    let dim = spec.dimension();
    let ctx = match spec.kind {
        SpecKind::Builtin => gallery(spec.name.as_deref().unwrap_or_default(), &spec.params, dim)?,
        SpecKind::Expression => {
            let src = spec.u.as_deref().unwrap_or_default();
            let u = ScalarField::parse(src, dim).map_err(|e| {
                if e.is_input_error() {
                    Error::Schema {
                        pointer: "/u".into(),
                        msg: e.to_string(),
                    }
                } else {
                    e
                }
            })?;
            MetricContext::new(u)
        }
        SpecKind::RadialTable => {
            let nodes: Vec<(f64, f64)> = spec.nodes.iter().flatten().map(|p| (p[0], p[1])).collect();
            let profile = RadialProfile::from_nodes(&nodes).map_err(|e| Error::Schema {
                pointer: "/nodes".into(),
                msg: e.to_string(),
            })?;
            MetricContext::new(ProfileSource::field(profile.clone(), dim)).with_profile(profile)?
        }
    };
    Ok(match spec.completeness_hint {
        Some(h) => ctx.with_completeness_hint(Some(h)),
        None => ctx,
    })
}

/// Analyses the metric of `spec`; the report echoes `spec` and the seed.
pub fn run_analysis(spec: &MetricSpec, seed: Option<u64>) -> Result<NormalityReport> {
    let ctx = context_from_spec(spec)?;
    let mut cfg = AnalysisConfig {
        spec: spec.to_value(),
        ..AnalysisConfig::default()
    };
    if let Some(s) = seed {
        cfg.seed = s;
    }
    Ok(analyze_normality(&ctx, &cfg))
}

pub fn run_analysis_str(text: &str, seed: Option<u64>) -> Result<NormalityReport> {
    run_analysis(&MetricSpec::from_json_str(text)?, seed)
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// One analysis per value of `param`, as CSV with [`SWEEP_HEADER`].
pub fn sweep(param: &str, values: &[f64], template: &MetricSpec) -> Result<String> {
    let takes_param = match template.kind {
        SpecKind::Builtin => {
            let name = template.name.as_deref().unwrap_or_default();
            super::gallery_entries()
                .iter()
                .find(|e| e.name == name)
                .is_some_and(|e| e.params.iter().any(|p| p.name == param))
        }
        _ => template.params.contains_key(param),
    };
    if !takes_param {
        return Err(Error::Schema {
            pointer: format!("/params/{param}"),
            msg: "the template does not reference this parameter".into(),
        });
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::Io(e.to_string());
    w.write_record(SWEEP_HEADER).map_err(io)?;
    for &v in values {
        let mut spec = template.clone();
        spec.params.insert(param.to_string(), v);
        let row = match run_analysis(&spec, None) {
            Ok(r) => {
                let errors: Vec<String> = r.errors.iter().map(|(k, e)| format!("{k}: {e}")).collect();
                [
                    v.to_string(),
                    opt(r.alpha0),
                    opt(r.tau.as_ref().map(|t| t.exponent)),
                    opt(r.identity_residual),
                    opt(r.distance_exponent),
                    r.diameter.class.as_str().to_string(),
                    r.volume.class.as_str().to_string(),
                    errors.join("; "),
                ]
            }
            Err(e) => [
                v.to_string(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                e.to_string(),
            ],
        };
        w.write_record(&row).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_sweep_is_header_only() {
        let t = MetricSpec::from_json_str(r#"{"n": 2, "kind": "builtin", "name": "cone"}"#).unwrap();
        assert_eq!(sweep("a", &[], &t).unwrap(), SWEEP_HEADER.join(",") + "\n");
        assert!(matches!(sweep("c", &[], &t), Err(Error::Schema { .. })));
    }

    #[test]
    fn expression_errors_point_at_u() {
        let t = MetricSpec::from_json_str(r#"{"n": 2, "kind": "expression", "u": "log(("}"#).unwrap();
        match run_analysis(&t, None) {
            Err(Error::Schema { pointer, .. }) => assert_eq!(pointer, "/u"),
            other => panic!("{other:?}"),
        }
    }
}
