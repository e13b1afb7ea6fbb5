//! JSON metric specification documents.
//!
//! ```json
//! {"n": 2, "kind": "builtin", "name": "cone", "params": {"a": 0.5}}
//! {"n": 4, "kind": "expression", "u": "log(2/(1+r^2))"}
//! {"n": 2, "kind": "radial-table", "nodes": [[0, 0.69], [0.5, 0.47], ...]}
//! ```
//!
//! Validation errors carry the JSON pointer of the offending value.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::fields::Dimension;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpecKind {
    Builtin,
    Expression,
    RadialTable,
}

/// Validated metric specification.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricSpec {
    pub n: usize,
    pub kind: SpecKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty", default)]
    pub params: BTreeMap<String, f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub u: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nodes: Option<Vec<[f64; 2]>>,
    /// User-asserted completeness of the metric.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub completeness_hint: Option<bool>,
}

fn schema(pointer: &str, msg: impl Into<String>) -> Error {
    Error::Schema {
        pointer: pointer.to_string(),
        msg: msg.into(),
    }
}

impl MetricSpec {
    pub fn dimension(&self) -> Dimension {
        Dimension::new(self.n as i64).expect("validated on parse")
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let v: Value = serde_json::from_str(text).map_err(|e| schema("", e.to_string()))?;
        Self::from_value(&v)
    }

    pub fn from_value(v: &Value) -> Result<Self> {
        let obj = v
            .as_object()
            .ok_or_else(|| schema("", "specification must be a JSON object"))?;
        const KNOWN: [&str; 7] = ["n", "kind", "name", "params", "u", "nodes", "completeness_hint"];
        if let Some(k) = obj.keys().find(|k| !KNOWN.contains(&k.as_str())) {
            return Err(schema(&format!("/{}", escape(k)), "unknown field"));
        }
        let n = obj.get("n").ok_or_else(|| schema("/n", "missing required field"))?;
        let n = n.as_i64().ok_or_else(|| schema("/n", "must be an integer"))?;
        if Dimension::new(n).is_err() {
            return Err(schema("/n", format!("must be an even integer >= 2, got {n}")));
        }
        let kind = match obj.get("kind").map(|k| k.as_str()) {
            None => return Err(schema("/kind", "missing required field")),
            Some(Some("builtin")) => SpecKind::Builtin,
            Some(Some("expression")) => SpecKind::Expression,
            Some(Some("radial-table")) => SpecKind::RadialTable,
            Some(_) => {
                return Err(schema(
                    "/kind",
                    "must be one of \"builtin\", \"expression\", \"radial-table\"",
                ))
            }
        };
        let name = match obj.get("name") {
            None => None,
            Some(Value::String(s)) => Some(s.clone()),
            Some(_) => return Err(schema("/name", "must be a string")),
        };
        let mut params = BTreeMap::new();
        match obj.get("params") {
            None => {}
            Some(Value::Object(m)) => {
                for (k, val) in m {
                    let x = val
                        .as_f64()
                        .filter(|x| x.is_finite())
                        .ok_or_else(|| schema(&format!("/params/{}", escape(k)), "must be a finite number"))?;
                    params.insert(k.clone(), x);
                }
            }
            Some(_) => return Err(schema("/params", "must be an object")),
        }
        let u = match obj.get("u") {
            None => None,
            Some(Value::String(s)) => Some(s.clone()),
            Some(_) => return Err(schema("/u", "must be a string")),
        };
        let nodes = match obj.get("nodes") {
            None => None,
            Some(Value::Array(rows)) => {
                let mut out = Vec::with_capacity(rows.len());
                for (i, row) in rows.iter().enumerate() {
                    let p = format!("/nodes/{i}");
                    let pair = row
                        .as_array()
                        .filter(|a| a.len() == 2)
                        .ok_or_else(|| schema(&p, "must be a [r, value] pair"))?;
                    let r = pair[0]
                        .as_f64()
                        .filter(|x| x.is_finite() && *x >= 0.0)
                        .ok_or_else(|| schema(&format!("{p}/0"), "radius must be finite and >= 0"))?;
                    let val = pair[1]
                        .as_f64()
                        .filter(|x| x.is_finite())
                        .ok_or_else(|| schema(&format!("{p}/1"), "value must be finite"))?;
                    out.push([r, val]);
                }
                Some(out)
            }
            Some(_) => return Err(schema("/nodes", "must be an array")),
        };
        let completeness_hint = match obj.get("completeness_hint") {
            None => None,
            Some(Value::Bool(b)) => Some(*b),
            Some(_) => return Err(schema("/completeness_hint", "must be a boolean")),
        };
        match kind {
            SpecKind::Builtin if name.is_none() => return Err(schema("/name", "required for kind \"builtin\"")),
            SpecKind::Expression if u.is_none() => return Err(schema("/u", "required for kind \"expression\"")),
            SpecKind::RadialTable => match &nodes {
                None => return Err(schema("/nodes", "required for kind \"radial-table\"")),
                Some(v) if v.iter().filter(|p| p[0] > 0.0).count() < 5 => {
                    return Err(schema("/nodes", "need at least 5 nodes with r > 0"))
                }
                Some(v) => {
                    for (i, w) in v.windows(2).enumerate() {
                        if !(w[1][0] > w[0][0]) {
                            return Err(schema(
                                &format!("/nodes/{}/0", i + 1),
                                "radii must be strictly increasing",
                            ));
                        }
                    }
                }
            },
            _ => {}
        }
        Ok(MetricSpec {
            n: n as usize,
            kind,
            name,
            params,
            u,
            nodes,
            completeness_hint,
        })
    }

    pub fn to_value(&self) -> Value {
        serde_json::to_value(self).expect("spec is serializable")
    }

    pub fn param(&self, key: &str) -> Option<f64> {
        self.params.get(key).copied()
    }
}

/// JSON-pointer escaping of a single reference token.
fn escape(token: &str) -> String {
    token.replace('~', "~0").replace('/', "~1")
}
