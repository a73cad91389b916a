//! Verification reports: one entry per check, plus environment and optional timings.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::exterior::ExteriorForm;
use crate::scalar::{to_f64, Q};

pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// Where an expected value comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckKind {
    /// A value written down in closed form ahead of the computation.
    ClosedForm,
    /// A structural identity whose two sides are computed independently.
    Identity,
    /// Agreement between two backends or two covers.
    CrossCheck,
    /// Expected to fail the hypothesis; passes when the failure shows up.
    NegativeControl,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub kind: CheckKind,
    pub expected: String,
    pub computed: String,
    pub residual: f64,
    pub pass: bool,
}

impl Check {
    /// Exact comparison of two forms; the residual is the largest coefficient of the difference.
    pub fn forms(name: &str, kind: CheckKind, expected: &ExteriorForm, computed: &ExteriorForm) -> Check {
        let (residual, pass) = match computed.sub(expected) {
            Ok(d) => (to_f64(&d.max_abs_coeff()), d.is_zero()),
            Err(_) => (f64::INFINITY, false),
        };
        Check { name: name.into(), kind, expected: expected.to_string(), computed: computed.to_string(), residual, pass }
    }

    pub fn rational(name: &str, kind: CheckKind, expected: &Q, computed: &Q) -> Check {
        let residual = to_f64(&crate::scalar::abs(&(computed - expected)));
        Check { name: name.into(), kind, expected: expected.to_string(), computed: computed.to_string(), residual, pass: expected == computed }
    }

    pub fn flag(name: &str, kind: CheckKind, expected: &str, computed: impl std::fmt::Display, pass: bool) -> Check {
        Check { name: name.into(), kind, expected: expected.into(), computed: computed.to_string(), residual: if pass { 0.0 } else { 1.0 }, pass }
    }

    pub fn within(name: &str, kind: CheckKind, residual: f64, tolerance: f64) -> Check {
        Check {
            name: name.into(),
            kind,
            expected: format!("residual <= {tolerance:e}"),
            computed: format!("{residual:e}"),
            residual,
            pass: residual <= tolerance,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Environment {
    pub crate_version: String,
    pub schema_version: u32,
    pub config_hash: String,
}

impl Environment {
    pub fn for_config(config: &impl Serialize) -> Environment {
        let bytes = serde_json::to_vec(config).unwrap_or_default();
        let hash = Sha256::digest(&bytes);
        Environment {
            crate_version: env!("CARGO_PKG_VERSION").into(),
            schema_version: REPORT_SCHEMA_VERSION,
            config_hash: hash.iter().map(|b| format!("{b:02x}")).collect(),
        }
    }
}

/// Coefficient table of a form, one row per (wedge, cell, monomial).
#[derive(Clone, Debug, Default)]
pub struct FormTable {
    pub name: String,
    pub rows: Vec<[String; 4]>,
}

impl FormTable {
    pub const HEADER: [&'static str; 4] = ["wedge", "cell", "monomial", "coeff"];

    pub fn of(name: &str, form: &ExteriorForm) -> FormTable {
        let json = form.to_json();
        let space: Vec<String> = json["space"].as_array().map(|a| a.iter().filter_map(|v| v.as_str().map(String::from)).collect()).unwrap_or_default();
        let mut rows = Vec::new();
        for term in json["terms"].as_array().into_iter().flatten() {
            let wedge = term["wedge"].as_array().map(|w| w.iter().filter_map(|v| v.as_str()).map(|n| format!("d{n}")).collect::<Vec<_>>().join("^")).unwrap_or_default();
            for piece in term["coeff"]["pieces"].as_array().into_iter().flatten() {
                let cell = piece["cell"]
                    .as_array()
                    .map(|c| c.iter().map(|b| format!("{}:[{},{}]", b["coord"].as_str().unwrap_or(""), b["lo"].as_str().unwrap_or(""), b["hi"].as_str().unwrap_or(""))).collect::<Vec<_>>().join(" "))
                    .unwrap_or_default();
                for m in piece["monomials"].as_array().into_iter().flatten() {
                    let mut mono: Vec<String> = m["exps"]
                        .as_array()
                        .into_iter()
                        .flatten()
                        .zip(&space)
                        .filter_map(|(e, n)| match e.as_u64() {
                            Some(0) | None => None,
                            Some(1) => Some(n.clone()),
                            Some(e) => Some(format!("{n}^{e}")),
                        })
                        .collect();
                    if let Some(t) = m["tau"].as_i64().filter(|t| *t != 0) {
                        mono.push(format!("tau^{t}"));
                    }
                    for (t, n) in m["trig"].as_array().into_iter().flatten().zip(&space) {
                        if let Some(obj) = t.as_object() {
                            for (f, k) in obj {
                                mono.push(format!("{}({}*tau*{n})", f.to_lowercase(), k));
                            }
                        }
                    }
                    let mono = if mono.is_empty() { "1".to_string() } else { mono.join("*") };
                    rows.push([wedge.clone(), cell.clone(), mono, m["coeff"].as_str().unwrap_or("").to_string()]);
                }
            }
        }
        FormTable { name: name.into(), rows }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VerificationReport {
    pub scenario: String,
    pub config: serde_json::Value,
    pub environment: Environment,
    pub checks: Vec<Check>,
    /// Wall-clock milliseconds per stage; only filled when requested, so exact reports stay reproducible.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub timings_ms: Option<BTreeMap<String, u128>>,
    #[serde(skip)]
    pub tables: Vec<FormTable>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }
}
