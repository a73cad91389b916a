//! User-supplied families read from JSON.
//!
//! ```json
//! {
//!   "name": "shifted torus",
//!   "family": {
//!     "kind": "chart",
//!     "fibre": ["x1", "x2"],
//!     "base": [{"name": "z1", "lo": "-1", "hi": "1"}, {"name": "z2", "lo": "-1", "hi": "1"}],
//!     "b": [{"d": ["x1"], "coeff": [{"c": "1", "pow": {"z1": 1}}]},
//!           {"d": ["x2"], "coeff": [{"c": "1", "pow": {"z2": 1}}, {"c": "1/2"}]}],
//!     "power": 2
//!   },
//!   "expected_lambda": [{"d": ["z1"], "coeff": [{"c": "1", "pow": {"z2": 1}}]},
//!                       {"d": ["z2"], "coeff": [{"c": "-1", "pow": {"z1": 1}}]}]
//! }
//! ```
//! `kind` may also be `torus` (with `k`) or `surface` (with `g`).

use std::collections::BTreeMap;
use std::path::Path;

use serde::Deserialize;

use crate::chern_weil::InvariantMonomial;
use crate::error::{Error, Result};
use crate::exterior::{Coord, CoordinateSpace, ExteriorForm, Monomial, Poly, Space, Trig};
use crate::families::{FibreCondition, FamilySpec};
use crate::scalar::{parse_q, q, Q};

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CustomScenario {
    pub name: String,
    pub family: CustomFamily,
    #[serde(default)]
    pub expected_lambda: Option<Vec<Term>>,
    #[serde(default)]
    pub expected_curvature: Option<Vec<Term>>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CustomFamily {
    Torus { k: usize },
    Surface { g: usize },
    Chart {
        fibre: Vec<String>,
        base: Vec<BaseCoord>,
        b: Vec<Term>,
        power: usize,
        #[serde(default)]
        coeff: Option<String>,
    },
}

/// An interval `[lo, hi]`, or a circle when both bounds are omitted.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BaseCoord {
    pub name: String,
    #[serde(default)]
    pub lo: Option<String>,
    #[serde(default)]
    pub hi: Option<String>,
}

/// `(Σ monomials) d(names…)`.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Term {
    #[serde(default)]
    pub d: Vec<String>,
    pub coeff: Vec<MonomialSpec>,
}

/// `c · Π x^pow · Π cos(τ m x) · Π sin(τ m x)`.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonomialSpec {
    pub c: String,
    #[serde(default)]
    pub pow: BTreeMap<String, u32>,
    #[serde(default)]
    pub cos: BTreeMap<String, u32>,
    #[serde(default)]
    pub sin: BTreeMap<String, u32>,
}

fn rational(s: &str) -> Result<Q> {
    parse_q(s).ok_or_else(|| Error::Config(format!("`{s}` is not a rational number")))
}

fn poly(space: &Space, monos: &[MonomialSpec]) -> Result<Poly> {
    let n = space.dim();
    let mut terms = Vec::new();
    for m in monos {
        let mut mono = Monomial::one(n);
        for (v, e) in &m.pow {
            mono.exps[space.index_of(v)?] = *e;
        }
        for (map, trig) in [(&m.cos, Trig::Cos as fn(u32) -> Trig), (&m.sin, Trig::Sin as fn(u32) -> Trig)] {
            for (v, f) in map {
                let i = space.index_of(v)?;
                if mono.trig[i] != Trig::One {
                    return Err(Error::Config(format!("`{v}` carries two trigonometric factors; expand the product first")));
                }
                mono.trig[i] = if *f == 0 { Trig::One } else { trig(*f) };
            }
        }
        terms.push((mono, rational(&m.c)?));
    }
    Ok(Poly::from_terms(n, terms))
}

fn form(space: &Space, terms: &[Term]) -> Result<ExteriorForm> {
    let degree = terms.first().map_or(0, |t| t.d.len());
    let mut out = ExteriorForm::zero(space, degree);
    for t in terms {
        if t.d.len() != degree {
            return Err(Error::Config("all terms of a form must have the same degree".into()));
        }
        let names: Vec<&str> = t.d.iter().map(String::as_str).collect();
        out = out.add(&ExteriorForm::monomial(space, poly(space, &t.coeff)?, &names)?)?;
    }
    Ok(out)
}

impl CustomScenario {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("invalid custom scenario: {e}")))
    }

    pub fn family(&self) -> Result<FamilySpec> {
        let mut spec = match &self.family {
            CustomFamily::Torus { k } => FamilySpec::torus(*k)?,
            CustomFamily::Surface { g } => FamilySpec::surface(*g)?,
            CustomFamily::Chart { fibre, base, b, power, coeff } => {
                let mut coords: Vec<Coord> = fibre.iter().map(|n| Coord::periodic(n)).collect();
                let mut base_coords = Vec::new();
                for c in base {
                    base_coords.push(match (&c.lo, &c.hi) {
                        (Some(lo), Some(hi)) => Coord::affine(&c.name, rational(lo)?, rational(hi)?),
                        (None, None) => Coord::periodic(&c.name),
                        _ => return Err(Error::Config(format!("base coordinate `{}` needs both bounds or neither", c.name))),
                    });
                }
                coords.extend(base_coords.iter().cloned());
                let total = CoordinateSpace::new("Y", coords)?;
                let c = coeff.as_deref().map(rational).transpose()?.unwrap_or_else(|| q(1));
                FamilySpec {
                    name: self.name.clone(),
                    base: CoordinateSpace::new("Z", base_coords)?,
                    chart: Some(form(&total, b)?),
                    total,
                    fibre: fibre.clone(),
                    formal: None,
                    line_bundle: None,
                    invariant: InvariantMonomial::new(*power, c),
                    condition: FibreCondition::Flat,
                    fibration: None,
                }
            }
        };
        spec.name = self.name.clone();
        Ok(spec)
    }

    pub fn expected_lambda(&self, base: &Space) -> Result<Option<ExteriorForm>> {
        self.expected_lambda.as_deref().map(|t| form(base, t)).transpose()
    }

    pub fn expected_curvature(&self, base: &Space) -> Result<Option<ExteriorForm>> {
        self.expected_curvature.as_deref().map(|t| form(base, t)).transpose()
    }
}
