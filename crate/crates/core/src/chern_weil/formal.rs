//! `Ω*(Z) ⊗ H*(X)` with `H*(X)` given by structure constants.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exterior::{ExteriorForm, Space};
use crate::scalar::{q, Q};

/// A graded-commutative algebra with basis `γ_a` (`γ_0 = 1`) and a top pairing.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FormalFiberModel {
    pub name: String,
    pub dim: usize,
    pub labels: Vec<String>,
    pub degrees: Vec<usize>,
    /// `γ_a ∧ γ_b = Σ c·γ_c`; missing pairs multiply to zero.
    #[serde(with = "pair_keys")]
    pub mult: BTreeMap<(usize, usize), Vec<(usize, Q)>>,
    /// `∫_X γ_a` for top-degree basis elements.
    pub pairing: BTreeMap<usize, Q>,
}

mod pair_keys {
    use super::*;
    use serde::{Deserializer, Serializer};

    type Table = BTreeMap<(usize, usize), Vec<(usize, Q)>>;

    pub fn serialize<S: Serializer>(m: &Table, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(m.iter())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Table, D::Error> {
        let v: Vec<((usize, usize), Vec<(usize, Q)>)> = Deserialize::deserialize(d)?;
        Ok(v.into_iter().collect())
    }
}

fn parity(k: usize) -> Q {
    if k % 2 == 0 { q(1) } else { q(-1) }
}

impl FormalFiberModel {
    /// Cohomology of `T^k` with generators named after the fibre coordinates.
    /// Basis element `a` is the subset with bit mask `a`.
    pub fn torus(coords: &[&str]) -> Self {
        let k = coords.len();
        let n = 1usize << k;
        let labels = (0..n)
            .map(|m| {
                let s: Vec<String> = (0..k).filter(|i| m >> i & 1 == 1).map(|i| format!("d{}", coords[i])).collect();
                if s.is_empty() { "1".to_string() } else { s.join("∧") }
            })
            .collect();
        let degrees = (0..n).map(|m: usize| m.count_ones() as usize).collect();
        let mut mult = BTreeMap::new();
        for a in 0..n {
            for b in 0..n {
                if a & b == 0 {
                    let sign = crate::exterior::form::merge_sign(a as u64, b as u64);
                    mult.insert((a, b), vec![(a | b, if sign { q(-1) } else { q(1) })]);
                }
            }
        }
        let pairing = BTreeMap::from([(n - 1, q(1))]);
        FormalFiberModel { name: format!("T^{k}"), dim: k, labels, degrees, mult, pairing }
    }

    /// Closed oriented surface of genus `g`: `1, α_1..α_g, β_1..β_g, vol`.
    pub fn surface(g: usize) -> Self {
        let mut labels = vec!["1".to_string()];
        labels.extend((1..=g).map(|i| format!("α{i}")));
        labels.extend((1..=g).map(|i| format!("β{i}")));
        labels.push("vol".into());
        let top = 2 * g + 1;
        let mut degrees = vec![0];
        degrees.extend(std::iter::repeat(1).take(2 * g));
        degrees.push(2);
        let mut mult = BTreeMap::new();
        for a in 0..=top {
            mult.insert((0, a), vec![(a, q(1))]);
            mult.insert((a, 0), vec![(a, q(1))]);
        }
        for i in 1..=g {
            mult.insert((i, g + i), vec![(top, q(1))]);
            mult.insert((g + i, i), vec![(top, q(-1))]);
        }
        FormalFiberModel { name: format!("Σ_{g}"), dim: 2, labels, degrees, mult, pairing: BTreeMap::from([(top, q(1))]) }
    }

    pub fn len(&self) -> usize {
        self.degrees.len()
    }

    pub fn is_empty(&self) -> bool {
        self.degrees.is_empty()
    }

    pub fn index_of(&self, label: &str) -> Result<usize> {
        self.labels.iter().position(|l| l == label).ok_or_else(|| Error::Model(format!("no generator `{label}` in {}", self.name)))
    }

    fn product(&self, a: usize, b: usize) -> Vec<(usize, Q)> {
        self.mult.get(&(a, b)).cloned().unwrap_or_default()
    }

    fn product_vec(&self, x: &BTreeMap<usize, Q>, y: &BTreeMap<usize, Q>) -> BTreeMap<usize, Q> {
        let mut out: BTreeMap<usize, Q> = BTreeMap::new();
        for (a, ca) in x {
            for (b, cb) in y {
                for (c, k) in self.product(*a, *b) {
                    *out.entry(c).or_insert_with(|| q(0)) += ca * cb * k;
                }
            }
        }
        out.retain(|_, v| !crate::scalar::is_zero(v));
        out
    }

    /// Unit, degree additivity, graded commutativity, associativity on all triples,
    /// and pairing only on top degree.
    pub fn verify(&self) -> Result<()> {
        let n = self.len();
        if self.degrees.first() != Some(&0) {
            return Err(Error::Model("γ_0 must be the unit".into()));
        }
        for ((a, b), terms) in &self.mult {
            for (c, _) in terms {
                if self.degrees[*c] != self.degrees[*a] + self.degrees[*b] {
                    return Err(Error::Model(format!("{} ∧ {} has a term of the wrong degree", self.labels[*a], self.labels[*b])));
                }
            }
        }
        let unit = |a: usize| BTreeMap::from([(a, q(1))]);
        for a in 0..n {
            if self.product_vec(&unit(0), &unit(a)) != unit(a) || self.product_vec(&unit(a), &unit(0)) != unit(a) {
                return Err(Error::Model(format!("γ_0 is not a unit for {}", self.labels[a])));
            }
            for b in 0..n {
                let ab = self.product_vec(&unit(a), &unit(b));
                let ba: BTreeMap<usize, Q> = self
                    .product_vec(&unit(b), &unit(a))
                    .into_iter()
                    .map(|(c, v)| (c, v * parity(self.degrees[a] * self.degrees[b])))
                    .collect();
                if ab != ba {
                    return Err(Error::Model(format!("{} and {} do not graded-commute", self.labels[a], self.labels[b])));
                }
                for c in 0..n {
                    let l = self.product_vec(&ab, &unit(c));
                    let r = self.product_vec(&unit(a), &self.product_vec(&unit(b), &unit(c)));
                    if l != r {
                        return Err(Error::Model(format!("associativity fails on ({a}, {b}, {c})")));
                    }
                }
            }
        }
        for a in self.pairing.keys() {
            if self.degrees.get(*a) != Some(&self.dim) {
                return Err(Error::Model(format!("pairing on non-top element {}", self.labels.get(*a).map_or("?", |s| s))));
            }
        }
        Ok(())
    }

    /// `∫_X γ_a ∧ γ_b`.
    pub fn pair(&self, a: usize, b: usize) -> Q {
        self.product(a, b).iter().map(|(c, k)| self.pairing.get(c).cloned().unwrap_or_else(|| q(0)) * k).sum()
    }
}

/// `Σ_a γ_a ∧ f_a` with `f_a` forms on the base.
#[derive(Clone, Debug)]
pub struct FormalForm {
    model: Arc<FormalFiberModel>,
    base: Space,
    degree: usize,
    comps: BTreeMap<usize, ExteriorForm>,
}

impl FormalForm {
    pub fn zero(model: &Arc<FormalFiberModel>, base: &Space, degree: usize) -> Self {
        FormalForm { model: model.clone(), base: base.clone(), degree, comps: BTreeMap::new() }
    }

    /// `γ_a ∧ f`.
    pub fn term(model: &Arc<FormalFiberModel>, a: usize, f: ExteriorForm) -> Result<Self> {
        let deg = *model.degrees.get(a).ok_or_else(|| Error::Model(format!("generator {a} out of range")))?;
        let base = f.space().clone();
        let degree = deg + f.degree();
        let mut comps = BTreeMap::new();
        if !f.is_zero() {
            comps.insert(a, f);
        }
        Ok(FormalForm { model: model.clone(), base, degree, comps })
    }

    pub fn base_form(model: &Arc<FormalFiberModel>, f: ExteriorForm) -> Result<Self> {
        Self::term(model, 0, f)
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn model(&self) -> &Arc<FormalFiberModel> {
        &self.model
    }

    pub fn components(&self) -> &BTreeMap<usize, ExteriorForm> {
        &self.comps
    }

    pub fn is_zero(&self) -> bool {
        self.comps.values().all(|f| f.is_zero())
    }

    fn check(&self, other: &FormalForm) -> Result<()> {
        if !Arc::ptr_eq(&self.model, &other.model) && self.model.labels != other.model.labels {
            return Err(Error::Model("formal forms over different fibre models".into()));
        }
        if !self.base.same_coords(&other.base) {
            return Err(Error::SpaceMismatch(self.base.name.clone(), other.base.name.clone()));
        }
        Ok(())
    }

    fn insert(comps: &mut BTreeMap<usize, ExteriorForm>, a: usize, f: ExteriorForm) -> Result<()> {
        let v = match comps.remove(&a) {
            Some(g) => g.add(&f)?,
            None => f,
        };
        if !v.is_zero() {
            comps.insert(a, v);
        }
        Ok(())
    }

    pub fn add(&self, other: &FormalForm) -> Result<FormalForm> {
        self.check(other)?;
        if self.degree != other.degree && !self.is_zero() && !other.is_zero() {
            return Err(Error::DegreeMismatch { expected: self.degree, found: other.degree });
        }
        let mut out = self.clone();
        out.degree = if self.is_zero() { other.degree } else { self.degree };
        for (a, f) in &other.comps {
            Self::insert(&mut out.comps, *a, f.clone())?;
        }
        Ok(out)
    }

    pub fn scale(&self, c: &Q) -> FormalForm {
        let mut out = self.clone();
        out.comps = self.comps.iter().map(|(a, f)| (*a, f.scale(c))).filter(|(_, f)| !f.is_zero()).collect();
        out
    }

    /// `(γ_a∧f)∧(γ_b∧g) = (−1)^{|f||γ_b|} (γ_a γ_b)∧(f∧g)`.
    pub fn wedge(&self, other: &FormalForm) -> Result<FormalForm> {
        self.check(other)?;
        let m = &self.model;
        let mut comps = BTreeMap::new();
        for (a, f) in &self.comps {
            for (b, g) in &other.comps {
                let fg = f.wedge(g)?.scale(&parity(f.degree() * m.degrees[*b]));
                for (c, k) in m.product(*a, *b) {
                    Self::insert(&mut comps, c, fg.scale(&k))?;
                }
            }
        }
        Ok(FormalForm { model: m.clone(), base: self.base.clone(), degree: self.degree + other.degree, comps })
    }

    pub fn wedge_power(&self, n: usize) -> Result<FormalForm> {
        let mut acc = FormalForm::base_form(&self.model, ExteriorForm::constant(&self.base, q(1)))?;
        for _ in 0..n {
            acc = acc.wedge(self)?;
        }
        Ok(acc)
    }

    /// `d(γ_a∧f) = (−1)^{|γ_a|} γ_a∧df`; the classes are closed.
    pub fn d(&self) -> FormalForm {
        let comps = self
            .comps
            .iter()
            .map(|(a, f)| (*a, f.d().scale(&parity(self.model.degrees[*a]))))
            .filter(|(_, f)| !f.is_zero())
            .collect();
        FormalForm { model: self.model.clone(), base: self.base.clone(), degree: self.degree + 1, comps }
    }

    /// `∫_X`, fibre directions integrated first: `∫ γ_a∧f = (∫γ_a)·f`.
    pub fn integrate(&self) -> Result<ExteriorForm> {
        let m = &self.model;
        let deg = self.degree.checked_sub(m.dim).ok_or(Error::DegreeMismatch { expected: m.dim, found: self.degree })?;
        let mut out = ExteriorForm::zero(&self.base, deg);
        for (a, f) in &self.comps {
            if m.degrees[*a] != m.dim {
                continue;
            }
            let c = m.pairing.get(a).ok_or_else(|| Error::Model(format!("unpaired top-degree term {}", m.labels[*a])))?;
            out = out.add(&f.scale(c))?;
        }
        Ok(out)
    }

    /// The chart form `Σ dx_I ∧ f_I` on `total` for a torus model whose
    /// generators are named after fibre coordinates of `total`.
    pub fn to_chart(&self, total: &Space, fibre_coords: &[&str]) -> Result<ExteriorForm> {
        let mut out = ExteriorForm::zero(total, self.degree);
        for (a, f) in &self.comps {
            let names: Vec<&str> = (0..fibre_coords.len()).filter(|i| *a >> i & 1 == 1).map(|i| fibre_coords[i]).collect();
            if names.len() != self.model.degrees[*a] {
                return Err(Error::Model("chart conversion needs a torus model".into()));
            }
            let dx = ExteriorForm::monomial(total, crate::exterior::Poly::one(total.dim()), &names)?;
            out = out.add(&dx.wedge(&f.embed(total)?)?)?;
        }
        Ok(out)
    }
}

/// Formal curvature, transgression and their fibre integrals for `B = Σ γ_a∧f_a + b`.
#[derive(Clone, Debug)]
pub struct FormalFamily {
    pub b: FormalForm,
    pub curvature: FormalForm,
    pub lambda: FormalForm,
    /// `∫_X Λ`, the family invariant on the base.
    pub lambda_yz: ExteriorForm,
    /// `∫_X (dB)^{n+1}`.
    pub integrated_curvature: ExteriorForm,
    pub ell: usize,
}

/// `coeffs` pairs degree-1 generators with 0-form coefficients on the base;
/// `base_part` is an optional 1-form on the base.
pub fn formal_family_connection(
    model: &Arc<FormalFiberModel>,
    base: &Space,
    coeffs: &[(usize, ExteriorForm)],
    base_part: Option<&ExteriorForm>,
    n: usize,
) -> Result<FormalFamily> {
    let mut b = FormalForm::zero(model, base, 1);
    for (a, f) in coeffs {
        if model.degrees[*a] + f.degree() != 1 {
            return Err(Error::DegreeMismatch { expected: 1, found: model.degrees[*a] + f.degree() });
        }
        b = b.add(&FormalForm::term(model, *a, f.clone())?)?;
    }
    if let Some(f) = base_part {
        b = b.add(&FormalForm::base_form(model, f.clone())?)?;
    }
    let curvature = b.d();
    let lambda = b.wedge(&curvature.wedge_power(n)?)?;
    let ell = (2 * n + 1).checked_sub(model.dim).ok_or_else(|| Error::Precondition("fibre dimension exceeds 2n+1".into()))?;
    let lambda_yz = lambda.integrate()?;
    let integrated_curvature = curvature.wedge_power(n + 1)?.integrate()?;
    Ok(FormalFamily { b, curvature, lambda, lambda_yz, integrated_curvature, ell })
}
