//! Exact trig-polynomial coefficients.
//!
//! A [`Poly`] is a finite sum of rational multiples of monomials
//! `τ^a · Π x_v^{e_v} · Π T_v(x_v)` where `τ = 2π` is formal and each
//! `T_v` is `1`, `cos(2π m x_v)` or `sin(2π m x_v)`. The class is closed
//! under sums, products (product-to-sum on the trig factors), partial
//! derivatives, affine substitution and definite integration over
//! intervals whose trig endpoint values are rational.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{cos_sin_turns, factorial, fmt_q, q, to_f64, Q, TAU_F64};

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
pub enum Trig {
    One,
    Cos(u32),
    Sin(u32),
}

impl Trig {
    fn cos(m: u32) -> Trig {
        if m == 0 {
            Trig::One
        } else {
            Trig::Cos(m)
        }
    }

    /// `sin(2π k x)` for signed `k`, as a signed factor.
    fn sin_signed(k: i64) -> Option<(i64, Trig)> {
        match k.signum() {
            0 => None,
            1 => Some((1, Trig::Sin(k as u32))),
            _ => Some((-1, Trig::Sin((-k) as u32))),
        }
    }

    pub fn freq(self) -> u32 {
        match self {
            Trig::One => 0,
            Trig::Cos(m) | Trig::Sin(m) => m,
        }
    }

    fn mul(self, other: Trig) -> Vec<(Q, Trig)> {
        use Trig::*;
        let half = || Q::new(1.into(), 2.into());
        match (self, other) {
            (One, t) | (t, One) => vec![(q(1), t)],
            (Cos(m), Cos(n)) => {
                let (m, n) = (m as i64, n as i64);
                vec![(half(), Trig::cos((m - n).unsigned_abs() as u32)), (half(), Trig::cos((m + n) as u32))]
            }
            (Sin(m), Sin(n)) => {
                let (m, n) = (m as i64, n as i64);
                vec![(half(), Trig::cos((m - n).unsigned_abs() as u32)), (-half(), Trig::cos((m + n) as u32))]
            }
            (Sin(m), Cos(n)) | (Cos(n), Sin(m)) => {
                let (m, n) = (m as i64, n as i64);
                let mut out = vec![(half(), Trig::Sin((m + n) as u32))];
                if let Some((s, t)) = Trig::sin_signed(m - n) {
                    out.push((half() * q(s), t));
                }
                out
            }
        }
    }

    fn eval(self, x: f64) -> f64 {
        match self {
            Trig::One => 1.0,
            Trig::Cos(m) => (TAU_F64 * m as f64 * x).cos(),
            Trig::Sin(m) => (TAU_F64 * m as f64 * x).sin(),
        }
    }
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Monomial {
    pub tau: i32,
    pub exps: Vec<u32>,
    pub trig: Vec<Trig>,
}

impl Monomial {
    pub fn one(nvars: usize) -> Self {
        Monomial { tau: 0, exps: vec![0; nvars], trig: vec![Trig::One; nvars] }
    }

    pub fn is_constant_in(&self, v: usize) -> bool {
        self.exps[v] == 0 && self.trig[v] == Trig::One
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Poly {
    nvars: usize,
    terms: BTreeMap<Monomial, Q>,
}

impl Poly {
    pub fn zero(nvars: usize) -> Self {
        Poly { nvars, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, c: Q) -> Self {
        let mut p = Poly::zero(nvars);
        p.add_term(Monomial::one(nvars), c);
        p
    }

    pub fn one(nvars: usize) -> Self {
        Poly::constant(nvars, q(1))
    }

    /// `τ^k` as a constant.
    pub fn tau_pow(nvars: usize, k: i32) -> Self {
        let mut m = Monomial::one(nvars);
        m.tau = k;
        let mut p = Poly::zero(nvars);
        p.add_term(m, q(1));
        p
    }

    pub fn var(nvars: usize, v: usize) -> Self {
        let mut m = Monomial::one(nvars);
        m.exps[v] = 1;
        let mut p = Poly::zero(nvars);
        p.add_term(m, q(1));
        p
    }

    pub fn trig(nvars: usize, v: usize, t: Trig) -> Self {
        let mut m = Monomial::one(nvars);
        m.trig[v] = t;
        let mut p = Poly::zero(nvars);
        p.add_term(m, q(1));
        p
    }

    pub fn from_terms(nvars: usize, terms: impl IntoIterator<Item = (Monomial, Q)>) -> Self {
        let mut p = Poly::zero(nvars);
        for (m, c) in terms {
            p.add_term(m, c);
        }
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Q)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, m: Monomial, c: Q) {
        debug_assert_eq!(m.exps.len(), self.nvars);
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(m);
        match entry {
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
        }
    }

    pub fn add_assign(&mut self, other: &Poly) {
        assert_eq!(self.nvars, other.nvars, "poly arity");
        for (m, c) in &other.terms {
            self.add_term(m.clone(), c.clone());
        }
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let mut out = self.clone();
        out.add_assign(other);
        out
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), -c.clone());
        }
        out
    }

    pub fn neg(&self) -> Poly {
        self.scale(&q(-1))
    }

    pub fn scale(&self, c: &Q) -> Poly {
        if c.is_zero() {
            return Poly::zero(self.nvars);
        }
        Poly { nvars: self.nvars, terms: self.terms.iter().map(|(m, a)| (m.clone(), a * c)).collect() }
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        assert_eq!(self.nvars, other.nvars, "poly arity");
        let mut out = Poly::zero(self.nvars);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                for (c, m) in mul_monomials(ma, mb) {
                    out.add_term(m, c * ca * cb);
                }
            }
        }
        out
    }

    pub fn pow(&self, e: u32) -> Poly {
        let mut acc = Poly::one(self.nvars);
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    pub fn derivative(&self, v: usize) -> Poly {
        let mut out = Poly::zero(self.nvars);
        for (m, c) in &self.terms {
            let e = m.exps[v];
            if e > 0 {
                let mut m2 = m.clone();
                m2.exps[v] -= 1;
                out.add_term(m2, c * q(e as i64));
            }
            match m.trig[v] {
                Trig::One => {}
                Trig::Cos(f) => {
                    let mut m2 = m.clone();
                    m2.tau += 1;
                    m2.trig[v] = Trig::Sin(f);
                    out.add_term(m2, -c * q(f as i64));
                }
                Trig::Sin(f) => {
                    let mut m2 = m.clone();
                    m2.tau += 1;
                    m2.trig[v] = Trig::Cos(f);
                    out.add_term(m2, c * q(f as i64));
                }
            }
        }
        out
    }

    pub fn depends_on(&self, v: usize) -> bool {
        self.terms.keys().any(|m| !m.is_constant_in(v))
    }

    pub fn has_trig_in(&self, v: usize) -> bool {
        self.terms.keys().any(|m| m.trig[v] != Trig::One)
    }

    pub fn max_degree_in(&self, v: usize) -> u32 {
        self.terms.keys().map(|m| m.exps[v]).max().unwrap_or(0)
    }

    /// If the polynomial is `c·x_w + b` (or constant `b`), return `(w, c, b)`.
    pub fn as_affine(&self) -> Option<(Option<usize>, Q, Q)> {
        let mut var = None;
        let mut slope = q(0);
        let mut offset = q(0);
        for (m, c) in &self.terms {
            if m.tau != 0 || m.trig.iter().any(|t| *t != Trig::One) {
                return None;
            }
            let deg: u32 = m.exps.iter().sum();
            match deg {
                0 => offset = c.clone(),
                1 => {
                    let w = m.exps.iter().position(|e| *e == 1).unwrap();
                    if var.is_some() {
                        return None;
                    }
                    var = Some(w);
                    slope = c.clone();
                }
                _ => return None,
            }
        }
        Some((var, slope, offset))
    }

    /// Constant value if the polynomial has no variable dependence and no τ.
    pub fn as_rational(&self) -> Option<Q> {
        match self.terms.len() {
            0 => Some(q(0)),
            1 => {
                let (m, c) = self.terms.iter().next().unwrap();
                if m.tau == 0 && m.exps.iter().all(|e| *e == 0) && m.trig.iter().all(|t| *t == Trig::One) {
                    Some(c.clone())
                } else {
                    None
                }
            }
            _ => None,
        }
    }

    /// Substitute `x_v ↦ subs[v]`, each a polynomial in `target_nvars` variables.
    ///
    /// Trig factors in `x_v` are only admissible when `subs[v]` is affine with
    /// an integer slope and an offset at which the trig values are rational.
    pub fn compose(&self, subs: &[Poly], target_nvars: usize) -> Result<Poly> {
        assert_eq!(subs.len(), self.nvars, "one substitute per variable");
        let mut pow_cache: Vec<Vec<Poly>> = subs.iter().map(|s| vec![Poly::one(s.nvars)]).collect();
        let mut out = Poly::zero(target_nvars);
        for (m, c) in &self.terms {
            let mut acc = Poly::tau_pow(target_nvars, m.tau).scale(c);
            for v in 0..self.nvars {
                let e = m.exps[v] as usize;
                if e > 0 {
                    while pow_cache[v].len() <= e {
                        let next = pow_cache[v].last().unwrap().mul(&subs[v]);
                        pow_cache[v].push(next);
                    }
                    acc = acc.mul(&pow_cache[v][e]);
                }
                if m.trig[v] != Trig::One {
                    let t = trig_substitute(m.trig[v], &subs[v], target_nvars)?;
                    acc = acc.mul(&t);
                }
                if acc.is_zero() {
                    break;
                }
            }
            out.add_assign(&acc);
        }
        Ok(out)
    }

    /// Re-index variables: `map[v]` is the new index of `x_v`, `None` for
    /// variables that must not occur.
    pub fn reindex(&self, map: &[Option<usize>], new_nvars: usize) -> Result<Poly> {
        let mut out = Poly::zero(new_nvars);
        for (m, c) in &self.terms {
            let mut m2 = Monomial::one(new_nvars);
            m2.tau = m.tau;
            for v in 0..self.nvars {
                if m.is_constant_in(v) {
                    continue;
                }
                match map[v] {
                    Some(w) => {
                        m2.exps[w] = m.exps[v];
                        m2.trig[w] = m.trig[v];
                    }
                    None => {
                        return Err(Error::Substitution(format!("variable {v} still present while dropping it")));
                    }
                }
            }
            out.add_term(m2, c.clone());
        }
        Ok(out)
    }

    /// Definite integral over `a ≤ x_v ≤ b`; the result no longer depends on `x_v`.
    pub fn integrate_interval(&self, v: usize, a: &Q, b: &Q) -> Result<Poly> {
        let mut out = Poly::zero(self.nvars);
        for (m, c) in &self.terms {
            let (k, t) = (m.exps[v], m.trig[v]);
            let mut rest = m.clone();
            rest.exps[v] = 0;
            rest.trig[v] = Trig::One;
            for (tau_shift, coeff) in integral_power_trig(k, t, a, b)? {
                let mut m2 = rest.clone();
                m2.tau += tau_shift;
                out.add_term(m2, coeff * c);
            }
        }
        Ok(out)
    }

    /// `∫_{Δ^p}` over the free barycentric variables `vars` (the remaining
    /// coordinate is `1 − Σ vars`), normalised so that the simplex volume is `1/p!`.
    pub fn integrate_simplex(&self, vars: &[usize]) -> Result<Poly> {
        let p = vars.len() as u32;
        let mut out = Poly::zero(self.nvars);
        for (m, c) in &self.terms {
            let mut num = num_bigint::BigInt::one();
            let mut total = 0u32;
            let mut m2 = m.clone();
            for &v in vars {
                if m.trig[v] != Trig::One {
                    return Err(Error::NonRational("trig factor in a barycentric coordinate".into()));
                }
                num *= factorial(m.exps[v]);
                total += m.exps[v];
                m2.exps[v] = 0;
            }
            let val = Q::new(num, factorial(total + p));
            out.add_term(m2, val * c);
        }
        Ok(out)
    }

    /// Evaluate `x_v = value` exactly.
    pub fn eval_var(&self, v: usize, value: &Q) -> Result<Poly> {
        let mut subs: Vec<Poly> = (0..self.nvars).map(|w| Poly::var(self.nvars, w)).collect();
        subs[v] = Poly::constant(self.nvars, value.clone());
        self.compose(&subs, self.nvars)
    }

    pub fn eval_f64(&self, point: &[f64]) -> f64 {
        let mut sum = 0.0;
        for (m, c) in &self.terms {
            let mut t = to_f64(c) * TAU_F64.powi(m.tau);
            for v in 0..self.nvars {
                if m.exps[v] > 0 {
                    t *= point[v].powi(m.exps[v] as i32);
                }
                if m.trig[v] != Trig::One {
                    t *= m.trig[v].eval(point[v]);
                }
            }
            sum += t;
        }
        sum
    }

    /// Largest absolute rational coefficient (a residual norm for exact data).
    pub fn max_abs_coeff(&self) -> Q {
        self.terms.values().map(|c| c.abs()).max().unwrap_or_else(|| q(0))
    }

    /// Coefficients grouped by τ-exponent when the polynomial is a pure scalar.
    pub fn as_tau_laurent(&self) -> Option<BTreeMap<i32, Q>> {
        let mut out = BTreeMap::new();
        for (m, c) in &self.terms {
            if m.exps.iter().any(|e| *e != 0) || m.trig.iter().any(|t| *t != Trig::One) {
                return None;
            }
            out.insert(m.tau, c.clone());
        }
        Some(out)
    }

    pub fn to_string_with(&self, names: &[String]) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        let mut parts = Vec::new();
        for (m, c) in &self.terms {
            let mut factors = Vec::new();
            if m.tau != 0 {
                factors.push(if m.tau == 1 { "τ".to_string() } else { format!("τ^{}", m.tau) });
            }
            for v in 0..self.nvars {
                let name = names.get(v).cloned().unwrap_or_else(|| format!("x{v}"));
                match m.exps[v] {
                    0 => {}
                    1 => factors.push(name.clone()),
                    e => factors.push(format!("{name}^{e}")),
                }
                match m.trig[v] {
                    Trig::One => {}
                    Trig::Cos(f) => factors.push(format!("cos({f}τ{name})")),
                    Trig::Sin(f) => factors.push(format!("sin({f}τ{name})")),
                }
            }
            let cs = fmt_q(c);
            if factors.is_empty() {
                parts.push(cs);
            } else if c.is_one() {
                parts.push(factors.join("·"));
            } else if (-c.clone()).is_one() {
                parts.push(format!("-{}", factors.join("·")));
            } else {
                parts.push(format!("{}·{}", cs, factors.join("·")));
            }
        }
        parts.join(" + ").replace("+ -", "- ")
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_string_with(&[]))
    }
}

fn mul_monomials(a: &Monomial, b: &Monomial) -> Vec<(Q, Monomial)> {
    let n = a.exps.len();
    let mut base = Monomial::one(n);
    base.tau = a.tau + b.tau;
    for v in 0..n {
        base.exps[v] = a.exps[v] + b.exps[v];
    }
    let mut acc = vec![(q(1), base)];
    for v in 0..n {
        if a.trig[v] == Trig::One && b.trig[v] == Trig::One {
            continue;
        }
        let prods = a.trig[v].mul(b.trig[v]);
        let mut next = Vec::with_capacity(acc.len() * prods.len());
        for (c, m) in &acc {
            for (pc, t) in &prods {
                let mut m2 = m.clone();
                m2.trig[v] = *t;
                next.push((c * pc, m2));
            }
        }
        acc = next;
    }
    acc
}

/// Trig factor `T(2π m·s)` where `s` is the substitute polynomial.
fn trig_substitute(t: Trig, s: &Poly, nvars: usize) -> Result<Poly> {
    let (var, slope, offset) = s
        .as_affine()
        .ok_or_else(|| Error::Substitution("trig factor under a non-affine substitution".into()))?;
    if !slope.denom().is_one() {
        return Err(Error::Substitution("trig factor under a non-integer rescaling".into()));
    }
    let m = t.freq() as i64;
    let (cb, sb) = cos_sin_turns(&(&offset * q(m)))
        .ok_or_else(|| Error::Substitution("trig factor shifted by a non-quarter offset".into()))?;
    // A = 2π m·slope·w, B = 2π m·offset
    let (cos_a, sin_a) = match var {
        Some(w) if !slope.is_zero() => {
            let k: i64 = (&slope * q(m)).to_integer().try_into().map_err(|_| Error::Substitution("frequency overflow".into()))?;
            let cos_a = Poly::trig(nvars, w, Trig::cos(k.unsigned_abs() as u32));
            let sin_a = match Trig::sin_signed(k) {
                Some((sgn, tr)) => Poly::trig(nvars, w, tr).scale(&q(sgn)),
                None => Poly::zero(nvars),
            };
            (cos_a, sin_a)
        }
        _ => (Poly::one(nvars), Poly::zero(nvars)),
    };
    Ok(match t {
        Trig::One => Poly::one(nvars),
        Trig::Cos(_) => cos_a.scale(&cb).sub(&sin_a.scale(&sb)),
        Trig::Sin(_) => sin_a.scale(&cb).add(&cos_a.scale(&sb)),
    })
}

/// `∫_a^b x^k T(x) dx` as a Laurent polynomial in τ: list of `(τ-exponent, coefficient)`.
fn integral_power_trig(k: u32, t: Trig, a: &Q, b: &Q) -> Result<Vec<(i32, Q)>> {
    if t == Trig::One {
        let e = k as i32 + 1;
        let val = (pow_q(b, e) - pow_q(a, e)) / q(e as i64);
        return Ok(vec![(0, val)]);
    }
    let m = t.freq() as i64;
    let ends = |x: &Q| -> Result<(Q, Q)> {
        cos_sin_turns(&(x * q(m))).ok_or_else(|| {
            Error::NonRational(format!("trig endpoint value at {} is irrational", fmt_q(x)))
        })
    };
    let (ca, sa) = ends(a)?;
    let (cb, sb) = ends(b)?;
    // F_k^c = ∫ x^k cos(ωx), F_k^s = ∫ x^k sin(ωx), ω = τ m; each is a map τ-exp → coeff.
    // ∫ x^k cos = [x^k sin/ω] − (k/ω) ∫ x^{k−1} sin
    // ∫ x^k sin = [−x^k cos/ω] + (k/ω) ∫ x^{k−1} cos
    let mut cos_int: BTreeMap<i32, Q> = BTreeMap::new();
    let mut sin_int: BTreeMap<i32, Q> = BTreeMap::new();
    let inv_m = Q::new(1.into(), m.into());
    for j in 0..=k {
        let bj = pow_q(b, j as i32);
        let aj = pow_q(a, j as i32);
        let boundary_c = (&bj * &sb - &aj * &sa) * &inv_m;
        let boundary_s = -(&bj * &cb - &aj * &ca) * &inv_m;
        let mut nc: BTreeMap<i32, Q> = BTreeMap::new();
        let mut ns: BTreeMap<i32, Q> = BTreeMap::new();
        add_laurent(&mut nc, -1, boundary_c);
        add_laurent(&mut ns, -1, boundary_s);
        if j > 0 {
            let f = q(j as i64) * &inv_m;
            for (e, c) in &sin_int {
                add_laurent(&mut nc, e - 1, -(c * &f));
            }
            for (e, c) in &cos_int {
                add_laurent(&mut ns, e - 1, c * &f);
            }
        }
        cos_int = nc;
        sin_int = ns;
    }
    let res = match t {
        Trig::Cos(_) => cos_int,
        Trig::Sin(_) => sin_int,
        Trig::One => unreachable!(),
    };
    Ok(res.into_iter().filter(|(_, c)| !c.is_zero()).collect())
}

fn add_laurent(map: &mut BTreeMap<i32, Q>, e: i32, c: Q) {
    let entry = map.entry(e).or_insert_with(|| q(0));
    *entry += c;
}

fn pow_q(x: &Q, e: i32) -> Q {
    let mut acc = q(1);
    for _ in 0..e {
        acc *= x;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::frac;

    #[test]
    fn cos_squared_averages_to_half() {
        let c = Poly::trig(1, 0, Trig::Cos(1));
        let sq = c.mul(&c);
        let i = sq.integrate_interval(0, &q(0), &q(1)).unwrap();
        assert_eq!(i.as_rational(), Some(frac(1, 2)));
    }

    #[test]
    fn sin_cos_orthogonal() {
        let s = Poly::trig(1, 0, Trig::Sin(2));
        let c = Poly::trig(1, 0, Trig::Cos(3));
        let i = s.mul(&c).integrate_interval(0, &q(0), &q(1)).unwrap();
        assert!(i.is_zero());
    }

    #[test]
    fn x_sin_over_period() {
        // ∫_0^1 x sin(2πx) dx = −1/(2π)
        let p = Poly::var(1, 0).mul(&Poly::trig(1, 0, Trig::Sin(1)));
        let i = p.integrate_interval(0, &q(0), &q(1)).unwrap();
        let mut expected = Monomial::one(1);
        expected.tau = -1;
        assert_eq!(i, Poly::from_terms(1, [(expected, q(-1))]));
        assert!((i.eval_f64(&[0.0]) + 1.0 / TAU_F64).abs() < 1e-15);
    }

    #[test]
    fn derivative_of_cos_brings_tau() {
        let c = Poly::trig(1, 0, Trig::Cos(2));
        let d = c.derivative(0);
        assert!((d.eval_f64(&[0.1]) + 2.0 * TAU_F64 * (TAU_F64 * 0.2).sin()).abs() < 1e-12);
    }

    #[test]
    fn affine_trig_substitution() {
        // cos(2π(2w + 1/4)) = −sin(2π·2w)
        let c = Poly::trig(1, 0, Trig::Cos(1));
        let s = Poly::var(1, 0).scale(&q(2)).add(&Poly::constant(1, frac(1, 4)));
        let r = c.compose(&[s], 1).unwrap();
        assert_eq!(r, Poly::trig(1, 0, Trig::Sin(2)).neg());
    }

    #[test]
    fn simplex_moments() {
        // ∫_{Δ²} t1 t2 = 1!1!/4! = 1/24
        let p = Poly::var(2, 0).mul(&Poly::var(2, 1));
        assert_eq!(p.integrate_simplex(&[0, 1]).unwrap().as_rational(), Some(frac(1, 24)));
        assert_eq!(Poly::one(2).integrate_simplex(&[0, 1]).unwrap().as_rational(), Some(frac(1, 2)));
    }

    #[test]
    fn irrational_endpoint_rejected() {
        let c = Poly::trig(1, 0, Trig::Cos(1));
        assert!(c.integrate_interval(0, &q(0), &frac(1, 3)).is_err());
    }
}
