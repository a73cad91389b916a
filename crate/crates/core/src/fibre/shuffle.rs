//! Shuffles of a prism `Δ^q × Δ^p` and the σ coordinate maps.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exterior::Poly;

/// A `(q, p)`-shuffle: nondecreasing `ν: {0..n} → {0..q}`, `μ: {0..n} → {0..p}`
/// moving one step at a time, `n = p + q`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Shuffle {
    pub nu: Vec<usize>,
    pub mu: Vec<usize>,
}

impl Shuffle {
    pub fn n(&self) -> usize {
        self.nu.len() - 1
    }

    pub fn q(&self) -> usize {
        *self.nu.last().unwrap()
    }

    pub fn p(&self) -> usize {
        *self.mu.last().unwrap()
    }

    pub fn is_valid(&self) -> bool {
        let n = self.n();
        if self.mu.len() != n + 1 || self.nu[0] != 0 || self.mu[0] != 0 || self.mu[n] + self.nu[n] != n {
            return false;
        }
        (1..=n).all(|r| {
            self.mu[r] >= self.mu[r - 1] && self.nu[r] >= self.nu[r - 1] && self.mu[r] - self.mu[r - 1] + self.nu[r] - self.nu[r - 1] == 1
        })
    }

    /// Whether step `r` advances `μ`.
    pub fn mu_step(&self, r: usize) -> bool {
        self.mu[r] > self.mu[r - 1]
    }

    /// Sign of the shuffle permutation: each `μ`-step passes the `ν`-steps before it.
    pub fn sign(&self) -> i64 {
        let mut nu_seen = 0;
        let mut inv = 0;
        for r in 1..=self.n() {
            if self.mu_step(r) {
                inv += nu_seen;
            } else {
                nu_seen += 1;
            }
        }
        if inv % 2 == 0 { 1 } else { -1 }
    }
}

/// All `(q, p)`-shuffles, `ν`-steps tried first at every branch.
pub fn enumerate_shuffles(q: usize, p: usize) -> Vec<Shuffle> {
    let mut out = Vec::new();
    let mut nu = vec![0];
    let mut mu = vec![0];
    fn rec(q: usize, p: usize, nu: &mut Vec<usize>, mu: &mut Vec<usize>, out: &mut Vec<Shuffle>) {
        let (a, b) = (*nu.last().unwrap(), *mu.last().unwrap());
        if a == q && b == p {
            out.push(Shuffle { nu: nu.clone(), mu: mu.clone() });
            return;
        }
        if a < q {
            nu.push(a + 1);
            mu.push(b);
            rec(q, p, nu, mu, out);
            nu.pop();
            mu.pop();
        }
        if b < p {
            nu.push(a);
            mu.push(b + 1);
            rec(q, p, nu, mu, out);
            nu.pop();
            mu.pop();
        }
    }
    rec(q, p, &mut nu, &mut mu, &mut out);
    out
}

/// `σ_r` as polynomials in the simplex coordinates `t_0..t_p` and bump values `φ_0..φ_q`.
pub fn sigma_polys(s: &Shuffle, t: &[Poly], phi: &[Poly]) -> Vec<Poly> {
    let nv = t[0].nvars();
    let tail = |a: usize| phi[a + 1..].iter().fold(Poly::zero(nv), |acc, f| acc.add(f));
    let head = |a: usize| phi[..=a].iter().fold(Poly::zero(nv), |acc, f| acc.add(f));
    let mut out = vec![t[0].mul(&phi[0])];
    for r in 1..=s.n() {
        let (m, a) = (s.mu[r], s.nu[r]);
        if s.mu_step(r) {
            out.push(t[m - 1].mul(&tail(a)).add(&t[m].mul(&head(a))));
        } else {
            out.push(t[m].mul(&phi[a]));
        }
    }
    out
}

/// `σ_r` at a point; both weight vectors must sum to one.
pub fn sigma_values(s: &Shuffle, t: &[f64], phi: &[f64]) -> Result<Vec<f64>> {
    for (name, w) in [("t", t), ("φ", phi)] {
        let sum: f64 = w.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::Precondition(format!("{name} weights sum to {sum}")));
        }
    }
    if t.len() != s.p() + 1 || phi.len() != s.q() + 1 {
        return Err(Error::Precondition("weights do not match the shuffle".into()));
    }
    let mut out = vec![t[0] * phi[0]];
    for r in 1..=s.n() {
        let (m, a) = (s.mu[r], s.nu[r]);
        if s.mu_step(r) {
            let tail: f64 = phi[a + 1..].iter().sum();
            let head: f64 = phi[..=a].iter().sum();
            out.push(t[m - 1] * tail + t[m] * head);
        } else {
            out.push(t[m] * phi[a]);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{binomial, q};
    use proptest::prelude::*;

    #[test]
    fn counts_and_step_condition() {
        assert_eq!(enumerate_shuffles(1, 1).len(), 2);
        assert_eq!(enumerate_shuffles(2, 1).len(), 3);
        for n in 0..=10usize {
            for p in 0..=n {
                let all = enumerate_shuffles(n - p, p);
                assert_eq!(all.len() as u64, binomial(n as u64, p as u64));
                if n <= 8 {
                    assert!(all.iter().all(Shuffle::is_valid));
                }
            }
        }
        assert_eq!(enumerate_shuffles(2, 2), enumerate_shuffles(2, 2));
    }

    #[test]
    fn sigma_edge_cases() {
        for s in enumerate_shuffles(3, 0) {
            assert_eq!(sigma_values(&s, &[1.0], &[0.1, 0.2, 0.3, 0.4]).unwrap(), vec![0.1, 0.2, 0.3, 0.4]);
        }
        for s in enumerate_shuffles(0, 3) {
            assert_eq!(sigma_values(&s, &[0.1, 0.2, 0.3, 0.4], &[1.0]).unwrap(), vec![0.1, 0.2, 0.3, 0.4]);
        }
        let s = &enumerate_shuffles(1, 1)[0];
        assert!(sigma_values(s, &[0.5, 0.5], &[0.5, 0.2]).is_err());
    }

    #[test]
    fn sigma_sums_symbolically() {
        // with t_0 = 1 − Σt and φ_0 = 1 − Σφ the coordinates sum to 1 identically
        for n in 0..=4usize {
            for p in 0..=n {
                let qq = n - p;
                let nv = p + qq;
                let mut t: Vec<Poly> = (0..p).map(|k| Poly::var(nv, k)).collect();
                let t0 = t.iter().fold(Poly::one(nv), |a, x| a.sub(x));
                t.insert(0, t0);
                let mut phi: Vec<Poly> = (0..qq).map(|k| Poly::var(nv, p + k)).collect();
                let f0 = phi.iter().fold(Poly::one(nv), |a, x| a.sub(x));
                phi.insert(0, f0);
                for s in enumerate_shuffles(qq, p) {
                    let sum = sigma_polys(&s, &t, &phi).iter().fold(Poly::zero(nv), |a, x| a.add(x));
                    assert_eq!(sum, Poly::constant(nv, q(1)));
                }
            }
        }
    }

    fn simplex_point(raw: Vec<f64>) -> Vec<f64> {
        let s: f64 = raw.iter().sum();
        raw.iter().map(|x| x / s).collect()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]
        #[test]
        fn sigma_lands_in_simplex(
            p in 0usize..4,
            qq in 0usize..4,
            rt in prop::collection::vec(0.01f64..1.0, 4),
            rf in prop::collection::vec(0.01f64..1.0, 4),
        ) {
            let t = simplex_point(rt[..=p].to_vec());
            let phi = simplex_point(rf[..=qq].to_vec());
            for s in enumerate_shuffles(qq, p) {
                let sig = sigma_values(&s, &t, &phi).unwrap();
                prop_assert_eq!(sig.len(), p + qq + 1);
                prop_assert!(sig.iter().all(|x| *x >= 0.0));
                prop_assert!((sig.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            }
        }
    }
}
