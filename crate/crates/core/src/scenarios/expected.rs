//! Closed-form expected values, written down independently of the computations they check.

use crate::error::Result;
use crate::exterior::{ExteriorForm, Poly, Space};
use crate::scalar::{binomial, q};

fn sign_binom2(k: usize) -> i64 {
    if binomial(k as u64, 2) % 2 == 0 {
        1
    } else {
        -1
    }
}

/// `(−1)^{C(k,2)}(k−1)! Σ_j (−1)^{j−1} z_j dz_1…ĵ…dz_k` on a base with coordinates `z1..zk`.
pub fn torus_lambda(z: &Space, k: usize) -> Result<ExteriorForm> {
    let fact: i64 = (1..k as i64).product();
    let mut out = ExteriorForm::zero(z, k - 1);
    for j in 1..=k {
        let names: Vec<String> = (1..=k).filter(|i| *i != j).map(|i| format!("z{i}")).collect();
        let refs: Vec<&str> = names.iter().map(String::as_str).collect();
        let zj = z.index_of(&format!("z{j}"))?;
        let c = Poly::var(z.dim(), zj).scale(&q(sign_binom2(k) * fact * if j % 2 == 1 { 1 } else { -1 }));
        out = out.add(&ExteriorForm::monomial(z, c, &refs)?)?;
    }
    Ok(out)
}

/// `(−1)^{C(k,2)} k! dz_1∧…∧dz_k`.
pub fn torus_curvature(z: &Space, k: usize) -> Result<ExteriorForm> {
    let fact: i64 = (1..=k as i64).product();
    let names: Vec<String> = (1..=k).map(|i| format!("z{i}")).collect();
    let refs: Vec<&str> = names.iter().map(String::as_str).collect();
    ExteriorForm::monomial(z, Poly::constant(z.dim(), q(sign_binom2(k) * fact)), &refs)
}

/// `Σ_i (z_{2i} dz_{2i−1} − z_{2i−1} dz_{2i})`.
pub fn surface_lambda(z: &Space, g: usize) -> Result<ExteriorForm> {
    let n = z.dim();
    let mut out = ExteriorForm::zero(z, 1);
    for i in 1..=g {
        let (a, b) = (format!("z{}", 2 * i - 1), format!("z{}", 2 * i));
        out = out.add(&ExteriorForm::monomial(z, Poly::var(n, z.index_of(&b)?), &[&a])?)?;
        out = out.sub(&ExteriorForm::monomial(z, Poly::var(n, z.index_of(&a)?), &[&b])?)?;
    }
    Ok(out)
}

/// `−2 Σ_i dz_{2i−1}∧dz_{2i}`.
pub fn surface_curvature(z: &Space, g: usize) -> Result<ExteriorForm> {
    let mut out = ExteriorForm::zero(z, 2);
    for i in 1..=g {
        let (a, b) = (format!("z{}", 2 * i - 1), format!("z{}", 2 * i));
        out = out.add(&ExteriorForm::monomial(z, Poly::constant(z.dim(), q(-2)), &[&a, &b])?)?;
    }
    Ok(out)
}
