//! Exact scalars.
//!
//! Every exact quantity is a rational number. The circle constant only ever
//! appears through the formal symbol `τ = 2π`, tracked as an exponent on
//! polynomial monomials (see [`crate::exterior::poly`]).

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type Q = BigRational;

pub const TAU_F64: f64 = std::f64::consts::TAU;

pub fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn frac(num: i64, den: i64) -> Q {
    Q::new(BigInt::from(num), BigInt::from(den))
}

pub fn to_f64(x: &Q) -> f64 {
    x.to_f64().unwrap_or_else(|| {
        // very large numerators and denominators; go through a scaled ratio
        let n = x.numer().to_f64().unwrap_or(f64::NAN);
        let d = x.denom().to_f64().unwrap_or(f64::NAN);
        n / d
    })
}

pub fn factorial(n: u32) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

pub fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u64 = 1;
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

pub fn is_integer(x: &Q) -> bool {
    x.denom().is_one()
}

/// Exact `(cos, sin)` of `2π·x` when it is rational, i.e. when `4x ∈ ℤ`.
pub fn cos_sin_turns(x: &Q) -> Option<(Q, Q)> {
    let four = x * q(4);
    if !is_integer(&four) {
        return None;
    }
    let k = four.numer().mod_floor(&BigInt::from(4));
    let k = k.to_i64().unwrap_or(0);
    Some(match k {
        0 => (q(1), q(0)),
        1 => (q(0), q(1)),
        2 => (q(-1), q(0)),
        _ => (q(0), q(-1)),
    })
}

pub fn abs(x: &Q) -> Q {
    x.abs()
}

pub fn is_zero(x: &Q) -> bool {
    x.is_zero()
}

pub fn sign_q(negative: bool) -> Q {
    if negative {
        q(-1)
    } else {
        q(1)
    }
}

/// Parse `"3"`, `"-1/4"` or a decimal such as `"0.125"` into an exact rational.
pub fn parse_q(s: &str) -> Option<Q> {
    let s = s.trim();
    if let Some((a, b)) = s.split_once('/') {
        let n: BigInt = a.trim().parse().ok()?;
        let d: BigInt = b.trim().parse().ok()?;
        if d.is_zero() {
            return None;
        }
        return Some(Q::new(n, d));
    }
    if let Some((int, dec)) = s.split_once('.') {
        let neg = int.starts_with('-');
        let int_part: BigInt = if int.is_empty() || int == "-" {
            BigInt::zero()
        } else {
            int.parse().ok()?
        };
        let scale = BigInt::from(10).pow(dec.len() as u32);
        let dec_part: BigInt = if dec.is_empty() { BigInt::zero() } else { dec.parse().ok()? };
        let mag = int_part.abs() * &scale + dec_part;
        let n = if neg { -mag } else { mag };
        return Some(Q::new(n, scale));
    }
    let n: BigInt = s.parse().ok()?;
    Some(Q::from_integer(n))
}

pub fn fmt_q(x: &Q) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}
