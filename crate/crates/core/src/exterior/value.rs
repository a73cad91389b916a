//! Operations shared by the exact and numeric form backends.

use num_traits::Zero;

use crate::error::Result;
use crate::scalar::{to_f64, Q};

use super::form::ExteriorForm;
use super::space::Space;

/// Size of a form on a region: exact backends also say whether it vanishes.
#[derive(Clone, Debug, PartialEq)]
pub struct Residual {
    pub exact_zero: Option<bool>,
    pub max_abs: f64,
}

impl Residual {
    pub fn zero_exact() -> Self {
        Residual { exact_zero: Some(true), max_abs: 0.0 }
    }

    pub fn combine(&self, other: &Residual) -> Residual {
        let exact_zero = match (self.exact_zero, other.exact_zero) {
            (Some(a), Some(b)) => Some(a && b),
            _ => None,
        };
        Residual { exact_zero, max_abs: self.max_abs.max(other.max_abs) }
    }

    /// Exact zero, or below `tol` when inexact.
    pub fn passes(&self, tol: f64) -> bool {
        match self.exact_zero {
            Some(z) => z,
            None => self.max_abs <= tol,
        }
    }
}

impl Default for Residual {
    fn default() -> Self {
        Residual::zero_exact()
    }
}

pub trait FormValue: Clone + Send + Sync + std::fmt::Debug {
    fn space(&self) -> &Space;
    fn degree(&self) -> usize;
    fn zero_like(space: &Space, degree: usize) -> Self;
    fn add(&self, other: &Self) -> Result<Self>;
    fn neg(&self) -> Self;
    fn scale_q(&self, c: &Q) -> Self;
    fn d(&self) -> Result<Self>;
    fn wedge(&self, other: &Self) -> Result<Self>;
    /// Size on the union of open boxes (each `(var, lo, hi)`, unlisted variables free).
    fn residual_on(&self, boxes: &[Vec<(usize, Q, Q)>]) -> Residual;
    /// Distance of a function from an integer constant on the region.
    fn integrality_on(&self, boxes: &[Vec<(usize, Q, Q)>]) -> Residual;
    /// Value of a function at the centre of the first box.
    fn sample_on(&self, boxes: &[Vec<(usize, Q, Q)>]) -> f64;
    fn from_exact(e: &ExteriorForm) -> Self;
    /// The same form on a space containing all of this space's coordinates.
    fn embed(&self, target: &Space) -> Result<Self>;
    /// Pull back along exact function substitutes, one per coordinate.
    fn pullback_exact(&self, target: &Space, subs: &[ExteriorForm]) -> Result<Self>;
    /// `∫_{Δ^p}` over the barycentric coordinates; `order` is the quadrature order where one is used.
    fn integrate_simplex_ord(&self, order: usize) -> Result<Self>;
    /// Integrate over `vars` restricted to the box `bx` (bounds for exactly those variables).
    fn integrate_box(&self, vars: &[usize], bx: &[(usize, Q, Q)], order: usize) -> Result<Self>;

    fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    /// Known to vanish identically (never true for inexact backends).
    fn is_exact_zero(&self) -> bool {
        false
    }
}

impl FormValue for ExteriorForm {
    fn space(&self) -> &Space {
        ExteriorForm::space(self)
    }

    fn degree(&self) -> usize {
        ExteriorForm::degree(self)
    }

    fn zero_like(space: &Space, degree: usize) -> Self {
        ExteriorForm::zero(space, degree)
    }

    fn add(&self, other: &Self) -> Result<Self> {
        ExteriorForm::add(self, other)
    }

    fn neg(&self) -> Self {
        ExteriorForm::neg(self)
    }

    fn scale_q(&self, c: &Q) -> Self {
        self.scale(c)
    }

    fn d(&self) -> Result<Self> {
        Ok(ExteriorForm::d(self))
    }

    fn wedge(&self, other: &Self) -> Result<Self> {
        ExteriorForm::wedge(self, other)
    }

    fn residual_on(&self, boxes: &[Vec<(usize, Q, Q)>]) -> Residual {
        let m = self.max_abs_coeff_on(boxes);
        Residual { exact_zero: Some(m.is_zero()), max_abs: to_f64(&m) }
    }

    fn integrality_on(&self, boxes: &[Vec<(usize, Q, Q)>]) -> Residual {
        // every cell meeting the region must carry the same integer constant
        let mut worst = 0.0f64;
        let mut ok = true;
        let mut seen: Option<Q> = None;
        for idx in 0..self.cells().len() {
            let meets = boxes.iter().any(|bx| {
                bx.iter().all(|(v, a, b)| {
                    let (lo, hi) = self.grid().var_bounds(self.space(), idx, *v);
                    let l = if lo > *a { lo } else { a.clone() };
                    let h = if hi < *b { hi } else { b.clone() };
                    l < h
                })
            });
            if !meets {
                continue;
            }
            let cell = &self.cells()[idx];
            let value = match cell.get(&0) {
                None if cell.is_empty() => Some(Q::zero()),
                Some(p) if cell.len() == 1 => p.as_rational(),
                _ => None,
            };
            match value {
                Some(c) => {
                    let r = &c - c.round();
                    let ra = to_f64(&r).abs();
                    worst = worst.max(ra);
                    if !r.is_zero() {
                        ok = false;
                    }
                    if let Some(s) = &seen {
                        if *s != c {
                            ok = false;
                            worst = worst.max(to_f64(&(s - &c)).abs());
                        }
                    }
                    seen = Some(c);
                }
                None => {
                    ok = false;
                    worst = worst.max(to_f64(&cell.values().map(|p| p.max_abs_coeff()).max().unwrap_or_default()));
                }
            }
        }
        Residual { exact_zero: Some(ok), max_abs: worst }
    }

    fn sample_on(&self, boxes: &[Vec<(usize, Q, Q)>]) -> f64 {
        let pt = box_center(self.space(), &boxes[0]);
        self.eval_f64(&pt).get(&0).copied().unwrap_or(0.0)
    }

    fn from_exact(e: &ExteriorForm) -> Self {
        e.clone()
    }

    fn is_exact_zero(&self) -> bool {
        self.is_zero()
    }

    fn embed(&self, target: &Space) -> Result<Self> {
        ExteriorForm::embed(self, target)
    }

    fn pullback_exact(&self, target: &Space, subs: &[ExteriorForm]) -> Result<Self> {
        self.pullback(target, subs)
    }

    fn integrate_simplex_ord(&self, _order: usize) -> Result<Self> {
        self.integrate_simplex()
    }

    fn integrate_box(&self, vars: &[usize], bx: &[(usize, Q, Q)], _order: usize) -> Result<Self> {
        self.masked(bx).integrate_over(vars)
    }
}

/// Centre of a box (free variables at the centre of their domains).
pub fn box_center(space: &Space, bx: &[(usize, Q, Q)]) -> Vec<f64> {
    let mut pt: Vec<f64> = space
        .coords
        .iter()
        .map(|c| {
            let (a, b) = c.domain();
            (to_f64(&a) + to_f64(&b)) / 2.0
        })
        .collect();
    for (v, a, b) in bx {
        pt[*v] = (to_f64(a) + to_f64(b)) / 2.0;
    }
    pt
}
