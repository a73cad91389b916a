//! Integration along the fibre of simplicial forms for product fibrations `X × Z → Z`.

pub mod shuffle;

use std::sync::Arc;

use serde::Serialize;

use crate::cech::{CechCochain, DeligneCocycle, TotalCochain};
use crate::covers::{product_cover, GoodCover, Nerve, PartitionOfUnity};
use crate::error::{Error, Result};
use crate::exterior::{CoordinateSpace, ExteriorForm, FormValue, Grid, Poly, Residual, Space};
use crate::scalar::{q, Q};
use crate::simplicial::{bary, whitney_value, LevelResidual, SimplicialForm, SimplicialReport};

pub use shuffle::{enumerate_shuffles, sigma_polys, sigma_values, Shuffle};

/// How a level-`p` base simplex and the fibre bumps are mapped into the total nerve.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Convention {
    /// Unsigned sum over shuffles of pullbacks along the σ maps.
    Printed,
    /// The shuffle sum weighted by the sign of each shuffle.
    Signed,
    /// One map into the simplex spanned by all vertices `(i_a, j_b)`, coordinates `t_a φ_b`.
    ProductVertex,
}

impl Convention {
    pub const ALL: [Convention; 3] = [Convention::Printed, Convention::Signed, Convention::ProductVertex];

    pub fn name(&self) -> &'static str {
        match self {
            Convention::Printed => "printed",
            Convention::Signed => "signed",
            Convention::ProductVertex => "product_vertex",
        }
    }
}

/// `Y = X × Z` with the cover `𝒱 = 𝒰′ × 𝒰`, element `(i, j)` stored at `i·|𝒰′| + j`.
#[derive(Debug)]
pub struct ProductFibration {
    pub fibre_cover: Arc<GoodCover>,
    pub fibre_pou: PartitionOfUnity,
    pub base_nerve: Arc<Nerve>,
    pub base_pou: PartitionOfUnity,
    pub total_nerve: Arc<Nerve>,
    pub total_pou: PartitionOfUnity,
    fibre_cells: Vec<FibreCell>,
}

#[derive(Clone, Debug)]
struct FibreCell {
    bounds: Vec<(usize, Q, Q)>,
    active: Vec<usize>,
    phis: Vec<Poly>,
}

impl ProductFibration {
    pub fn new(fibre: (&GoodCover, &PartitionOfUnity), base: (&GoodCover, &PartitionOfUnity)) -> Result<Self> {
        let (tc, tp) = product_cover(fibre, base, true)?;
        let xs = fibre.0.space().clone();
        let mut grid = Grid::trivial();
        for phi in &fibre.1.phis {
            grid = grid.union(phi.grid());
        }
        let fine: Vec<ExteriorForm> = fibre.1.phis.iter().map(|f| f.refine(&grid)).collect();
        let mut fibre_cells = Vec::with_capacity(grid.ncells());
        for idx in 0..grid.ncells() {
            let mut active = Vec::new();
            let mut phis = Vec::new();
            for (j, f) in fine.iter().enumerate() {
                if let Some(p) = f.cells()[idx].get(&0) {
                    if !p.is_zero() {
                        active.push(j);
                        phis.push(p.clone());
                    }
                }
            }
            if active.is_empty() {
                return Err(Error::BadCover("partition of unity vanishes on a cell".into()));
            }
            let bounds = (0..xs.dim()).map(|v| {
                let (a, b) = grid.var_bounds(&xs, idx, v);
                (v, a, b)
            }).collect();
            fibre_cells.push(FibreCell { bounds, active, phis });
        }
        Ok(ProductFibration {
            fibre_cover: Arc::new(fibre.0.clone()),
            fibre_pou: fibre.1.clone(),
            base_nerve: Arc::new(Nerve::new(Arc::new(base.0.clone()))),
            base_pou: base.1.clone(),
            total_nerve: Arc::new(Nerve::new(Arc::new(tc))),
            total_pou: tp,
            fibre_cells,
        })
    }

    pub fn fibre_space(&self) -> &Space {
        self.fibre_cover.space()
    }

    pub fn base_space(&self) -> &Space {
        self.base_nerve.cover().space()
    }

    pub fn total_space(&self) -> &Space {
        self.total_nerve.cover().space()
    }

    pub fn fibre_dim(&self) -> usize {
        self.fibre_space().dim()
    }

    pub fn total_index(&self, base: usize, fibre: usize) -> usize {
        base * self.fibre_cover.len() + fibre
    }

    /// Whether the fibre nerve has no non-degenerate simplices above dimension `dim X`.
    pub fn fibre_nerve_is_thin(&self) -> bool {
        let fibre_nerve = Nerve::new(self.fibre_cover.clone());
        fibre_nerve.nondegenerate(self.fibre_dim() + 1).is_empty()
    }

    pub fn fibre_names(&self) -> Vec<String> {
        self.fibre_space().coords.iter().map(|c| c.name.clone()).collect()
    }

    /// Largest number of bumps active on one fibre cell.
    pub fn max_active(&self) -> usize {
        self.fibre_cells.iter().map(|c| c.active.len()).max().unwrap_or(1)
    }
}

/// A simplicial form on the total nerve, stored or produced on demand.
#[derive(Clone, Debug)]
pub enum Source<F: FormValue = ExteriorForm> {
    Stored(SimplicialForm<F>),
    /// `ε*a` for a global form on `Y`.
    Global(Arc<Nerve>, F),
    /// The Whitney lift of a total cochain.
    Whitney(TotalCochain<F>),
}

impl<F: FormValue> Source<F> {
    pub fn nerve(&self) -> &Arc<Nerve> {
        match self {
            Source::Stored(s) => s.nerve(),
            Source::Global(n, _) => n,
            Source::Whitney(c) => c.parts[0].nerve(),
        }
    }

    pub fn degree(&self) -> usize {
        match self {
            Source::Stored(s) => s.degree(),
            Source::Global(_, a) => a.degree(),
            Source::Whitney(c) => c.degree(),
        }
    }

    /// Value at a total-nerve tuple on `sp = Δ^p × Y`.
    pub fn value(&self, tuple: &[usize], sp: &Space) -> Result<F> {
        match self {
            Source::Stored(s) => {
                let p = tuple.len() - 1;
                if p > s.max_level() {
                    return Err(Error::Precondition(format!("stored form has no level {p}")));
                }
                s.value(p, tuple).cloned().ok_or_else(|| Error::Precondition(format!("tuple {tuple:?} is not in the nerve")))
            }
            Source::Global(_, a) => a.embed(sp),
            Source::Whitney(c) => whitney_value(c, tuple, sp),
        }
    }

    pub fn d(&self) -> Result<Self> {
        Ok(match self {
            Source::Stored(s) => Source::Stored(s.d()?),
            Source::Global(n, a) => Source::Global(n.clone(), a.d()?),
            // the lift is a chain map
            Source::Whitney(c) => Source::Whitney(c.total_d()?),
        })
    }

    pub fn scale(&self, c: &Q) -> Self {
        match self {
            Source::Stored(s) => Source::Stored(s.scale(c)),
            Source::Global(n, a) => Source::Global(n.clone(), a.scale_q(c)),
            Source::Whitney(t) => Source::Whitney(TotalCochain { parts: t.parts.iter().map(|x| x.scale(c)).collect() }),
        }
    }
}

#[derive(Clone, Debug)]
pub struct FibreOptions {
    pub convention: Convention,
    pub order: usize,
    /// Check normality of stored inputs first.
    pub require_normal: bool,
}

impl Default for FibreOptions {
    fn default() -> Self {
        FibreOptions { convention: Convention::ProductVertex, order: crate::simplicial::DEFAULT_ORDER, require_normal: true }
    }
}

impl FibreOptions {
    pub fn with(convention: Convention) -> Self {
        FibreOptions { convention, ..Default::default() }
    }
}

/// One term of the integrand: a total-nerve tuple, its coordinate substitutes and a weight.
struct Term {
    tuple: Vec<usize>,
    coords: Vec<Poly>,
    weight: i64,
}

fn poly_to_target(p: &Poly, offset: usize, nvars: usize) -> Result<Poly> {
    let map: Vec<Option<usize>> = (0..p.nvars()).map(|v| Some(v + offset)).collect();
    p.reindex(&map, nvars)
}

impl ProductFibration {
    fn terms(&self, base: &[usize], cell: &FibreCell, target: &Space, conv: Convention) -> Result<Vec<Term>> {
        let p = base.len() - 1;
        let n = target.dim();
        let ts: Vec<Poly> = (0..=p).map(|k| bary(target, p, k).smooth_cell().and_then(|c| c.get(&0).cloned()).unwrap_or_else(|| Poly::zero(n))).collect();
        let phis: Vec<Poly> = cell.phis.iter().map(|f| poly_to_target(f, p, n)).collect::<Result<_>>()?;
        let mut out = Vec::new();
        match conv {
            Convention::ProductVertex => {
                let mut distinct: Vec<usize> = base.to_vec();
                distinct.dedup();
                let mut tuple = Vec::new();
                let mut coords = Vec::new();
                for i in &distinct {
                    let ti = base.iter().zip(&ts).filter(|(b, _)| *b == i).fold(Poly::zero(n), |a, (_, t)| a.add(t));
                    for (j, phi) in cell.active.iter().zip(&phis) {
                        tuple.push(self.total_index(*i, *j));
                        coords.push(ti.mul(phi));
                    }
                }
                out.push(Term { tuple, coords, weight: 1 });
            }
            Convention::Printed | Convention::Signed => {
                for s in enumerate_shuffles(cell.active.len() - 1, p) {
                    let tuple = (0..=s.n()).map(|r| self.total_index(base[s.mu[r]], cell.active[s.nu[r]])).collect();
                    let weight = if conv == Convention::Signed { s.sign() } else { 1 };
                    out.push(Term { tuple, coords: sigma_polys(&s, &ts, &phis), weight });
                }
            }
        }
        Ok(out)
    }

    /// `∫_{Y/Z} ω` on levels `0..=max_level` of the base nerve.
    pub fn fibre_integrate<F: FormValue>(&self, omega: &Source<F>, max_level: usize, opts: &FibreOptions) -> Result<SimplicialForm<F>> {
        if !Arc::ptr_eq(omega.nerve(), &self.total_nerve) {
            return Err(Error::Precondition("form does not live on the total nerve".into()));
        }
        if let (Source::Stored(s), true) = (omega, opts.require_normal) {
            let rep = s.verify_normal()?;
            if !rep.passes(1e-9) {
                return Err(Error::NormalityRequired(format!("degeneracy residual {:e}", rep.max_residual())));
            }
        }
        let m = self.fibre_dim();
        let k = omega.degree().checked_sub(m);
        let out_degree = k.unwrap_or(0);
        let y = self.total_space().clone();
        let base = self.base_space().clone();
        SimplicialForm::from_fn(&self.base_nerve, &base, out_degree, max_level, |p, t, out_sp| {
            if k.is_none() {
                return Ok(F::zero_like(out_sp, 0));
            }
            let target = CoordinateSpace::simplex_product(p, &y);
            let fibre_vars: Vec<usize> = (p..p + m).collect();
            let mut acc = F::zero_like(out_sp, out_degree);
            for cell in &self.fibre_cells {
                let bx: Vec<(usize, Q, Q)> = cell.bounds.iter().map(|(v, a, b)| (v + p, a.clone(), b.clone())).collect();
                for term in self.terms(t, cell, &target, opts.convention)? {
                    let nn = term.tuple.len() - 1;
                    let src_sp = CoordinateSpace::simplex_product(nn, &y);
                    let val = omega.value(&term.tuple, &src_sp)?;
                    if val.is_exact_zero() {
                        continue;
                    }
                    let mut subs: Vec<ExteriorForm> = term.coords[1..].iter().map(|c| ExteriorForm::scalar(&target, c.clone())).collect();
                    for v in 0..y.dim() {
                        subs.push(ExteriorForm::scalar(&target, Poly::var(target.dim(), p + v)));
                    }
                    let pulled = val.pullback_exact(&target, &subs)?;
                    let integral = pulled.integrate_box(&fibre_vars, &bx, opts.order)?.embed(out_sp)?;
                    acc = acc.add(&integral.scale_q(&q(term.weight)))?;
                }
            }
            Ok(acc)
        })
    }
}

/// `∫_X a` for a global form on `X × Z`, as a form on `Z`.
pub fn classical_fibre_integral(fib: &ProductFibration, a: &ExteriorForm) -> Result<ExteriorForm> {
    let names = fib.fibre_names();
    let names: Vec<&str> = names.iter().map(String::as_str).collect();
    a.integrate_over_named(&names)?.embed(fib.base_space())
}

/// Residual of `∫ dω − (−1)^m d∫ ω` over every level and tuple region.
pub fn stokes_residual<F: FormValue>(fib: &ProductFibration, omega: &Source<F>, max_level: usize, opts: &FibreOptions, sign_flip: bool) -> Result<SimplicialReport> {
    let m = fib.fibre_dim();
    let lhs = fib.fibre_integrate(&omega.d()?, max_level, opts)?;
    let rhs = fib.fibre_integrate(omega, max_level, opts)?.d()?;
    let s = if (m % 2 == 1) ^ sign_flip { q(-1) } else { q(1) };
    let diff = lhs.sub(&rhs.scale(&s))?;
    level_residuals(&diff)
}

fn level_residuals<F: FormValue>(f: &SimplicialForm<F>) -> Result<SimplicialReport> {
    let mut levels = Vec::new();
    for p in 0..=f.max_level() {
        let mut r = Residual::zero_exact();
        for idx in f.nerve().nondegenerate(p) {
            let region = crate::simplicial::shift_region(&f.nerve().region(p, idx), p);
            r = r.combine(&f.level(p)[idx].residual_on(&region));
        }
        levels.push(LevelResidual { level: p, exact_zero: r.exact_zero, max_abs: r.max_abs });
    }
    Ok(SimplicialReport { levels })
}

#[derive(Clone, Debug, Serialize)]
pub struct IntegralityReport {
    pub level: usize,
    /// `𝓘_Δ` of the fibre integral at each non-degenerate top tuple, rounded.
    pub entries: Vec<(Vec<usize>, i64)>,
    pub max_deviation: f64,
    pub integral: bool,
}

/// Whether `𝓘_Δ ∫_{Y/Z} ω` takes integer values at its top level.
pub fn check_integral_preserved<F: FormValue>(fib: &ProductFibration, omega: &Source<F>, opts: &FibreOptions, tol: f64) -> Result<IntegralityReport> {
    let k = omega
        .degree()
        .checked_sub(fib.fibre_dim())
        .ok_or_else(|| Error::Precondition("degree below the fibre dimension".into()))?;
    let out = fib.fibre_integrate(omega, k, opts)?;
    let top = &out.i_delta_ord(opts.order)?.parts[k];
    let nerve = &fib.base_nerve;
    let mut entries = Vec::new();
    let mut worst = 0.0f64;
    let mut exact_ok = true;
    for idx in nerve.nondegenerate(k) {
        let region = nerve.region(k, idx);
        let v = top.value(idx);
        let r = v.integrality_on(&region);
        if r.exact_zero == Some(false) {
            exact_ok = false;
        }
        let x = v.sample_on(&region);
        worst = worst.max(r.max_abs).max((x - x.round()).abs());
        entries.push((nerve.tuple(k, idx), x.round() as i64));
    }
    let integral = exact_ok && worst <= tol;
    Ok(IntegralityReport { level: k, entries, max_deviation: worst, integral })
}

/// `π_!` on Deligne cocycles: lift, integrate along the fibre, then integrate over simplices.
pub fn deligne_pushforward(fib: &ProductFibration, dc: &DeligneCocycle, opts: &FibreOptions) -> Result<DeligneCocycle> {
    let m = fib.fibre_dim();
    let l = dc.omega.len() - 1;
    let k = l.checked_sub(m).ok_or_else(|| Error::Precondition(format!("level {l} is below the fibre dimension {m}")))?;
    let lambda = Source::Whitney(TotalCochain { parts: dc.omega.clone() });
    let pushed = fib.fibre_integrate(&lambda, k, opts)?;
    let pushed = if m % 2 == 1 { pushed.scale(&q(-1)) } else { pushed };
    let parts: Vec<CechCochain> = pushed.i_delta()?.parts;
    DeligneCocycle::new(parts)
}

#[derive(Clone, Debug, Serialize)]
pub struct ConventionVerdict {
    pub convention: Convention,
    pub face_residual: f64,
    pub face_ok: bool,
    pub stokes_residual: f64,
    pub stokes_ok: bool,
}

impl ConventionVerdict {
    pub fn passes(&self) -> bool {
        self.face_ok && self.stokes_ok
    }
}

/// Face compatibility and Stokes for every convention on one input.
pub fn convention_verdicts<F: FormValue>(fib: &ProductFibration, omega: &Source<F>, max_level: usize, order: usize, tol: f64) -> Result<Vec<ConventionVerdict>> {
    Convention::ALL
        .iter()
        .map(|c| {
            let opts = FibreOptions { convention: *c, order, require_normal: false };
            let face = fib.fibre_integrate(omega, max_level, &opts)?.verify_simplicial()?;
            let stokes = stokes_residual(fib, omega, max_level, &opts, false)?;
            Ok(ConventionVerdict {
                convention: *c,
                face_residual: face.max_residual(),
                face_ok: face.passes(tol),
                stokes_residual: stokes.max_residual(),
                stokes_ok: stokes.passes(tol),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests;
