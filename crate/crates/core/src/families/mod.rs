//! Family invariants `Λ_{Y/Z}(Q, B)` over product fibrations `Y = X × Z`.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::cech::DeligneCocycle;
use crate::chern_weil::{formal_family_connection, line_bundle_deligne, transgression, FormalFiberModel, InvariantMonomial, LineBundleData};
use crate::covers::{build_box_cover, build_circle_cover, build_torus_cover, PartitionOfUnity, PouKind};
use crate::error::{Error, Result};
use crate::exterior::{Coord, CoordKind, Poly, Trig, CoordinateSpace, ExteriorForm, FormValue, NumericForm, Space};
use crate::fibre::{classical_fibre_integral, deligne_pushforward, FibreOptions, ProductFibration, Source};
use crate::scalar::{frac, q, Q};

mod probes;

pub use probes::{
    bockstein_transfer_sign, extension_independence, integrated_bockstein, flat_class, foliated_family_scenario, BocksteinSign, ExtensionReport,
    FlatClassReport, FoliatedReport, Restriction,
};

/// Declared vanishing of the fibrewise curvature `F_{A_z}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FibreCondition {
    Flat,
    /// `F_{A_z}^r = 0`.
    Nilpotent(usize),
}

/// `B = Σ γ_a ∧ f_a (+ base part)` in a formal fibre model.
#[derive(Clone, Debug)]
pub struct FormalConnection {
    pub model: Arc<FormalFiberModel>,
    pub coeffs: Vec<(usize, ExteriorForm)>,
    pub base_part: Option<ExteriorForm>,
}

/// Cover parameters for the chart-shuffle backend.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CoverParams {
    pub arcs: usize,
    pub delta: Q,
    pub base_pieces: usize,
    pub pou: PouKind,
    /// Gauss–Legendre order of the numeric backend.
    pub quad_order: usize,
}

impl Default for CoverParams {
    fn default() -> Self {
        CoverParams { arcs: 3, delta: frac(1, 24), base_pieces: 2, pou: PouKind::C1cubic, quad_order: 8 }
    }
}

#[derive(Clone, Debug)]
pub struct FamilySpec {
    pub name: String,
    pub total: Space,
    pub base: Space,
    /// Fibre coordinates of `total`; they come first.
    pub fibre: Vec<String>,
    pub chart: Option<ExteriorForm>,
    pub formal: Option<FormalConnection>,
    pub line_bundle: Option<LineBundleData>,
    pub invariant: InvariantMonomial,
    pub condition: FibreCondition,
    /// A fixed fibration, required when the data live on a specific cover.
    pub fibration: Option<Arc<ProductFibration>>,
}

fn base_box(names: &[String]) -> Result<Space> {
    CoordinateSpace::new("Z", names.iter().map(|n| Coord::affine(n, q(-1), q(1))).collect())
}

impl FamilySpec {
    /// `T^k × [−1,1]^k` with `B = Σ z_j dx_j` and `Q = ξ^k`; `k = 2` is the basic example.
    pub fn torus(k: usize) -> Result<Self> {
        let xs: Vec<String> = (1..=k).map(|i| format!("x{i}")).collect();
        let zs: Vec<String> = (1..=k).map(|i| format!("z{i}")).collect();
        let mut coords: Vec<Coord> = xs.iter().map(|n| Coord::periodic(n)).collect();
        coords.extend(zs.iter().map(|n| Coord::affine(n, q(-1), q(1))));
        let total = CoordinateSpace::new("Y", coords)?;
        let base = base_box(&zs)?;
        let mut b = ExteriorForm::zero(&total, 1);
        for (x, z) in xs.iter().zip(&zs) {
            b = b.add(&ExteriorForm::coordinate(&total, z)?.wedge(&ExteriorForm::differential(&total, x)?)?)?;
        }
        let refs: Vec<&str> = xs.iter().map(String::as_str).collect();
        let model = Arc::new(FormalFiberModel::torus(&refs));
        let coeffs = zs.iter().enumerate().map(|(j, z)| Ok((1usize << j, ExteriorForm::coordinate(&base, z)?))).collect::<Result<_>>()?;
        Ok(FamilySpec {
            name: format!("torus_{k}"),
            total,
            base,
            fibre: xs,
            chart: Some(b),
            formal: Some(FormalConnection { model, coeffs, base_part: None }),
            line_bundle: None,
            invariant: InvariantMonomial::chern_power(k),
            condition: FibreCondition::Flat,
            fibration: None,
        })
    }

    /// Genus-`g` surface fibre, `B = Σ z_{2i−1} α_i + z_{2i} β_i`, `Q = ξ²`; formal only.
    pub fn surface(g: usize) -> Result<Self> {
        let zs: Vec<String> = (1..=2 * g).map(|i| format!("z{i}")).collect();
        let base = base_box(&zs)?;
        let model = Arc::new(FormalFiberModel::surface(g));
        let mut coeffs = Vec::new();
        for i in 1..=g {
            coeffs.push((i, ExteriorForm::coordinate(&base, &zs[2 * i - 2])?));
            coeffs.push((g + i, ExteriorForm::coordinate(&base, &zs[2 * i - 1])?));
        }
        Ok(FamilySpec {
            name: format!("surface_{g}"),
            total: base.clone(),
            base,
            fibre: Vec::new(),
            chart: None,
            formal: Some(FormalConnection { model, coeffs, base_part: None }),
            line_bundle: None,
            invariant: InvariantMonomial::chern_power(2),
            condition: FibreCondition::Flat,
            fibration: None,
        })
    }

    /// `T⁴ × S¹` with `B_s = (1+s)cos(τθ)dx1 + sin(τθ)dx2 + s dx3 + s·cos(τθ)dx4`, `Q = ξ³`.
    pub fn torus4_over_circle(s: &Q) -> Result<FamilySpec> {
        let xs: Vec<String> = (1..=4).map(|i| format!("x{i}")).collect();
        let mut coords: Vec<Coord> = xs.iter().map(|n| Coord::periodic(n)).collect();
        coords.push(Coord::periodic("theta"));
        let total = CoordinateSpace::new("Y", coords)?;
        let base = CoordinateSpace::new("S1", vec![Coord::periodic("theta")])?;
        let c = Poly::trig(5, 4, Trig::Cos(1));
        let coeffs = [
            c.scale(&(q(1) + s)),
            Poly::trig(5, 4, Trig::Sin(1)),
            Poly::constant(5, s.clone()),
            c.scale(s),
        ];
        let mut b = ExteriorForm::zero(&total, 1);
        for (x, p) in xs.iter().zip(coeffs) {
            b = b.add(&ExteriorForm::monomial(&total, p, &[x])?)?;
        }
        Ok(FamilySpec {
            name: format!("t4_over_s1({s})"),
            total,
            base,
            fibre: xs,
            chart: Some(b),
            formal: None,
            line_bundle: None,
            invariant: InvariantMonomial::chern_power(3),
            condition: FibreCondition::Flat,
            fibration: None,
        })
    }

    /// Circle covers of `T` (coordinate `x`) and `T̂` (coordinate `xi`) for the Poincaré bundle.
    pub fn poincare_fibration(params: &CoverParams) -> Result<Arc<ProductFibration>> {
        let (cx, px) = build_circle_cover("x", params.arcs, &params.delta, params.pou)?;
        let (cy, py) = build_circle_cover("xi", params.arcs, &params.delta, params.pou)?;
        Ok(Arc::new(ProductFibration::new((&cx, &px), (&cy, &py))?))
    }

    /// The Poincaré bundle on `T × T̂` (fibre `x`, base `xi`), `Q = ξ`.
    pub fn poincare(fib: Arc<ProductFibration>) -> Result<Self> {
        let lb = LineBundleData::poincare(&fib.total_nerve, "x", "xi")?;
        Ok(FamilySpec {
            name: "poincare_1".into(),
            total: fib.total_space().clone(),
            base: fib.base_space().clone(),
            fibre: vec!["x".into()],
            chart: None,
            formal: None,
            line_bundle: Some(lb),
            invariant: InvariantMonomial::chern_power(1),
            condition: FibreCondition::Flat,
            fibration: Some(fib),
        })
    }

    /// Whether the family carries the data `backend` needs.
    pub fn supports(&self, backend: Backend) -> bool {
        match backend {
            Backend::Classical | Backend::ChartShuffleNumeric => self.chart.is_some(),
            Backend::Formal => self.formal.is_some(),
            Backend::ChartShuffle => self.chart.is_some() || self.line_bundle.is_some(),
        }
    }

    pub fn fibre_dim(&self) -> usize {
        match &self.formal {
            Some(f) if self.chart.is_none() => f.model.dim,
            _ => self.fibre.len(),
        }
    }

    /// `ℓ = 2n + 1 − dim X` with `n + 1` the degree of `Q`.
    pub fn ell(&self) -> Result<usize> {
        (2 * self.invariant.power).checked_sub(1 + self.fibre_dim()).ok_or_else(|| Error::Precondition("fibre dimension exceeds 2n+1".into()))
    }

    fn fibre_mask(&self) -> Result<u64> {
        self.fibre.iter().try_fold(0u64, |m, n| Ok(m | 1 << self.total.index_of(n)?))
    }

    /// The part of `B` with only fibre differentials.
    pub fn fibre_part(&self, b: &ExteriorForm) -> Result<ExteriorForm> {
        let mask = self.fibre_mask()?;
        Ok(b.filter_wedges(|m| m & !mask == 0))
    }

    /// The fibre-bidegree `(2,0)` part of the curvature satisfies the declared condition.
    pub fn verify_condition(&self) -> Result<()> {
        let curvs: Vec<ExteriorForm> = match (&self.chart, &self.line_bundle) {
            (Some(b), _) => vec![b.d()],
            (None, Some(lb)) => lb.connection.iter().map(|a| a.d()).collect(),
            // formal generators are closed, so dB has no (2,0) part
            (None, None) => return Ok(()),
        };
        let r = match self.condition {
            FibreCondition::Flat => 1,
            FibreCondition::Nilpotent(r) => r,
        };
        for c in &curvs {
            if !self.fibre_part(c)?.wedge_power(r)?.is_zero() {
                return Err(Error::Precondition(format!("fibre curvature of {} violates {:?}", self.name, self.condition)));
            }
        }
        Ok(())
    }

    /// Product fibration with torus fibre and box base for the chart-shuffle backend.
    pub fn fibration(&self, params: &CoverParams) -> Result<Arc<ProductFibration>> {
        if let Some(f) = &self.fibration {
            return Ok(f.clone());
        }
        let fibre: Vec<&str> = self.fibre.iter().map(String::as_str).collect();
        let (fc, fp) = if fibre.len() == 1 {
            build_circle_cover(fibre[0], params.arcs, &params.delta, params.pou)?
        } else {
            build_torus_cover(&fibre, params.arcs, &params.delta, params.pou)?
        };
        let coords: Vec<(&str, Q, Q)> = self
            .base
            .coords
            .iter()
            .map(|c| match &c.kind {
                CoordKind::Affine { lo, hi } => Ok((c.name.as_str(), lo.clone(), hi.clone())),
                _ => Err(Error::Config(format!("base coordinate `{}` must be an interval", c.name))),
            })
            .collect::<Result<_>>()?;
        let (bc, bp) = build_box_cover(&coords, params.base_pieces, &params.delta, params.pou)?;
        Ok(Arc::new(ProductFibration::new((&fc, &fp), (&bc, &bp))?))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Backend {
    /// Direct integration of the chart form over the fibre.
    Classical,
    Formal,
    ChartShuffle,
    ChartShuffleNumeric,
}

#[derive(Clone, Debug)]
pub enum InvariantValue {
    /// Representative in `Ω^ℓ(Z)`, defined modulo `dΩ^{ℓ−1}`.
    Form(ExteriorForm),
    Numeric(NumericForm),
    Gerbe { cocycle: DeligneCocycle, pou: PartitionOfUnity },
}

#[derive(Clone, Debug)]
pub struct FamilyInvariant {
    pub backend: Backend,
    pub ell: usize,
    pub value: InvariantValue,
    pub cover: Option<String>,
}

impl FamilyInvariant {
    pub fn form(&self) -> Option<&ExteriorForm> {
        match &self.value {
            InvariantValue::Form(f) => Some(f),
            _ => None,
        }
    }

    /// `dΛ_{Y/Z}`. For a gerbe this is `(−1)^m` times the curvature of the
    /// pushed-forward cocycle, `m` the fibre dimension.
    pub fn d_exact(&self, fibre_dim: usize) -> Result<ExteriorForm> {
        match &self.value {
            InvariantValue::Form(f) => Ok(f.d()),
            InvariantValue::Gerbe { cocycle, pou } => {
                let c = cocycle.curvature(pou)?;
                Ok(if fibre_dim % 2 == 1 { c.neg() } else { c })
            }
            InvariantValue::Numeric(_) => Err(Error::Precondition("numeric invariant has no exact derivative".into())),
        }
    }
}

/// Glue the `(0, ℓ)` component of a fibre-integrated case-I form with the base partition.
fn glue<F: FormValue>(fib: &ProductFibration, lam: &F, ell: usize, order: usize) -> Result<F> {
    let opts = FibreOptions { order, ..FibreOptions::default() };
    let src = Source::Global(fib.total_nerve.clone(), lam.clone());
    let pushed = fib.fibre_integrate(&src, ell, &opts)?;
    let parts = pushed.i_delta_ord(order)?.parts;
    let top = &parts[0];
    let mut acc = F::zero_like(fib.base_space(), ell);
    for (j, phi) in fib.base_pou.phis.iter().enumerate() {
        let v = top.get(&[j]).ok_or_else(|| Error::InternalConsistency("missing level-0 value".into()))?;
        acc = acc.add(&F::from_exact(phi).wedge(v)?)?;
    }
    Ok(acc)
}

pub fn lambda_family(spec: &FamilySpec, backend: Backend, params: &CoverParams) -> Result<FamilyInvariant> {
    spec.verify_condition()?;
    let ell = spec.ell()?;
    let inapplicable = || Error::Config(format!("backend {backend:?} does not apply to {}", spec.name));
    let fibre: Vec<&str> = spec.fibre.iter().map(String::as_str).collect();
    let value = match backend {
        Backend::Classical => {
            let b = spec.chart.as_ref().ok_or_else(inapplicable)?;
            let v = transgression(&spec.invariant, b)?.integrate_over_named(&fibre)?.embed(&spec.base)?;
            InvariantValue::Form(v)
        }
        Backend::Formal => {
            let f = spec.formal.as_ref().ok_or_else(inapplicable)?;
            let fam = formal_family_connection(&f.model, &spec.base, &f.coeffs, f.base_part.as_ref(), spec.invariant.power - 1)?;
            InvariantValue::Form(fam.lambda_yz.scale(&spec.invariant.coeff))
        }
        Backend::ChartShuffle | Backend::ChartShuffleNumeric => {
            let fib = spec.fibration(params)?;
            if let Some(lb) = &spec.line_bundle {
                if backend == Backend::ChartShuffleNumeric {
                    return Err(inapplicable());
                }
                let dc = line_bundle_deligne(lb)?;
                let cocycle = deligne_pushforward(&fib, &dc, &FibreOptions::default())?;
                InvariantValue::Gerbe { cocycle, pou: fib.base_pou.clone() }
            } else {
                let b = spec.chart.as_ref().ok_or_else(inapplicable)?.embed(fib.total_space())?;
                let lam = transgression(&spec.invariant, &b)?;
                let rep = if backend == Backend::ChartShuffle {
                    InvariantValue::Form(glue(&fib, &lam, ell, params.quad_order)?.embed(&spec.base)?)
                } else {
                    InvariantValue::Numeric(glue(&fib, &NumericForm::from_exact(&lam), ell, params.quad_order)?)
                };
                return Ok(FamilyInvariant { backend, ell, value: rep, cover: Some(format!("{params:?}")) });
            }
        }
    };
    Ok(FamilyInvariant { backend, ell, value, cover: None })
}

/// `∫_{Y/Z} Q(F_B^{n+1}) − (−1)^{ℓ−1} dΛ_{Y/Z}`.
#[derive(Clone, Debug, Serialize)]
pub struct CurvatureReport {
    pub sign: i64,
    pub exact_zero: bool,
    #[serde(skip)]
    pub integrated: ExteriorForm,
}

pub fn curvature_check(spec: &FamilySpec, inv: &FamilyInvariant) -> Result<CurvatureReport> {
    let sign = if inv.ell % 2 == 1 { 1 } else { -1 };
    let fibre: Vec<&str> = spec.fibre.iter().map(String::as_str).collect();
    let integrated = if let Some(b) = &spec.chart {
        crate::chern_weil::chern_weil_form(&spec.invariant, &b.d())?.integrate_over_named(&fibre)?.embed(&spec.base)?
    } else if let Some(f) = &spec.formal {
        formal_family_connection(&f.model, &spec.base, &f.coeffs, f.base_part.as_ref(), spec.invariant.power - 1)?
            .integrated_curvature
            .scale(&spec.invariant.coeff)
    } else if let (Some(lb), InvariantValue::Gerbe { .. }) = (&spec.line_bundle, &inv.value) {
        let fib = spec.fibration.as_ref().ok_or_else(|| Error::Config("line bundle family needs its fibration".into()))?;
        let fcurv = line_bundle_deligne(lb)?.curvature(&fib.total_pou)?;
        let qf = crate::chern_weil::chern_weil_form(&spec.invariant, &fcurv)?;
        classical_fibre_integral(fib, &qf)?
    } else {
        return Err(Error::Config(format!("no curvature data for {}", spec.name)));
    };
    let d = inv.d_exact(spec.fibre_dim())?.embed(integrated.space())?;
    let exact_zero = integrated.sub(&d.scale(&q(sign)))?.is_zero();
    Ok(CurvatureReport { sign, exact_zero, integrated })
}

#[cfg(test)]
mod tests;
