//! The rotation angle ψ(s, t) between the principal frame and the isothermal
//! coordinate lines.
//!
//! ψ satisfies the first-order pair
//!
//! ```text
//! ψ_s = −½ Q sin 2ψ,        ψ_t = ½ (log Q)' − ½ Q cos 2ψ
//! ```
//!
//! whose compatibility condition is the Q equation. This module provides the
//! closed-form solutions for each Q branch, a numerical integrator for the
//! pair, and residual checks for harmonicity and the α-coframe relations.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::bonnet_solver::SurfaceProfile;
use crate::error::{Error, Result};
use crate::forms2d::{d_scalar, decompose_in_coframe, laplacian, Grid, OneForm, ScalarField, SweepOrder};
use crate::ode::rk4_step;
use crate::q_family::{QFamily, QKind};

/// Which closed-form solution of the pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PsiCase {
    /// ψ ≡ 0; requires (log Q)' = Q, i.e. `Q = −1/s`.
    ConstantZero,
    /// ψ ≡ π/2; requires (log Q)' = −Q, i.e. `Q = 1/s`.
    ConstantHalfPi,
    /// `tan ψ = −(t + σ)/s` with `Q = 1/s`.
    RationalUpper,
    /// `tan ψ = s/(t + σ)` with `Q = −1/s`.
    RationalLower,
    /// `tan ψ = tanh(at/2 + η) · tan((as + π)/2)` with `Q = a/sin(as)`.
    TrigAppendix,
    /// `tan ψ = cot(at/2 + η) · coth(as/2)` with `Q = a/sinh(as)`.
    HyperAppendix,
}

/// A closed-form ψ together with its shift constants and Q family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PsiBranch {
    case: PsiCase,
    sigma: f64,
    eta: f64,
    family: QFamily,
}

/// Config/metadata representation of a branch (family stored separately).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BranchSpec {
    pub case: PsiCase,
    #[serde(default)]
    pub sigma: f64,
    #[serde(default)]
    pub eta: f64,
}

/// Brings an angle into `(−π/2, π/2]`.
pub fn fold_half_pi(x: f64) -> f64 {
    x - PI * ((x - FRAC_PI_2) / PI).ceil()
}

impl PsiBranch {
    pub fn new(case: PsiCase, sigma: f64, eta: f64, family: QFamily) -> Result<Self> {
        if !sigma.is_finite() || !eta.is_finite() {
            return Err(Error::InvalidParameter("branch shifts must be finite".into()));
        }
        let ok = match case {
            PsiCase::ConstantZero => family.kind() == QKind::Rational && family.sign() < 0,
            PsiCase::ConstantHalfPi => family.kind() == QKind::Rational && family.sign() > 0,
            PsiCase::RationalUpper => family.kind() == QKind::Rational && family.sign() > 0,
            PsiCase::RationalLower => family.kind() == QKind::Rational && family.sign() < 0,
            PsiCase::TrigAppendix => family.kind() == QKind::Trig,
            PsiCase::HyperAppendix => family.kind() == QKind::Hyper,
        };
        if !ok {
            return Err(Error::InvalidParameter(format!(
                "psi branch {case:?} does not solve the pair with Q family {family}"
            )));
        }
        Ok(Self {
            case,
            sigma,
            eta,
            family,
        })
    }

    pub fn from_spec(spec: BranchSpec, family: QFamily) -> Result<Self> {
        Self::new(spec.case, spec.sigma, spec.eta, family)
    }

    pub fn spec(&self) -> BranchSpec {
        BranchSpec {
            case: self.case,
            sigma: self.sigma,
            eta: self.eta,
        }
    }

    pub fn case(&self) -> PsiCase {
        self.case
    }

    pub fn family(&self) -> QFamily {
        self.family
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    /// Appendix branches on the `s < 0` side are obtained from the `s > 0`
    /// formulas through `ψ₋(s, t) = ψ₊(−s, −t) + π/2`.
    pub fn is_derived_mirror(&self) -> bool {
        matches!(self.case, PsiCase::TrigAppendix | PsiCase::HyperAppendix) && self.family.sign() < 0
    }

    fn mirror_base(&self) -> PsiBranch {
        PsiBranch {
            family: self.family.mirrored(),
            ..*self
        }
    }

    fn check_domain(&self, s: f64, t: f64) -> Result<()> {
        let (lo, hi) = self.family.domain();
        if !t.is_finite() {
            return Err(Error::InvalidParameter("t must be finite".into()));
        }
        if !(s > lo) {
            return Err(Error::Domain {
                family: self.family.to_string(),
                s,
                endpoint: "lower",
            });
        }
        if !(s < hi) {
            return Err(Error::Domain {
                family: self.family.to_string(),
                s,
                endpoint: "upper",
            });
        }
        Ok(())
    }

    /// `tan ψ = N/D` with the partials of `N` and `D`:
    /// `(N, D, N_s, N_t, D_s, D_t)`. Only for direct (non-mirror, non-constant) cases.
    fn tan_parts(&self, s: f64, t: f64) -> [f64; 6] {
        let a = self.family.a();
        match self.case {
            PsiCase::RationalUpper => [-(t + self.sigma), s, 0.0, -1.0, 1.0, 0.0],
            PsiCase::RationalLower => [s, t + self.sigma, 1.0, 0.0, 0.0, 1.0],
            PsiCase::TrigAppendix => {
                // tan((as + π)/2) = −cot(as/2)
                let (w, x) = (0.5 * a * t + self.eta, 0.5 * a * s);
                let th = w.tanh();
                let sech2 = 1.0 - th * th;
                [
                    -th * x.cos(),
                    x.sin(),
                    0.5 * a * th * x.sin(),
                    -0.5 * a * sech2 * x.cos(),
                    0.5 * a * x.cos(),
                    0.0,
                ]
            }
            PsiCase::HyperAppendix => {
                let (w, x) = (0.5 * a * t + self.eta, 0.5 * a * s);
                [
                    w.cos() * x.cosh(),
                    w.sin() * x.sinh(),
                    0.5 * a * w.cos() * x.sinh(),
                    -0.5 * a * w.sin() * x.cosh(),
                    0.5 * a * w.sin() * x.cosh(),
                    0.5 * a * w.cos() * x.sinh(),
                ]
            }
            PsiCase::ConstantZero | PsiCase::ConstantHalfPi => unreachable!("constant branch"),
        }
    }

    /// Principal value of ψ in `(−π/2, π/2]`.
    pub fn eval(&self, s: f64, t: f64) -> Result<f64> {
        self.check_domain(s, t)?;
        Ok(self.eval_unchecked(s, t))
    }

    fn eval_unchecked(&self, s: f64, t: f64) -> f64 {
        match self.case {
            PsiCase::ConstantZero => 0.0,
            PsiCase::ConstantHalfPi => FRAC_PI_2,
            _ if self.is_derived_mirror() => fold_half_pi(self.mirror_base().eval_unchecked(-s, -t) + FRAC_PI_2),
            _ => {
                let [n, d, ..] = self.tan_parts(s, t);
                fold_half_pi(n.atan2(d))
            }
        }
    }

    /// Analytic `(ψ_s, ψ_t)`.
    pub fn gradient(&self, s: f64, t: f64) -> Result<(f64, f64)> {
        self.check_domain(s, t)?;
        Ok(self.gradient_unchecked(s, t))
    }

    fn gradient_unchecked(&self, s: f64, t: f64) -> (f64, f64) {
        match self.case {
            PsiCase::ConstantZero | PsiCase::ConstantHalfPi => (0.0, 0.0),
            _ if self.is_derived_mirror() => {
                let (ps, pt) = self.mirror_base().gradient_unchecked(-s, -t);
                (-ps, -pt)
            }
            _ => {
                let [n, d, ns, nt, ds, dt] = self.tan_parts(s, t);
                let r2 = n * n + d * d;
                ((ns * d - n * ds) / r2, (nt * d - n * dt) / r2)
            }
        }
    }

    /// Both residuals of the pair using the analytic gradient.
    pub fn lax_residuals_analytic(&self, s: f64, t: f64) -> Result<(f64, f64)> {
        let (ps, pt) = self.gradient(s, t)?;
        let psi = self.eval_unchecked(s, t);
        let d = self.family.derivatives(s)?;
        Ok((
            ps + 0.5 * d.q * (2.0 * psi).sin(),
            pt - 0.5 * d.qp / d.q + 0.5 * d.q * (2.0 * psi).cos(),
        ))
    }
}

/// ψ sampled on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PsiField {
    psi: ScalarField,
    branch: Option<PsiBranch>,
    psi0: Option<f64>,
}

/// Metadata written next to a ψ dump.
#[derive(Debug, Clone, Serialize)]
pub struct PsiMetadata {
    pub source: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub branch: Option<BranchSpec>,
    pub family: QFamily,
    pub derived_mirror: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub psi0: Option<f64>,
}

/// Shifts each value by a multiple of π to stay next to `reference`.
fn unwrap_to(value: f64, reference: f64) -> f64 {
    value + PI * ((reference - value) / PI).round()
}

fn check_grid_in_domain(fam: &QFamily, grid: &Grid) -> Result<()> {
    fam.guard().check_interval(grid.s_min(), grid.s_max())
}

impl PsiField {
    /// Samples a closed form and removes the π jumps of the principal value:
    /// first along the `t`-edge at `s_min`, then along every `s`-line.
    pub fn from_branch(branch: PsiBranch, grid: Grid) -> Result<Self> {
        check_grid_in_domain(&branch.family, &grid)?;
        let raw = ScalarField::try_from_fn(grid, |s, t| branch.eval(s, t))?;
        let mut v = raw.values().to_vec();
        for j in 1..grid.nt() {
            let k = grid.index(0, j);
            v[k] = unwrap_to(v[k], v[k - 1]);
        }
        for j in 0..grid.nt() {
            for i in 1..grid.ns() {
                let (k, prev) = (grid.index(i, j), grid.index(i - 1, j));
                v[k] = unwrap_to(v[k], v[prev]);
            }
        }
        Ok(Self {
            psi: ScalarField::new(grid, v)?,
            branch: Some(branch),
            psi0: None,
        })
    }

    /// Wraps an arbitrary field (no provenance).
    pub fn from_field(psi: ScalarField) -> Self {
        Self {
            psi,
            branch: None,
            psi0: None,
        }
    }

    pub fn field(&self) -> &ScalarField {
        &self.psi
    }

    pub fn grid(&self) -> &Grid {
        self.psi.grid()
    }

    pub fn branch(&self) -> Option<&PsiBranch> {
        self.branch.as_ref()
    }

    pub fn metadata(&self, family: QFamily) -> PsiMetadata {
        PsiMetadata {
            source: if self.branch.is_some() {
                "closed_form"
            } else {
                "integrated"
            },
            branch: self.branch.map(|b| b.spec()),
            family,
            derived_mirror: self.branch.is_some_and(|b| b.is_derived_mirror()),
            psi0: self.psi0,
        }
    }

    /// Adds a constant (negative controls).
    pub fn shifted(&self, delta: f64) -> Self {
        Self::from_field(self.psi.map(|v| v + delta))
    }
}

const LAX_SUBSTEPS: usize = 8;
const PSI_BLOW_UP: f64 = 1e3;

/// Integrates the pair from `psi0` at `(s_min, t_min)`: `t`-edge first, then
/// every `s`-line.
pub fn integrate_lax(fam: QFamily, grid: Grid, psi0: f64) -> Result<PsiField> {
    integrate_lax_sweep(fam, grid, psi0, SweepOrder::TEdgeFirst)
}

/// [`integrate_lax`] with an explicit sweep order (the alternative order is
/// used to check path independence).
pub fn integrate_lax_sweep(fam: QFamily, grid: Grid, psi0: f64, order: SweepOrder) -> Result<PsiField> {
    check_grid_in_domain(&fam, &grid)?;
    if !psi0.is_finite() {
        return Err(Error::InvalidParameter("psi0 must be finite".into()));
    }
    let along_s = |s: f64, y: &[f64; 1]| [-0.5 * fam.raw(s).q * (2.0 * y[0]).sin()];
    let along_t = |s: f64| {
        let d = fam.raw(s);
        move |_t: f64, y: &[f64; 1]| [0.5 * d.qp / d.q - 0.5 * d.q * (2.0 * y[0]).cos()]
    };
    let (hs, ht) = (grid.h_s() / LAX_SUBSTEPS as f64, grid.h_t() / LAX_SUBSTEPS as f64);
    let mut v = vec![0.0; grid.len()];
    v[0] = psi0;

    let check = |val: f64, i: usize, j: usize| -> Result<f64> {
        if val.is_finite() && val.abs() <= PSI_BLOW_UP {
            Ok(val)
        } else {
            Err(Error::Diverged {
                i,
                j,
                what: format!("|psi| exceeded {PSI_BLOW_UP}"),
            })
        }
    };
    let step_s = |y: f64, i: usize| -> f64 {
        let mut y = [y];
        let s0 = grid.s(i);
        for k in 0..LAX_SUBSTEPS {
            y = rk4_step(&along_s, s0 + k as f64 * hs, &y, hs);
        }
        y[0]
    };
    let step_t = |y: f64, i: usize, j: usize| -> f64 {
        let f = along_t(grid.s(i));
        let mut y = [y];
        let t0 = grid.t(j);
        for k in 0..LAX_SUBSTEPS {
            y = rk4_step(&f, t0 + k as f64 * ht, &y, ht);
        }
        y[0]
    };

    match order {
        SweepOrder::TEdgeFirst => {
            for j in 1..grid.nt() {
                v[grid.index(0, j)] = check(step_t(v[grid.index(0, j - 1)], 0, j - 1), 0, j)?;
            }
            for j in 0..grid.nt() {
                for i in 1..grid.ns() {
                    v[grid.index(i, j)] = check(step_s(v[grid.index(i - 1, j)], i - 1), i, j)?;
                }
            }
        }
        SweepOrder::SEdgeFirst => {
            for i in 1..grid.ns() {
                v[grid.index(i, 0)] = check(step_s(v[grid.index(i - 1, 0)], i - 1), i, 0)?;
            }
            for i in 0..grid.ns() {
                for j in 1..grid.nt() {
                    v[grid.index(i, j)] = check(step_t(v[grid.index(i, j - 1)], i, j - 1), i, j)?;
                }
            }
        }
    }
    Ok(PsiField {
        psi: ScalarField::new(grid, v)?,
        branch: None,
        psi0: Some(psi0),
    })
}

/// `(ψ_s + ½Q sin 2ψ, ψ_t − ½(log Q)' + ½Q cos 2ψ)` with finite-difference ψ
/// derivatives and analytic Q.
pub fn lax_residuals(psi: &PsiField, fam: QFamily) -> Result<(ScalarField, ScalarField)> {
    let grid = *psi.grid();
    check_grid_in_domain(&fam, &grid)?;
    let dpsi = d_scalar(&psi.psi)?;
    let qd: Vec<_> = grid.s_nodes().into_iter().map(|s| fam.raw(s)).collect();
    let mut r1 = Vec::with_capacity(grid.len());
    let mut r2 = Vec::with_capacity(grid.len());
    for (i, d) in qd.iter().enumerate() {
        for j in 0..grid.nt() {
            let p = psi.psi.at(i, j);
            r1.push(dpsi.p().at(i, j) + 0.5 * d.q * (2.0 * p).sin());
            r2.push(dpsi.q().at(i, j) - 0.5 * d.qp / d.q + 0.5 * d.q * (2.0 * p).cos());
        }
    }
    Ok((ScalarField::new(grid, r1)?, ScalarField::new(grid, r2)?))
}

/// Max interior |Δψ|.
pub fn harmonic_residual(psi: &PsiField) -> f64 {
    laplacian(&psi.psi).max_abs_interior()
}

/// Max interior |ψ_st − ψ_ts| with nested finite differences taken in both orders.
pub fn cross_derivative_residual(psi: &PsiField) -> f64 {
    let st = psi.psi.partial_s().partial_t();
    let ts = psi.psi.partial_t().partial_s();
    (&st - &ts).max_abs_interior()
}

/// `α₁ = Q(cos 2ψ ds − sin 2ψ dt)`, `α₂ = Q(sin 2ψ ds + cos 2ψ dt)` with
/// `q_of_s[i] = H'/J` at grid column `i`.
pub fn alpha_coframe(psi: &PsiField, q_of_s: &[f64]) -> Result<(OneForm, OneForm)> {
    let grid = *psi.grid();
    if q_of_s.len() != grid.ns() {
        return Err(Error::Misaligned(format!(
            "{} s-samples for {} grid columns",
            q_of_s.len(),
            grid.ns()
        )));
    }
    let mut k = 0usize;
    let (mut a1p, mut a1q, mut a2p, mut a2q) = (vec![], vec![], vec![], vec![]);
    for &q in q_of_s {
        for j in 0..grid.nt() {
            let two = 2.0 * psi.psi.values()[k + j];
            let (s2, c2) = two.sin_cos();
            a1p.push(q * c2);
            a1q.push(-q * s2);
            a2p.push(q * s2);
            a2q.push(q * c2);
        }
        k += grid.nt();
    }
    let sf = |v| ScalarField::new(grid, v);
    Ok((OneForm::new(sf(a1p)?, sf(a1q)?)?, OneForm::new(sf(a2p)?, sf(a2q)?)?))
}

/// `(f₁, f₂)` with `df = f₁ α₁ + f₂ α₂`.
pub fn coframe_partials(f: &ScalarField, a1: &OneForm, a2: &OneForm) -> Result<(ScalarField, ScalarField)> {
    decompose_in_coframe(&d_scalar(f)?, a1, a2)
}

/// `f₂₁ − f₁₂ + f₂`, which vanishes whenever `dα₁ = 0` and `dα₂ = α₁∧α₂`.
pub fn mixed_partial_residual(f: &ScalarField, a1: &OneForm, a2: &OneForm) -> Result<ScalarField> {
    let (f1, f2) = coframe_partials(f, a1, a2)?;
    let (_f11, f12) = coframe_partials(&f1, a1, a2)?;
    let (f21, _f22) = coframe_partials(&f2, a1, a2)?;
    Ok(&(&f21 - &f12) + &f2)
}

/// `ψ₁₁ + ψ₂₂ + ψ₁` in the α-coframe (harmonicity of ψ rewritten there).
pub fn alpha_harmonic_residual(psi: &PsiField, a1: &OneForm, a2: &OneForm) -> Result<ScalarField> {
    let (p1, p2) = coframe_partials(&psi.psi, a1, a2)?;
    let (p11, _) = coframe_partials(&p1, a1, a2)?;
    let (_, p22) = coframe_partials(&p2, a1, a2)?;
    Ok(&(&p11 + &p22) + &p1)
}

/// `(2ψ₁ − C sin 2ψ, 2ψ₂ + 1 + C cos 2ψ)` with `c_of_s[i] = C` at column `i`.
pub fn c_relation_residuals(
    psi: &PsiField,
    a1: &OneForm,
    a2: &OneForm,
    c_of_s: &[f64],
) -> Result<(ScalarField, ScalarField)> {
    let grid = *psi.grid();
    let c = ScalarField::from_s_samples(grid, c_of_s)?;
    let (p1, p2) = coframe_partials(&psi.psi, a1, a2)?;
    let sin2 = psi.psi.map(|v| (2.0 * v).sin());
    let cos2 = psi.psi.map(|v| (2.0 * v).cos());
    let r1 = &(&p1 * 2.0) - &(&c * &sin2);
    let r2 = &(&p2 * 2.0).map(|v| v + 1.0) + &(&c * &cos2);
    Ok((r1, r2))
}

/// Left side of `2ψ₁ cos 2ψ + (2ψ₂ + 1) sin 2ψ = 0`, with `dψ` decomposed in
/// the α-coframe built from the profile.
pub fn angle_constraint_residual(psi: &PsiField, fam: QFamily, profile: &SurfaceProfile) -> Result<ScalarField> {
    if profile.family() != fam {
        return Err(Error::InvalidParameter(format!(
            "profile built for {} but residual requested for {fam}",
            profile.family()
        )));
    }
    profile.check_aligned(psi.grid())?;
    let q: Vec<f64> = profile.samples().iter().map(|p| p.hp / p.j).collect();
    let (a1, a2) = alpha_coframe(psi, &q)?;
    let (p1, p2) = coframe_partials(&psi.psi, &a1, &a2)?;
    let grid = *psi.grid();
    let mut out = Vec::with_capacity(grid.len());
    for k in 0..grid.len() {
        let two = 2.0 * psi.psi.values()[k];
        out.push(2.0 * p1.values()[k] * two.cos() + (2.0 * p2.values()[k] + 1.0) * two.sin());
    }
    ScalarField::new(grid, out)
}
