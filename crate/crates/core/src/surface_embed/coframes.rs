//! Coframes and connection forms on the isothermal grid, and the identities
//! they satisfy.

use serde::Serialize;

use crate::bonnet_solver::SurfaceProfile;
use crate::error::{Error, Result};
use crate::forms2d::{d_oneform, d_scalar, hodge, wedge, Grid, OneForm, ScalarField, TwoForm};
use crate::lax_psi::PsiField;

/// Every coframe used by the construction, sampled on one grid.
#[derive(Debug, Clone, PartialEq)]
pub struct CoframeSet {
    pub omega1: OneForm,
    pub omega2: OneForm,
    pub omega12: OneForm,
    pub theta1: OneForm,
    pub theta2: OneForm,
    pub alpha1: OneForm,
    pub alpha2: OneForm,
    pub xi1: OneForm,
    pub xi2: OneForm,
    pub xi12: OneForm,
    pub u: ScalarField,
    pub v: ScalarField,
}

fn combo(a: &ScalarField, w1: &OneForm, b: &ScalarField, w2: &OneForm) -> OneForm {
    &w1.scaled(a) + &w2.scaled(b)
}

impl CoframeSet {
    /// `ω₁ = e(cos ψ ds − sin ψ dt)`, `ω₂ = *ω₁`, `ω₁₂ = (log e)' dt − dψ`,
    /// `(u, v) = A(cos ψ, sin ψ)` and the θ, α, ξ coframes derived from them.
    pub fn build(profile: &SurfaceProfile, psi: &PsiField, grid: &Grid) -> Result<Self> {
        if psi.grid() != grid {
            return Err(Error::GridMismatch("psi field lives on a different grid".into()));
        }
        profile.check_aligned(grid)?;
        let g = *grid;
        let e = profile.field(&g, |p| p.e)?;
        let big_a = profile.field(&g, |p| p.big_a)?;
        let dlog_e = profile.field(&g, |p| p.dlog_e)?;
        let cos = psi.field().map(f64::cos);
        let sin = psi.field().map(f64::sin);
        let (ds, dt) = (OneForm::ds(g), OneForm::dt(g));

        let omega1 = OneForm::new(&e * &cos, -&(&e * &sin))?;
        let omega2 = OneForm::new(&e * &sin, &e * &cos)?;
        let dpsi = d_scalar(psi.field())?;
        let omega12 = &dt.scaled(&dlog_e) - &dpsi;

        let u = &big_a * &cos;
        let v = &big_a * &sin;
        let neg_v = -&v;
        let theta1 = combo(&u, &omega1, &v, &omega2);
        let theta2 = combo(&neg_v, &omega1, &u, &omega2);
        let alpha1 = combo(&u, &omega1, &neg_v, &omega2);
        let alpha2 = combo(&v, &omega1, &u, &omega2);
        let xi1 = ds.scaled(&e);
        let xi2 = dt.scaled(&e);
        let xi12 = &dpsi + &omega12;
        Ok(Self {
            omega1,
            omega2,
            omega12,
            theta1,
            theta2,
            alpha1,
            alpha2,
            xi1,
            xi2,
            xi12,
            u,
            v,
        })
    }

    pub fn grid(&self) -> &Grid {
        self.omega1.grid()
    }
}

/// The second-fundamental-form connection `(ω₁₃, ω₂₃) = ((H + J) ω₁, (H − J) ω₂)`.
pub fn normal_connection(cf: &CoframeSet, profile: &SurfaceProfile) -> Result<(OneForm, OneForm)> {
    let g = *cf.grid();
    let k1 = profile.field(&g, |p| p.k1)?;
    let k2 = profile.field(&g, |p| p.k2)?;
    Ok((cf.omega1.scaled(&k1), cf.omega2.scaled(&k2)))
}

/// Max interior residuals of the structure equations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StructureResiduals {
    /// `dω₁ − ω₁₂∧ω₂`
    pub d_omega1: f64,
    /// `dω₂ − ω₁∧ω₁₂`
    pub d_omega2: f64,
    /// `dω₁₃ − ω₁₂∧ω₂₃`
    pub codazzi_omega13: f64,
    /// `dω₂₃ − ω₁₃∧ω₁₂`
    pub codazzi_omega23: f64,
    /// `dω₁₂ + K ω₁∧ω₂`
    pub gauss_omega12: f64,
}

impl StructureResiduals {
    pub fn named(&self) -> [(&'static str, f64); 5] {
        [
            ("structure_d_omega1", self.d_omega1),
            ("structure_d_omega2", self.d_omega2),
            ("structure_codazzi_omega13", self.codazzi_omega13),
            ("structure_codazzi_omega23", self.codazzi_omega23),
            ("structure_gauss_omega12", self.gauss_omega12),
        ]
    }
}

/// Structure residuals with Gaussian curvature `K = H² − J²`.
pub fn structure_residuals(cf: &CoframeSet, profile: &SurfaceProfile) -> Result<StructureResiduals> {
    let k = profile.field(cf.grid(), |p| p.gauss_k())?;
    structure_residuals_with_k(cf, profile, &k)
}

/// As [`structure_residuals`] with an explicit curvature field in the Gauss
/// equation (negative controls pass a corrupted one).
pub fn structure_residuals_with_k(
    cf: &CoframeSet,
    profile: &SurfaceProfile,
    k: &ScalarField,
) -> Result<StructureResiduals> {
    let (o13, o23) = normal_connection(cf, profile)?;
    let m = |a: TwoForm, b: TwoForm| (&a - &b).max_abs_interior();
    let area = wedge(&cf.omega1, &cf.omega2)?;
    Ok(StructureResiduals {
        d_omega1: m(d_oneform(&cf.omega1), wedge(&cf.omega12, &cf.omega2)?),
        d_omega2: m(d_oneform(&cf.omega2), wedge(&cf.omega1, &cf.omega12)?),
        codazzi_omega13: m(d_oneform(&o13), wedge(&cf.omega12, &o23)?),
        codazzi_omega23: m(d_oneform(&o23), wedge(&o13, &cf.omega12)?),
        gauss_omega12: (&d_oneform(&cf.omega12) + &area.scaled(k)).max_abs_interior(),
    })
}

/// `(max |dH − Jθ₁|, max |d log J − α₁ − 2 *ω₁₂|)` over interior nodes.
pub fn codazzi_summary_residuals(cf: &CoframeSet, profile: &SurfaceProfile) -> Result<(f64, f64)> {
    let g = *cf.grid();
    let h = profile.field(&g, |p| p.h)?;
    let j = profile.field(&g, |p| p.j)?;
    let dh = &d_scalar(&h)? - &cf.theta1.scaled(&j);
    let dlogj = &(&d_scalar(&j.map(f64::ln))? - &cf.alpha1) - &hodge(&cf.omega12).times(2.0);
    Ok((dh.max_abs_interior(), dlogj.max_abs_interior()))
}

/// Max interior `|dθ₁|`.
pub fn d_theta1_residual(cf: &CoframeSet) -> f64 {
    d_oneform(&cf.theta1).max_abs_interior()
}

/// `(max |dα₁|, max |dα₂ − α₁∧α₂|)`.
pub fn chern_residuals(cf: &CoframeSet) -> Result<(f64, f64)> {
    let r1 = d_oneform(&cf.alpha1).max_abs_interior();
    let r2 = (&d_oneform(&cf.alpha2) - &wedge(&cf.alpha1, &cf.alpha2)?).max_abs_interior();
    Ok((r1, r2))
}

/// Max `|d *ω₁₂|` (minus the Laplacian of ψ) at least two nodes from the
/// boundary. The derivative is nested, and a central difference taken next to
/// a one-sided boundary value is only first order.
pub fn d_star_omega12_residual(cf: &CoframeSet) -> f64 {
    d_oneform(&hodge(&cf.omega12)).max_abs_interior_margin(NESTED_MARGIN)
}

/// Boundary margin for residuals built from nested first differences.
pub const NESTED_MARGIN: usize = 2;

/// `θ₁₂ = −CAξ₂`.
pub fn theta12(cf: &CoframeSet, profile: &SurfaceProfile) -> Result<OneForm> {
    let ca = profile.field(cf.grid(), |p| -p.c * p.big_a)?;
    Ok(cf.xi2.scaled(&ca))
}

/// Max interior `|d *θ₁₂|`.
pub fn d_star_theta12_residual(cf: &CoframeSet, profile: &SurfaceProfile) -> Result<f64> {
    Ok(d_oneform(&hodge(&theta12(cf, profile)?)).max_abs_interior())
}

/// `(max |θ₁₂ − dψ − ω₁₂ − *d log A|, max |*θ₁₂ − Cθ₁|)`.
pub fn theta12_residual(cf: &CoframeSet, psi: &PsiField, profile: &SurfaceProfile) -> Result<(f64, f64)> {
    let g = *cf.grid();
    let t12 = theta12(cf, profile)?;
    let log_a = profile.field(&g, |p| p.big_a.ln())?;
    let dpsi = d_scalar(psi.field())?;
    let r1 = &(&(&t12 - &dpsi) - &cf.omega12) - &hodge(&d_scalar(&log_a)?);
    let c = profile.field(&g, |p| p.c)?;
    let r2 = &hodge(&t12) - &cf.theta1.scaled(&c);
    Ok((r1.max_abs_interior(), r2.max_abs()))
}

/// Max interior `|dψ + ½ sin 2ψ θ₁ + ½(C + cos 2ψ) θ₂|`.
pub fn dpsi_theta_residual(cf: &CoframeSet, psi: &PsiField, profile: &SurfaceProfile) -> Result<f64> {
    let g = *cf.grid();
    let c = profile.field(&g, |p| p.c)?;
    let half_sin = psi.field().map(|v| 0.5 * (2.0 * v).sin());
    let half_c_cos = c.zip_map(psi.field(), |c, v| 0.5 * (c + (2.0 * v).cos()));
    let r = &(&d_scalar(psi.field())? + &cf.theta1.scaled(&half_sin)) + &cf.theta2.scaled(&half_c_cos);
    Ok(r.max_abs_interior())
}

/// Max `|ξ₁₂ + (C + B) A ξ₂|`.
pub fn xi12_residual(cf: &CoframeSet, profile: &SurfaceProfile) -> Result<f64> {
    let cba = profile.field(cf.grid(), |p| (p.c + p.b) * p.big_a)?;
    Ok((&cf.xi12 + &cf.xi2.scaled(&cba)).max_abs_interior())
}

/// Max pointwise deviation in the algebraic coframe identities:
/// `*ω₁ = ω₂`, `θ = (Q ds, Q dt)`, `α₁ = Q(cos 2ψ, −sin 2ψ)`,
/// `α₂ = Q(sin 2ψ, cos 2ψ)` and `u² + v² = A²`.
pub fn coframe_identity_residual(cf: &CoframeSet, psi: &PsiField, profile: &SurfaceProfile) -> Result<f64> {
    let g = *cf.grid();
    let q = profile.field(&g, |p| p.q)?;
    let a2 = profile.field(&g, |p| p.big_a * p.big_a)?;
    let c2 = &q * &psi.field().map(|v| (2.0 * v).cos());
    let s2 = &q * &psi.field().map(|v| (2.0 * v).sin());
    let al1 = OneForm::new(c2.clone(), -&s2)?;
    let al2 = OneForm::new(s2, c2)?;
    let rel = |w: OneForm, scale: f64| w.max_abs() / scale.max(1.0);
    let qmax = q.max_abs();
    let r = [
        rel(&hodge(&cf.omega1) - &cf.omega2, cf.omega1.max_abs()),
        rel(&cf.theta1 - &OneForm::ds(g).scaled(&q), qmax),
        rel(&cf.theta2 - &OneForm::dt(g).scaled(&q), qmax),
        rel(&cf.alpha1 - &al1, qmax),
        rel(&cf.alpha2 - &al2, qmax),
        (&(&(&cf.u * &cf.u) + &(&cf.v * &cf.v)) - &a2).max_abs() / a2.max_abs().max(1.0),
    ];
    Ok(r.into_iter().fold(0.0, f64::max))
}

/// Connection form of the coframe `(ω₁, ω₂)` recovered node by node from
/// `dω₁ = ω₁₂∧ω₂`, `dω₂ = ω₁∧ω₁₂`. With `ω₁₂ = p ds + q dt` these are two
/// linear equations in `(p, q)` with determinant `ω₁∧ω₂`.
pub fn recover_connection(omega1: &OneForm, omega2: &OneForm) -> Result<OneForm> {
    let g = *omega1.grid();
    let d1 = d_oneform(omega1);
    let d2 = d_oneform(omega2);
    let mut p = Vec::with_capacity(g.len());
    let mut q = Vec::with_capacity(g.len());
    for i in 0..g.ns() {
        for j in 0..g.nt() {
            let (a1, b1) = omega1.at(i, j);
            let (a2, b2) = omega2.at(i, j);
            let k = g.index(i, j);
            let (r1, r2) = (d1.r().values()[k], d2.r().values()[k]);
            // r1 = p b2 − q a2 ; r2 = a1 q − b1 p
            let det = a1 * b2 - a2 * b1;
            let scale = a1.abs().max(b1.abs()).max(a2.abs()).max(b2.abs());
            if !(det.abs() >= 1e-12 * scale * scale) {
                return Err(Error::SingularCoframe { i, j, det });
            }
            p.push((r1 * a1 + r2 * a2) / det);
            q.push((r1 * b1 + r2 * b2) / det);
        }
    }
    OneForm::new(ScalarField::new(g, p)?, ScalarField::new(g, q)?)
}

/// Rotates the coframe by `τ`: `ω₁* = cos τ ω₁ − sin τ ω₂`,
/// `ω₂* = sin τ ω₁ + cos τ ω₂`.
pub fn rotate_coframe(omega1: &OneForm, omega2: &OneForm, tau: &ScalarField) -> (OneForm, OneForm) {
    let c = tau.map(f64::cos);
    let s = tau.map(f64::sin);
    let ns = -&s;
    (combo(&c, omega1, &ns, omega2), combo(&s, omega1, &c, omega2))
}

/// Max interior deviation of the recovered connection of the rotated coframe
/// from `ω₁₂ − dτ`.
pub fn rotation_transform_residual(cf: &CoframeSet, tau_field: &ScalarField) -> Result<f64> {
    let (w1, w2) = rotate_coframe(&cf.omega1, &cf.omega2, tau_field);
    let recovered = recover_connection(&w1, &w2)?;
    let expected = &cf.omega12 - &d_scalar(tau_field)?;
    Ok((&recovered - &expected).max_abs_interior())
}

/// Max interior deviation of the recovered connection of `(λω₁, λω₂)` from
/// `ω₁₂ + *d log λ`.
pub fn scaling_transform_residual(cf: &CoframeSet, log_scale: &ScalarField) -> Result<f64> {
    let lambda = log_scale.map(f64::exp);
    let recovered = recover_connection(&cf.omega1.scaled(&lambda), &cf.omega2.scaled(&lambda))?;
    let expected = &cf.omega12 + &hodge(&d_scalar(log_scale)?);
    Ok((&recovered - &expected).max_abs_interior())
}

/// Recovered connection of `(ω₁, ω₂)` against the stored `ω₁₂`.
pub fn connection_recovery_residual(cf: &CoframeSet) -> Result<f64> {
    let recovered = recover_connection(&cf.omega1, &cf.omega2)?;
    Ok((&recovered - &cf.omega12).max_abs_interior())
}
