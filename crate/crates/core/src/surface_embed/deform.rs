//! Isometric deformations preserving the mean curvature.
//!
//! The parameter `t = cot τ` solves the linear total differential equation
//! `dt = t α₁ − α₂`, which is integrable because `dα₁ = 0` and
//! `dα₂ = α₁∧α₂`. The deformed surface has coframe `R(τ)(ω₁, ω₂)`,
//! connection `ω₁₂ − dτ` and the same principal curvatures.

use serde::Serialize;

use crate::bonnet_solver::SurfaceProfile;
use crate::error::{Error, Result};
use crate::forms2d::{Grid, OneForm, ScalarField, SweepOrder};
use crate::lax_psi::PsiField;
use crate::ode::midpoint_value;

use super::coframes::{rotate_coframe, CoframeSet};
use super::frame::{
    fundamental_forms, integrate_frame_forms, metric_from_frame, metric_recovery, second_form_from_frame, FrameField,
    FrameForms, FrameSeed, FundamentalForms,
};

/// The deformation parameter `t` on the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct DeformationParam {
    pub t_field: ScalarField,
    pub t0: f64,
}

impl DeformationParam {
    /// `τ ∈ (0, π)` with `(sin τ, cos τ) ∝ (1, t)`.
    pub fn tau(&self) -> ScalarField {
        self.t_field.map(|t| 1.0f64.atan2(t))
    }

    /// `dτ = −dt/(1 + t²) = (α₂ − t α₁)/(1 + t²)`.
    pub fn dtau(&self, cf: &CoframeSet) -> OneForm {
        let w = self.t_field.map(|t| 1.0 / (1.0 + t * t));
        let tw = self.t_field.map(|t| -t / (1.0 + t * t));
        &cf.alpha2.scaled(&w) + &cf.alpha1.scaled(&tw)
    }
}

/// Blow-up guard for the deformation parameter.
pub const T_BLOW_UP: f64 = 1e12;

/// RK4 for `y' = a(x) y − b(x)` from node `k` to `k + 1` on sampled
/// coefficient lines, with midpoint coefficients interpolated.
fn linear_step(a: &[f64], b: &[f64], k: usize, h: f64, y: f64) -> f64 {
    let (a0, a1, am) = (a[k], a[k + 1], midpoint_value(a, k));
    let (b0, b1, bm) = (b[k], b[k + 1], midpoint_value(b, k));
    let k1 = a0 * y - b0;
    let k2 = am * (y + 0.5 * h * k1) - bm;
    let k3 = am * (y + 0.5 * h * k2) - bm;
    let k4 = a1 * (y + h * k3) - b1;
    y + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
}

/// Integrates `dt = t α₁ − α₂` from `t0` at `(s_min, t_min)` along the
/// `t`-edge and then along every `s`-line.
pub fn integrate_deformation(cf: &CoframeSet, t0: f64) -> Result<DeformationParam> {
    integrate_deformation_sweep(cf, t0, SweepOrder::TEdgeFirst)
}

/// [`integrate_deformation`] along an explicit path.
pub fn integrate_deformation_sweep(cf: &CoframeSet, t0: f64, order: SweepOrder) -> Result<DeformationParam> {
    if !t0.is_finite() {
        return Err(Error::InvalidParameter(format!("t0 must be finite, got {t0}")));
    }
    let g = *cf.grid();
    let (a1, a2) = (&cf.alpha1, &cf.alpha2);
    let s_line = |f: &ScalarField, j: usize| -> Vec<f64> { (0..g.ns()).map(|i| f.at(i, j)).collect() };
    let mut v = vec![0.0; g.len()];
    v[0] = t0;
    let check = |y: f64, i: usize, j: usize| -> Result<f64> {
        if y.is_finite() && y.abs() <= T_BLOW_UP {
            Ok(y)
        } else {
            Err(Error::Diverged {
                i,
                j,
                what: format!("|t| exceeded {T_BLOW_UP}"),
            })
        }
    };
    let t_pass = |v: &mut Vec<f64>, i: usize| -> Result<()> {
        let (a, b) = (a1.q().t_line(i), a2.q().t_line(i));
        for j in 1..g.nt() {
            let y = linear_step(a, b, j - 1, g.h_t(), v[g.index(i, j - 1)]);
            v[g.index(i, j)] = check(y, i, j)?;
        }
        Ok(())
    };
    let s_pass = |v: &mut Vec<f64>, j: usize| -> Result<()> {
        let (a, b) = (s_line(a1.p(), j), s_line(a2.p(), j));
        for i in 1..g.ns() {
            let y = linear_step(&a, &b, i - 1, g.h_s(), v[g.index(i - 1, j)]);
            v[g.index(i, j)] = check(y, i, j)?;
        }
        Ok(())
    };
    match order {
        SweepOrder::TEdgeFirst => {
            t_pass(&mut v, 0)?;
            for j in 0..g.nt() {
                s_pass(&mut v, j)?;
            }
        }
        SweepOrder::SEdgeFirst => {
            s_pass(&mut v, 0)?;
            for i in 0..g.ns() {
                t_pass(&mut v, i)?;
            }
        }
    }
    Ok(DeformationParam {
        t_field: ScalarField::new(g, v)?,
        t0,
    })
}

/// The deformed immersion and its data.
#[derive(Debug, Clone, PartialEq)]
pub struct DeformedSurface {
    pub frame: FrameField,
    pub forms: FundamentalForms,
    /// Rotation angle of the deformed principal frame, `ψ + τ`.
    pub psi: PsiField,
}

/// Frame forms of the deformed surface.
pub fn deformed_forms(cf: &CoframeSet, profile: &SurfaceProfile, dp: &DeformationParam) -> Result<FrameForms> {
    if dp.t_field.grid() != cf.grid() {
        return Err(Error::GridMismatch(
            "deformation parameter lives on a different grid".into(),
        ));
    }
    let g = *cf.grid();
    let (omega1, omega2) = rotate_coframe(&cf.omega1, &cf.omega2, &dp.tau());
    let k1 = profile.field(&g, |p| p.k1)?;
    let k2 = profile.field(&g, |p| p.k2)?;
    Ok(FrameForms {
        omega12: &cf.omega12 - &dp.dtau(cf),
        omega13: omega1.scaled(&k1),
        omega23: omega2.scaled(&k2),
        omega1,
        omega2,
    })
}

/// Integrates the deformed frame and evaluates its fundamental forms.
pub fn build_deformed_surface(
    profile: &SurfaceProfile,
    psi: &PsiField,
    dp: &DeformationParam,
    grid: &Grid,
    seed: &FrameSeed,
) -> Result<DeformedSurface> {
    let cf = CoframeSet::build(profile, psi, grid)?;
    let forms = deformed_forms(&cf, profile, dp)?;
    let frame = integrate_frame_forms(&forms, seed, SweepOrder::TEdgeFirst)?;
    let psi_star = PsiField::from_field(psi.field() + &dp.tau());
    let ff = fundamental_forms(profile, &psi_star)?;
    Ok(DeformedSurface {
        frame,
        forms: ff,
        psi: psi_star,
    })
}

/// How the deformed surface compares with the original.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DeformReport {
    pub t0: f64,
    /// Max interior deviation of the finite-difference metric of `M*` from `E(ds² + dt²)`.
    pub metric_deviation: f64,
    /// Max interior `|H* − H|` with `H*` from the finite-difference forms of `M*`.
    pub h_deviation: f64,
    /// Max interior `|L* − L|`, `L*` from the deformed frame.
    pub ii_deviation: f64,
}

pub fn compare_deformed(
    profile: &SurfaceProfile,
    original: &FundamentalForms,
    deformed: &DeformedSurface,
    t0: f64,
) -> Result<DeformReport> {
    let g = *deformed.frame.grid();
    let metric = metric_recovery(&deformed.frame, profile)?.max();
    let (gss, _, gtt) = metric_from_frame(&deformed.frame)?;
    let (l, _, n) = second_form_from_frame(&deformed.frame)?;
    let h_star = (&l + &n).zip_map(&(&gss + &gtt), |a, b| a / b);
    let h = profile.field(&g, |p| p.h)?;
    Ok(DeformReport {
        t0,
        metric_deviation: metric,
        h_deviation: (&h_star - &h).max_abs_interior(),
        ii_deviation: (&l - &original.l).max_abs_interior(),
    })
}
