//! Q → ψ → H → coframes → immersion → deformation on one grid.

use crate::bonnet_solver::{profile_on_grid, SurfaceProfile};
use crate::config::{PsiSpec, RunConfig};
use crate::error::Result;
use crate::forms2d::{Grid, SweepOrder};
use crate::lax_psi::{integrate_lax, PsiBranch, PsiField};
use crate::q_family::QFamily;
use crate::surface_embed::{
    build_deformed_surface, compare_deformed, fundamental_forms, integrate_deformation, integrate_frame_forms,
    CoframeSet, DeformReport, DeformationParam, DeformedSurface, FrameField, FrameForms, FrameSeed, FundamentalForms,
};

/// The intrinsic data of a configuration on one grid.
#[derive(Debug, Clone)]
pub struct Pipeline {
    pub family: QFamily,
    pub grid: Grid,
    pub psi: PsiField,
    pub profile: SurfaceProfile,
    pub coframes: CoframeSet,
}

/// Deformed surface together with its parameter and comparison report.
#[derive(Debug, Clone)]
pub struct Deformation {
    pub param: DeformationParam,
    pub surface: DeformedSurface,
    pub report: DeformReport,
}

/// ψ on `grid` as requested by `spec`.
pub fn psi_for(family: QFamily, spec: PsiSpec, grid: Grid) -> Result<PsiField> {
    match spec {
        PsiSpec::Branch(b) => PsiField::from_branch(PsiBranch::from_spec(b, family)?, grid),
        PsiSpec::Integrate { psi0 } => integrate_lax(family, grid, psi0),
    }
}

impl Pipeline {
    pub fn build(cfg: &RunConfig, grid: Grid) -> Result<Self> {
        let psi = psi_for(cfg.family, cfg.psi, grid)?;
        let profile = profile_on_grid(cfg.h, cfg.family, &grid, cfg.profile_substeps)?;
        let coframes = CoframeSet::build(&profile, &psi, &grid)?;
        Ok(Self {
            family: cfg.family,
            grid,
            psi,
            profile,
            coframes,
        })
    }

    pub fn frame_forms(&self) -> Result<FrameForms> {
        FrameForms::from_coframes(&self.coframes, &self.profile)
    }

    pub fn frame(&self, order: SweepOrder) -> Result<FrameField> {
        integrate_frame_forms(&self.frame_forms()?, &FrameSeed::default(), order)
    }

    pub fn forms(&self) -> Result<FundamentalForms> {
        fundamental_forms(&self.profile, &self.psi)
    }

    pub fn deform(&self, t0: f64) -> Result<Deformation> {
        let param = integrate_deformation(&self.coframes, t0)?;
        let surface = build_deformed_surface(&self.profile, &self.psi, &param, &self.grid, &FrameSeed::default())?;
        let report = compare_deformed(&self.profile, &self.forms()?, &surface, t0)?;
        Ok(Deformation { param, surface, report })
    }
}
