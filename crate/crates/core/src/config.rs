//! JSON run configuration.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::bonnet_solver::HInitialData;
use crate::error::{Error, Result};
use crate::forms2d::Grid;
use crate::lax_psi::BranchSpec;
use crate::q_family::QFamily;

/// Where ψ comes from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum PsiSpec {
    /// A closed-form branch.
    Branch(BranchSpec),
    /// Numerical integration from `psi0` at `(s_min, t_min)`.
    Integrate { psi0: f64 },
}

/// Pass/fail thresholds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// For identities that hold to rounding.
    pub algebraic: f64,
    /// Finite-difference residuals must stay below `fd_factor · h² · scale`.
    pub fd_factor: f64,
    /// Smallest observed convergence order when several grids are run.
    pub min_order: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            algebraic: 1e-10,
            fd_factor: 25.0,
            min_order: crate::convergence::MIN_ORDER,
        }
    }
}

fn default_substeps() -> usize {
    16
}

fn default_refine() -> u32 {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub family: QFamily,
    pub psi: PsiSpec,
    /// Initial data for H; `s0` must be an `s`-edge of the grid.
    pub h: HInitialData,
    pub grid: Grid,
    /// RK4 steps per grid spacing for the H equation.
    #[serde(default = "default_substeps")]
    pub profile_substeps: usize,
    /// Number of grids in a convergence study (each halves the spacing).
    #[serde(default = "default_refine")]
    pub refine: u32,
    #[serde(default)]
    pub tolerances: Tolerances,
    /// Deformation parameter at the base corner.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

/// Upper bound on `refine`; each level multiplies the work by four.
pub const MAX_REFINE: u32 = 5;

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        self.h.validate()?;
        self.family
            .guard()
            .check_interval(self.grid.s_min(), self.grid.s_max())?;
        let tol = 1e-12 * self.grid.s_max().abs().max(self.grid.s_min().abs()).max(1.0);
        if (self.h.s0 - self.grid.s_min()).abs() > tol && (self.h.s0 - self.grid.s_max()).abs() > tol {
            return Err(Error::Config(format!(
                "h.s0 = {} must equal grid.s_min or grid.s_max",
                self.h.s0
            )));
        }
        if self.profile_substeps == 0 {
            return Err(Error::Config("profile_substeps must be at least 1".into()));
        }
        if self.refine == 0 || self.refine > MAX_REFINE {
            return Err(Error::Config(format!("refine must be in 1..={MAX_REFINE}")));
        }
        let t = &self.tolerances;
        if !(t.algebraic > 0.0 && t.fd_factor > 0.0 && t.min_order > 0.0) {
            return Err(Error::Config("tolerances must be positive".into()));
        }
        if let PsiSpec::Integrate { psi0 } = self.psi {
            if !psi0.is_finite() {
                return Err(Error::Config("psi0 must be finite".into()));
            }
        }
        if let Some(t0) = self.t0 {
            if !t0.is_finite() {
                return Err(Error::Config("t0 must be finite".into()));
            }
        }
        Ok(())
    }

    /// The grids of a convergence study, coarsest first.
    pub fn grids(&self) -> Vec<Grid> {
        (0..self.refine).map(|k| self.grid.refined(k)).collect()
    }

    /// The rational demonstration surface on `[1, 2] × [0, 1]`.
    pub fn demo() -> Self {
        Self {
            family: QFamily::rational(1),
            psi: PsiSpec::Branch(BranchSpec {
                case: crate::lax_psi::PsiCase::RationalUpper,
                sigma: 0.0,
                eta: 0.0,
            }),
            h: HInitialData {
                s0: 1.0,
                h0: 0.0,
                h0p: 1.0,
                h0pp: 0.0,
                tau_c: 1.0,
            },
            grid: Grid::new(1.0, 2.0, 0.0, 1.0, 64, 64).expect("valid demo grid"),
            profile_substeps: default_substeps(),
            refine: default_refine(),
            tolerances: Tolerances::default(),
            t0: Some(1.0),
            out: None,
        }
    }
}
