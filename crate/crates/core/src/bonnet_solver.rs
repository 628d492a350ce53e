//! The mean-curvature profile H(s) and the quantities derived from it.
//!
//! With `τ` a positive constant, H solves
//!
//! ```text
//! (H''/H')' = 2Q² (1 + τ H²/H') − 2τ H'
//! ```
//!
//! and determines `J = H'/Q`, `E = τQ²/H'`, `e = √E`, `A = Q/e`,
//! `B = (log A)'/Q` and the curvatures `H ± J`. Everything is a function of
//! `s` alone.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forms2d::{diff2_line, diff_line, Grid, ScalarField};
use crate::ode::{rk4_step, step_count};
use crate::q_family::QFamily;

/// Initial data `(H, H', H'')` at `s0` plus the constant `τ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HInitialData {
    pub s0: f64,
    pub h0: f64,
    pub h0p: f64,
    pub h0pp: f64,
    pub tau_c: f64,
}

impl HInitialData {
    pub fn new(s0: f64, h0: f64, h0p: f64, h0pp: f64, tau_c: f64) -> Result<Self> {
        let d = Self {
            s0,
            h0,
            h0p,
            h0pp,
            tau_c,
        };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        if ![self.s0, self.h0, self.h0p, self.h0pp, self.tau_c]
            .iter()
            .all(|v| v.is_finite())
        {
            return Err(Error::InvalidParameter("initial data must be finite".into()));
        }
        if !(self.h0p > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "H'(s0) must be positive, got {}",
                self.h0p
            )));
        }
        if !(self.tau_c > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "tau_c must be positive, got {}",
                self.tau_c
            )));
        }
        Ok(())
    }
}

/// All profile quantities at one `s`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProfileSample {
    pub s: f64,
    pub h: f64,
    pub hp: f64,
    pub hpp: f64,
    pub q: f64,
    pub qp: f64,
    pub j: f64,
    /// Conformal factor `E`.
    pub big_e: f64,
    /// `e = √E`.
    pub e: f64,
    pub big_a: f64,
    pub b: f64,
    pub c: f64,
    /// `(log e)'`.
    pub dlog_e: f64,
    /// Principal curvatures `H + J` and `H − J`.
    pub k1: f64,
    pub k2: f64,
}

impl ProfileSample {
    /// Derives the sample from the state `(H, H', H'')`.
    pub fn from_state(fam: &QFamily, tau_c: f64, s: f64, h: f64, hp: f64, hpp: f64) -> Result<Self> {
        let d = fam.derivatives(s)?;
        let (c, _) = fam.raw_c(s);
        let j = hp / d.q;
        let big_e = tau_c * d.q * d.q / hp;
        let e = big_e.sqrt();
        Ok(Self {
            s,
            h,
            hp,
            hpp,
            q: d.q,
            qp: d.qp,
            j,
            big_e,
            e,
            big_a: d.q / e,
            // (log A)' = H''/(2H') since A² = H'/τ
            b: hpp / (2.0 * hp * d.q),
            c,
            dlog_e: d.qp / d.q - hpp / (2.0 * hp),
            k1: h + j,
            k2: h - j,
        })
    }

    /// Gaussian curvature `H² − J²`.
    pub fn gauss_k(&self) -> f64 {
        self.k1 * self.k2
    }
}

/// The sampled profile on an ascending, uniformly spaced set of `s` values.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceProfile {
    family: QFamily,
    tau_c: f64,
    samples: Vec<ProfileSample>,
}

impl SurfaceProfile {
    /// Builds a profile and checks its invariants.
    pub fn new(family: QFamily, tau_c: f64, samples: Vec<ProfileSample>) -> Result<Self> {
        let p = Self { family, tau_c, samples };
        p.validate()?;
        Ok(p)
    }

    /// Positivity, `E·J = τQ` and `A·e = Q` at every sample.
    pub fn validate(&self) -> Result<()> {
        if self.samples.len() < 2 {
            return Err(Error::InvalidParameter("profile needs at least two samples".into()));
        }
        for p in &self.samples {
            let positive = [p.hp, p.j, p.big_e, p.e, p.big_a, p.q]
                .iter()
                .all(|&v| v > 0.0 && v.is_finite());
            if !positive {
                return Err(Error::Consistency(format!(
                    "non-positive profile quantity at s = {}",
                    p.s
                )));
            }
            let rel = |a: f64, b: f64| (a - b).abs() / b.abs().max(f64::MIN_POSITIVE);
            if rel(p.big_e * p.j, self.tau_c * p.q) > 1e-10 || rel(p.big_a * p.e, p.q) > 1e-10 {
                return Err(Error::Consistency(format!(
                    "E·J = τQ or A·e = Q violated at s = {}",
                    p.s
                )));
            }
        }
        Ok(())
    }

    pub fn family(&self) -> QFamily {
        self.family
    }

    pub fn tau_c(&self) -> f64 {
        self.tau_c
    }

    pub fn samples(&self) -> &[ProfileSample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Sample spacing.
    pub fn step(&self) -> f64 {
        self.samples[1].s - self.samples[0].s
    }

    pub fn column(&self, f: impl Fn(&ProfileSample) -> f64) -> Vec<f64> {
        self.samples.iter().map(f).collect()
    }

    /// Copy with every sample passed through `f`, skipping validation
    /// (used to build negative controls).
    pub fn map_samples(&self, f: impl Fn(&ProfileSample) -> ProfileSample) -> Self {
        Self {
            samples: self.samples.iter().map(f).collect(),
            ..*self
        }
    }

    /// Checks that sample `i` sits on grid column `i`.
    pub fn check_aligned(&self, grid: &Grid) -> Result<()> {
        if self.samples.len() != grid.ns() {
            return Err(Error::Misaligned(format!(
                "{} samples for {} grid columns",
                self.samples.len(),
                grid.ns()
            )));
        }
        let tol = 1e-12 * (grid.s_max() - grid.s_min()).abs().max(grid.s_max().abs());
        for (i, p) in self.samples.iter().enumerate() {
            if (p.s - grid.s(i)).abs() > tol {
                return Err(Error::Misaligned(format!(
                    "sample {i} at s = {} but node at {}",
                    p.s,
                    grid.s(i)
                )));
            }
        }
        Ok(())
    }

    /// Broadcasts one profile column to a grid field.
    pub fn field(&self, grid: &Grid, f: impl Fn(&ProfileSample) -> f64) -> Result<ScalarField> {
        self.check_aligned(grid)?;
        ScalarField::from_s_samples(*grid, &self.column(f))
    }

    /// CSV with header `s,H,Hp,J,E,A,B,C,Q`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "s,H,Hp,J,E,A,B,C,Q")?;
        for p in &self.samples {
            let row = [p.s, p.h, p.hp, p.j, p.big_e, p.big_a, p.b, p.c, p.q];
            let cells: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
            writeln!(w, "{}", cells.join(","))?;
        }
        Ok(())
    }
}

/// `H'''` isolated from the H equation.
pub fn h_third_derivative(s: f64, h: f64, hp: f64, hpp: f64, fam: &QFamily, tau_c: f64) -> Result<f64> {
    if hp == 0.0 {
        return Err(Error::LeftBonnetRegime { last_valid_s: s });
    }
    let q = fam.q(s)?;
    Ok(third(q, tau_c, h, hp, hpp))
}

fn third(q: f64, tau_c: f64, h: f64, hp: f64, hpp: f64) -> f64 {
    hpp * hpp / hp + hp * (2.0 * q * q * (1.0 + tau_c * h * h / hp) - 2.0 * tau_c * hp)
}

/// `(H'''H' − H''²)/H'² + 2τH' − 2Q²(1 + τH²/H')`.
pub fn h_ode_residual(s: f64, h: f64, hp: f64, hpp: f64, hppp: f64, fam: &QFamily, tau_c: f64) -> Result<f64> {
    if hp == 0.0 {
        return Err(Error::LeftBonnetRegime { last_valid_s: s });
    }
    let q = fam.q(s)?;
    Ok((hppp * hp - hpp * hpp) / (hp * hp) + 2.0 * tau_c * hp - 2.0 * q * q * (1.0 + tau_c * h * h / hp))
}

/// Blow-up guard for [`integrate_h`].
pub const H_BLOW_UP: f64 = 1e8;

/// RK4 on `(H, H', H'')` from `ics.s0` to `s1`, keeping a sample after every
/// `keep_every` steps. Samples are returned in ascending `s`.
fn integrate_states(
    ics: &HInitialData,
    fam: &QFamily,
    s1: f64,
    n: usize,
    keep_every: usize,
) -> Result<Vec<(f64, [f64; 3])>> {
    ics.validate()?;
    fam.guard().check_interval(ics.s0, s1)?;
    let tau = ics.tau_c;
    let rhs = |s: f64, y: &[f64; 3]| {
        let q = fam.raw(s).q;
        [y[1], y[2], third(q, tau, y[0], y[1], y[2])]
    };
    let h = (s1 - ics.s0) / n as f64;
    let mut y = [ics.h0, ics.h0p, ics.h0pp];
    let mut out = vec![(ics.s0, y)];
    let mut last_valid = ics.s0;
    for k in 0..n {
        let s = ics.s0 + k as f64 * h;
        y = rk4_step(&rhs, s, &y, h);
        let s_next = if k + 1 == n { s1 } else { s + h };
        if y[1].is_finite() && y[1] <= 0.0 {
            return Err(Error::LeftBonnetRegime {
                last_valid_s: last_valid,
            });
        }
        if !y.iter().all(|v| v.is_finite() && v.abs() <= H_BLOW_UP) {
            return Err(Error::BlowUp {
                s: s_next,
                what: format!("|(H, H', H'')| exceeded {H_BLOW_UP}"),
            });
        }
        last_valid = s_next;
        if (k + 1) % keep_every == 0 {
            out.push((s_next, y));
        }
    }
    if s1 < ics.s0 {
        out.reverse();
    }
    Ok(out)
}

fn build_profile(ics: &HInitialData, fam: QFamily, states: Vec<(f64, [f64; 3])>) -> Result<SurfaceProfile> {
    let samples = states
        .into_iter()
        .map(|(s, y)| ProfileSample::from_state(&fam, ics.tau_c, s, y[0], y[1], y[2]))
        .collect::<Result<Vec<_>>>()?;
    SurfaceProfile::new(fam, ics.tau_c, samples)
}

/// Integrates the H equation from `ics.s0` to `s1` with (at most) the given
/// step and samples the profile after every step.
pub fn integrate_h(ics: HInitialData, fam: QFamily, s1: f64, step: f64) -> Result<SurfaceProfile> {
    if !(step > 0.0) || !step.is_finite() || !s1.is_finite() {
        return Err(Error::InvalidParameter(format!("step must be positive, got {step}")));
    }
    if s1 == ics.s0 {
        return Err(Error::InvalidParameter("empty integration interval".into()));
    }
    let n = step_count(s1 - ics.s0, step);
    let states = integrate_states(&ics, &fam, s1, n, 1)?;
    build_profile(&ics, fam, states)
}

/// Profile sampled at the `s`-nodes of `grid`, with `substeps` RK4 steps per
/// grid spacing. `ics.s0` must be `grid.s_min()` or `grid.s_max()`.
pub fn profile_on_grid(ics: HInitialData, fam: QFamily, grid: &Grid, substeps: usize) -> Result<SurfaceProfile> {
    if substeps == 0 {
        return Err(Error::InvalidParameter("substeps must be at least 1".into()));
    }
    let tol = 1e-12 * grid.s_max().abs().max(grid.s_min().abs()).max(1.0);
    let s1 = if (ics.s0 - grid.s_min()).abs() <= tol {
        grid.s_max()
    } else if (ics.s0 - grid.s_max()).abs() <= tol {
        grid.s_min()
    } else {
        return Err(Error::InvalidParameter(format!(
            "initial point s0 = {} must be an s-edge of the grid [{}, {}]",
            ics.s0,
            grid.s_min(),
            grid.s_max()
        )));
    };
    let n = (grid.ns() - 1) * substeps;
    let mut states = integrate_states(&ics, &fam, s1, n, substeps)?;
    // pin sample abscissae to the grid nodes
    for (i, st) in states.iter_mut().enumerate() {
        st.0 = grid.s(i);
    }
    let profile = build_profile(&ics, fam, states)?;
    profile.check_aligned(grid)?;
    Ok(profile)
}

fn require_samples(profile: &SurfaceProfile) -> Result<()> {
    if profile.len() < 5 {
        return Err(Error::InvalidParameter(format!(
            "need at least 5 samples, got {}",
            profile.len()
        )));
    }
    Ok(())
}

fn max_interior(v: &[f64]) -> f64 {
    v[1..v.len() - 1].iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Max interior `|(log E)'' − 2Q² + (H''/H')'|` with finite differences.
pub fn gauss_s_residual(profile: &SurfaceProfile) -> Result<f64> {
    require_samples(profile)?;
    let h = profile.step();
    let log_e = diff2_line(&profile.column(|p| p.big_e.ln()), h);
    let ratio = diff_line(&profile.column(|p| p.hpp / p.hp), h);
    let r: Vec<f64> = profile
        .samples()
        .iter()
        .enumerate()
        .map(|(k, p)| log_e[k] - 2.0 * p.q * p.q + ratio[k])
        .collect();
    Ok(max_interior(&r))
}

/// The five relations satisfied by `(A, B, C, H, J)` along `s`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IdealResiduals {
    /// `(log A)' − QB`
    pub log_a: f64,
    /// `B' − Q(BC + 1 + (H² − J²)/A²)`
    pub b: f64,
    /// `C' − Q(C² − 1)` (analytic `C'`)
    pub c: f64,
    /// `H' − QJ`
    pub h: f64,
    /// `(log J)' − Q(2B + C)`
    pub log_j: f64,
}

impl IdealResiduals {
    pub fn max(&self) -> f64 {
        [self.log_a, self.b, self.c, self.h, self.log_j]
            .into_iter()
            .fold(0.0, f64::max)
    }

    pub fn named(&self) -> [(&'static str, f64); 5] {
        [
            ("ideal_log_a", self.log_a),
            ("ideal_b", self.b),
            ("ideal_c", self.c),
            ("ideal_h", self.h),
            ("ideal_log_j", self.log_j),
        ]
    }
}

/// Max interior residuals of the five ideal relations, derivatives by finite
/// differences along the samples.
pub fn ideal_residuals(profile: &SurfaceProfile) -> Result<IdealResiduals> {
    require_samples(profile)?;
    let h = profile.step();
    let sm = profile.samples();
    let fam = profile.family();
    let d_log_a = diff_line(&profile.column(|p| p.big_a.ln()), h);
    let d_b = diff_line(&profile.column(|p| p.b), h);
    let d_log_j = diff_line(&profile.column(|p| p.j.ln()), h);
    let collect = |f: &dyn Fn(usize, &ProfileSample) -> f64| -> Vec<f64> {
        sm.iter().enumerate().map(|(k, p)| f(k, p)).collect()
    };
    let r_log_a = collect(&|k, p| d_log_a[k] - p.q * p.b);
    let r_b = collect(&|k, p| d_b[k] - p.q * (p.b * p.c + 1.0 + p.gauss_k() / (p.big_a * p.big_a)));
    let r_c = collect(&|_, p| {
        let (c, cp) = fam.raw_c(p.s);
        cp - p.q * (c * c - 1.0)
    });
    let r_h = collect(&|_, p| p.hp - p.q * p.j);
    let r_log_j = collect(&|k, p| d_log_j[k] - p.q * (2.0 * p.b + p.c));
    Ok(IdealResiduals {
        log_a: max_interior(&r_log_a),
        b: max_interior(&r_b),
        c: r_c.iter().fold(0.0, |m, x| m.max(x.abs())),
        h: r_h.iter().fold(0.0, |m, x| m.max(x.abs())),
        log_j: max_interior(&r_log_j),
    })
}

/// Max interior `|e'/e² + A(B + C)|` with finite-difference `e'`.
pub fn geodesic_curvature_residual(profile: &SurfaceProfile) -> Result<f64> {
    require_samples(profile)?;
    let de = diff_line(&profile.column(|p| p.e), profile.step());
    let r: Vec<f64> = profile
        .samples()
        .iter()
        .enumerate()
        .map(|(k, p)| de[k] / (p.e * p.e) + p.big_a * (p.b + p.c))
        .collect();
    Ok(max_interior(&r))
}

/// Max interior `|H''' from differences − H''' from the equation|`, where the
/// latter is inserted into [`h_ode_residual`] with a finite-difference `H'''`.
pub fn h_ode_profile_residual(profile: &SurfaceProfile) -> Result<f64> {
    require_samples(profile)?;
    let hppp = diff_line(&profile.column(|p| p.hpp), profile.step());
    let fam = profile.family();
    let r = profile
        .samples()
        .iter()
        .enumerate()
        .map(|(k, p)| h_ode_residual(p.s, p.h, p.hp, p.hpp, hppp[k], &fam, profile.tau_c()))
        .collect::<Result<Vec<_>>>()?;
    Ok(max_interior(&r))
}
