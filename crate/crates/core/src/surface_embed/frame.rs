//! Moving-frame integration, fundamental forms and the checks that compare
//! the immersed surface against the intrinsic data.

use nalgebra::{Matrix3, Rotation3, Vector3};
use serde::Serialize;

use crate::bonnet_solver::SurfaceProfile;
use crate::error::{Error, Result};
use crate::forms2d::{d_scalar, wedge, Grid, OneForm, ScalarField, SweepOrder};
use crate::lax_psi::PsiField;

use super::coframes::{normal_connection, CoframeSet};

/// Position and orthonormal frame at the base corner `(s_min, t_min)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameSeed {
    pub x: Vector3<f64>,
    pub e1: Vector3<f64>,
    pub e2: Vector3<f64>,
    pub e3: Vector3<f64>,
}

impl Default for FrameSeed {
    fn default() -> Self {
        Self {
            x: Vector3::zeros(),
            e1: Vector3::x(),
            e2: Vector3::y(),
            e3: Vector3::z(),
        }
    }
}

impl FrameSeed {
    /// Rejects seeds that are not orthonormal and right-handed to `1e-6`.
    pub fn validate(&self) -> Result<()> {
        let f = self.matrix();
        let dev = (f * f.transpose() - Matrix3::identity()).amax();
        let hand = (self.e1.cross(&self.e2) - self.e3).amax();
        if !(dev <= 1e-6 && hand <= 1e-6) || !self.x.iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "seed frame is not orthonormal and right-handed (deviation {dev:e}, {hand:e})"
            )));
        }
        Ok(())
    }

    fn matrix(&self) -> Matrix3<f64> {
        Matrix3::from_rows(&[self.e1.transpose(), self.e2.transpose(), self.e3.transpose()])
    }
}

/// The five 1-forms driving `dx = ω₁e₁ + ω₂e₂` and
/// `de₁ = ω₁₂e₂ + ω₁₃e₃`, `de₂ = −ω₁₂e₁ + ω₂₃e₃`, `de₃ = −ω₁₃e₁ − ω₂₃e₂`.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameForms {
    pub omega1: OneForm,
    pub omega2: OneForm,
    pub omega12: OneForm,
    pub omega13: OneForm,
    pub omega23: OneForm,
}

impl FrameForms {
    pub fn from_coframes(cf: &CoframeSet, profile: &SurfaceProfile) -> Result<Self> {
        let (omega13, omega23) = normal_connection(cf, profile)?;
        Ok(Self {
            omega1: cf.omega1.clone(),
            omega2: cf.omega2.clone(),
            omega12: cf.omega12.clone(),
            omega13,
            omega23,
        })
    }

    pub fn grid(&self) -> &Grid {
        self.omega1.grid()
    }

    /// Components along `s` (`dir = 0`) or `t` (`dir = 1`) at node `k`:
    /// `(ω₁, ω₂, ω₁₂, ω₁₃, ω₂₃)`.
    fn along(&self, dir: usize, k: usize) -> [f64; 5] {
        let pick = |w: &OneForm| if dir == 0 { w.p().values()[k] } else { w.q().values()[k] };
        [
            pick(&self.omega1),
            pick(&self.omega2),
            pick(&self.omega12),
            pick(&self.omega13),
            pick(&self.omega23),
        ]
    }
}

/// Immersion and frame sampled on the grid. Frames are stored as matrices
/// whose rows are `e₁, e₂, e₃`.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameField {
    grid: Grid,
    x: Vec<Vector3<f64>>,
    frames: Vec<Matrix3<f64>>,
}

impl FrameField {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn positions(&self) -> &[Vector3<f64>] {
        &self.x
    }

    pub fn x(&self, i: usize, j: usize) -> Vector3<f64> {
        self.x[self.grid.index(i, j)]
    }

    pub fn e(&self, n: usize, i: usize, j: usize) -> Vector3<f64> {
        self.frames[self.grid.index(i, j)].row(n).transpose()
    }

    /// Max over nodes of `|F Fᵀ − I|` and `|e₁ × e₂ − e₃|`.
    pub fn orthonormality_drift(&self) -> f64 {
        self.frames.iter().fold(0.0, |m, f| {
            let e1: Vector3<f64> = f.row(0).transpose();
            let e2: Vector3<f64> = f.row(1).transpose();
            let e3: Vector3<f64> = f.row(2).transpose();
            m.max((f * f.transpose() - Matrix3::identity()).amax())
                .max((e1.cross(&e2) - e3).amax())
        })
    }

    /// Max node-wise distance in position and frame to another field.
    pub fn max_deviation(&self, other: &FrameField) -> Result<(f64, f64)> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch("frame fields on different grids".into()));
        }
        let dx = self
            .x
            .iter()
            .zip(&other.x)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).amax()));
        let df = self
            .frames
            .iter()
            .zip(&other.frames)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).amax()));
        Ok((dx, df))
    }

    /// One coordinate of the position (`c = 0, 1, 2`) as a scalar field.
    pub fn coordinate(&self, c: usize) -> Result<ScalarField> {
        ScalarField::new(self.grid, self.x.iter().map(|v| v[c]).collect())
    }

    /// One coordinate of frame vector `n` as a scalar field.
    pub fn frame_coordinate(&self, n: usize, c: usize) -> Result<ScalarField> {
        ScalarField::new(self.grid, self.frames.iter().map(|f| f[(n, c)]).collect())
    }

    /// Bounding-box extent of the positions.
    pub fn max_abs_position(&self) -> f64 {
        self.x.iter().fold(0.0, |m, v| m.max(v.amax()))
    }
}

/// Largest rotation angle accepted in one grid step.
pub const MAX_STEP_ANGLE: f64 = 0.5;

/// One step between adjacent nodes `a → b` along direction `dir`.
#[allow(clippy::too_many_arguments)]
fn step(
    forms: &FrameForms,
    dir: usize,
    h: f64,
    a: usize,
    b: usize,
    x: Vector3<f64>,
    f: Matrix3<f64>,
    node: (usize, usize),
) -> Result<(Vector3<f64>, Matrix3<f64>)> {
    let ca = forms.along(dir, a);
    let cb = forms.along(dir, b);
    let avg = |n: usize| 0.5 * h * (ca[n] + cb[n]);
    let (w12, w13, w23) = (avg(2), avg(3), avg(4));
    // exp of [[0, w12, w13], [−w12, 0, w23], [−w13, −w23, 0]]
    let axis = Vector3::new(-w23, w13, -w12);
    let angle = axis.norm();
    if !(angle <= MAX_STEP_ANGLE) {
        return Err(Error::StepTooLarge {
            i: node.0,
            j: node.1,
            angle,
        });
    }
    let f_new = Rotation3::new(axis).into_inner() * f;
    let vel =
        |c: &[f64; 5], m: &Matrix3<f64>| -> Vector3<f64> { c[0] * m.row(0).transpose() + c[1] * m.row(1).transpose() };
    let x_new = x + 0.5 * h * (vel(&ca, &f) + vel(&cb, &f_new));
    Ok((x_new, f_new))
}

/// Integrates the frame equations from the seed at `(s_min, t_min)`, first
/// along one edge and then along every line in the other direction. Each
/// step applies the exact rotation generated by the trapezoid average of the
/// connection matrix, so the frames stay orthonormal to rounding.
pub fn integrate_frame_forms(forms: &FrameForms, seed: &FrameSeed, order: SweepOrder) -> Result<FrameField> {
    seed.validate()?;
    let g = *forms.grid();
    let mut x = vec![Vector3::zeros(); g.len()];
    let mut frames = vec![Matrix3::zeros(); g.len()];
    x[0] = seed.x;
    frames[0] = seed.matrix();
    let mut go = |dir: usize, from: (usize, usize), to: (usize, usize)| -> Result<()> {
        let (a, b) = (g.index(from.0, from.1), g.index(to.0, to.1));
        let h = if dir == 0 { g.h_s() } else { g.h_t() };
        let (xn, fnew) = step(forms, dir, h, a, b, x[a], frames[a], to)?;
        x[b] = xn;
        frames[b] = fnew;
        Ok(())
    };
    match order {
        SweepOrder::TEdgeFirst => {
            for j in 1..g.nt() {
                go(1, (0, j - 1), (0, j))?;
            }
            for j in 0..g.nt() {
                for i in 1..g.ns() {
                    go(0, (i - 1, j), (i, j))?;
                }
            }
        }
        SweepOrder::SEdgeFirst => {
            for i in 1..g.ns() {
                go(0, (i - 1, 0), (i, 0))?;
            }
            for i in 0..g.ns() {
                for j in 1..g.nt() {
                    go(1, (i, j - 1), (i, j))?;
                }
            }
        }
    }
    Ok(FrameField { grid: g, x, frames })
}

/// Builds the coframes and integrates the frame along the default path.
pub fn integrate_frame(profile: &SurfaceProfile, psi: &PsiField, grid: &Grid, seed: &FrameSeed) -> Result<FrameField> {
    let cf = CoframeSet::build(profile, psi, grid)?;
    integrate_frame_forms(&FrameForms::from_coframes(&cf, profile)?, seed, SweepOrder::TEdgeFirst)
}

/// Finite-difference partials of the position and of `e₃`.
struct Tangents {
    xs: Vec<Vector3<f64>>,
    xt: Vec<Vector3<f64>>,
    ns: Vec<Vector3<f64>>,
    nt: Vec<Vector3<f64>>,
}

fn tangents(frame: &FrameField) -> Result<Tangents> {
    let g = frame.grid;
    let mut t = Tangents {
        xs: vec![Vector3::zeros(); g.len()],
        xt: vec![Vector3::zeros(); g.len()],
        ns: vec![Vector3::zeros(); g.len()],
        nt: vec![Vector3::zeros(); g.len()],
    };
    for c in 0..3 {
        let xc = frame.coordinate(c)?;
        let nc = frame.frame_coordinate(2, c)?;
        let (xs, xt, ns, nt) = (xc.partial_s(), xc.partial_t(), nc.partial_s(), nc.partial_t());
        for k in 0..g.len() {
            t.xs[k][c] = xs.values()[k];
            t.xt[k][c] = xt.values()[k];
            t.ns[k][c] = ns.values()[k];
            t.nt[k][c] = nt.values()[k];
        }
    }
    Ok(t)
}

/// First fundamental form coefficients `(x_s·x_s, x_s·x_t, x_t·x_t)` by
/// finite differences.
pub fn metric_from_frame(frame: &FrameField) -> Result<(ScalarField, ScalarField, ScalarField)> {
    let t = tangents(frame)?;
    let g = frame.grid;
    let f =
        |a: &[Vector3<f64>], b: &[Vector3<f64>]| ScalarField::new(g, a.iter().zip(b).map(|(u, v)| u.dot(v)).collect());
    Ok((f(&t.xs, &t.xs)?, f(&t.xs, &t.xt)?, f(&t.xt, &t.xt)?))
}

/// Max interior deviations `(|x_s|² − E, x_s·x_t, |x_t|² − E)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MetricDeviation {
    pub ss: f64,
    pub st: f64,
    pub tt: f64,
}

impl MetricDeviation {
    pub fn max(&self) -> f64 {
        self.ss.max(self.st).max(self.tt)
    }
}

pub fn metric_recovery(frame: &FrameField, profile: &SurfaceProfile) -> Result<MetricDeviation> {
    let big_e = profile.field(frame.grid(), |p| p.big_e)?;
    let (gss, gst, gtt) = metric_from_frame(frame)?;
    Ok(MetricDeviation {
        ss: (&gss - &big_e).max_abs_interior(),
        st: gst.max_abs_interior(),
        tt: (&gtt - &big_e).max_abs_interior(),
    })
}

/// Conformal factor and second fundamental form coefficients in `(s, t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FundamentalForms {
    pub e_i: ScalarField,
    pub l: ScalarField,
    pub m: ScalarField,
    pub n: ScalarField,
    /// `L` and `M` from the `τQ` forms, for cross-checking.
    pub l_alt: ScalarField,
    pub m_alt: ScalarField,
}

/// `L = E(H + J cos 2ψ)`, `M = −EJ sin 2ψ`, `N = E(H − J cos 2ψ)`, plus
/// `L = EH + τQ cos 2ψ` and `M = −τQ sin 2ψ`.
pub fn fundamental_forms(profile: &SurfaceProfile, psi: &PsiField) -> Result<FundamentalForms> {
    let g = *psi.grid();
    let big_e = profile.field(&g, |p| p.big_e)?;
    let h = profile.field(&g, |p| p.h)?;
    let j = profile.field(&g, |p| p.j)?;
    let tq = profile.field(&g, |p| profile.tau_c() * p.q)?;
    let c2 = psi.field().map(|v| (2.0 * v).cos());
    let s2 = psi.field().map(|v| (2.0 * v).sin());
    let jc = &j * &c2;
    Ok(FundamentalForms {
        l: &big_e * &(&h + &jc),
        m: -&(&big_e * &(&j * &s2)),
        n: &big_e * &(&h - &jc),
        l_alt: &(&big_e * &h) + &(&tq * &c2),
        m_alt: -&(&tq * &s2),
        e_i: big_e,
    })
}

impl FundamentalForms {
    /// `(L + N)/(2E)`.
    pub fn mean_curvature(&self) -> ScalarField {
        let sum = &self.l + &self.n;
        sum.zip_map(&self.e_i, |a, e| a / (2.0 * e))
    }

    /// `(LN − M²)/E²`.
    pub fn gauss_curvature(&self) -> ScalarField {
        let det = &(&self.l * &self.n) - &(&self.m * &self.m);
        det.zip_map(&self.e_i, |d, e| d / (e * e))
    }

    /// Max relative deviation among the algebraic identities: the two forms
    /// of `L` and `M`, mean curvature `H` and Gaussian curvature `H² − J²`.
    pub fn algebraic_residuals(&self, profile: &SurfaceProfile) -> Result<(f64, f64, f64)> {
        let g = *self.e_i.grid();
        let h = profile.field(&g, |p| p.h)?;
        let k = profile.field(&g, |p| p.gauss_k())?;
        let scale = self.l.max_abs().max(self.n.max_abs()).max(1.0);
        let forms = (&self.l - &self.l_alt).max_abs().max((&self.m - &self.m_alt).max_abs()) / scale;
        let mean = (&self.mean_curvature() - &h).max_abs() / h.max_abs().max(1.0);
        let gauss = (&self.gauss_curvature() - &k).max_abs() / k.max_abs().max(1.0);
        Ok((forms, mean, gauss))
    }
}

/// Second fundamental form `(L, M, N)` of an immersed frame field,
/// `L = −x_s·e₃_s`, `M = −½(x_s·e₃_t + x_t·e₃_s)`, `N = −x_t·e₃_t`.
pub fn second_form_from_frame(frame: &FrameField) -> Result<(ScalarField, ScalarField, ScalarField)> {
    let t = tangents(frame)?;
    let g = frame.grid;
    let mut l = Vec::with_capacity(g.len());
    let mut m = Vec::with_capacity(g.len());
    let mut n = Vec::with_capacity(g.len());
    for k in 0..g.len() {
        l.push(-t.xs[k].dot(&t.ns[k]));
        m.push(-0.5 * (t.xs[k].dot(&t.nt[k]) + t.xt[k].dot(&t.ns[k])));
        n.push(-t.xt[k].dot(&t.nt[k]));
    }
    Ok((
        ScalarField::new(g, l)?,
        ScalarField::new(g, m)?,
        ScalarField::new(g, n)?,
    ))
}

/// Max interior deviation between the finite-difference second form of the
/// frame and the algebraic one.
pub fn second_form_vs_frame(ff: &FundamentalForms, frame: &FrameField) -> Result<f64> {
    let (l, m, n) = second_form_from_frame(frame)?;
    Ok((&l - &ff.l)
        .max_abs_interior()
        .max((&m - &ff.m).max_abs_interior())
        .max((&n - &ff.n).max_abs_interior()))
}

/// Max interior `|dH ∧ dK|` with `K = (LN − M²)/E²`, and the largest spread
/// of `K` along any `s = const` line.
pub fn weingarten_residual(profile: &SurfaceProfile, psi: &PsiField, grid: &Grid) -> Result<(f64, f64)> {
    let ff = fundamental_forms(profile, psi)?;
    weingarten_from_k(profile, &ff.gauss_curvature(), grid)
}

/// As [`weingarten_residual`] for a given curvature field.
pub fn weingarten_from_k(profile: &SurfaceProfile, k: &ScalarField, grid: &Grid) -> Result<(f64, f64)> {
    let h = profile.field(grid, |p| p.h)?;
    let w = wedge(&d_scalar(&h)?, &d_scalar(k)?)?;
    let spread = (0..grid.ns())
        .map(|i| {
            let line = k.t_line(i);
            let (lo, hi) = line
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
            hi - lo
        })
        .fold(0.0, f64::max);
    Ok((w.max_abs_interior(), spread))
}
