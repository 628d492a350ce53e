//! Named residual checks over a configuration, with convergence orders when
//! several grids are run.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::bonnet_solver::{gauss_s_residual, geodesic_curvature_residual, h_ode_profile_residual, ideal_residuals};
use crate::config::{PsiSpec, RunConfig, Tolerances};
use crate::convergence::OrderStudy;
use crate::error::Result;
use crate::forms2d::{ScalarField, SweepOrder};
use crate::lax_psi::{
    alpha_coframe, alpha_harmonic_residual, angle_constraint_residual, c_relation_residuals, cross_derivative_residual,
    harmonic_residual, integrate_lax_sweep, lax_residuals, mixed_partial_residual,
};
use crate::pipeline::Pipeline;
use crate::surface_embed::{
    chern_residuals, codazzi_summary_residuals, coframe_identity_residual, connection_recovery_residual,
    d_star_omega12_residual, d_star_theta12_residual, d_theta1_residual, dpsi_theta_residual,
    integrate_deformation_sweep, metric_recovery, rotation_transform_residual, scaling_transform_residual,
    second_form_vs_frame, structure_residuals, theta12_residual, weingarten_residual, xi12_residual, NESTED_MARGIN,
};

/// Which command a check belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    /// Q, ψ and the profile.
    Solve,
    /// Coframes, immersion and fundamental forms.
    Mesh,
    /// The deformed surface.
    Deform,
}

impl Stage {
    pub const ALL: [Stage; 3] = [Stage::Solve, Stage::Mesh, Stage::Deform];
}

/// How a value is judged.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckKind {
    /// Must vanish to rounding.
    Algebraic,
    /// Truncation error of second-order differences: below `fd_factor·h²·scale`
    /// and decaying at the minimum order.
    FiniteDifference,
    /// Must exceed ten times the finite-difference tolerance.
    LowerBound,
}

/// One value of one check on one grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Measurement {
    pub name: &'static str,
    pub stage: Stage,
    pub kind: CheckKind,
    pub value: f64,
    /// Magnitude of the compared quantity (at least 1).
    pub scale: f64,
    /// Absolute tolerance replacing the algebraic default.
    pub abs_tol: Option<f64>,
}

/// Outcome of one check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub max_residual: f64,
    pub grid_h: f64,
    pub observed_order: Option<f64>,
    pub tolerance: f64,
    pub kind: CheckKind,
    pub passed: bool,
    /// Residuals from coarsest to finest grid when more than one grid ran.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub history: Vec<f64>,
}

pub type Report = BTreeMap<String, CheckResult>;

pub fn all_passed(report: &Report) -> bool {
    report.values().all(|c| c.passed)
}

pub fn failures(report: &Report) -> Vec<&str> {
    report
        .iter()
        .filter(|(_, c)| !c.passed)
        .map(|(k, _)| k.as_str())
        .collect()
}

pub fn report_json(report: &Report) -> String {
    serde_json::to_string_pretty(report).expect("report serializes")
}

/// Filters and scalings applied when judging checks.
#[derive(Debug, Clone, PartialEq)]
pub struct VerifyOptions {
    pub stages: Vec<Stage>,
    /// Keep only checks whose name contains this substring.
    pub only: Option<String>,
    /// Multiplies every tolerance.
    pub tol_scale: f64,
    /// Deformation parameter for the deform checks.
    pub t0: f64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            stages: Stage::ALL.to_vec(),
            only: None,
            tol_scale: 1.0,
            t0: 1.0,
        }
    }
}

fn mag(x: f64) -> f64 {
    x.abs().max(1.0)
}

struct Sink {
    out: Vec<Measurement>,
    stage: Stage,
}

impl Sink {
    fn alg(&mut self, name: &'static str, value: f64) {
        self.push(name, CheckKind::Algebraic, value, 1.0, None);
    }

    fn alg_abs(&mut self, name: &'static str, value: f64, tol: f64) {
        self.push(name, CheckKind::Algebraic, value, 1.0, Some(tol));
    }

    fn fd(&mut self, name: &'static str, value: f64, scale: f64) {
        self.push(name, CheckKind::FiniteDifference, value, scale, None);
    }

    fn push(&mut self, name: &'static str, kind: CheckKind, value: f64, scale: f64, abs_tol: Option<f64>) {
        self.out.push(Measurement {
            name,
            stage: self.stage,
            kind,
            value,
            scale: mag(scale),
            abs_tol,
        });
    }
}

fn solve_checks(p: &Pipeline, spec: PsiSpec, sink: &mut Sink) -> Result<()> {
    let fam = p.family;
    let g = p.grid;
    let raw: Vec<_> = g.s_nodes().iter().map(|&s| (s, fam.raw(s))).collect();
    let q4 = raw.iter().fold(0.0f64, |m, (_, d)| m.max(d.q.powi(4)));
    let qmax = raw.iter().fold(0.0f64, |m, (_, d)| m.max(d.q));
    let kappa = fam.kappa()?;
    let mut q_ode = 0.0f64;
    let mut first = 0.0f64;
    let mut c_ode = 0.0f64;
    for &(s, d) in &raw {
        q_ode = q_ode.max(fam.q_ode_residual(s)?.abs());
        first = first.max((d.qp * d.qp - d.q.powi(4) - kappa * d.q * d.q).abs());
        c_ode = c_ode.max(fam.c_ode_residual(s)?.abs());
    }
    sink.alg("q_ode", q_ode / q4);
    sink.alg("q_first_integral", first / q4);
    sink.alg("c_ode", c_ode);

    let (r1, r2) = lax_residuals(&p.psi, fam)?;
    sink.fd("lax_s", r1.max_abs_interior(), qmax);
    sink.fd("lax_t", r2.max_abs_interior(), qmax);
    match spec {
        PsiSpec::Branch(_) => {
            let b = p.psi.branch().expect("closed-form field keeps its branch");
            let mut m = 0.0f64;
            for i in 0..g.ns() {
                for j in 0..g.nt() {
                    let (a, c) = b.lax_residuals_analytic(g.s(i), g.t(j))?;
                    m = m.max(a.abs()).max(c.abs());
                }
            }
            sink.alg("lax_analytic", m);
        }
        PsiSpec::Integrate { psi0 } => {
            let other = integrate_lax_sweep(fam, g, psi0, SweepOrder::SEdgeFirst)?;
            sink.fd("lax_sweep_agreement", (p.psi.field() - other.field()).max_abs(), 1.0);
        }
    }
    sink.fd("psi_harmonic", harmonic_residual(&p.psi), 1.0);
    sink.fd("psi_cross_derivative", cross_derivative_residual(&p.psi), 1.0);
    sink.fd(
        "angle_constraint",
        angle_constraint_residual(&p.psi, fam, &p.profile)?.max_abs_interior(),
        1.0,
    );
    let q_prof = p.profile.column(|x| x.hp / x.j);
    let c_prof = p.profile.column(|x| x.c);
    let (a1, a2) = alpha_coframe(&p.psi, &q_prof)?;
    sink.fd(
        "alpha_harmonic",
        alpha_harmonic_residual(&p.psi, &a1, &a2)?.max_abs_interior_margin(NESTED_MARGIN),
        1.0,
    );
    sink.fd(
        "alpha_mixed_partial",
        mixed_partial_residual(p.psi.field(), &a1, &a2)?.max_abs_interior_margin(NESTED_MARGIN),
        1.0,
    );
    let (c1, c2) = c_relation_residuals(&p.psi, &a1, &a2, &c_prof)?;
    sink.fd("c_relation_sin", c1.max_abs_interior(), 1.0);
    sink.fd("c_relation_cos", c2.max_abs_interior(), 1.0);

    let prof = &p.profile;
    sink.fd("h_ode", h_ode_profile_residual(prof)?, 1.0);
    sink.fd("gauss_s", gauss_s_residual(prof)?, 1.0);
    let ideal = ideal_residuals(prof)?;
    sink.fd("ideal_log_a", ideal.log_a, 1.0);
    sink.fd("ideal_b", ideal.b, 1.0);
    sink.alg("ideal_c", ideal.c);
    sink.alg("ideal_h", ideal.h);
    sink.fd("ideal_log_j", ideal.log_j, 1.0);
    sink.fd("geodesic_curvature", geodesic_curvature_residual(prof)?, 1.0);
    let inv = prof.samples().iter().fold(0.0f64, |m, x| {
        m.max((x.big_e * x.j / (prof.tau_c() * x.q) - 1.0).abs())
            .max((x.big_a * x.e / x.q - 1.0).abs())
    });
    sink.alg("profile_invariants", inv);
    Ok(())
}

fn mesh_checks(p: &Pipeline, sink: &mut Sink) -> Result<()> {
    let (cf, prof, psi, g) = (&p.coframes, &p.profile, &p.psi, p.grid);
    sink.alg("coframe_identities", coframe_identity_residual(cf, psi, prof)?);
    for (name, v) in structure_residuals(cf, prof)?.named() {
        sink.fd(name, v, 1.0);
    }
    let (dh, dlogj) = codazzi_summary_residuals(cf, prof)?;
    sink.fd("codazzi_dh", dh, 1.0);
    sink.fd("codazzi_dlogj", dlogj, 1.0);
    sink.fd("d_theta1", d_theta1_residual(cf), 1.0);
    let (ch1, ch2) = chern_residuals(cf)?;
    sink.fd("chern_alpha1", ch1, 1.0);
    sink.fd("chern_alpha2", ch2, 1.0);
    let (t1, t2) = theta12_residual(cf, psi, prof)?;
    sink.fd("theta12_connection", t1, 1.0);
    sink.fd("theta12_hodge", t2, 1.0);
    sink.fd("dpsi_theta", dpsi_theta_residual(cf, psi, prof)?, 1.0);
    sink.fd("d_star_omega12", d_star_omega12_residual(cf), 1.0);
    sink.fd("d_star_theta12", d_star_theta12_residual(cf, prof)?, 1.0);
    sink.fd("xi12", xi12_residual(cf, prof)?, 1.0);
    sink.fd("connection_recovery", connection_recovery_residual(cf)?, 1.0);
    let st = ScalarField::from_fn(g, |s, t| s * t)?;
    sink.fd("rotation_transform", rotation_transform_residual(cf, &st)?, 1.0);
    let log_a = prof.field(&g, |x| x.big_a.ln())?;
    sink.fd("scaling_transform", scaling_transform_residual(cf, &log_a)?, 1.0);

    let frame = p.frame(SweepOrder::TEdgeFirst)?;
    let other = p.frame(SweepOrder::SEdgeFirst)?;
    sink.alg_abs(
        "frame_orthonormality",
        frame.orthonormality_drift().max(other.orthonormality_drift()),
        1e-12,
    );
    sink.fd(
        "frame_path_agreement",
        frame.max_deviation(&other)?.0,
        frame.max_abs_position(),
    );
    let emax = prof.samples().iter().fold(0.0f64, |m, x| m.max(x.big_e));
    let metric = metric_recovery(&frame, prof)?;
    sink.fd("metric_ss", metric.ss, emax);
    sink.fd("metric_st", metric.st, emax);
    sink.fd("metric_tt", metric.tt, emax);
    let ff = p.forms()?;
    sink.fd(
        "second_form_frame",
        second_form_vs_frame(&ff, &frame)?,
        ff.l.max_abs().max(ff.n.max_abs()),
    );
    let (alt, mean, gauss) = ff.algebraic_residuals(prof)?;
    sink.alg("forms_alt", alt);
    sink.alg("forms_mean_curvature", mean);
    sink.alg("forms_gauss_curvature", gauss);
    let (wedge, spread) = weingarten_residual(prof, psi, &g)?;
    sink.fd("weingarten_wedge", wedge, 1.0);
    sink.alg_abs("weingarten_k_spread", spread, 1e-10);
    Ok(())
}

fn deform_checks(p: &Pipeline, t0: f64, sink: &mut Sink) -> Result<()> {
    let d = p.deform(t0)?;
    let other = integrate_deformation_sweep(&p.coframes, t0, SweepOrder::SEdgeFirst)?;
    let hmax = p.profile.samples().iter().fold(0.0f64, |m, x| m.max(x.h.abs()));
    let emax = p.profile.samples().iter().fold(0.0f64, |m, x| m.max(x.big_e));
    sink.alg_abs("deform_orthonormality", d.surface.frame.orthonormality_drift(), 1e-12);
    sink.fd(
        "deform_path_agreement",
        (&d.param.t_field - &other.t_field).max_abs(),
        d.param.t_field.max_abs(),
    );
    sink.fd("deform_metric", d.report.metric_deviation, emax);
    sink.fd("deform_mean_curvature", d.report.h_deviation, hmax);
    sink.push(
        "deform_ii_distinct",
        CheckKind::LowerBound,
        d.report.ii_deviation,
        hmax,
        None,
    );
    Ok(())
}

/// All measurements of the requested stages on one pipeline.
pub fn measure(p: &Pipeline, cfg: &RunConfig, stages: &[Stage], t0: f64) -> Result<Vec<Measurement>> {
    let mut out = Vec::new();
    for &stage in stages {
        let mut sink = Sink { out: Vec::new(), stage };
        match stage {
            Stage::Solve => solve_checks(p, cfg.psi, &mut sink)?,
            Stage::Mesh => mesh_checks(p, &mut sink)?,
            Stage::Deform => deform_checks(p, t0, &mut sink)?,
        }
        out.extend(sink.out);
    }
    Ok(out)
}

/// Judges per-grid measurements (coarsest grid first).
pub fn judge(levels: &[(f64, Vec<Measurement>)], tol: &Tolerances, tol_scale: f64) -> Report {
    let mut report = Report::new();
    let Some((h_fine, finest)) = levels.last() else {
        return report;
    };
    for (k, m) in finest.iter().enumerate() {
        let hs: Vec<f64> = levels.iter().map(|(h, _)| *h).collect();
        let rs: Vec<f64> = levels.iter().map(|(_, ms)| ms[k].value).collect();
        let study = OrderStudy::new(hs, rs, m.scale);
        let fd_tol = tol.fd_factor * h_fine * h_fine * m.scale * tol_scale;
        let (tolerance, passed, order) = match m.kind {
            CheckKind::Algebraic => {
                let t = m.abs_tol.unwrap_or(tol.algebraic * m.scale) * tol_scale;
                (t, m.value <= t, None)
            }
            CheckKind::FiniteDifference => {
                let ok = m.value <= fd_tol && study.order_ok(tol.min_order);
                (fd_tol, ok, study.finest_order())
            }
            CheckKind::LowerBound => (10.0 * fd_tol, m.value > 10.0 * fd_tol, None),
        };
        report.insert(
            m.name.to_string(),
            CheckResult {
                max_residual: m.value,
                grid_h: *h_fine,
                observed_order: order,
                tolerance,
                kind: m.kind,
                passed: passed && m.value.is_finite(),
                history: if levels.len() > 1 { study.residuals } else { Vec::new() },
            },
        );
    }
    report
}

/// Runs the configured grid sequence and judges every check.
pub fn run_checks(cfg: &RunConfig, opts: &VerifyOptions) -> Result<Report> {
    let mut levels = Vec::new();
    for grid in cfg.grids() {
        let p = Pipeline::build(cfg, grid)?;
        levels.push((grid.h(), measure(&p, cfg, &opts.stages, opts.t0)?));
    }
    let mut report = judge(&levels, &cfg.tolerances, opts.tol_scale);
    if let Some(f) = &opts.only {
        report.retain(|k, _| k.contains(f.as_str()));
    }
    Ok(report)
}
