//! Acceptance suite. Every test prints one line
//! `<name> PASS|FAIL <details>` and then asserts the same condition.
//! Run with `cargo test -p bonnet --test acceptance -- --nocapture --test-threads 1`
//! to read the lines in order.

// reference values keep every digit the oracle printed
#![allow(clippy::excessive_precision)]

use std::time::{Duration, Instant};

use bonnet::bonnet_solver::{
    gauss_s_residual, ideal_residuals, integrate_h, HInitialData, ProfileSample, SurfaceProfile,
};
use bonnet::config::{PsiSpec, RunConfig, Tolerances};
use bonnet::convergence::{OrderStudy, MIN_ORDER};
use bonnet::forms2d::{d_scalar, wedge, Grid, ScalarField};
use bonnet::lax_psi::{harmonic_residual, integrate_lax, lax_residuals, PsiBranch, PsiCase, PsiField};
use bonnet::pipeline::Pipeline;
use bonnet::q_family::{integrate_q_ode, QFamily};
use bonnet::surface_embed::{metric_from_frame, second_form_from_frame, weingarten_from_k, write_obj};
use bonnet::verify::{judge, measure, report_json, run_checks, Report, Stage, VerifyOptions};

// tolerances, fixed here and nowhere else
const Q_EXACT_REL: f64 = 1e-10;
const Q_SAMPLES: usize = 200;
const Q_ODE_REL: f64 = 1e-9;
const Q_ODE_STEP: f64 = 1e-3;
const Q_HALVING: (f64, f64) = (12.0, 20.0);
const LAX_ANALYTIC: f64 = 1e-10;
const GAUSS_FINE: f64 = 1e-6;
const IDEAL_FINE: f64 = 1e-5;
const PROFILE_STEP: f64 = 1e-4;
const NEGATIVE_CONTROL: f64 = 1e-3;
const FRAME_DRIFT: f64 = 1e-12;
const K_SPREAD: f64 = 1e-10;
const FD_FACTOR: f64 = 25.0;
const II_MARGIN: f64 = 10.0;

fn line(name: &str, pass: bool, detail: impl AsRef<str>) {
    println!("{name:<26} {} {}", if pass { "PASS" } else { "FAIL" }, detail.as_ref());
}

fn within(start: Instant, limit: Duration) -> bool {
    start.elapsed() < limit
}

fn all_families(a: f64) -> Vec<QFamily> {
    QFamily::table(a).unwrap()
}

/// Unit s-interval away from 0 on the side of the family's domain.
fn unit_interval(fam: &QFamily) -> (f64, f64) {
    if fam.sign() > 0 {
        (1.0, 2.0)
    } else {
        (-2.0, -1.0)
    }
}

fn unit_grid(fam: &QFamily, n: usize) -> Grid {
    let (lo, hi) = unit_interval(fam);
    Grid::new(lo, hi, 0.0, 1.0, n, n).unwrap()
}

#[test]
fn q_family_exactness() {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for fam in all_families(1.3) {
        let (lo, hi) = fam.guard().sample_interval();
        let kappa = fam.kappa().unwrap();
        let pts: Vec<f64> = (0..Q_SAMPLES)
            .map(|k| lo + (hi - lo) * k as f64 / (Q_SAMPLES - 1) as f64)
            .collect();
        let q4 = pts.iter().map(|&s| fam.q(s).unwrap().powi(4)).fold(0.0, f64::max);
        for &s in &pts {
            let d = fam.derivatives(s).unwrap();
            let ode = (d.qpp * d.q - d.qp * d.qp - d.q.powi(4)).abs() / q4;
            let first = (d.qp * d.qp - d.q.powi(4) - kappa * d.q * d.q).abs() / q4;
            worst = worst.max(ode).max(first);
        }
        let expected = match fam.kind() {
            bonnet::q_family::QKind::Rational => 0.0,
            bonnet::q_family::QKind::Trig => -1.69,
            bonnet::q_family::QKind::Hyper => 1.69,
        };
        assert!((kappa - expected).abs() < 1e-12, "{fam}: kappa {kappa}");
    }
    let pass = worst < Q_EXACT_REL && within(start, Duration::from_secs(1));
    line(
        "q_family_exactness",
        pass,
        format!("max rel residual {worst:.2e}, {:?}", start.elapsed()),
    );
    assert!(pass);
}

#[test]
fn q_ode_cross_check() {
    let start = Instant::now();
    let err = |fam: &QFamily, step: f64| {
        let (lo, hi) = unit_interval(fam);
        let d = fam.derivatives(lo).unwrap();
        let tr = integrate_q_ode(d.q, d.qp, lo, hi, step).unwrap();
        assert!(!tr.truncated);
        tr.s.iter()
            .zip(&tr.q)
            .map(|(&s, &q)| {
                let exact = fam.q(s).unwrap();
                ((q - exact) / exact).abs()
            })
            .fold(0.0, f64::max)
    };
    let mut worst = 0.0f64;
    let mut ratios = Vec::new();
    for fam in all_families(1.0) {
        worst = worst.max(err(&fam, Q_ODE_STEP));
        ratios.push(err(&fam, 0.02) / err(&fam, 0.01));
    }
    let ratio_ok = ratios.iter().all(|r| (Q_HALVING.0..=Q_HALVING.1).contains(r));
    let pass = worst < Q_ODE_REL && ratio_ok && within(start, Duration::from_secs(1));
    line(
        "q_ode_cross_check",
        pass,
        format!("rel err {worst:.2e} at step {Q_ODE_STEP}, halving ratios {ratios:.1?}"),
    );
    assert!(pass);
}

fn closed_form_branches() -> Vec<PsiBranch> {
    let r = |s| QFamily::rational(s);
    let t = |s| QFamily::trig(s, 1.0).unwrap();
    let h = |s| QFamily::hyper(s, 1.0).unwrap();
    vec![
        PsiBranch::new(PsiCase::RationalUpper, 0.25, 0.0, r(1)).unwrap(),
        PsiBranch::new(PsiCase::RationalLower, 0.25, 0.0, r(-1)).unwrap(),
        PsiBranch::new(PsiCase::TrigAppendix, 0.0, 0.2, t(1)).unwrap(),
        PsiBranch::new(PsiCase::TrigAppendix, 0.0, 0.2, t(-1)).unwrap(),
        PsiBranch::new(PsiCase::HyperAppendix, 0.0, 0.2, h(1)).unwrap(),
        PsiBranch::new(PsiCase::HyperAppendix, 0.0, 0.2, h(-1)).unwrap(),
    ]
}

const LAX_NODES: [usize; 3] = [33, 65, 129];

#[test]
fn lax_closed_forms() {
    let start = Instant::now();
    let mut analytic = 0.0f64;
    let mut orders = Vec::new();
    let mut ok = true;
    for b in closed_form_branches() {
        let fam = b.family();
        let mut hs = Vec::new();
        let mut rs = Vec::new();
        for n in LAX_NODES {
            let g = unit_grid(&fam, n);
            for i in 0..n {
                for j in 0..n {
                    let (r1, r2) = b.lax_residuals_analytic(g.s(i), g.t(j)).unwrap();
                    analytic = analytic.max(r1.abs()).max(r2.abs());
                }
            }
            let psi = PsiField::from_branch(b, g).unwrap();
            let (r1, r2) = lax_residuals(&psi, fam).unwrap();
            hs.push(g.h());
            rs.push(r1.max_abs_interior().max(r2.max_abs_interior()));
        }
        let st = OrderStudy::new(hs, rs, 1.0);
        ok &= st.orders.iter().all(|&p| p >= MIN_ORDER);
        orders.push(st.orders[st.orders.len() - 1]);
    }
    let pass = ok && analytic < LAX_ANALYTIC && within(start, Duration::from_secs(5));
    line(
        "lax_closed_forms",
        pass,
        format!("analytic {analytic:.2e}, FD orders (h 1/32 to 1/128) {orders:.2?}"),
    );
    assert!(pass);
}

#[test]
fn harmonicity() {
    let start = Instant::now();
    let mut fields: Vec<Box<dyn Fn(Grid) -> PsiField>> = Vec::new();
    for b in closed_form_branches() {
        fields.push(Box::new(move |g| PsiField::from_branch(b, g).unwrap()));
    }
    fields.push(Box::new(|g| integrate_lax(QFamily::rational(1), g, 0.3).unwrap()));
    fields.push(Box::new(|g| {
        integrate_lax(QFamily::trig(1, 1.0).unwrap(), g, -0.4).unwrap()
    }));
    fields.push(Box::new(|g| {
        integrate_lax(QFamily::hyper(-1, 1.0).unwrap(), g, 0.7).unwrap()
    }));
    let fams = {
        let mut v: Vec<QFamily> = closed_form_branches().iter().map(|b| b.family()).collect();
        v.extend([
            QFamily::rational(1),
            QFamily::trig(1, 1.0).unwrap(),
            QFamily::hyper(-1, 1.0).unwrap(),
        ]);
        v
    };
    let mut orders = Vec::new();
    for (make, fam) in fields.iter().zip(&fams) {
        let (hs, rs): (Vec<f64>, Vec<f64>) = LAX_NODES
            .iter()
            .map(|&n| {
                let g = unit_grid(fam, n);
                (g.h(), harmonic_residual(&make(g)))
            })
            .unzip();
        let st = OrderStudy::new(hs, rs, 1.0);
        orders.push(st.finest_order().unwrap_or(f64::INFINITY));
    }
    // integrated ψ against an mpmath reference (tools/oracle.py)
    let g = Grid::new(1.0, 2.0, 0.0, 1.0, 129, 129).unwrap();
    let psi = integrate_lax(QFamily::rational(1), g, 0.3).unwrap();
    let oracle = (psi.field().at(64, 64) + 0.126_431_170_813_691_155_21)
        .abs()
        .max((psi.field().at(128, 128) + 0.332_510_095_713_838_870_17).abs());
    let pass = orders.iter().all(|&p| p >= MIN_ORDER) && oracle < 1e-9 && within(start, Duration::from_secs(5));
    line(
        "harmonicity",
        pass,
        format!("orders {orders:.2?}, integrated psi vs reference {oracle:.1e}"),
    );
    assert!(pass);
}

fn demo_ics() -> HInitialData {
    HInitialData::new(1.0, 0.0, 1.0, 0.0, 1.0).unwrap()
}

fn demo_profile(step: f64) -> SurfaceProfile {
    integrate_h(demo_ics(), QFamily::rational(1), 2.0, step).unwrap()
}

fn profile_residuals(p: &SurfaceProfile) -> Vec<(&'static str, f64)> {
    let mut v = vec![("gauss_s", gauss_s_residual(p).unwrap())];
    v.extend(ideal_residuals(p).unwrap().named());
    v
}

#[test]
fn h_equation_and_gauss() {
    let start = Instant::now();
    let fine = demo_profile(PROFILE_STEP);
    let res = profile_residuals(&fine);
    let gauss = res[0].1;
    let ideal = res[1..].iter().map(|r| r.1).fold(0.0, f64::max);

    // mpmath reference at s = 2 (tools/oracle.py)
    let last = fine.samples().last().unwrap();
    let oracle = [
        (last.h, 0.923_098_905_614_346_175_47),
        (last.hp, 0.755_967_438_195_944_062_7),
        (last.hpp, -0.456_854_189_125_871_171_87),
        (last.big_e, 0.330_702_074_412_894_080_23),
    ]
    .iter()
    .map(|(a, b)| (a - b).abs())
    .fold(0.0, f64::max);

    // orders at spacings 1/20, 1/40, 1/80
    let coarse: Vec<(f64, Vec<(&str, f64)>)> = [20.0, 40.0, 80.0]
        .iter()
        .map(|n| (1.0 / n, profile_residuals(&demo_profile(1.0 / n))))
        .collect();
    let mut orders = Vec::new();
    let mut orders_ok = true;
    for (k, (name, _)) in res.iter().enumerate() {
        let st = OrderStudy::new(
            coarse.iter().map(|c| c.0).collect(),
            coarse.iter().map(|c| c.1[k].1).collect(),
            1.0,
        );
        orders_ok &= st.order_ok(MIN_ORDER);
        orders.push(format!(
            "{name}={}",
            st.finest_order().map_or("exact".into(), |p| format!("{p:.2}"))
        ));
    }

    // negative controls
    let bad_e = fine.map_samples(|x| ProfileSample {
        big_e: x.big_e * (1.0 + 0.1 * x.s * x.s),
        ..*x
    });
    let bad_b = fine.map_samples(|x| ProfileSample { b: x.b + 0.01, ..*x });
    let neg_e = gauss_s_residual(&bad_e).unwrap();
    let neg_b = ideal_residuals(&bad_b).unwrap().b;
    // the 1% linear perturbation shifts the residual by ε²/(1+εs)², about 1e-4
    let weak = gauss_s_residual(&fine.map_samples(|x| ProfileSample {
        big_e: x.big_e * (1.0 + 0.01 * x.s),
        ..*x
    }))
    .unwrap();

    let pass = gauss < GAUSS_FINE
        && ideal < IDEAL_FINE
        && oracle < 1e-9
        && orders_ok
        && neg_e > NEGATIVE_CONTROL
        && neg_b > NEGATIVE_CONTROL
        && within(start, Duration::from_secs(10));
    line(
        "h_equation_and_gauss",
        pass,
        format!(
            "gauss {gauss:.2e}, ideal {ideal:.2e} at step {PROFILE_STEP}; H vs reference {oracle:.1e}; orders {}; negative E {neg_e:.2e}, B {neg_b:.2e} (1% linear E: {weak:.2e})",
            orders.join(" ")
        ),
    );
    assert!(pass);
}

fn demo_config() -> RunConfig {
    RunConfig::demo()
}

fn demo_grid(n: usize) -> Grid {
    Grid::new(1.0, 2.0, 0.0, 1.0, n, n).unwrap()
}

/// Solve and mesh checks on 64², 128² and 256² grids.
fn structure_report() -> Report {
    let cfg = demo_config();
    let levels: Vec<_> = [64, 128, 256]
        .iter()
        .map(|&n| {
            let g = demo_grid(n);
            let p = Pipeline::build(&cfg, g).unwrap();
            (g.h(), measure(&p, &cfg, &[Stage::Solve, Stage::Mesh], 1.0).unwrap())
        })
        .collect();
    judge(&levels, &Tolerances::default(), 1.0)
}

fn summarize(report: &Report, names: &[&str]) -> (bool, String) {
    let mut ok = true;
    let mut parts = Vec::new();
    for n in names {
        let c = report.get(*n).unwrap_or_else(|| panic!("missing check {n}"));
        ok &= c.passed;
        parts.push(match c.observed_order {
            Some(p) => format!("{n}={p:.2}"),
            None => format!("{n}=exact"),
        });
    }
    (ok, parts.join(" "))
}

#[test]
fn structure_suite() {
    let start = Instant::now();
    let report = structure_report();
    let names = [
        "structure_d_omega1",
        "structure_d_omega2",
        "structure_codazzi_omega13",
        "structure_codazzi_omega23",
        "structure_gauss_omega12",
        "codazzi_dh",
        "codazzi_dlogj",
        "chern_alpha1",
        "chern_alpha2",
        "theta12_connection",
        "theta12_hodge",
        "d_star_omega12",
        "d_theta1",
        "angle_constraint",
        "dpsi_theta",
        "geodesic_curvature",
    ];
    let (ok, detail) = summarize(&report, &names);
    let pass = ok && within(start, Duration::from_secs(60));
    line("structure_suite", pass, detail);
    assert!(pass);
}

#[test]
fn immersion_fidelity() {
    let start = Instant::now();
    let report = structure_report();
    let drift = report["frame_orthonormality"].max_residual;
    let (ok, detail) = summarize(
        &report,
        &["frame_path_agreement", "metric_ss", "metric_tt", "second_form_frame"],
    );
    let pass = ok && drift < FRAME_DRIFT && within(start, Duration::from_secs(30));
    line("immersion_fidelity", pass, format!("drift {drift:.1e}; {detail}"));
    assert!(pass);
}

#[test]
fn deformation_property() {
    let start = Instant::now();
    let cfg = demo_config();
    let p = Pipeline::build(&cfg, cfg.grid).unwrap();
    let h = cfg.grid.h();
    let hmax = p.profile.samples().iter().map(|x| x.h.abs()).fold(1.0, f64::max);
    let emax = p.profile.samples().iter().map(|x| x.big_e).fold(1.0, f64::max);
    let tol_h = FD_FACTOR * h * h * hmax;
    let tol_metric = FD_FACTOR * h * h * emax;
    let mut ii = Vec::new();
    let mut ok = true;
    for t0 in [0.5, 1.0, 2.0] {
        let r = p.deform(t0).unwrap().report;
        ok &= r.metric_deviation < tol_metric && r.h_deviation < tol_h && r.ii_deviation > II_MARGIN * tol_h;
        ii.push(r.ii_deviation);
    }
    let distinct = (ii[0] - ii[1]).abs() > II_MARGIN * tol_h
        && (ii[1] - ii[2]).abs() > II_MARGIN * tol_h
        && (ii[0] - ii[2]).abs() > II_MARGIN * tol_h;
    let r1 = p.deform(1.0).unwrap().report;
    let pass = ok && distinct && within(start, Duration::from_secs(30));
    line(
        "deformation_property",
        pass,
        format!(
            "t0=1: metric {:.2e} (tol {tol_metric:.2e}), H {:.2e} (tol {tol_h:.2e}), II {:.3}; II over t0 0.5/1/2 {ii:.3?}",
            r1.metric_deviation, r1.h_deviation, r1.ii_deviation
        ),
    );
    assert!(pass);
}

/// K from the finite-difference first and second forms of the immersion.
fn k_from_frame(p: &Pipeline) -> ScalarField {
    let f = p.frame(Default::default()).unwrap();
    let (gss, gst, gtt) = metric_from_frame(&f).unwrap();
    let (l, m, n) = second_form_from_frame(&f).unwrap();
    let num = &(&l * &n) - &(&m * &m);
    let den = &(&gss * &gtt) - &(&gst * &gst);
    num.zip_map(&den, |a, b| a / b)
}

/// dH ∧ dK with K from the frame. K_t nests three differences of the
/// positions and each one-sided boundary stencil costs an order one ring
/// further in, so the first three rings are skipped.
const FRAME_K_MARGIN: usize = 3;

fn frame_k_wedge(p: &Pipeline) -> f64 {
    let h = p.profile.field(&p.grid, |x| x.h).unwrap();
    wedge(&d_scalar(&h).unwrap(), &d_scalar(&k_from_frame(p)).unwrap())
        .unwrap()
        .max_abs_interior_margin(FRAME_K_MARGIN)
}

#[test]
fn weingarten_property() {
    let start = Instant::now();
    let cfg = demo_config();
    let mut hs = Vec::new();
    let mut fd_wedge = Vec::new();
    let mut exact_wedge = Vec::new();
    let mut spread = 0.0f64;
    for n in [33, 65, 129] {
        let g = demo_grid(n);
        let p = Pipeline::build(&cfg, g).unwrap();
        let ff = p.forms().unwrap();
        let (w, sp) = weingarten_from_k(&p.profile, &ff.gauss_curvature(), &g).unwrap();
        let w_fd = frame_k_wedge(&p);
        hs.push(g.h());
        exact_wedge.push(w);
        fd_wedge.push(w_fd);
        spread = spread.max(sp);
    }
    let algebraic = OrderStudy::new(hs.clone(), exact_wedge, 1.0);
    let measured = OrderStudy::new(hs, fd_wedge, 1.0);
    let pass = algebraic.order_ok(MIN_ORDER)
        && measured.order_ok(MIN_ORDER)
        && spread < K_SPREAD
        && within(start, Duration::from_secs(5));
    line(
        "weingarten_property",
        pass,
        format!(
            "wedge with algebraic K {:.1e} ({}), with frame K order {:.2?}; K spread {spread:.1e}",
            algebraic.finest_residual(),
            if algebraic.exact { "exact" } else { "truncation" },
            measured.orders
        ),
    );
    assert!(pass);
}

#[test]
fn determinism() {
    let mut cfg = demo_config();
    cfg.refine = 2;
    let opts = VerifyOptions::default();
    let a = report_json(&run_checks(&cfg, &opts).unwrap());
    let b = report_json(&run_checks(&cfg, &opts).unwrap());
    let mut integrated = cfg.clone();
    integrated.psi = PsiSpec::Integrate { psi0: 0.3 };
    let c = report_json(&run_checks(&integrated, &opts).unwrap());
    let d = report_json(&run_checks(&integrated, &opts).unwrap());
    let obj = || {
        let p = Pipeline::build(&cfg, cfg.grid).unwrap();
        let mut buf = Vec::new();
        write_obj(&p.frame(Default::default()).unwrap(), &mut buf).unwrap();
        buf
    };
    let pass = a == b && c == d && obj() == obj();
    line(
        "determinism",
        pass,
        format!("report bytes {} and {}, identical on rerun", a.len(), c.len()),
    );
    assert!(pass);
}
