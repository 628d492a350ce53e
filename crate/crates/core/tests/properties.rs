use std::f64::consts::{FRAC_PI_2, PI};

use bonnet::config::RunConfig;
use bonnet::forms2d::{d_oneform, d_scalar, Grid, ScalarField};
use bonnet::lax_psi::{fold_half_pi, PsiBranch, PsiCase};
use bonnet::pipeline::Pipeline;
use bonnet::q_family::{QFamily, QKind};
use bonnet::surface_embed::{integrate_frame_forms, read_obj, write_obj, FrameForms, FrameSeed};
use proptest::prelude::*;

fn family() -> impl Strategy<Value = QFamily> {
    (0usize..3, prop::bool::ANY, 0.3f64..2.0).prop_map(|(k, pos, a)| {
        let sign = if pos { 1 } else { -1 };
        match k {
            0 => QFamily::rational(sign),
            1 => QFamily::trig(sign, a).unwrap(),
            _ => QFamily::hyper(sign, a).unwrap(),
        }
    })
}

/// A point strictly inside the guarded sample interval.
fn inside(fam: &QFamily, u: f64) -> f64 {
    let (lo, hi) = fam.guard().sample_interval();
    lo + (hi - lo) * (0.05 + 0.9 * u)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn fold_lands_in_half_open_interval(x in -1e3f64..1e3) {
        let y = fold_half_pi(x);
        prop_assert!(y > -FRAC_PI_2 - 1e-12 && y <= FRAC_PI_2 + 1e-12);
        let k = ((x - y) / PI).round();
        prop_assert!((x - y - k * PI).abs() < 1e-9);
    }

    #[test]
    fn q_first_integral_holds(fam in family(), u in 0.0f64..1.0) {
        let s = inside(&fam, u);
        let d = fam.derivatives(s).unwrap();
        let kappa = fam.kappa().unwrap();
        let scale = d.q.powi(4).max(1.0);
        prop_assert!((d.qp * d.qp - d.q.powi(4) - kappa * d.q * d.q).abs() < 1e-9 * scale);
        prop_assert!((d.qpp - 2.0 * d.q.powi(3) - kappa * d.q).abs() < 1e-9 * scale);
    }

    #[test]
    fn kappa_sign_follows_kind(fam in family()) {
        let k = fam.kappa().unwrap();
        match fam.kind() {
            QKind::Rational => prop_assert!(k.abs() < 1e-12),
            QKind::Trig => prop_assert!(k < 0.0),
            QKind::Hyper => prop_assert!(k > 0.0),
        }
    }

    #[test]
    fn closed_forms_solve_the_pair(
        k in 0usize..4,
        pos in prop::bool::ANY,
        shift in -0.5f64..0.5,
        u in 0.0f64..1.0,
        t in -1.0f64..1.0,
    ) {
        let sign = if pos { 1 } else { -1 };
        let (case, fam) = match k {
            0 => (PsiCase::RationalUpper, QFamily::rational(1)),
            1 => (PsiCase::RationalLower, QFamily::rational(-1)),
            2 => (PsiCase::TrigAppendix, QFamily::trig(sign, 1.0).unwrap()),
            _ => (PsiCase::HyperAppendix, QFamily::hyper(sign, 1.0).unwrap()),
        };
        let b = PsiBranch::new(case, shift, shift, fam).unwrap();
        let s = inside(&fam, u);
        if let Ok((r1, r2)) = b.lax_residuals_analytic(s, t) {
            let q = fam.q(s).unwrap().abs().max(1.0);
            prop_assert!(r1.abs() < 1e-9 * q && r2.abs() < 1e-9 * q, "{r1} {r2}");
        }
    }

    #[test]
    fn refinement_keeps_coarse_nodes(ns in 5usize..20, nt in 5usize..20, levels in 0u32..3) {
        let g = Grid::new(0.5, 1.5, -1.0, 2.0, ns, nt).unwrap();
        let r = g.refined(levels);
        let f = 1usize << levels;
        for i in 0..ns {
            prop_assert!((g.s(i) - r.s(i * f)).abs() < 1e-12);
        }
        for j in 0..nt {
            prop_assert!((g.t(j) - r.t(j * f)).abs() < 1e-12);
        }
    }

    #[test]
    fn exact_forms_are_closed(a in -2.0f64..2.0, b in -2.0f64..2.0) {
        // d(d f) vanishes to rounding for quadratics, which the stencils reproduce
        let g = Grid::new(0.0, 1.0, 0.0, 1.0, 9, 9).unwrap();
        let f = ScalarField::from_fn(g, |s, t| a * s * s + b * s * t + t * t).unwrap();
        let dd = d_oneform(&d_scalar(&f).unwrap());
        prop_assert!(dd.max_abs_interior_margin(0) < 1e-10);
    }

    #[test]
    fn frame_stays_orthonormal_under_rigid_seed(angle in -PI..PI, x0 in -5.0f64..5.0) {
        let mut cfg = RunConfig::demo();
        cfg.grid = Grid::new(1.0, 2.0, 0.0, 1.0, 9, 9).unwrap();
        let p = Pipeline::build(&cfg, cfg.grid).unwrap();
        let forms = FrameForms::from_coframes(&p.coframes, &p.profile).unwrap();
        let (c, s) = (angle.cos(), angle.sin());
        let seed = FrameSeed {
            x: nalgebra::Vector3::new(x0, 0.0, 0.0),
            e1: nalgebra::Vector3::new(c, s, 0.0),
            e2: nalgebra::Vector3::new(-s, c, 0.0),
            e3: nalgebra::Vector3::new(0.0, 0.0, 1.0),
        };
        let base = integrate_frame_forms(&forms, &FrameSeed::default(), Default::default()).unwrap();
        let moved = integrate_frame_forms(&forms, &seed, Default::default()).unwrap();
        prop_assert!(moved.orthonormality_drift() < 1e-12);
        // a rigid motion of the seed moves the surface rigidly
        let g = base.grid();
        for (i, j) in [(0, 0), (3, 5), (8, 8)] {
            let a = base.x(i, j);
            let expect = nalgebra::Vector3::new(x0 + c * a.x - s * a.y, s * a.x + c * a.y, a.z);
            prop_assert!((moved.x(i, j) - expect).norm() < 1e-12, "{:?}", g);
        }
    }
}

#[test]
fn obj_round_trip_keeps_vertices() {
    let mut cfg = RunConfig::demo();
    cfg.grid = Grid::new(1.0, 2.0, 0.0, 1.0, 7, 5).unwrap();
    let p = Pipeline::build(&cfg, cfg.grid).unwrap();
    let f = p.frame(Default::default()).unwrap();
    let mut buf = Vec::new();
    write_obj(&f, &mut buf).unwrap();
    let mesh = read_obj(buf.as_slice()).unwrap();
    assert_eq!(mesh.vertices.len(), 35);
    assert_eq!(mesh.faces.len(), 2 * 6 * 4);
    for (v, x) in mesh.vertices.iter().zip(f.positions()) {
        for c in 0..3 {
            assert_eq!(v[c], x[c]);
        }
    }
}
