mod common;

use ncvortex_core::field::{ScalarField, C64};
use ncvortex_core::grid::make_grid;
use ncvortex_core::quadrature::ls_slope;
use ncvortex_core::stencil::laplacian_std;
use ncvortex_core::taubes::*;

fn solve(n: i64) -> VortexProfile {
    solve_radial_taubes(n, 16.0, 4096, 1e-10).unwrap()
}

#[test]
fn unit_vortex_profile_matches_shooting() {
    let p = solve(1);
    assert!(p.f.windows(2).all(|w| w[1] > w[0]));
    assert!(*p.f.last().unwrap() >= 1.0 - 1e-6);
    assert!(p.f.iter().all(|&f| (0.0..1.0).contains(&f)));
    let shot = common::shooting_profile(1, 1.0);
    let ours = p.f_at(1.0);
    assert!((ours - shot).abs() < 1e-6, "relaxation {ours} vs shooting {shot}");
}

#[test]
fn double_vortex_profile_matches_shooting() {
    let p = solve(2);
    let shot = common::shooting_profile(2, 1.5);
    assert!((p.f_at(1.5) - shot).abs() < 1e-6);
}

#[test]
fn multiplicity_law_near_origin() {
    for n in [1i64, 2, 3] {
        let p = solve(n);
        let r1 = p.r[0];
        let (x, y): (Vec<f64>, Vec<f64>) =
            p.r.iter().zip(&p.f).filter(|(&r, _)| r <= 20.0 * r1).map(|(r, f)| (r.ln(), f.ln())).unzip();
        let slope = ls_slope(&x, &y);
        assert!((slope - n as f64).abs() <= 0.02, "N={n}: slope {slope}");
        // f / r^N tends to a positive constant
        let c0 = p.f[0] / p.r[0].powi(n as i32);
        let c1 = p.f[1] / p.r[1].powi(n as i32);
        assert!(c0 > 0.0 && (c0 / c1 - 1.0).abs() < 1e-3);
    }
}

#[test]
fn vacuum_lift_is_trivial() {
    let p = solve(0);
    let g = make_grid(16.0, 64).unwrap();
    let (phi, a) = lift_to_grid(&p, &g).unwrap();
    assert!(phi.values().iter().all(|&v| v == C64::new(1.0, 0.0)));
    assert_eq!(a.a.interior_sup(0), 0.0);
    let (r1, r2) = bps_residuals(&phi, &a);
    assert_eq!(r1.interior_sup(0), 0.0);
    assert_eq!(r2.interior_sup(0), 0.0);
}

#[test]
fn lift_rejects_oversized_grid() {
    let p = solve_radial_taubes(1, 12.0, 1024, 1e-9).unwrap();
    let g = make_grid(16.0, 64).unwrap();
    assert!(matches!(lift_to_grid(&p, &g), Err(TaubesError::GridLargerThanProfile { .. })));
}

#[test]
fn lifted_unit_vortex_solves_bps_on_reference_grid() {
    let p = solve(1);
    let g = make_grid(16.0, 512).unwrap();
    let (phi, a) = lift_to_grid(&p, &g).unwrap();
    let (r1, r2) = bps_residuals(&phi, &a);
    assert!(r2.record_sup() <= 1e-5, "dbar residual {}", r2.record_sup());
    assert!(r1.record_sup() <= 1e-5, "field residual {}", r1.record_sup());
    assert_eq!(a.reality_defect(), 0.0);

    // Two constructions of B_0.
    let w = lift_regular_log(&p, &g).unwrap();
    let b_from_w = laplacian_std(&w).scale_re(-0.5);
    let b_from_phi = phi.map(|v| C64::new(1.0 - v.norm_sqr(), 0.0));
    let gap = (&b_from_w - &b_from_phi).record_sup();
    assert!(gap <= 1e-5, "B0 dual gap {gap}");

    let n0 = vortex_number(&magnetic_field(&a).re()).unwrap();
    assert!((n0 - 1.0).abs() < 1e-3, "{n0}");

    // Strict positivity of the deficit.
    assert!(phi.values().iter().all(|v| 1.0 - v.norm_sqr() > 0.0));
}

#[test]
fn residual_shrinks_at_fourth_order() {
    let p = solve(1);
    let mut last = f64::INFINITY;
    let mut ratios = Vec::new();
    for n in [64usize, 128, 256] {
        let g = make_grid(16.0, n).unwrap();
        let (phi, a) = lift_to_grid(&p, &g).unwrap();
        let (_, r2) = bps_residuals(&phi, &a);
        let s = r2.record_sup();
        ratios.push(last / s);
        last = s;
    }
    // 2^4 = 16 per halving; allow for pre-asymptotic behaviour.
    assert!(ratios[2] > 10.0, "{ratios:?}");
}

#[test]
fn vortex_number_basics() {
    let g = make_grid(8.0, 128).unwrap();
    assert_eq!(vortex_number(&ScalarField::zeros(g)).unwrap(), 0.0);
    let gauss = ScalarField::from_real_fn(g, |x, y| (-(x * x + y * y)).exp());
    assert!((vortex_number(&gauss).unwrap() - 0.5).abs() < 1e-6);
    let complex = gauss.scale(C64::new(1.0, 1e-6));
    assert!(matches!(vortex_number(&complex), Err(TaubesError::NonRealField(_))));
}

#[test]
fn decay_certificates() {
    let g = make_grid(16.0, 256).unwrap();
    let vac = taubes_decay_check(&ScalarField::constant(g, C64::new(1.0, 0.0)), 0.1).unwrap();
    assert_eq!(vac.bound_constant, 0.0);
    assert!(vac.pass);
    assert!(vac.measured_rate.is_none());

    let p = solve(1);
    let (phi, _) = lift_to_grid(&p, &g).unwrap();
    let rep = taubes_decay_check(&phi, 0.1).unwrap();
    assert!(rep.pass);
    let rate = rep.measured_rate.unwrap();
    assert!(rate >= 0.9);
    assert!((1.3..=1.45).contains(&rate), "rate {rate}");
    assert!(taubes_decay_check(&phi, 1.5).is_err());
}

#[test]
fn higher_windings_quantize() {
    let g = make_grid(16.0, 256).unwrap();
    for n in [2i64, 3] {
        let p = solve(n);
        let (phi, a) = lift_to_grid(&p, &g).unwrap();
        let n0 = vortex_number(&magnetic_field(&a).re()).unwrap();
        assert!((n0 - n as f64).abs() < 1e-3, "N={n}: {n0}");
        let b = phi.map(|v| C64::new(1.0 - v.norm_sqr(), 0.0));
        assert!((vortex_number(&b).unwrap() - n as f64).abs() < 1e-3);
    }
}

#[test]
fn profile_file_roundtrip() {
    let p = solve(2);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("profile.txt");
    p.save(&path).unwrap();
    let q = VortexProfile::load(&path).unwrap();
    assert_eq!(q.winding, 2);
    assert_eq!(q.f, p.f);
    let g = make_grid(16.0, 64).unwrap();
    assert_eq!(lift_to_grid(&p, &g).unwrap().0.values().len(), lift_to_grid(&q, &g).unwrap().0.values().len());
    let text = std::fs::read_to_string(&path).unwrap();
    let header: Vec<&str> = text.lines().next().unwrap().split_whitespace().collect();
    assert_eq!(header.len(), 4);
    assert!(VortexProfile::from_text("1 16 4096\n").is_err());
}
