mod common;

use std::f64::consts::PI;

use ncvortex_core::field::{z_of, GaugeField, ScalarField, C64, I};
use ncvortex_core::grid::make_grid;
use ncvortex_core::moyal::*;
use ncvortex_core::quadrature::{decay_exponent_fit, integrate};

fn trunc(k: usize) -> StarTruncation {
    StarTruncation::new(k, 0.1).unwrap()
}

#[test]
fn canonical_commutators() {
    let g = make_grid(3.0, 96).unwrap();
    let z = ScalarField::from_fn(g, z_of);
    let c = star_commutator(&z, &z.conj(), trunc(3)).unwrap();
    let one = ScalarField::constant(g, C64::new(1.0, 0.0));
    assert!((&c[1] - &one).record_sup() <= 1e-12);
    for k in [0, 2, 3] {
        assert!(c[k].record_sup() <= 1e-12, "order {k}");
    }
    let x1 = ScalarField::from_real_fn(g, |x, _| x);
    let x2 = ScalarField::from_real_fn(g, |_, y| y);
    let c = star_commutator(&x1, &x2, trunc(2)).unwrap();
    let total = sum_orders(&c, 0.1);
    let expected = ScalarField::constant(g, C64::new(0.0, 0.1));
    assert!((&total - &expected).record_sup() <= 1e-13);
}

/// Term-by-term expansion: `z * zbar = z zbar + theta/2`.
#[test]
fn z_star_zbar_expansion() {
    let g = make_grid(3.0, 96).unwrap();
    let z = ScalarField::from_fn(g, z_of);
    let s = star(&z, &z.conj(), trunc(2)).unwrap();
    let expected = ScalarField::from_real_fn(g, |x, y| z_of(x, y).norm_sqr() + 0.1 * 0.5);
    assert!((&sum_orders(&s, 0.1) - &expected).record_sup() <= 1e-12);
}

fn cubic(g: ncvortex_core::Grid2D, c: [C64; 4]) -> ScalarField {
    ScalarField::from_fn(g, move |x, y| {
        let z = z_of(x, y);
        let zb = z.conj();
        c[0] + c[1] * z * zb * zb + c[2] * z.powi(3) + c[3] * zb * zb * zb + z * zb
    })
}

#[test]
fn associativity_on_cubics() {
    // Intermediate products reach degree 6, where the stencils are no
    // longer exact; this grid balances truncation against roundoff.
    let g = make_grid(0.25, 384).unwrap();
    let t = trunc(2);
    let f = cubic(g, [C64::new(1.0, 0.0), C64::new(0.3, 0.1), C64::new(-0.7, 0.0), C64::new(0.0, 0.4)]);
    let h = cubic(g, [C64::new(0.0, 1.0), C64::new(1.0, 0.0), C64::new(0.2, -0.5), C64::new(0.5, 0.0)]);
    let k = cubic(g, [C64::new(-0.5, 0.0), C64::new(0.0, -0.3), C64::new(1.0, 0.0), C64::new(0.8, 0.2)]);
    let left = star_series(&star(&f, &h, t).unwrap(), &[k.clone()], t).unwrap();
    let right = star_series(&[f.clone()], &star(&h, &k, t).unwrap(), t).unwrap();
    for n in 0..=2 {
        let gap = (&left[n] - &right[n]).record_sup();
        assert!(gap <= 1e-10, "order {n}: {gap:e}");
    }
}

#[test]
fn hermiticity_order_by_order() {
    let g = make_grid(4.0, 128).unwrap();
    let f = ScalarField::from_fn(g, |x, y| C64::new((-(x * x + y * y)).exp(), x * (-(y * y)).exp() * 0.3));
    let h = ScalarField::from_fn(g, |x, y| C64::new(y.sin(), x.cos()) * (-(0.5 * x * x)).exp());
    let lhs = star(&f, &h, trunc(3)).unwrap();
    let rhs = star(&h.conj(), &f.conj(), trunc(3)).unwrap();
    for n in 0..=3 {
        assert!((&lhs[n].conj() - &rhs[n]).record_sup() <= 1e-9, "order {n}");
    }
}

#[test]
fn trace_property() {
    let g = make_grid(6.0, 192).unwrap();
    let f = ScalarField::from_fn(g, |x, y| C64::new(x, y * y) * (-(x * x + y * y)).exp());
    let h = ScalarField::from_fn(g, |x, y| C64::new(1.0 + y, -x) * (-(0.7 * (x - 0.3).powi(2) + y * y)).exp());
    let fh = star(&f, &h, trunc(3)).unwrap();
    let hf = star(&h, &f, trunc(3)).unwrap();
    for n in 0..=3 {
        let gap = (integrate(&fh[n]) - integrate(&hf[n])).norm();
        assert!(gap <= 1e-8, "order {n}: {gap:e}");
    }
}

#[test]
fn vacuum_series_is_clean() {
    let g = make_grid(4.0, 64).unwrap();
    let s = ThetaSeries::vacuum(g, trunc(2));
    let (r1, r2) = nc_bps_residual(&s);
    assert!(r1.iter().chain(&r2).all(|r| r.interior_sup(0) == 0.0));
    assert!(nc_magnetic_field(&s).iter().all(|b| b.interior_sup(0) == 0.0));
    assert_eq!(action_value(&s), (0.0, 0.0));
    assert_eq!(coeff_c_k(&s, 0).unwrap().interior_sup(0), 0.0);
    assert_eq!(coeff_e_k(&s, 1, 1.0).unwrap().interior_sup(0), 0.0);
}

#[test]
fn c1_matches_direct_assembly() {
    let g = make_grid(4.0, 128).unwrap();
    let t = trunc(1);
    let phi0 = ScalarField::from_fn(g, |x, y| C64::new(x.tanh(), y.tanh()));
    let phi1 = ScalarField::from_fn(g, |x, y| C64::new(0.2, -0.1) * (-(x * x + y * y)).exp());
    let a0 = GaugeField::from_abar(ScalarField::from_fn(g, |x, y| C64::new(y, x) * (-(0.5 * (x * x + y * y))).exp()));
    let a1 = GaugeField::from_abar(ScalarField::from_fn(g, |x, y| C64::new(x * y, 0.3) * (-(x * x + y * y)).exp()));
    let s = ThetaSeries::new(vec![phi0.clone(), phi1.clone()], vec![a0.clone(), a1.clone()], t).unwrap();

    let pp = star_series(&[phi0.clone(), phi1.clone()], &[phi0.conj(), phi1.conj()], t).unwrap();
    let comm0 = star_commutator(&a0.a, &a0.abar, t).unwrap();
    let displayed = &(&phi1 * &phi0.conj()) + &(&phi0 * &phi1.conj());
    let direct = &(&pp[1] - &comm0[1]) - &displayed;
    let c1 = coeff_c_k(&s, 1).unwrap();
    let scale = direct.record_sup();
    assert!((&c1 - &direct).record_sup() <= 1e-10 * scale);

    let ap = star_series(&[a0.abar.clone(), a1.abar.clone()], &[phi0.clone(), phi1.clone()], t).unwrap();
    let direct_d = (&ap[1] - &(&(&a1.abar * &phi0) + &(&a0.abar * &phi1))).scale(-I);
    let d1 = coeff_d_k(&s, 1).unwrap();
    assert!((&d1 - &direct_d).record_sup() <= 1e-10 * direct_d.record_sup());

    // B_1 of a commutative series is minus the first bracket of A_0 and Abar_0.
    let s0 = ThetaSeries::commutative(phi0, a0, t).unwrap();
    let mut padded = s0.clone();
    padded.pad_with_zeros();
    let b = nc_magnetic_field(&padded);
    assert!((&b[1] + &comm0[1]).record_sup() <= 1e-14);
    assert!(b[1].record_sup() > 1e-3);
}

#[test]
fn vortex_background_orders() {
    let (phi0, a0) = common::vortex_background(1, 16.0, 512);
    let one = ScalarField::constant(*phi0.grid(), C64::new(1.0, 0.0));
    let s = ThetaSeries::commutative(phi0.clone(), a0, trunc(1)).unwrap();

    let b = nc_magnetic_field(&s);
    let b_scalar = &one - &phi0.map(|v| C64::new(v.norm_sqr(), 0.0));
    assert!((&b[0] - &b_scalar).record_sup() <= 1e-5);

    let (r1, r2) = nc_bps_residual(&s);
    assert!(r1[0].record_sup() <= 1e-5 && r2[0].record_sup() <= 1e-5);

    let c1 = coeff_c_k(&s, 1).unwrap();
    assert!(c1.record_imag_sup() <= 1e-10 * c1.record_sup().max(1.0));
    let d1 = coeff_d_k(&s, 1).unwrap();
    let d_rate = decay_exponent_fit(&d1, 8.0, 14.0).unwrap();
    assert!(d_rate >= 2.7, "D_1 exponent {d_rate}");
    let e1 = coeff_e_k(&s, 1, 1.0).unwrap();
    assert!(e1.record_imag_sup() <= 1e-8, "Im E_1 {}", e1.record_imag_sup());
    let e_rate = decay_exponent_fit(&e1, 8.0, 14.0).unwrap();
    assert!(e_rate >= 1.8, "E_1 exponent {e_rate}");
    // masked nodes carry zeros
    let g = *e1.grid();
    assert!((0..g.len()).filter(|&i| g.radius(i) < 1.0).all(|i| e1.values()[i] == C64::new(0.0, 0.0)));
}

#[test]
fn mask_must_exclude_the_zero() {
    let g = make_grid(4.0, 64).unwrap();
    let phi0 = ScalarField::from_fn(g, |x, y| if x.hypot(y) < 0.2 { C64::new(0.0, 0.0) } else { C64::new(1.0, 0.0) });
    let s = ThetaSeries::commutative(phi0, GaugeField::zeros(g), trunc(1)).unwrap();
    assert!(matches!(coeff_e_k(&s, 1, 0.0), Err(MoyalError::MaskTooSmall { .. })));
    assert!(coeff_e_k(&s, 1, 0.5).is_ok());
}

#[test]
fn bogomolny_saturation() {
    for n in [1i64, 2] {
        let (phi0, a0) = common::vortex_background(n, 16.0, 512);
        let s = ThetaSeries::commutative(phi0, a0, StarTruncation::new(0, 0.0).unwrap()).unwrap();
        let (action, topo) = action_value(&s);
        let target = 2.0 * PI * n as f64;
        assert!((action / target - 1.0).abs() <= 1e-2, "N={n}: S = {action}");
        assert!((action / topo - 1.0).abs() <= 1e-2, "N={n}: S_T = {topo}");
    }
}
