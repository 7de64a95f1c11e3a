//! Independent numerical oracles shared by the integration tests.
#![allow(dead_code)]

/// Dormand-Prince 5(4) step for a 2D autonomous-in-form system `y' = f(t, y)`.
fn dopri_step<F: Fn(f64, [f64; 2]) -> [f64; 2]>(f: &F, t: f64, y: [f64; 2], h: f64) -> ([f64; 2], f64) {
    const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
    const A: [[f64; 6]; 7] = [
        [0.0; 6],
        [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
        [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
        [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
        [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
        [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
        [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
    ];
    const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
    const B4: [f64; 7] = [
        5179.0 / 57600.0,
        0.0,
        7571.0 / 16695.0,
        393.0 / 640.0,
        -92097.0 / 339200.0,
        187.0 / 2100.0,
        1.0 / 40.0,
    ];
    let mut k = [[0.0; 2]; 7];
    for s in 0..7 {
        let mut ys = y;
        for (j, kj) in k.iter().enumerate().take(s) {
            for d in 0..2 {
                ys[d] += h * A[s][j] * kj[d];
            }
        }
        k[s] = f(t + C[s] * h, ys);
    }
    let mut y5 = y;
    let mut err: f64 = 0.0;
    for d in 0..2 {
        let mut e = 0.0;
        for s in 0..7 {
            y5[d] += h * B5[s] * k[s][d];
            e += h * (B5[s] - B4[s]) * k[s][d];
        }
        err = err.max(e.abs() / (1e-15 + 1e-13 * y5[d].abs()));
    }
    (y5, err)
}

/// Integrates from `t0` to `t1`; `stop` may end the integration early by
/// returning `Some(verdict)`.
pub fn integrate_ode<F, S>(f: F, t0: f64, y0: [f64; 2], t1: f64, stop: S) -> (f64, [f64; 2], Option<bool>)
where
    F: Fn(f64, [f64; 2]) -> [f64; 2],
    S: Fn(f64, [f64; 2]) -> Option<bool>,
{
    let mut t = t0;
    let mut y = y0;
    let mut h = 1e-4 * (t1 - t0);
    while t < t1 {
        if t + h > t1 {
            h = t1 - t;
        }
        let (yn, err) = dopri_step(&f, t, y, h);
        if err <= 1.0 {
            t += h;
            y = yn;
            if let Some(v) = stop(t, y) {
                return (t, y, Some(v));
            }
        }
        let fac = if err == 0.0 { 4.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 4.0) };
        h *= fac;
    }
    (t, y, None)
}

/// Shooting solution of the radial Taubes equation for winding `n >= 1`:
/// bisects on `c0 = lim (u - 2N log r)` and returns `|phi|(r_eval)`.
pub fn shooting_profile(n: u32, r_eval: f64) -> f64 {
    let nf = n as f64;
    let rhs = move |r: f64, y: [f64; 2]| [y[1], -y[1] / r + 2.0 * (r.powf(2.0 * nf) * y[0].exp() - 1.0)];
    let start = |c0: f64| {
        let r0 = 1e-4;
        let c = 2.0 * c0.exp() / (2.0 * nf + 2.0).powi(2);
        let w = c0 - r0 * r0 / 2.0 + c * r0.powf(2.0 * nf + 2.0);
        let dw = -r0 + (2.0 * nf + 2.0) * c * r0.powf(2.0 * nf + 1.0);
        (r0, [w, dw])
    };
    // true: overshoot (u > 0), false: turns back (u' < 0).
    let classify = |c0: f64| -> bool {
        let (r0, y0) = start(c0);
        let (_, _, v) = integrate_ode(rhs, r0, y0, 14.0, |r, y| {
            let u = y[0] + 2.0 * nf * r.ln();
            let du = y[1] + 2.0 * nf / r;
            if u > 0.0 {
                Some(true)
            } else if du < 0.0 {
                Some(false)
            } else {
                None
            }
        });
        v.unwrap_or(true)
    };
    let (mut lo, mut hi) = (-20.0 * nf - 10.0, 10.0);
    assert!(!classify(lo) && classify(hi));
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if classify(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let (r0, y0) = start(lo);
    let (_, y, _) = integrate_ode(rhs, r0, y0, r_eval, |_, _| None);
    (0.5 * (y[0] + 2.0 * nf * r_eval.ln())).exp()
}

const GK_X: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const GK_WK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const GK_WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = GK_WK[7] * fc;
    let mut g = GK_WG[3] * fc;
    for i in 0..7 {
        let x = h * GK_X[i];
        let s = f(c - x) + f(c + x);
        k += GK_WK[i] * s;
        if i % 2 == 1 {
            g += GK_WG[i / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

/// Adaptive Gauss-Kronrod (7/15) quadrature on `[a, b]`.
pub fn adaptive_quad<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    fn rec<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
        let (v, e) = gk15(f, a, b);
        if e <= tol || depth > 50 {
            return v;
        }
        let m = 0.5 * (a + b);
        rec(f, a, m, 0.5 * tol, depth + 1) + rec(f, m, b, 0.5 * tol, depth + 1)
    }
    rec(&f, a, b, tol, 0)
}

/// `K0(x) = int_0^inf cos(x t) / sqrt(t^2 + 1) dt`, summed over half periods
/// with repeated averaging of the alternating partial sums.
pub fn k0_by_oscillatory_integral(x: f64) -> f64 {
    let half = std::f64::consts::PI / x;
    let f = |t: f64| (x * t).cos() / (t * t + 1.0).sqrt();
    // The first lobe [0, pi/(2x)] is positive; afterwards lobes alternate.
    let first = adaptive_quad(f, 0.0, 0.5 * half, 1e-15);
    let mut partial = Vec::new();
    let mut acc = first;
    for k in 0..60 {
        let a = (0.5 + k as f64) * half;
        acc += adaptive_quad(f, a, a + half, 1e-15);
        partial.push(acc);
    }
    // Euler-type repeated averaging.
    let mut row = partial;
    while row.len() > 1 {
        row = row.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
    }
    row[0]
}

use ncvortex_core::field::{GaugeField, ScalarField};
use ncvortex_core::grid::make_grid;
use ncvortex_core::taubes::{lift_to_grid, solve_radial_taubes};

/// Lifted commutative vortex of winding `n` on the `(half_extent, size)` grid.
pub fn vortex_background(n: i64, half_extent: f64, size: usize) -> (ScalarField, GaugeField) {
    let p = solve_radial_taubes(n, half_extent.max(16.0), 4096, 1e-10).unwrap();
    let g = make_grid(half_extent, size).unwrap();
    lift_to_grid(&p, &g).unwrap()
}
