//! Modified Bessel functions of the second kind, orders 0 and 1.
//!
//! Power series for `x <= 2`; Steed's continued fraction (Temme's CF2)
//! above. Both branches reach close to machine precision.

use thiserror::Error;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
#[error("modified Bessel function evaluated at non-positive argument {0}")]
pub struct DomainError(pub f64);

fn series(x: f64) -> (f64, f64) {
    let t = 0.25 * x * x;
    let l = (0.5 * x).ln();
    // K0 = -(ln(x/2) + gamma) I0 + sum t^k/(k!)^2 H_k
    // K1 = 1/x + ln(x/2) I1 - (x/4) sum t^k/(k!(k+1)!) (psi(k+1) + psi(k+2))
    let mut term0 = 1.0; // t^k/(k!)^2
    let mut term1 = 1.0; // t^k/(k!(k+1)!)
    let mut harmonic = 0.0;
    let mut i0 = 0.0;
    let mut i1 = 0.0;
    let mut s0 = 0.0;
    let mut s1 = 0.0;
    for k in 0..60 {
        let kf = k as f64;
        if k > 0 {
            term0 *= t / (kf * kf);
            term1 *= t / (kf * (kf + 1.0));
        }
        let psi_k1 = -EULER_GAMMA + harmonic;
        let psi_k2 = psi_k1 + 1.0 / (kf + 1.0);
        i0 += term0;
        i1 += term1;
        s0 += term0 * harmonic;
        s1 += term1 * (psi_k1 + psi_k2);
        harmonic += 1.0 / (kf + 1.0);
        if term0 < 1e-18 * i0 && term1 < 1e-18 * i1 {
            break;
        }
    }
    let k0 = -(l + EULER_GAMMA) * i0 + s0;
    let k1 = 1.0 / x + l * (0.5 * x * i1) - 0.25 * x * s1;
    (k0, k1)
}

fn continued_fraction(x: f64) -> (f64, f64) {
    let mut b = 2.0 * (1.0 + x);
    let mut d = 1.0 / b;
    let mut h = d;
    let mut delh = d;
    let mut q1 = 0.0;
    let mut q2 = 1.0;
    let a1 = 0.25;
    let mut q = a1;
    let mut c = a1;
    let mut a = -a1;
    let mut s = 1.0 + q * delh;
    for i in 2..10_000 {
        let fi = i as f64;
        a -= 2.0 * (fi - 1.0);
        c = -a * c / fi;
        let qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = 1.0 / (b + a * d);
        delh *= b * d - 1.0;
        h += delh;
        let dels = q * delh;
        s += dels;
        if (dels / s).abs() < 1e-17 {
            break;
        }
    }
    h *= a1;
    let k0 = (std::f64::consts::PI / (2.0 * x)).sqrt() * (-x).exp() / s;
    let k1 = k0 * (x + 0.5 - h) / x;
    (k0, k1)
}

/// `(K0(x), K1(x))`.
pub fn bessel_k01(x: f64) -> Result<(f64, f64), DomainError> {
    if !(x > 0.0) {
        return Err(DomainError(x));
    }
    Ok(if x <= 2.0 { series(x) } else { continued_fraction(x) })
}

pub fn bessel_k0(x: f64) -> Result<f64, DomainError> {
    bessel_k01(x).map(|p| p.0)
}

pub fn bessel_k1(x: f64) -> Result<f64, DomainError> {
    bessel_k01(x).map(|p| p.1)
}
