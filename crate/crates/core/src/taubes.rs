//! Commutative vortices: radial solve of the Taubes equation, lift to the
//! grid, vortex number and decay certificates.
//!
//! With `u = log|phi|^2` the vortex equations reduce away from the zeros to
//! `lap u = 2(e^u - 1)`. For `N` coincident zeros at the origin the solver
//! works with the smooth even function `v = u - N log(r^2/(1+r^2))`, which
//! satisfies `lap v = 2(e^u - 1) + 4N/(1+r^2)^2`.

use std::f64::consts::SQRT_2;
use std::fmt::Write as _;
use std::io;
use std::path::Path;

use rayon::prelude::*;
use thiserror::Error;

use crate::field::{GaugeField, ScalarField, C64, I};
use crate::grid::Grid2D;
use crate::quadrature::{integrate, ls_slope, shell_maxima};
use crate::special::bessel_k01;
use crate::stencil::{dz, dzbar};

#[derive(Debug, Error)]
pub enum TaubesError {
    #[error("winding number must be non-negative, got {0}")]
    InvalidWinding(i64),
    #[error("invalid solver parameter: {0}")]
    InvalidParameter(String),
    #[error("radial solve did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("grid half extent {grid} exceeds the profile range {profile}")]
    GridLargerThanProfile { grid: f64, profile: f64 },
    #[error("field is not real: imaginary part {0:e}")]
    NonRealField(f64),
    #[error("malformed profile file: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Radial vortex profile on the uniform cell-centered grid `r_j = (j + 1/2) dr`.
#[derive(Debug, Clone, PartialEq)]
pub struct VortexProfile {
    pub winding: u32,
    pub r_max: f64,
    pub tol: f64,
    /// Final residual sup-norm of the discrete system.
    pub residual: f64,
    pub iterations: usize,
    pub r: Vec<f64>,
    /// `log |phi|^2`.
    pub u: Vec<f64>,
    /// `|phi|`.
    pub f: Vec<f64>,
    v: Vec<f64>,
}

/// Regular reference `N log(r^2/(1+r^2))` subtracted from `u`.
fn reference(n: f64, r: f64) -> f64 {
    -n * (1.0 / (r * r)).ln_1p()
}

fn reference_source(n: f64, r: f64) -> f64 {
    let s = 1.0 + r * r;
    4.0 * n / (s * s)
}

/// `K0(sqrt2 r) / K0(sqrt2 r_last)`, the exact linear tail.
fn tail_ratio(r: f64, r_last: f64) -> f64 {
    let (k, _) = bessel_k01(SQRT_2 * r).expect("positive radius");
    let (k_last, _) = bessel_k01(SQRT_2 * r_last).expect("positive radius");
    k / k_last
}

struct RadialSystem {
    n: f64,
    dr: f64,
    r: Vec<f64>,
    g: Vec<f64>,
    src: Vec<f64>,
    /// Ghost radii and tail ratios beyond the last node.
    ghost_r: [f64; 2],
    ghost_k: [f64; 2],
}

impl RadialSystem {
    fn new(winding: u32, r_max: f64, n_r: usize) -> Self {
        let n = winding as f64;
        let dr = r_max / n_r as f64;
        let r: Vec<f64> = (0..n_r).map(|j| (j as f64 + 0.5) * dr).collect();
        let g = r.iter().map(|&r| reference(n, r)).collect();
        let src = r.iter().map(|&r| reference_source(n, r)).collect();
        let r_last = r[n_r - 1];
        let ghost_r = [r_last + dr, r_last + 2.0 * dr];
        let ghost_k = [tail_ratio(ghost_r[0], r_last), tail_ratio(ghost_r[1], r_last)];
        Self { n, dr, r, g, src, ghost_r, ghost_k }
    }

    /// `v` padded with two mirror ghosts at the axis and two tail ghosts outside.
    fn extend(&self, v: &[f64]) -> Vec<f64> {
        let m = v.len();
        let mut e = Vec::with_capacity(m + 4);
        e.push(v[1]);
        e.push(v[0]);
        e.extend_from_slice(v);
        let u_last = v[m - 1] + self.g[m - 1];
        for k in 0..2 {
            let ug = self.ghost_k[k] * u_last;
            e.push(ug - reference(self.n, self.ghost_r[k]));
        }
        e
    }

    fn residual(&self, v: &[f64]) -> Vec<f64> {
        let e = self.extend(v);
        let dr = self.dr;
        let c2 = 1.0 / (12.0 * dr * dr);
        let c1 = 1.0 / (12.0 * dr);
        (0..v.len())
            .map(|j| {
                let (a, b, c, d, f) = (e[j], e[j + 1], e[j + 2], e[j + 3], e[j + 4]);
                let vrr = (-a + 16.0 * b - 30.0 * c + 16.0 * d - f) * c2;
                let vr = (a - 8.0 * b + 8.0 * d - f) * c1;
                let u = v[j] + self.g[j];
                vrr + vr / self.r[j] - 2.0 * u.exp_m1() - self.src[j]
            })
            .collect()
    }

    /// Second-order tridiagonal approximation of the Jacobian: `(lower, diag, upper)`.
    fn jacobian(&self, v: &[f64]) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let m = v.len();
        let dr = self.dr;
        let mut lo = vec![0.0; m];
        let mut di = vec![0.0; m];
        let mut up = vec![0.0; m];
        for j in 0..m {
            let r = self.r[j];
            let a = 1.0 / (dr * dr) - 1.0 / (2.0 * dr * r);
            let c = 1.0 / (dr * dr) + 1.0 / (2.0 * dr * r);
            di[j] = -2.0 / (dr * dr) - 2.0 * (v[j] + self.g[j]).exp();
            if j == 0 {
                di[j] += a; // mirror ghost v_{-1} = v_0
            } else {
                lo[j] = a;
            }
            if j == m - 1 {
                di[j] += c * self.ghost_k[0];
            } else {
                up[j] = c;
            }
        }
        (lo, di, up)
    }

    /// First derivative `v'` on the nodes, from the padded array.
    fn slope(&self, v: &[f64]) -> Vec<f64> {
        let e = self.extend(v);
        let c1 = 1.0 / (12.0 * self.dr);
        (0..v.len()).map(|j| (e[j] - 8.0 * e[j + 1] + 8.0 * e[j + 3] - e[j + 4]) * c1).collect()
    }
}

fn thomas(lo: &[f64], di: &[f64], up: &[f64], rhs: &[f64]) -> Vec<f64> {
    let m = di.len();
    let mut c = vec![0.0; m];
    let mut d = vec![0.0; m];
    c[0] = up[0] / di[0];
    d[0] = rhs[0] / di[0];
    for j in 1..m {
        let den = di[j] - lo[j] * c[j - 1];
        c[j] = up[j] / den;
        d[j] = (rhs[j] - lo[j] * d[j - 1]) / den;
    }
    let mut x = vec![0.0; m];
    x[m - 1] = d[m - 1];
    for j in (0..m - 1).rev() {
        x[j] = d[j] - c[j] * x[j + 1];
    }
    x
}

fn sup(x: &[f64]) -> f64 {
    x.iter().fold(0.0, |a, b| a.max(b.abs()))
}

const MAX_NEWTON: usize = 400;

/// Damped Newton relaxation of the radial Taubes equation.
pub fn solve_radial_taubes(
    winding: i64,
    r_max: f64,
    n_r: usize,
    tol: f64,
) -> Result<VortexProfile, TaubesError> {
    if winding < 0 {
        return Err(TaubesError::InvalidWinding(winding));
    }
    if !(r_max >= 12.0 && r_max.is_finite()) {
        return Err(TaubesError::InvalidParameter(format!("r_max = {r_max} must be at least 12")));
    }
    if n_r < 1024 {
        return Err(TaubesError::InvalidParameter(format!("n_r = {n_r} must be at least 1024")));
    }
    if !(tol > 0.0 && tol <= 1e-8) {
        return Err(TaubesError::InvalidParameter(format!("tol = {tol} must lie in (0, 1e-8]")));
    }
    let winding = winding as u32;
    let sys = RadialSystem::new(winding, r_max, n_r);
    let mut v = vec![0.0; n_r];
    let mut res = sys.residual(&v);
    let mut norm = sup(&res);
    let mut iterations = 0;
    while norm > tol {
        if iterations == MAX_NEWTON {
            return Err(TaubesError::NoConvergence { iterations, residual: norm });
        }
        iterations += 1;
        let (lo, di, up) = sys.jacobian(&v);
        let rhs: Vec<f64> = res.iter().map(|x| -x).collect();
        let step = thomas(&lo, &di, &up, &rhs);
        let mut alpha = 1.0;
        loop {
            let trial: Vec<f64> = v.iter().zip(&step).map(|(a, s)| a + alpha * s).collect();
            let tres = sys.residual(&trial);
            let tnorm = sup(&tres);
            if tnorm < norm || alpha < 1.0 / 64.0 {
                v = trial;
                res = tres;
                norm = tnorm;
                break;
            }
            alpha *= 0.5;
        }
    }
    let u: Vec<f64> = v.iter().zip(&sys.g).map(|(a, b)| a + b).collect();
    let f = u.iter().map(|u| (0.5 * u).exp()).collect();
    Ok(VortexProfile { winding, r_max, tol, residual: norm, iterations, r: sys.r, u, f, v })
}

/// Values of the profile needed for lifting at one radius.
#[derive(Debug, Clone, Copy)]
struct RadialSample {
    /// `w = u - 2N log r` (smooth).
    w: f64,
    /// `w'(r) / r` (smooth, even).
    q: f64,
}

fn lagrange4(x: f64, x0: f64, h: f64, y: [f64; 4]) -> f64 {
    let t = (x - x0) / h; // nodes at t = 0, 1, 2, 3
    let l0 = -(t - 1.0) * (t - 2.0) * (t - 3.0) / 6.0;
    let l1 = t * (t - 2.0) * (t - 3.0) / 2.0;
    let l2 = -t * (t - 1.0) * (t - 3.0) / 2.0;
    let l3 = t * (t - 1.0) * (t - 2.0) / 6.0;
    l0 * y[0] + l1 * y[1] + l2 * y[2] + l3 * y[3]
}

/// Cubic interpolation of the smooth radial data plus the exact linear tail.
struct Interpolant<'a> {
    p: &'a VortexProfile,
    dr: f64,
    q: Vec<f64>,
    u_last: f64,
    r_last: f64,
    k0_last: f64,
}

impl<'a> Interpolant<'a> {
    fn new(p: &'a VortexProfile) -> Self {
        let n_r = p.r.len();
        let sys = RadialSystem::new(p.winding, p.r_max, n_r);
        let n = p.winding as f64;
        let dv = sys.slope(&p.v);
        let q = p.r.iter().zip(&dv).map(|(&r, &d)| d / r - 2.0 * n / (1.0 + r * r)).collect();
        let r_last = p.r[n_r - 1];
        let (k0_last, _) = bessel_k01(SQRT_2 * r_last).expect("positive radius");
        Self { p, dr: sys.dr, q, u_last: p.u[n_r - 1], r_last, k0_last }
    }

    fn tail(&self, r: f64) -> RadialSample {
        let n = self.p.winding as f64;
        let (k0, k1) = bessel_k01(SQRT_2 * r).expect("positive radius");
        let u = self.u_last * k0 / self.k0_last;
        let du = -SQRT_2 * self.u_last * k1 / self.k0_last;
        RadialSample { w: u - 2.0 * n * r.ln(), q: (du - 2.0 * n / r) / r }
    }

    fn sample(&self, r: f64) -> RadialSample {
        if r >= self.r_last - self.dr {
            return self.tail(r);
        }
        let n = self.p.winding as f64;
        let m = self.p.r.len() as isize;
        // Left neighbour index; nodes j-1 .. j+2 are used, mirrored through the axis.
        let j = ((r / self.dr) - 0.5).floor() as isize;
        let pick = |arr: &[f64], k: isize| -> f64 {
            let kk = if k < 0 { -k - 1 } else { k };
            arr[kk.min(m - 1) as usize]
        };
        let x0 = (j as f64 - 0.5) * self.dr;
        let mut vv = [0.0; 4];
        let mut qq = [0.0; 4];
        for s in 0..4 {
            vv[s] = pick(&self.p.v, j - 1 + s as isize);
            qq[s] = pick(&self.q, j - 1 + s as isize);
        }
        let v = lagrange4(r, x0, self.dr, vv);
        let q = lagrange4(r, x0, self.dr, qq);
        RadialSample { w: v - n * (r * r).ln_1p(), q }
    }
}

/// Lifts the radial profile to `phi_0 = f(r) e^{i N theta}` and the gauge
/// potential `Abar_0 = -(i/2) (w'/r) z` that makes `Dbar phi_0 = 0`.
pub fn lift_to_grid(p: &VortexProfile, g: &Grid2D) -> Result<(ScalarField, GaugeField), TaubesError> {
    if g.half_extent() > p.r_max {
        return Err(TaubesError::GridLargerThanProfile { grid: g.half_extent(), profile: p.r_max });
    }
    let interp = Interpolant::new(p);
    let n = p.winding as i32;
    let samples: Vec<(f64, f64, RadialSample)> = (0..g.len())
        .into_par_iter()
        .map(|idx| {
            let (x1, x2) = g.position(idx);
            (x1, x2, interp.sample(x1.hypot(x2)))
        })
        .collect();
    let phi: Vec<C64> = samples
        .par_iter()
        .map(|&(x1, x2, s)| C64::new(x1, x2).powi(n) * (0.5 * s.w).exp())
        .collect();
    let abar: Vec<C64> = samples
        .par_iter()
        .map(|&(x1, x2, s)| -I * 0.5 * s.q * crate::field::z_of(x1, x2))
        .collect();
    let phi = ScalarField::from_parts(*g, phi, 0);
    let abar = ScalarField::from_parts(*g, abar, 0);
    Ok((phi, GaugeField::from_abar(abar)))
}

/// The smooth part `w = log|phi_0|^2 - 2N log r` lifted to the grid
/// (real-valued field); `-1/2 lap w` is a second construction of `B_0`.
pub fn lift_regular_log(p: &VortexProfile, g: &Grid2D) -> Result<ScalarField, TaubesError> {
    if g.half_extent() > p.r_max {
        return Err(TaubesError::GridLargerThanProfile { grid: g.half_extent(), profile: p.r_max });
    }
    let interp = Interpolant::new(p);
    Ok(ScalarField::from_real_fn(*g, |x1, x2| interp.sample(x1.hypot(x2)).w))
}

impl VortexProfile {
    /// `|phi|` at radius `r` through the same interpolation used for lifting.
    pub fn f_at(&self, r: f64) -> f64 {
        let s = Interpolant::new(self).sample(r);
        (0.5 * s.w).exp() * r.powi(self.winding as i32)
    }

    pub fn n_r(&self) -> usize {
        self.r.len()
    }

    /// Text form: header `N r_max n_r tol`, then rows `r u f`.
    pub fn to_text(&self) -> String {
        let mut s = format!("{} {:e} {} {:e}\n", self.winding, self.r_max, self.r.len(), self.tol);
        for j in 0..self.r.len() {
            let _ = writeln!(s, "{:e} {:e} {:e}", self.r[j], self.u[j], self.f[j]);
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self, TaubesError> {
        let bad = |m: &str| TaubesError::Parse(m.to_string());
        let mut lines = text.lines();
        let head: Vec<&str> = lines.next().ok_or_else(|| bad("empty file"))?.split_whitespace().collect();
        if head.len() != 4 {
            return Err(bad("header must be `N r_max n_r tol`"));
        }
        let winding: u32 = head[0].parse().map_err(|_| bad("winding"))?;
        let r_max: f64 = head[1].parse().map_err(|_| bad("r_max"))?;
        let n_r: usize = head[2].parse().map_err(|_| bad("n_r"))?;
        let tol: f64 = head[3].parse().map_err(|_| bad("tol"))?;
        let mut r = Vec::with_capacity(n_r);
        let mut u = Vec::with_capacity(n_r);
        let mut f = Vec::with_capacity(n_r);
        for line in lines.filter(|l| !l.trim().is_empty()) {
            let cols: Vec<f64> = line
                .split_whitespace()
                .map(|c| c.parse::<f64>())
                .collect::<Result<_, _>>()
                .map_err(|_| bad("row"))?;
            if cols.len() != 3 {
                return Err(bad("rows must be `r u f`"));
            }
            r.push(cols[0]);
            u.push(cols[1]);
            f.push(cols[2]);
        }
        if r.len() != n_r || n_r < 8 {
            return Err(bad("row count does not match header"));
        }
        let n = winding as f64;
        let v = r.iter().zip(&u).map(|(&r, &u)| u - reference(n, r)).collect();
        Ok(Self { winding, r_max, tol, residual: f64::NAN, iterations: 0, r, u, f, v })
    }

    pub fn save(&self, path: &Path) -> Result<(), TaubesError> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, TaubesError> {
        Self::from_text(&std::fs::read_to_string(path)?)
    }
}

/// Commutative magnetic field `B = -i (d Abar - dbar A)`.
pub fn magnetic_field(a: &GaugeField) -> ScalarField {
    let curl = &dz(&a.abar) - &dzbar(&a.a);
    curl.scale(-I)
}

/// Residuals of the commutative vortex equations:
/// `(B + |phi|^2 - 1, (dbar - i Abar) phi)`.
pub fn bps_residuals(phi: &ScalarField, a: &GaugeField) -> (ScalarField, ScalarField) {
    let b = magnetic_field(a);
    let r1 = b.zip_with(phi, |b, p| b + p.norm_sqr() - 1.0);
    let r2 = dzbar(phi).zip_with(&(&a.abar * phi), |d, ap| d - I * ap);
    (r1, r2)
}

/// `(1/2 pi) * integral of B`; `B` must be real.
pub fn vortex_number(b: &ScalarField) -> Result<f64, TaubesError> {
    let im = b.im().interior_sup(0);
    if im > 1e-10 {
        return Err(TaubesError::NonRealField(im));
    }
    Ok(integrate(b).re / (2.0 * std::f64::consts::PI))
}

/// Exponential-decay certificate for `1/2 (1 - |phi_0|^2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DecayReport {
    pub epsilon: f64,
    /// `M(eps)`: max over shells of `1/2 (1 - |phi|^2) e^{r (1 - eps)}`.
    pub bound_constant: f64,
    /// Fitted rate of `1/2 (1 - |phi|^2) sqrt r` on `[8, 14]`; `None` when the
    /// deficit vanishes identically.
    pub measured_rate: Option<f64>,
    pub pass: bool,
}

const SHELL_WIDTH: f64 = 0.5;

pub fn taubes_decay_check(phi: &ScalarField, epsilon: f64) -> Result<DecayReport, TaubesError> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(TaubesError::InvalidParameter(format!("epsilon = {epsilon} must lie in (0, 1)")));
    }
    let g = *phi.grid();
    let deficit = phi.map(|p| C64::new(0.5 * (1.0 - p.norm_sqr()), 0.0));
    let weighted = deficit.map_with_pos(|x1, x2, d| d * (x1.hypot(x2) * (1.0 - epsilon)).exp());
    let r_hi = g.half_extent() - 2.0;
    let count = ((r_hi - 2.0) / SHELL_WIDTH).floor() as usize;
    let edges: Vec<f64> = (0..=count).map(|s| 2.0 + s as f64 * SHELL_WIDTH).collect();
    let shells = shell_maxima(&weighted, &edges);
    let bound_constant = shells.iter().fold(0.0, |a: f64, s| a.max(s.value));
    let tail: Vec<f64> = shells.iter().filter(|s| s.r >= 6.0).map(|s| s.value).collect();
    let monotone = tail.windows(2).all(|w| w[1] <= w[0]);
    let pass = bound_constant.is_finite() && monotone;

    let fit_edges: Vec<f64> = (0..=12).map(|s| 8.0 + s as f64 * SHELL_WIDTH).collect();
    let fit: Vec<_> = shell_maxima(&deficit, &fit_edges).into_iter().filter(|s| s.value > 0.0).collect();
    let measured_rate = if fit.len() >= 2 {
        let x: Vec<f64> = fit.iter().map(|s| s.r).collect();
        let y: Vec<f64> = fit.iter().map(|s| (s.value * s.r.sqrt()).ln()).collect();
        Some(-ls_slope(&x, &y))
    } else {
        None
    };
    Ok(DecayReport { epsilon, bound_constant, measured_rate, pass })
}
