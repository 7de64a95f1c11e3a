//! Order-by-order solution of the deformed vortex equations and the
//! vortex-number preservation check.
//!
//! Every solved equation is written with the standard Laplacian
//! `lap = d1^2 + d2^2 = 2 d dbar`. Order-`k` unknowns are fixed by the gauge
//! condition `Im(conj(phi_0) phi_k) = 0` and vanish on the two outer rings.

use std::f64::consts::PI;

use rayon::prelude::*;
use thiserror::Error;

use crate::field::{GaugeField, ScalarField, C64, I};
use crate::grid::{Grid2D, GridError};
use crate::linsolve::{cg, gmres, SolveError, SolveStats};
use crate::spectral::periodic_multiplier_2d;
use crate::moyal::{coeff_c_k, coeff_d_k, coeff_e_k, nc_bps_residual, nc_magnetic_field, MoyalError, ThetaSeries};
use crate::quadrature::{decay_exponent_fit, integrate, weighted_sup_norm, WeightedNormSpec};
use crate::special::bessel_k0;
use crate::stencil::{complex_raw, dz, dzbar, Which};

/// Rings held at zero by the order-`k` boundary condition.
pub const DIRICHLET_RINGS: usize = 2;

/// Iteration cap for the Krylov solves.
pub const MAX_KRYLOV: usize = 200_000;

/// Krylov dimension between GMRES restarts in the direct solve.
pub const GMRES_RESTART: usize = 40;

/// Vortex-number shift per order tolerated by the preservation verdict.
pub const FLUX_TOLERANCE: f64 = 1e-2;

#[derive(Debug, Error)]
pub enum PerturbationError {
    #[error(transparent)]
    Moyal(#[from] MoyalError),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error("potential is negative ({0:e}); the operator is not positive definite")]
    NotSpd(f64),
    #[error("invalid Schrodinger problem: {0}")]
    InvalidProblem(String),
    #[error("|phi_0| = {modulus:e} at r = {radius} outside the mask")]
    MaskTooSmall { radius: f64, modulus: f64 },
}

/// `(-lap + V) u = f` with `V >= 0` everywhere and `V >= c_floor` outside
/// `compact_radius`.
#[derive(Debug, Clone)]
pub struct SchrodingerProblem {
    v: ScalarField,
    f: ScalarField,
    c_floor: f64,
    compact_radius: f64,
}

impl SchrodingerProblem {
    pub fn new(v: ScalarField, f: ScalarField, c_floor: f64, compact_radius: f64) -> Result<Self, PerturbationError> {
        v.check_same_grid(&f)?;
        if !(c_floor > 0.0) {
            return Err(PerturbationError::InvalidProblem(format!("c_floor must be positive, got {c_floor}")));
        }
        let im = v.im().interior_sup(0);
        if im > 1e-12 {
            return Err(PerturbationError::InvalidProblem(format!("potential has imaginary part {im:e}")));
        }
        let vmin = v.values().iter().map(|x| x.re).fold(f64::INFINITY, f64::min);
        if vmin < -1e-12 {
            return Err(PerturbationError::NotSpd(vmin));
        }
        let g = *v.grid();
        if let Some(idx) = (0..g.len()).find(|&i| g.radius(i) >= compact_radius && v.values()[i].re < c_floor) {
            return Err(PerturbationError::InvalidProblem(format!(
                "potential {} below c_floor {c_floor} at r = {}",
                v.values()[idx].re,
                g.radius(idx)
            )));
        }
        Ok(Self { v, f, c_floor, compact_radius })
    }

    pub fn grid(&self) -> &Grid2D {
        self.v.grid()
    }

    pub fn c_floor(&self) -> f64 {
        self.c_floor
    }

    pub fn compact_radius(&self) -> f64 {
        self.compact_radius
    }

    /// Discrete `(-lap + V)` on interior nodes with zero Dirichlet rings.
    fn apply(&self, u: &[C64]) -> Vec<C64> {
        let g = *self.grid();
        let n = g.n();
        let c = 1.0 / (12.0 * g.h() * g.h());
        let lo = DIRICHLET_RINGS;
        let hi = n - DIRICHLET_RINGS;
        let at = |i1: usize, i2: usize| -> C64 {
            if (lo..hi).contains(&i1) && (lo..hi).contains(&i2) {
                u[g.index(i1, i2)]
            } else {
                C64::new(0.0, 0.0)
            }
        };
        let v = self.v.values();
        (0..g.len())
            .into_par_iter()
            .map(|idx| {
                let (i1, i2) = (idx % n, idx / n);
                if !((lo..hi).contains(&i1) && (lo..hi).contains(&i2)) {
                    return C64::new(0.0, 0.0);
                }
                let u0 = u[idx];
                let lap1 = -at(i1 - 2, i2) + at(i1 - 1, i2) * 16.0 - u0 * 30.0 + at(i1 + 1, i2) * 16.0 - at(i1 + 2, i2);
                let lap2 = -at(i1, i2 - 2) + at(i1, i2 - 1) * 16.0 - u0 * 30.0 + at(i1, i2 + 1) * 16.0 - at(i1, i2 + 2);
                -(lap1 + lap2) * c + u0 * v[idx].re
            })
            .collect()
    }

    fn rhs(&self) -> Vec<C64> {
        let g = *self.grid();
        self.f.values().iter().enumerate().map(|(i, &x)| if g.ring(i) >= DIRICHLET_RINGS { x } else { C64::new(0.0, 0.0) }).collect()
    }
}

/// Solution of a [`SchrodingerProblem`].
#[derive(Debug, Clone)]
pub struct SchrodingerSolution {
    pub u: ScalarField,
    pub stats: SolveStats,
}

impl SchrodingerSolution {
    /// `sup (1 + |x|^n) |u|`, the membership certificate for the weighted space.
    pub fn certificate(&self, n: u32) -> f64 {
        weighted_sup_norm(&self.u, WeightedNormSpec::new(n, 0).expect("order 0 is valid"))
    }
}

/// Solves `(-lap + V) u = f` by conjugate gradients to relative residual `tol`.
pub fn solve_schrodinger(p: &SchrodingerProblem, tol: f64) -> Result<SchrodingerSolution, PerturbationError> {
    solve_schrodinger_from(p, tol, None)
}

/// As [`solve_schrodinger`], starting from `initial`.
pub fn solve_schrodinger_from(
    p: &SchrodingerProblem,
    tol: f64,
    initial: Option<&ScalarField>,
) -> Result<SchrodingerSolution, PerturbationError> {
    if !(tol > 0.0 && tol <= 1e-8) {
        return Err(PerturbationError::InvalidProblem(format!("tolerance must lie in (0, 1e-8], got {tol}")));
    }
    let g = *p.grid();
    let x0 = initial.map(|f| {
        f.values().iter().enumerate().map(|(i, &x)| if g.ring(i) >= DIRICHLET_RINGS { x } else { C64::new(0.0, 0.0) }).collect()
    });
    let (u, stats) = cg(|x| p.apply(x), &p.rhs(), x0, tol, MAX_KRYLOV)?;
    let u = ScalarField::new(g, u)?.with_margin(DIRICHLET_RINGS);
    Ok(SchrodingerSolution { u, stats })
}

/// Output of one order of the direct solve.
#[derive(Debug, Clone)]
pub struct OrderSolution {
    pub phi: ScalarField,
    pub gauge: GaugeField,
    pub stats: SolveStats,
}

fn interior_mask(g: &Grid2D) -> Vec<bool> {
    (0..g.len()).map(|i| g.ring(i) >= DIRICHLET_RINGS).collect()
}

/// Linearization around `(phi_0, Abar_0)` in unknowns `(p, a) = (phi_k, Abar_k)`:
/// `L1 = dbar p - i Abar_0 p - i phi_0 a` everywhere, `L2 = 2 Im(d a) + 2 conj(phi_0) p`
/// on interior nodes and `L2 = p` on the outer rings.
struct DirectOperator<'a> {
    grid: Grid2D,
    phi0: &'a [C64],
    abar0: &'a [C64],
    interior: Vec<bool>,
}

impl DirectOperator<'_> {
    fn n(&self) -> usize {
        self.grid.len()
    }

    /// The order-`k` equations are
    /// `0 = dbar p - i Abar_0 p - i phi_0 a + D_k` and
    /// `0 = -i(d a - dbar conj(a)) + 2 Re(conj(phi_0) p) + C_k`, where
    /// `-i(d a - conj(d a)) = 2 Im(d a)`; the gauge condition supplies the
    /// imaginary part of the second row.
    fn apply(&self, x: &[C64]) -> Vec<C64> {
        let n = self.n();
        let (p, a) = x.split_at(n);
        let dbp = complex_raw(&self.grid, p, Which::Dzbar);
        let da = complex_raw(&self.grid, a, Which::Dz);
        let mut out = vec![C64::new(0.0, 0.0); 2 * n];
        let (o1, o2) = out.split_at_mut(n);
        o1.par_iter_mut().enumerate().for_each(|(i, o)| {
            *o = dbp[i] - I * self.abar0[i] * p[i] - I * self.phi0[i] * a[i];
        });
        o2.par_iter_mut().enumerate().for_each(|(i, o)| {
            *o = if self.interior[i] { C64::new(2.0 * da[i].im, 0.0) + self.phi0[i].conj() * p[i] * 2.0 } else { p[i] };
        });
        out
    }
}

/// Right preconditioner: the reduction `p = phi_0 (psi + i chi)` with
/// regularized division by `phi_0` and the potential replaced by its
/// far-field value, so `-lap + V` inverts by FFT.
struct Preconditioner<'a> {
    op: &'a DirectOperator<'a>,
    /// `conj(phi_0) / (|phi_0|^2 + eps)`.
    inv_phi: Vec<C64>,
}

/// Guard against exact zeros of `phi_0` inside the preconditioner. It must
/// stay below `|phi_0|^2` at the nodes nearest a zero, or the core is left
/// badly preconditioned.
const PRECOND_EPS: f64 = 1e-14;

/// Far-field value of `2|phi_0|^2`.
const PRECOND_MASS: f64 = 2.0;

impl<'a> Preconditioner<'a> {
    fn new(op: &'a DirectOperator<'a>) -> Self {
        let inv_phi = op.phi0.iter().map(|v| v.conj() / (v.norm_sqr() + PRECOND_EPS)).collect();
        Self { op, inv_phi }
    }

    fn apply(&self, y: &[C64]) -> Vec<C64> {
        let g = self.op.grid;
        let n = g.len();
        let (f1, f2) = y.split_at(n);
        let q: Vec<C64> = f1.par_iter().zip(self.inv_phi.par_iter()).map(|(f, w)| f * w).collect();
        let dq = complex_raw(&g, &q, Which::Dz);
        let src: Vec<C64> = (0..n).into_par_iter().map(|i| C64::new(f2[i].re - 2.0 * dq[i].re, 0.0)).collect();
        let h = g.h();
        // Symbol of the fourth-order first-derivative stencil, so the inverse
        // matches the composed stencils up to the Nyquist frequency.
        let sym = |k: f64| (8.0 * (k * h).sin() - (2.0 * k * h).sin()) / (6.0 * h);
        let psi = periodic_multiplier_2d(&g, &src, |k1, k2| 1.0 / (sym(k1).powi(2) + sym(k2).powi(2) + PRECOND_MASS));
        let mut out = vec![C64::new(0.0, 0.0); 2 * n];
        let (op, oa) = out.split_at_mut(n);
        op.par_iter_mut().enumerate().for_each(|(i, o)| {
            *o = if self.op.interior[i] {
                let chi = 0.5 * f2[i].im / (self.op.phi0[i].norm_sqr() + PRECOND_EPS);
                self.op.phi0[i] * C64::new(psi[i].re, chi)
            } else {
                f2[i]
            };
        });
        // The first row is then solved exactly for `a` given `p`.
        let dp = complex_raw(&g, op, Which::Dzbar);
        oa.par_iter_mut().enumerate().for_each(|(i, o)| {
            *o = I * self.inv_phi[i] * (f1[i] - dp[i] + I * self.op.abar0[i] * op[i]);
        });
        out
    }
}

/// Solves the order-`k` equations for `(phi_k, A_k)` without dividing by
/// `phi_0`, by right-preconditioned restarted GMRES on the real linear system to
/// relative residual `tol`. The preconditioner changes only the iteration
/// count, not the discrete solution.
pub fn solve_order_k_direct(s: &ThetaSeries, k: usize, tol: f64) -> Result<OrderSolution, PerturbationError> {
    let c = coeff_c_k(s, k)?;
    let d = coeff_d_k(s, k)?;
    let g = *s.grid();
    let op = DirectOperator { grid: g, phi0: s.phi(0).values(), abar0: s.gauge(0).abar.values(), interior: interior_mask(&g) };
    let n = g.len();
    let mut b = vec![C64::new(0.0, 0.0); 2 * n];
    for i in 0..n {
        b[i] = -d.values()[i];
        if op.interior[i] {
            b[n + i] = -c.values()[i];
        }
    }
    let pre = Preconditioner::new(&op);
    let (y, stats) = gmres(|y| op.apply(&pre.apply(y)), &b, GMRES_RESTART, tol, MAX_KRYLOV)?;
    let x = pre.apply(&y);
    let (p, a) = x.split_at(n);
    let phi = ScalarField::new(g, p.to_vec())?;
    let abar = ScalarField::new(g, a.to_vec())?;
    Ok(OrderSolution { phi, gauge: GaugeField::from_abar(abar), stats })
}

/// `varphi_k = 2 Re(phi_k / phi_0)` from `(-lap + 2|phi_0|^2) varphi_k = 2 E_k`,
/// with the source set to zero inside `mask_radius`.
pub fn solve_order_k_schrodinger(
    s: &ThetaSeries,
    k: usize,
    mask_radius: f64,
    tol: f64,
) -> Result<SchrodingerSolution, PerturbationError> {
    let e = coeff_e_k(s, k, mask_radius)?;
    let v = s.phi(0).map(|p| C64::new(2.0 * p.norm_sqr(), 0.0));
    let f = e.map(|x| C64::new(2.0 * x.re, 0.0));
    let c_floor = 1e-3;
    let compact = compact_radius_for(&v, c_floor);
    let problem = SchrodingerProblem::new(v, f, c_floor, compact)?;
    solve_schrodinger(&problem, tol)
}

/// Smallest radius outside which `V >= c_floor`.
fn compact_radius_for(v: &ScalarField, c_floor: f64) -> f64 {
    let g = v.grid();
    (0..g.len()).filter(|&i| v.values()[i].re < c_floor).map(|i| g.radius(i)).fold(0.0, f64::max) + g.h()
}

/// `Abar_k = (dbar phi_k - i Abar_0 phi_k + D_k) / (i phi_0)`. Values inside
/// `mask_radius` use the same formula but are not of record; nodes where
/// `phi_0` vanishes are set to zero.
pub fn reconstruct_a_k(s: &ThetaSeries, phi_k: &ScalarField, k: usize, mask_radius: f64) -> Result<GaugeField, PerturbationError> {
    let d = coeff_d_k(s, k)?;
    let phi0 = s.phi(0);
    let g = *s.grid();
    for i in 0..g.len() {
        let m = phi0.values()[i].norm();
        if g.radius(i) >= mask_radius && m < crate::moyal::MASK_FLOOR {
            return Err(PerturbationError::MaskTooSmall { radius: g.radius(i), modulus: m });
        }
    }
    let num = &dzbar(phi_k).axpy(-I, &(&s.gauge(0).abar * phi_k)) + &d;
    let abar = num.zip_with(phi0, |a, p| if p.norm() < crate::moyal::MASK_FLOOR { C64::new(0.0, 0.0) } else { a / (I * p) });
    Ok(GaugeField::from_abar(abar))
}

/// `int B_k` and its pieces.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FluxCorrection {
    pub flux: f64,
    /// `int -i(d Abar_k - dbar A_k)`.
    pub curl_part: f64,
    /// `-int [A, Abar]_k`.
    pub bracket_part: f64,
    /// `oint A_k . dl` on the circle of radius `circulation_radius`.
    pub circulation: f64,
    pub circulation_radius: f64,
}

/// Flux correction of order `k`.
pub fn flux_correction(s: &ThetaSeries, k: usize) -> Result<FluxCorrection, PerturbationError> {
    if s.populated() <= k {
        return Err(MoyalError::MissingLowerOrder { needed: k + 1, populated: s.populated() }.into());
    }
    let b = nc_magnetic_field(s);
    let gk = s.gauge(k);
    let curl = (&dz(&gk.abar) - &dzbar(&gk.a)).scale(-I);
    let flux = integrate(&b[k]).re;
    let curl_part = integrate(&curl).re;
    let radius = s.grid().half_extent() - 4.0;
    Ok(FluxCorrection { flux, curl_part, bracket_part: flux - curl_part, circulation: circulation(gk, radius), circulation_radius: radius })
}

/// `oint (A1 dx1 + A2 dx2)` counter-clockwise on a centered circle.
pub fn circulation(a: &GaugeField, radius: f64) -> f64 {
    if radius <= 0.0 {
        return 0.0;
    }
    let (a1, a2) = a.cartesian();
    let m = 2048;
    let dt = 2.0 * PI / m as f64;
    (0..m)
        .map(|j| {
            let t = j as f64 * dt;
            let (x, y) = (radius * t.cos(), radius * t.sin());
            let v = a1.sample(x, y).re * (-t.sin()) + a2.sample(x, y).re * t.cos();
            v * radius * dt
        })
        .sum()
}

/// Fitted algebraic decay exponents on `[8, 14]` for one order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayRow {
    pub order: usize,
    pub phi: f64,
    pub gauge: f64,
    pub d: f64,
    pub e: f64,
}

impl DecayRow {
    /// Conservative acceptance targets `(phi, A, D, E)` for order `k`.
    pub fn conservative_targets(k: usize) -> [f64; 4] {
        let k = k as f64;
        [2.0 * k - 0.2, 2.0 * k + 0.7, 2.0 * k + 0.7, 2.0 * k - 0.2]
    }

    /// Full targets `alpha_k = 2k` (phi, E) and `beta_k = 2k + 1` (A, D).
    pub fn full_targets(k: usize) -> [f64; 4] {
        let k = k as f64;
        [2.0 * k, 2.0 * k + 1.0, 2.0 * k + 1.0, 2.0 * k]
    }

    pub fn meets_conservative(&self) -> bool {
        let t = Self::conservative_targets(self.order);
        self.phi >= t[0] && self.gauge >= t[1] && self.d >= t[2] && self.e >= t[3]
    }
}

/// Decay exponents of `phi_k`, `A_k`, `D_k`, `E_k` fitted on `[r_lo, r_hi]`.
pub fn decay_row(s: &ThetaSeries, k: usize, mask_radius: f64, r_lo: f64, r_hi: f64) -> Result<DecayRow, PerturbationError> {
    let phi = decay_exponent_fit(s.phi(k), r_lo, r_hi)?;
    let gauge = decay_exponent_fit(&s.gauge(k).a, r_lo, r_hi)?;
    let d = decay_exponent_fit(&coeff_d_k(s, k)?, r_lo, r_hi)?;
    let e = decay_exponent_fit(&coeff_e_k(s, k, mask_radius)?, r_lo, r_hi)?;
    Ok(DecayRow { order: k, phi, gauge, d, e })
}

/// Vortex-number bookkeeping across orders.
#[derive(Debug, Clone, PartialEq)]
pub struct PreservationReport {
    pub order: usize,
    pub n0: f64,
    /// `int B_k`, indexed by `k = 1..=order` (entry 0 is unused and zero).
    pub flux: Vec<f64>,
    pub n_deformed: f64,
    /// Largest record-interior residual of either equation, per order.
    pub residual_sup: Vec<f64>,
    pub cross_validation_gap: Option<f64>,
    pub pass: bool,
}

/// Aggregates the flux corrections and residuals of orders `0..=order`.
pub fn preservation_report(s: &ThetaSeries, order: usize) -> Result<PreservationReport, PerturbationError> {
    if s.populated() <= order {
        return Err(MoyalError::MissingLowerOrder { needed: order + 1, populated: s.populated() }.into());
    }
    let b = nc_magnetic_field(s);
    let n0 = integrate(&b[0]).re / (2.0 * PI);
    let mut flux = vec![0.0];
    for bk in b.iter().take(order + 1).skip(1) {
        flux.push(integrate(bk).re);
    }
    let theta = s.trunc().theta();
    let n_deformed = n0 + flux.iter().enumerate().skip(1).map(|(j, f)| theta.powi(j as i32) * f / (2.0 * PI)).sum::<f64>();
    let (r1, r2) = nc_bps_residual(s);
    let residual_sup = (0..=order).map(|k| r1[k].record_sup().max(r2[k].record_sup())).collect();
    let pass = flux.iter().skip(1).all(|f| (f / (2.0 * PI)).abs() <= FLUX_TOLERANCE);
    Ok(PreservationReport { order, n0, flux, n_deformed, residual_sup, cross_validation_gap: None, pass })
}

/// Relative sup-norm gap on `r_lo <= r <= r_hi` between `2 Re(phi_k/phi_0)`
/// of the populated series and the Schrodinger pathway with the source
/// zeroed inside `mask_radius`.
pub fn cross_validation_gap(
    s: &ThetaSeries,
    k: usize,
    mask_radius: f64,
    r_lo: f64,
    r_hi: f64,
    tol: f64,
) -> Result<f64, PerturbationError> {
    if s.populated() <= k {
        return Err(MoyalError::MissingLowerOrder { needed: k + 1, populated: s.populated() }.into());
    }
    let schr = solve_order_k_schrodinger(s, k, mask_radius, tol)?;
    let direct = s.phi(k).zip_with(s.phi(0), |p, q| if q.norm() == 0.0 { C64::new(0.0, 0.0) } else { C64::new(2.0 * (p / q).re, 0.0) });
    let scale = direct.annulus_sup(r_lo, r_hi);
    let gap = (&schr.u - &direct).annulus_sup(r_lo, r_hi);
    Ok(if scale > 0.0 { gap / scale } else { gap })
}

/// Fills orders `populated()..=K` by the direct solve.
pub fn solve_series(s: &mut ThetaSeries, tol: f64) -> Result<Vec<SolveStats>, PerturbationError> {
    let mut stats = Vec::new();
    for k in s.populated()..=s.trunc().order() {
        let sol = solve_order_k_direct(s, k, tol)?;
        stats.push(sol.stats);
        s.push(sol.phi, sol.gauge)?;
    }
    Ok(stats)
}

/// Fitted constants of the two kernel bounds for one source point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelBounds {
    /// `max G / (-ln |x - y|)` over `h <= |x - y| <= 0.5`.
    pub near: f64,
    /// `max G / G_c` over `4 <= |x - y| <= R - 4`.
    pub far: f64,
}

impl KernelBounds {
    pub fn finite(&self) -> bool {
        self.near.is_finite() && self.far.is_finite() && self.near > 0.0 && self.far > 0.0
    }
}

/// Samples the Green's function of `-lap + V` for a unit source at the node
/// nearest `source` and fits the near and far bounds against `G_c`.
pub fn kernel_bounds(v: &ScalarField, c: f64, source: (f64, f64), tol: f64) -> Result<KernelBounds, PerturbationError> {
    let g = *v.grid();
    let h = g.h();
    let idx = (0..g.len())
        .min_by(|&a, &b| {
            let da = (g.position(a).0 - source.0).hypot(g.position(a).1 - source.1);
            let db = (g.position(b).0 - source.0).hypot(g.position(b).1 - source.1);
            da.total_cmp(&db)
        })
        .expect("non-empty grid");
    let mut f = vec![C64::new(0.0, 0.0); g.len()];
    f[idx] = C64::new(1.0 / (h * h), 0.0);
    let compact = compact_radius_for(v, c);
    let problem = SchrodingerProblem::new(v.clone(), ScalarField::new(g, f)?, c, compact)?;
    let u = solve_schrodinger(&problem, tol)?.u;
    let (sx, sy) = g.position(idx);
    let r_far = g.half_extent() - 4.0;
    let mut near: f64 = 0.0;
    let mut far: f64 = 0.0;
    for i in 0..g.len() {
        let (x, y) = g.position(i);
        let d = (x - sx).hypot(y - sy);
        let val = u.values()[i].re;
        if d >= h * 0.999 && d <= 0.5 {
            near = near.max(val / -d.ln());
        } else if d >= 4.0 && d <= r_far && g.radius(i) <= r_far {
            let gc = bessel_k0(c.sqrt() * d).map_err(|e| PerturbationError::InvalidProblem(e.to_string()))? / (2.0 * PI);
            far = far.max(val / gc);
        }
    }
    Ok(KernelBounds { near, far })
}
