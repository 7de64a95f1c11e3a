//! Truncated Moyal star product and the order-by-order deformed vortex equations.
//!
//! Every product is kept as a list of coefficients of `theta^n`; a single
//! field is formed only when a value of `theta` is supplied.

use thiserror::Error;

use crate::field::{GaugeField, ScalarField, C64, I};
use crate::grid::{Grid2D, GridError};
use crate::quadrature::integrate;
use crate::stencil::{dz, dzbar, mixed_table};

/// Highest supported truncation order; each order costs two more derivatives.
pub const MAX_ORDER: usize = 6;

/// Smallest `|phi_0|` accepted outside a core mask.
pub const MASK_FLOOR: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum MoyalError {
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error("truncation order {0} exceeds the ceiling {MAX_ORDER}")]
    OrderTooHigh(usize),
    #[error("theta must be finite and non-negative, got {0}")]
    BadTheta(f64),
    #[error("order {needed} requested but only {populated} orders are populated")]
    MissingLowerOrder { needed: usize, populated: usize },
    #[error("order {order} outside the series truncation {max}")]
    OrderOutOfRange { order: usize, max: usize },
    #[error("|phi_0| = {modulus:e} at r = {radius} outside the mask")]
    MaskTooSmall { radius: f64, modulus: f64 },
    #[error("series needs matching scalar and gauge orders ({phi} vs {gauge})")]
    ShapeMismatch { phi: usize, gauge: usize },
}

/// Truncation order `K` and deformation parameter `theta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StarTruncation {
    order: usize,
    theta: f64,
}

impl StarTruncation {
    pub fn new(order: usize, theta: f64) -> Result<Self, MoyalError> {
        if order > MAX_ORDER {
            return Err(MoyalError::OrderTooHigh(order));
        }
        if !(theta.is_finite() && theta >= 0.0) {
            return Err(MoyalError::BadTheta(theta));
        }
        Ok(Self { order, theta })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }
}

/// `sum_n theta^n terms[n]`; at `theta = 0` this is `terms[0]` bit for bit.
pub fn sum_orders(terms: &[ScalarField], theta: f64) -> ScalarField {
    let mut out = terms[0].clone();
    if theta == 0.0 {
        return out;
    }
    let mut t = 1.0;
    for term in &terms[1..] {
        t *= theta;
        out = out.axpy(C64::new(t, 0.0), term);
    }
    out
}

/// `sum_n theta^n values[n]` for scalars.
pub fn sum_scalar_orders(values: &[f64], theta: f64) -> f64 {
    if theta == 0.0 {
        return values[0];
    }
    values.iter().rev().fold(0.0, |acc, v| acc * theta + v)
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, i| acc * i as f64)
}

/// Derivative tables of two factors, reused across orders.
struct Pair {
    tf: Vec<Vec<ScalarField>>,
    tg: Vec<Vec<ScalarField>>,
}

impl Pair {
    fn new(f: &ScalarField, g: &ScalarField, max_order: usize) -> Self {
        Self { tf: mixed_table(f, max_order), tg: mixed_table(g, max_order) }
    }

    /// `sum_j (-1)^j C(n,j) (d^{n-j} dbar^j f)(dbar^{n-j} d^j g)`, with the
    /// terms `j` and `n - j` added together first so that symmetric
    /// cancellations are exact.
    fn bracket_sum(&self, n: usize) -> ScalarField {
        let term = |j: usize| -> ScalarField {
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            let c = sign * binomial(n, j);
            self.tf[n - j][j].zip_with(&self.tg[j][n - j], move |a, b| a * b * c)
        };
        let mut acc: Option<ScalarField> = None;
        for j in 0..=n / 2 {
            let pair = if 2 * j == n { term(j) } else { &term(j) + &term(n - j) };
            acc = Some(match acc {
                None => pair,
                Some(s) => &s + &pair,
            });
        }
        acc.expect("n >= 0 gives at least one term")
    }

    /// `s_n(f, g)`.
    fn term(&self, n: usize) -> ScalarField {
        if n == 0 {
            return &self.tf[0][0] * &self.tg[0][0];
        }
        let c = 0.5f64.powi(n as i32) / factorial(n);
        self.bracket_sum(n).scale_re(c)
    }
}

/// Coefficients `s_0..s_K` of `f * g`, normalized so that `[z, zbar] = theta`.
pub fn star(f: &ScalarField, g: &ScalarField, t: StarTruncation) -> Result<Vec<ScalarField>, MoyalError> {
    f.check_same_grid(g)?;
    let pair = Pair::new(f, g, t.order);
    Ok((0..=t.order).map(|n| pair.term(n)).collect())
}

/// Coefficients of `f * g - g * f`; even orders vanish identically.
pub fn star_commutator(f: &ScalarField, g: &ScalarField, t: StarTruncation) -> Result<Vec<ScalarField>, MoyalError> {
    f.check_same_grid(g)?;
    let pair = Pair::new(f, g, t.order);
    Ok((0..=t.order)
        .map(|n| if n % 2 == 0 { ScalarField::zeros(*f.grid()) } else { pair.term(n).scale_re(2.0) })
        .collect())
}

/// Coefficient of `theta^k` in the product of two series, or in their
/// commutator when `commutator` is set.
fn series_coeff(f: &[ScalarField], g: &[ScalarField], k: usize, commutator: bool) -> ScalarField {
    let grid = *f[0].grid();
    let mut out = ScalarField::zeros(grid);
    for (a, fa) in f.iter().enumerate().take(k + 1) {
        for (b, gb) in g.iter().enumerate().take(k + 1 - a) {
            let n = k - a - b;
            if commutator && n % 2 == 0 {
                continue;
            }
            let pair = Pair::new(fa, gb, n);
            let mut t = pair.term(n);
            if commutator {
                t = t.scale_re(2.0);
            }
            out = &out + &t;
        }
    }
    out
}

/// Coefficients `0..=K` of the product of two `theta` series.
pub fn star_series(f: &[ScalarField], g: &[ScalarField], t: StarTruncation) -> Result<Vec<ScalarField>, MoyalError> {
    for x in f.iter().chain(g) {
        f[0].check_same_grid(x)?;
    }
    Ok(series_product(f, g, t.order, false))
}

/// Coefficients `0..=kmax` of a series product.
fn series_product(f: &[ScalarField], g: &[ScalarField], kmax: usize, commutator: bool) -> Vec<ScalarField> {
    (0..=kmax).map(|k| series_coeff(f, g, k, commutator)).collect()
}

fn conj_series(f: &[ScalarField]) -> Vec<ScalarField> {
    f.iter().map(|x| x.conj()).collect()
}

/// Expansions `phi = sum theta^k phi_k`, `A = sum theta^k A_k`.
///
/// Only the leading `populated()` orders are stored; the others are
/// treated as unknown rather than zero where that matters.
#[derive(Debug, Clone)]
pub struct ThetaSeries {
    phi: Vec<ScalarField>,
    gauge: Vec<GaugeField>,
    trunc: StarTruncation,
}

impl ThetaSeries {
    pub fn new(phi: Vec<ScalarField>, gauge: Vec<GaugeField>, trunc: StarTruncation) -> Result<Self, MoyalError> {
        if phi.len() != gauge.len() || phi.is_empty() {
            return Err(MoyalError::ShapeMismatch { phi: phi.len(), gauge: gauge.len() });
        }
        if phi.len() > trunc.order + 1 {
            return Err(MoyalError::OrderOutOfRange { order: phi.len() - 1, max: trunc.order });
        }
        for (p, a) in phi.iter().zip(&gauge) {
            phi[0].check_same_grid(p)?;
            phi[0].check_same_grid(&a.a)?;
            phi[0].check_same_grid(&a.abar)?;
        }
        Ok(Self { phi, gauge, trunc })
    }

    /// Series whose only populated entry is the commutative solution.
    pub fn commutative(phi0: ScalarField, a0: GaugeField, trunc: StarTruncation) -> Result<Self, MoyalError> {
        Self::new(vec![phi0], vec![a0], trunc)
    }

    /// Vacuum `phi = 1`, `A = 0` with every order populated.
    pub fn vacuum(grid: Grid2D, trunc: StarTruncation) -> Self {
        let mut phi = vec![ScalarField::constant(grid, C64::new(1.0, 0.0))];
        phi.extend((0..trunc.order).map(|_| ScalarField::zeros(grid)));
        let gauge = (0..=trunc.order).map(|_| GaugeField::zeros(grid)).collect();
        Self { phi, gauge, trunc }
    }

    /// Appends the next order.
    pub fn push(&mut self, phi: ScalarField, gauge: GaugeField) -> Result<(), MoyalError> {
        let k = self.phi.len();
        if k > self.trunc.order {
            return Err(MoyalError::OrderOutOfRange { order: k, max: self.trunc.order });
        }
        self.phi[0].check_same_grid(&phi)?;
        self.phi[0].check_same_grid(&gauge.abar)?;
        self.phi.push(phi);
        self.gauge.push(gauge);
        Ok(())
    }

    /// Fills every missing order with zeros.
    pub fn pad_with_zeros(&mut self) {
        let g = *self.grid();
        while self.phi.len() <= self.trunc.order {
            self.phi.push(ScalarField::zeros(g));
            self.gauge.push(GaugeField::zeros(g));
        }
    }

    pub fn grid(&self) -> &Grid2D {
        self.phi[0].grid()
    }

    pub fn trunc(&self) -> StarTruncation {
        self.trunc
    }

    pub fn populated(&self) -> usize {
        self.phi.len()
    }

    pub fn phi(&self, k: usize) -> &ScalarField {
        &self.phi[k]
    }

    pub fn gauge(&self, k: usize) -> &GaugeField {
        &self.gauge[k]
    }

    fn phis(&self) -> &[ScalarField] {
        &self.phi
    }

    fn phibars(&self) -> Vec<ScalarField> {
        conj_series(&self.phi)
    }

    fn a_series(&self) -> Vec<ScalarField> {
        self.gauge.iter().map(|g| g.a.clone()).collect()
    }

    fn abar_series(&self) -> Vec<ScalarField> {
        self.gauge.iter().map(|g| g.abar.clone()).collect()
    }

    fn require_lower(&self, k: usize) -> Result<(), MoyalError> {
        if k > self.trunc.order {
            return Err(MoyalError::OrderOutOfRange { order: k, max: self.trunc.order });
        }
        if self.populated() < k {
            return Err(MoyalError::MissingLowerOrder { needed: k, populated: self.populated() });
        }
        Ok(())
    }
}

/// `B_k = -i(d Abar_k - dbar A_k) - [A, Abar]_k` for every populated order.
pub fn nc_magnetic_field(s: &ThetaSeries) -> Vec<ScalarField> {
    let a = s.a_series();
    let abar = s.abar_series();
    let bracket = series_product(&a, &abar, s.populated() - 1, true);
    s.gauge
        .iter()
        .zip(bracket)
        .map(|(g, br)| {
            let curl = (&dz(&g.abar) - &dzbar(&g.a)).scale(-I);
            &curl - &br
        })
        .collect()
}

/// Lower-order part of the `theta^k` coefficient of `-[A, Abar] + phi * phibar`.
pub fn coeff_c_k(s: &ThetaSeries, k: usize) -> Result<ScalarField, MoyalError> {
    s.require_lower(k)?;
    if k == 0 {
        return Ok(ScalarField::zeros(*s.grid()));
    }
    let a = &s.a_series()[..k];
    let abar = &s.abar_series()[..k];
    let phibar = &s.phibars()[..k];
    let br = series_coeff(a, abar, k, true);
    let pp = series_coeff(&s.phis()[..k], phibar, k, false);
    Ok(&pp - &br)
}

/// Lower-order part of the `theta^k` coefficient of `-i Abar * phi`.
pub fn coeff_d_k(s: &ThetaSeries, k: usize) -> Result<ScalarField, MoyalError> {
    s.require_lower(k)?;
    if k == 0 {
        return Ok(ScalarField::zeros(*s.grid()));
    }
    let abar = &s.abar_series()[..k];
    Ok(series_coeff(abar, &s.phis()[..k], k, false).scale(-I))
}

fn check_mask(phi0: &ScalarField, mask_radius: f64) -> Result<(), MoyalError> {
    let g = phi0.grid();
    for (idx, v) in phi0.values().iter().enumerate() {
        let r = g.radius(idx);
        if r >= mask_radius && v.norm() < MASK_FLOOR {
            return Err(MoyalError::MaskTooSmall { radius: r, modulus: v.norm() });
        }
    }
    Ok(())
}

/// `d_k = D_k / phi_0` outside the mask, zero inside.
pub fn coeff_small_d_k(s: &ThetaSeries, k: usize, mask_radius: f64) -> Result<ScalarField, MoyalError> {
    check_mask(s.phi(0), mask_radius)?;
    let d = coeff_d_k(s, k)?;
    let dk = d.zip_with(s.phi(0), |a, b| a / b);
    Ok(dk.zero_inside(mask_radius))
}

/// `E_k = -C_k + d d_k + dbar conj(d_k)` outside the mask; nodes with
/// `|x| < mask_radius` are set to zero and carry no information.
pub fn coeff_e_k(s: &ThetaSeries, k: usize, mask_radius: f64) -> Result<ScalarField, MoyalError> {
    if k == 0 {
        return Err(MoyalError::OrderOutOfRange { order: 0, max: s.trunc.order });
    }
    let c = coeff_c_k(s, k)?;
    let dk = coeff_small_d_k(s, k, mask_radius)?;
    let e = &(&dz(&dk) + &dzbar(&dk.conj())) - &c;
    Ok(e.zero_inside(mask_radius))
}

/// Residuals per populated order: `[B + phi * phibar - 1]_k` and
/// `[dbar phi - i Abar * phi]_k`.
pub fn nc_bps_residual(s: &ThetaSeries) -> (Vec<ScalarField>, Vec<ScalarField>) {
    let kmax = s.populated() - 1;
    let b = nc_magnetic_field(s);
    let pp = series_product(s.phis(), &s.phibars(), kmax, false);
    let ap = series_product(&s.abar_series(), s.phis(), kmax, false);
    let one = ScalarField::constant(*s.grid(), C64::new(1.0, 0.0));
    let r1 = b
        .iter()
        .zip(&pp)
        .enumerate()
        .map(|(k, (bk, pk))| {
            let v = bk + pk;
            if k == 0 {
                &v - &one
            } else {
                v
            }
        })
        .collect();
    let r2 = s.phi.iter().zip(&ap).map(|(p, a)| dzbar(p).axpy(-I, a)).collect();
    (r1, r2)
}

/// Action and its topological part, truncated at the series order and
/// evaluated at the series' `theta`:
/// `S = int 1/2 B*B + Dphi*conj(Dphi) + Dbarphi*conj(Dbarphi) + 1/2 (phi*phibar - 1)^2`,
/// `S_T = int B`. Unpopulated orders count as zero.
pub fn action_value(s: &ThetaSeries) -> (f64, f64) {
    let mut full = s.clone();
    full.pad_with_zeros();
    let kmax = full.trunc.order;
    let phi = full.phis().to_vec();
    let b = nc_magnetic_field(&full);
    let a_phi = series_product(&full.a_series(), &phi, kmax, false);
    let abar_phi = series_product(&full.abar_series(), &phi, kmax, false);
    let dphi: Vec<ScalarField> = phi.iter().zip(&a_phi).map(|(p, ap)| dz(p).axpy(-I, ap)).collect();
    let dbphi: Vec<ScalarField> = phi.iter().zip(&abar_phi).map(|(p, ap)| dzbar(p).axpy(-I, ap)).collect();
    let mut pot = series_product(&phi, &full.phibars(), kmax, false);
    pot[0] = pot[0].map(|v| v - 1.0);

    let bb = series_product(&b, &b, kmax, false);
    let dd = series_product(&dphi, &conj_series(&dphi), kmax, false);
    let db = series_product(&dbphi, &conj_series(&dbphi), kmax, false);
    let vv = series_product(&pot, &pot, kmax, false);
    let density: Vec<f64> = (0..=kmax)
        .map(|k| {
            let total = &(&bb[k].scale_re(0.5) + &dd[k]) + &(&db[k] + &vv[k].scale_re(0.5));
            integrate(&total).re
        })
        .collect();
    let topo: Vec<f64> = b.iter().map(|bk| integrate(bk).re).collect();
    let theta = full.trunc.theta;
    (sum_scalar_orders(&density, theta), sum_scalar_orders(&topo, theta))
}
