//! Truncated Fock-space realization of the noncommutative plane: ladder
//! operators, the shift-operator vortex, its magnetic field and charge, the
//! star symbols of `|n><m|`, and the radial profile of the smoothed Higgs
//! field with its boundedness estimate.
//!
//! Derivatives act by commutators, `d f = -(1/sqrt(theta)) [a^dag, f]` and
//! `dbar f = (1/sqrt(theta)) [a, f]`, and integration is `2 pi theta Tr`.
//! Truncation spoils the last rows and columns, so every norm and trace
//! uses the leading `(M - m) x (M - m)` block.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use rayon::prelude::*;
use thiserror::Error;

use crate::field::{ScalarField, C64, I};
use crate::grid::{Grid2D, GridError};
use crate::quadrature::adaptive_integrate;
use crate::spectral::fourier_multiplier;

/// Default number of trailing basis states excluded from interior norms.
pub const DEFAULT_MARGIN: usize = 16;

/// Smallest dimension accepted by [`ladder_ops`].
pub const MIN_LADDER_DIM: usize = 8;

/// Smallest dimension accepted by [`bak_solution`].
pub const MIN_SOLUTION_DIM: usize = 32;

/// Singular values above this count toward a defect rank.
const RANK_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum FockError {
    #[error("dimension {dim} is below the minimum {min}")]
    DimensionTooSmall { dim: usize, min: usize },
    #[error("margin {margin} must be below half the dimension {dim}")]
    BadMargin { margin: usize, dim: usize },
    #[error("theta must be positive and finite, got {0}")]
    BadTheta(f64),
    #[error("operator shapes differ: {left} vs {right}")]
    ShapeMismatch { left: usize, right: usize },
    #[error("operator entries must be finite")]
    NonFinite,
    #[error("argument must be non-negative and finite, got {0}")]
    BadArgument(f64),
    #[error("series overflow at x = {x}")]
    SeriesOverflow { x: f64 },
    #[error(transparent)]
    Grid(#[from] GridError),
}

fn check_theta(theta: f64) -> Result<(), FockError> {
    if theta > 0.0 && theta.is_finite() {
        Ok(())
    } else {
        Err(FockError::BadTheta(theta))
    }
}

/// Square matrix on the span of `|0>, ..., |M-1>` with its interior margin.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedOperator {
    entries: DMatrix<C64>,
    margin: usize,
}

impl TruncatedOperator {
    pub fn new(entries: DMatrix<C64>, margin: usize) -> Result<Self, FockError> {
        let dim = entries.nrows();
        if entries.ncols() != dim {
            return Err(FockError::ShapeMismatch { left: dim, right: entries.ncols() });
        }
        if 2 * margin >= dim {
            return Err(FockError::BadMargin { margin, dim });
        }
        if entries.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(FockError::NonFinite);
        }
        Ok(Self { entries, margin })
    }

    pub fn identity(dim: usize, margin: usize) -> Result<Self, FockError> {
        Self::new(DMatrix::identity(dim, dim), margin)
    }

    pub fn zeros(dim: usize, margin: usize) -> Result<Self, FockError> {
        Self::new(DMatrix::zeros(dim, dim), margin)
    }

    /// `|row><col|`.
    pub fn ketbra(dim: usize, margin: usize, row: usize, col: usize) -> Result<Self, FockError> {
        let mut m = DMatrix::zeros(dim, dim);
        if row < dim && col < dim {
            m[(row, col)] = C64::new(1.0, 0.0);
        }
        Self::new(m, margin)
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn margin(&self) -> usize {
        self.margin
    }

    pub fn with_margin(&self, margin: usize) -> Result<Self, FockError> {
        Self::new(self.entries.clone(), margin)
    }

    pub fn interior_dim(&self) -> usize {
        self.dim() - self.margin
    }

    pub fn entries(&self) -> &DMatrix<C64> {
        &self.entries
    }

    pub fn interior_block(&self) -> DMatrix<C64> {
        let p = self.interior_dim();
        self.entries.view((0, 0), (p, p)).into_owned()
    }

    /// Largest entry modulus on the interior block.
    pub fn interior_sup(&self) -> f64 {
        self.interior_block().iter().fold(0.0, |m, v| m.max(v.norm()))
    }

    pub fn interior_trace(&self) -> C64 {
        (0..self.interior_dim()).map(|i| self.entries[(i, i)]).sum()
    }

    /// Number of interior singular values above a fixed tolerance.
    pub fn interior_rank(&self) -> usize {
        self.interior_block().singular_values().iter().filter(|s| **s > RANK_TOLERANCE).count()
    }

    pub fn adjoint(&self) -> Self {
        Self { entries: self.entries.adjoint(), margin: self.margin }
    }

    pub fn scale(&self, c: C64) -> Self {
        Self { entries: &self.entries * c, margin: self.margin }
    }

    fn check_shape(&self, other: &Self) -> Result<(), FockError> {
        if self.dim() != other.dim() {
            return Err(FockError::ShapeMismatch { left: self.dim(), right: other.dim() });
        }
        Ok(())
    }

    pub fn mul(&self, other: &Self) -> Result<Self, FockError> {
        self.check_shape(other)?;
        Ok(Self { entries: &self.entries * &other.entries, margin: self.margin.max(other.margin) })
    }

    pub fn add(&self, other: &Self) -> Result<Self, FockError> {
        self.check_shape(other)?;
        Ok(Self { entries: &self.entries + &other.entries, margin: self.margin.max(other.margin) })
    }

    pub fn sub(&self, other: &Self) -> Result<Self, FockError> {
        self.check_shape(other)?;
        Ok(Self { entries: &self.entries - &other.entries, margin: self.margin.max(other.margin) })
    }

    /// `[self, other]`.
    pub fn commutator(&self, other: &Self) -> Result<Self, FockError> {
        self.mul(other)?.sub(&other.mul(self)?)
    }
}

/// Annihilation, creation and number operators on `M` states.
#[derive(Debug, Clone)]
pub struct LadderOps {
    pub a: TruncatedOperator,
    pub adag: TruncatedOperator,
    pub number: TruncatedOperator,
}

pub fn ladder_ops(dim: usize, margin: usize) -> Result<LadderOps, FockError> {
    if dim < MIN_LADDER_DIM {
        return Err(FockError::DimensionTooSmall { dim, min: MIN_LADDER_DIM });
    }
    let mut a = DMatrix::zeros(dim, dim);
    let mut number = DMatrix::zeros(dim, dim);
    for n in 0..dim {
        number[(n, n)] = C64::new(n as f64, 0.0);
        if n > 0 {
            a[(n - 1, n)] = C64::new((n as f64).sqrt(), 0.0);
        }
    }
    let a = TruncatedOperator::new(a, margin)?;
    Ok(LadderOps { adag: a.adjoint(), a, number: TruncatedOperator::new(number, margin)? })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Derivative {
    D,
    Dbar,
}

/// `d f = -(1/sqrt(theta)) [a^dag, f]`, `dbar f = (1/sqrt(theta)) [a, f]`.
pub fn op_derivative(f: &TruncatedOperator, which: Derivative, theta: f64) -> Result<TruncatedOperator, FockError> {
    check_theta(theta)?;
    let ops = ladder_ops(f.dim(), f.margin())?;
    let s = 1.0 / theta.sqrt();
    Ok(match which {
        Derivative::D => ops.adag.commutator(f)?.scale(C64::new(-s, 0.0)),
        Derivative::Dbar => ops.a.commutator(f)?.scale(C64::new(s, 0.0)),
    })
}

/// `2 pi theta` times the interior trace.
pub fn op_trace_integral(f: &TruncatedOperator, theta: f64) -> Result<C64, FockError> {
    check_theta(theta)?;
    Ok(f.interior_trace() * (2.0 * PI * theta))
}

/// The charge-one operator vortex: `phi = sum |n+1><n|` and the gauge
/// component `Abar = (1/(i sqrt(theta))) (a - sqrt(n/(n+1)) a)` that enters
/// `Dbar phi = dbar phi - i Abar phi`; `A` is its adjoint.
#[derive(Debug, Clone)]
pub struct OperatorVortex {
    pub phi: TruncatedOperator,
    pub a: TruncatedOperator,
    pub abar: TruncatedOperator,
}

pub fn bak_solution(dim: usize, margin: usize, theta: f64) -> Result<OperatorVortex, FockError> {
    check_theta(theta)?;
    if dim < MIN_SOLUTION_DIM {
        return Err(FockError::DimensionTooSmall { dim, min: MIN_SOLUTION_DIM });
    }
    let mut phi = DMatrix::zeros(dim, dim);
    let mut abar = DMatrix::zeros(dim, dim);
    let pref = -I / theta.sqrt();
    for n in 0..dim - 1 {
        phi[(n + 1, n)] = C64::new(1.0, 0.0);
        // (a - sqrt(n/(n+1)) a)|n+1> = (sqrt(n+1) - sqrt(n)) |n>
        let np = (n + 1) as f64;
        abar[(n, n + 1)] = pref * (np.sqrt() - (n as f64).sqrt());
    }
    let abar = TruncatedOperator::new(abar, margin)?;
    Ok(OperatorVortex { phi: TruncatedOperator::new(phi, margin)?, a: abar.adjoint(), abar })
}

/// `B = i([d, Abar] - [dbar, A]) + [A, Abar]` with the commutators taken
/// through [`op_derivative`].
pub fn op_magnetic_field(a: &TruncatedOperator, abar: &TruncatedOperator, theta: f64) -> Result<TruncatedOperator, FockError> {
    let curl = op_derivative(abar, Derivative::D, theta)?.sub(&op_derivative(a, Derivative::Dbar, theta)?)?;
    curl.scale(I).add(&a.commutator(abar)?)
}

/// `r1 = (1/sqrt(theta)) [a, phi] - i Abar phi` and `r2 = B + phi phi^dag - 1`.
pub fn op_bps_residual(
    phi: &TruncatedOperator,
    a: &TruncatedOperator,
    abar: &TruncatedOperator,
    theta: f64,
) -> Result<(TruncatedOperator, TruncatedOperator), FockError> {
    let r1 = op_derivative(phi, Derivative::Dbar, theta)?.sub(&abar.mul(phi)?.scale(I))?;
    let b = op_magnetic_field(a, abar, theta)?;
    let one = TruncatedOperator::identity(phi.dim(), phi.margin())?;
    let r2 = b.add(&phi.mul(&phi.adjoint())?)?.sub(&one)?;
    Ok((r1, r2))
}

/// `theta Tr B` over the interior block.
pub fn topological_charge(b: &TruncatedOperator, theta: f64) -> Result<f64, FockError> {
    check_theta(theta)?;
    Ok(theta * b.interior_trace().re)
}

/// Validation summary of the operator vortex.
#[derive(Debug, Clone, PartialEq)]
pub struct FockReport {
    pub bps_residual_1: f64,
    pub bps_residual_2: f64,
    pub charge: f64,
    pub unitarity_defect_rank: usize,
    /// Interior sup of `phi^dag phi - 1`.
    pub isometry_defect: f64,
}

pub fn fock_report(dim: usize, margin: usize, theta: f64) -> Result<FockReport, FockError> {
    let v = bak_solution(dim, margin, theta)?;
    let (r1, r2) = op_bps_residual(&v.phi, &v.a, &v.abar, theta)?;
    let b = op_magnetic_field(&v.a, &v.abar, theta)?;
    let one = TruncatedOperator::identity(dim, margin)?;
    let defect = v.phi.mul(&v.phi.adjoint())?.sub(&one)?;
    let isometry = v.phi.adjoint().mul(&v.phi)?.sub(&one)?;
    Ok(FockReport {
        bps_residual_1: r1.interior_sup(),
        bps_residual_2: r2.interior_sup(),
        charge: topological_charge(&b, theta)?,
        unitarity_defect_rank: defect.interior_rank(),
        isometry_defect: isometry.interior_sup(),
    })
}

fn ln_factorial(n: usize) -> f64 {
    (1..=n).map(|k| (k as f64).ln()).sum()
}

/// Star symbol of `|n><m|`: the series
/// `sum_k (-1/theta)^k / k! z^(k+m) zbar^(k+n) / sqrt(n! m! theta^(n+m))`,
/// summed in closed form as `z^m zbar^n e^(-|z|^2/theta) / sqrt(...)` and
/// evaluated in the log domain.
pub fn ketbra_star_field(n: usize, m: usize, theta: f64, g: &Grid2D) -> Result<ScalarField, FockError> {
    check_theta(theta)?;
    let ln_norm = 0.5 * (ln_factorial(n) + ln_factorial(m) + (n + m) as f64 * theta.ln());
    let values: Vec<C64> = (0..g.len())
        .into_par_iter()
        .map(|idx| {
            let (x1, x2) = g.position(idx);
            let z = crate::field::z_of(x1, x2);
            let r2 = z.norm_sqr();
            if r2 == 0.0 {
                return if n == 0 && m == 0 { C64::new((-ln_norm).exp(), 0.0) } else { C64::new(0.0, 0.0) };
            }
            let ln_mod = 0.5 * (n + m) as f64 * r2.ln() - r2 / theta - ln_norm;
            let phase = (m as f64 - n as f64) * z.arg();
            C64::from_polar(ln_mod.exp(), phase)
        })
        .collect();
    if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(FockError::SeriesOverflow { x: g.half_extent() });
    }
    Ok(ScalarField::new(*g, values)?)
}

/// Coefficients `c_n = 1/(n! theta^n sqrt((n+1) theta))` of the radial series
/// `f(x) = sum c_n x^(2n+1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymbolSeries {
    theta: f64,
}

impl SymbolSeries {
    pub fn new(theta: f64) -> Result<Self, FockError> {
        check_theta(theta)?;
        Ok(Self { theta })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn ln_coefficient(&self, n: usize) -> f64 {
        -ln_factorial(n) - n as f64 * self.theta.ln() - 0.5 * ((n + 1) as f64 * self.theta).ln()
    }

    /// `varphi(x) = x e^(-x^2/theta) sum c_n x^(2n)`. Terms are combined with
    /// the Gaussian factor in the log domain and summed outward from the peak.
    pub fn varphi(&self, x: f64) -> Result<f64, FockError> {
        if !(x >= 0.0 && x.is_finite()) {
            return Err(FockError::BadArgument(x));
        }
        if x == 0.0 {
            return Ok(0.0);
        }
        let t = x * x / self.theta;
        let ln_x = x.ln();
        let term = |n: usize| ((2 * n + 1) as f64 * ln_x - t + self.ln_coefficient(n)).exp();
        let peak = t.floor() as usize;
        let mut sum = term(peak);
        let cutoff = 1e-18;
        let mut k = peak + 1;
        loop {
            let v = term(k);
            sum += v;
            if v <= cutoff * sum {
                break;
            }
            k += 1;
        }
        for k in (0..peak).rev() {
            let v = term(k);
            sum += v;
            if v <= cutoff * sum {
                break;
            }
        }
        if !sum.is_finite() {
            return Err(FockError::SeriesOverflow { x });
        }
        Ok(sum)
    }
}

pub fn varphi_eval(x: f64, theta: f64) -> Result<f64, FockError> {
    SymbolSeries::new(theta)?.varphi(x)
}

/// `int_0^x (sqrt(theta)/s^2)(1 - e^(-s^2/theta)) ds`.
pub fn varphi_bound(x: f64, theta: f64) -> Result<f64, FockError> {
    check_theta(theta)?;
    if !(x >= 0.0 && x.is_finite()) {
        return Err(FockError::BadArgument(x));
    }
    let st = theta.sqrt();
    let integrand = |s: f64| {
        let u = s * s / theta;
        if u < 1e-300 {
            1.0 / st
        } else {
            -(-u).exp_m1() / (u * st)
        }
    };
    Ok(adaptive_integrate(integrand, 0.0, x, 1e-15))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundSample {
    pub x: f64,
    pub varphi: f64,
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VarphiBoundReport {
    pub theta: f64,
    pub samples: Vec<BoundSample>,
    /// Every sample satisfies `|varphi| <= bound`.
    pub pass: bool,
    /// Largest sample below which `|varphi|` increases monotonically.
    pub monotone_up_to: f64,
    /// `varphi` at the last sample.
    pub tail_value: f64,
}

/// Evaluates the bound at `samples` log-spaced points on
/// `[1e-3 x_max, x_max]`.
pub fn varphi_bound_check(theta: f64, x_max: f64, samples: usize) -> Result<VarphiBoundReport, FockError> {
    check_theta(theta)?;
    if !(x_max > 0.0 && x_max.is_finite()) || samples < 2 {
        return Err(FockError::BadArgument(x_max));
    }
    let lo = (1e-3 * x_max).ln();
    let hi = x_max.ln();
    let series = SymbolSeries::new(theta)?;
    let pts: Vec<BoundSample> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let x = (lo + (hi - lo) * i as f64 / (samples - 1) as f64).exp();
            Ok(BoundSample { x, varphi: series.varphi(x)?, bound: varphi_bound(x, theta)? })
        })
        .collect::<Result<_, FockError>>()?;
    let pass = pts.iter().all(|p| p.varphi.abs() <= p.bound);
    let mut monotone_up_to = pts[0].x;
    for w in pts.windows(2) {
        if w[1].varphi.abs() > w[0].varphi.abs() {
            monotone_up_to = w[1].x;
        } else {
            break;
        }
    }
    let tail_value = pts[pts.len() - 1].varphi;
    Ok(VarphiBoundReport { theta, samples: pts, pass, monotone_up_to, tail_value })
}

/// Heat smoothing `e^((theta/4) lap)`: the Fourier multiplier
/// `e^(-theta |k|^2 / 4)`.
pub fn gaussian_smooth(f: &ScalarField, theta: f64) -> Result<ScalarField, FockError> {
    if !(theta >= 0.0 && theta.is_finite()) {
        return Err(FockError::BadTheta(theta));
    }
    if theta == 0.0 {
        return Ok(f.clone());
    }
    Ok(fourier_multiplier(f, |k2| (-0.25 * theta * k2).exp()))
}
