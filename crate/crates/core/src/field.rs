//! Complex fields sampled on a [`Grid2D`].

use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::grid::{Grid2D, GridError};
use crate::reduce;

pub type C64 = Complex64;

pub const I: C64 = C64::new(0.0, 1.0);

/// Complex samples at every grid node.
///
/// `margin` counts the outer rings whose values are known to be degraded
/// (each finite-difference pass adds two). Quantities of record are read
/// at least `max(margin, 4)` rings inside the boundary.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: Grid2D,
    values: Vec<C64>,
    margin: usize,
}

impl ScalarField {
    /// Checked constructor: length must be `n^2` and every entry finite.
    pub fn new(grid: Grid2D, values: Vec<C64>) -> Result<Self, GridError> {
        if values.len() != grid.len() {
            return Err(GridError::WrongLength { expected: grid.len(), got: values.len() });
        }
        if let Some(i) = values.iter().position(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(GridError::NonFinite(i));
        }
        Ok(Self { grid, values, margin: 0 })
    }

    pub(crate) fn from_parts(grid: Grid2D, values: Vec<C64>, margin: usize) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self { grid, values, margin }
    }

    pub fn zeros(grid: Grid2D) -> Self {
        Self::constant(grid, C64::new(0.0, 0.0))
    }

    pub fn constant(grid: Grid2D, c: C64) -> Self {
        Self { grid, values: vec![c; grid.len()], margin: 0 }
    }

    /// Samples `f(x1, x2)` at every node.
    pub fn from_fn<F>(grid: Grid2D, f: F) -> Self
    where
        F: Fn(f64, f64) -> C64 + Sync,
    {
        let values = (0..grid.len())
            .into_par_iter()
            .map(|idx| {
                let (x1, x2) = grid.position(idx);
                f(x1, x2)
            })
            .collect();
        Self { grid, values, margin: 0 }
    }

    /// Samples a real function.
    pub fn from_real_fn<F>(grid: Grid2D, f: F) -> Self
    where
        F: Fn(f64, f64) -> f64 + Sync,
    {
        Self::from_fn(grid, |x1, x2| C64::new(f(x1, x2), 0.0))
    }

    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<C64> {
        self.values
    }

    pub fn margin(&self) -> usize {
        self.margin
    }

    pub fn with_margin(mut self, margin: usize) -> Self {
        self.margin = margin;
        self
    }

    /// Rings that metrics must skip: at least four, more if derivatives degraded the edge.
    pub fn record_margin(&self) -> usize {
        self.margin.max(4)
    }

    pub fn at(&self, i1: usize, i2: usize) -> C64 {
        self.values[self.grid.index(i1, i2)]
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.re.is_finite() && v.im.is_finite())
    }

    pub fn check_same_grid(&self, other: &ScalarField) -> Result<(), GridError> {
        if self.grid == other.grid {
            Ok(())
        } else {
            Err(GridError::GridMismatch)
        }
    }

    pub fn map<F>(&self, f: F) -> Self
    where
        F: Fn(C64) -> C64 + Sync,
    {
        let values = self.values.par_iter().map(|&v| f(v)).collect();
        Self { grid: self.grid, values, margin: self.margin }
    }

    /// Pointwise map that also sees the node position.
    pub fn map_with_pos<F>(&self, f: F) -> Self
    where
        F: Fn(f64, f64, C64) -> C64 + Sync,
    {
        let g = self.grid;
        let values = self
            .values
            .par_iter()
            .enumerate()
            .map(|(idx, &v)| {
                let (x1, x2) = g.position(idx);
                f(x1, x2, v)
            })
            .collect();
        Self { grid: self.grid, values, margin: self.margin }
    }

    /// Pointwise combination; panics on grid mismatch (use [`Self::check_same_grid`] first
    /// where user input is involved).
    pub fn zip_with<F>(&self, other: &ScalarField, f: F) -> Self
    where
        F: Fn(C64, C64) -> C64 + Sync,
    {
        assert_eq!(self.grid, other.grid, "fields live on different grids");
        let values = self
            .values
            .par_iter()
            .zip(other.values.par_iter())
            .map(|(&a, &b)| f(a, b))
            .collect();
        Self { grid: self.grid, values, margin: self.margin.max(other.margin) }
    }

    pub fn conj(&self) -> Self {
        self.map(|v| v.conj())
    }

    pub fn scale(&self, c: C64) -> Self {
        self.map(|v| v * c)
    }

    pub fn scale_re(&self, c: f64) -> Self {
        self.map(|v| v * c)
    }

    pub fn re(&self) -> Self {
        self.map(|v| C64::new(v.re, 0.0))
    }

    pub fn im(&self) -> Self {
        self.map(|v| C64::new(v.im, 0.0))
    }

    pub fn abs(&self) -> Self {
        self.map(|v| C64::new(v.norm(), 0.0))
    }

    /// `self + c * other`.
    pub fn axpy(&self, c: C64, other: &ScalarField) -> Self {
        self.zip_with(other, |a, b| a + c * b)
    }

    /// Largest `|f|` over nodes at least `rings` rings inside the boundary.
    pub fn interior_sup(&self, rings: usize) -> f64 {
        let g = self.grid;
        reduce::max_map(g.len(), |idx| {
            if g.ring(idx) >= rings {
                self.values[idx].norm()
            } else {
                0.0
            }
        })
    }

    /// Interior sup over the record margin.
    pub fn record_sup(&self) -> f64 {
        self.interior_sup(self.record_margin())
    }

    /// Largest `|f|` over record-interior nodes with `r_lo <= |x| <= r_hi`.
    pub fn annulus_sup(&self, r_lo: f64, r_hi: f64) -> f64 {
        let g = self.grid;
        let rings = self.record_margin();
        reduce::max_map(g.len(), |idx| {
            let r = g.radius(idx);
            if g.ring(idx) >= rings && r >= r_lo && r <= r_hi {
                self.values[idx].norm()
            } else {
                0.0
            }
        })
    }

    /// Largest imaginary part over record-interior nodes.
    pub fn record_imag_sup(&self) -> f64 {
        self.im().record_sup()
    }

    /// Bicubic Lagrange interpolation at `(x1, x2)` inside the grid.
    pub fn sample(&self, x1: f64, x2: f64) -> C64 {
        let g = self.grid;
        let n = g.n();
        let stencil = |x: f64| -> (usize, [f64; 4]) {
            let s = (x + g.half_extent()) / g.h() - 0.5;
            let i0 = (s.floor() as i64 - 1).clamp(0, n as i64 - 4) as usize;
            let t = s - i0 as f64;
            let mut w = [1.0; 4];
            for (a, wa) in w.iter_mut().enumerate() {
                for b in 0..4 {
                    if a != b {
                        *wa *= (t - b as f64) / (a as f64 - b as f64);
                    }
                }
            }
            (i0, w)
        };
        let (i1, w1) = stencil(x1);
        let (i2, w2) = stencil(x2);
        let mut acc = C64::new(0.0, 0.0);
        for (b, wb) in w2.iter().enumerate() {
            for (a, wa) in w1.iter().enumerate() {
                acc += self.values[g.index(i1 + a, i2 + b)] * (wa * wb);
            }
        }
        acc
    }

    /// Writes zeros into nodes with `|x| < radius`.
    pub fn zero_inside(&self, radius: f64) -> Self {
        self.map_with_pos(|x1, x2, v| if x1.hypot(x2) < radius { C64::new(0.0, 0.0) } else { v })
    }
}

impl Add for &ScalarField {
    type Output = ScalarField;
    fn add(self, rhs: &ScalarField) -> ScalarField {
        self.zip_with(rhs, |a, b| a + b)
    }
}

impl Sub for &ScalarField {
    type Output = ScalarField;
    fn sub(self, rhs: &ScalarField) -> ScalarField {
        self.zip_with(rhs, |a, b| a - b)
    }
}

/// Pointwise product.
impl Mul for &ScalarField {
    type Output = ScalarField;
    fn mul(self, rhs: &ScalarField) -> ScalarField {
        self.zip_with(rhs, |a, b| a * b)
    }
}

impl Neg for &ScalarField {
    type Output = ScalarField;
    fn neg(self) -> ScalarField {
        self.map(|v| -v)
    }
}

/// Gauge potential in complex components `A = (A1 - i A2)/sqrt 2` and `Abar`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaugeField {
    pub a: ScalarField,
    pub abar: ScalarField,
}

impl GaugeField {
    pub fn new(a: ScalarField, abar: ScalarField) -> Result<Self, GridError> {
        a.check_same_grid(&abar)?;
        Ok(Self { a, abar })
    }

    /// Physical potential from its `Abar` component.
    pub fn from_abar(abar: ScalarField) -> Self {
        Self { a: abar.conj(), abar }
    }

    pub fn zeros(grid: Grid2D) -> Self {
        Self { a: ScalarField::zeros(grid), abar: ScalarField::zeros(grid) }
    }

    pub fn grid(&self) -> &Grid2D {
        self.a.grid()
    }

    /// Largest `|abar - conj(a)|`; zero for physical (real `A1, A2`) potentials.
    pub fn reality_defect(&self) -> f64 {
        (&self.abar - &self.a.conj()).interior_sup(0)
    }

    /// Cartesian components `(A1, A2)`.
    pub fn cartesian(&self) -> (ScalarField, ScalarField) {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let a1 = self.a.zip_with(&self.abar, |a, ab| (a + ab) * s);
        let a2 = self.a.zip_with(&self.abar, |a, ab| I * (a - ab) * s);
        (a1, a2)
    }
}

/// Complex coordinate `z = (x1 + i x2)/sqrt 2`.
#[inline]
pub fn z_of(x1: f64, x2: f64) -> C64 {
    C64::new(x1, x2) * std::f64::consts::FRAC_1_SQRT_2
}
