//! Uniform cell-centered square grids.

use thiserror::Error;

/// Errors raised while constructing grids or combining fields.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum GridError {
    #[error("grid size {0} is odd")]
    OddGridSize(usize),
    #[error("grid size {0} is below the minimum of 32")]
    GridTooSmall(usize),
    #[error("half extent must be positive and finite, got {0}")]
    BadExtent(f64),
    #[error("fields live on different grids")]
    GridMismatch,
    #[error("expected {expected} values, got {got}")]
    WrongLength { expected: usize, got: usize },
    #[error("non-finite value at node {0}")]
    NonFinite(usize),
    #[error("weighted norm derivative order {0} is not supported")]
    BadNormSpec(usize),
    #[error("no radial shells fall inside [{0}, {1}]")]
    EmptyAnnulus(f64, f64),
    #[error("all shell maxima are below 1e-300")]
    DegenerateFit,
}

/// Square domain `[-R, R]^2` sampled at `n` cell centers per side.
///
/// Node `i` sits at `-R + (i + 1/2) h`, so the origin is never a node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid2D {
    half_extent: f64,
    n: usize,
    h: f64,
}

impl Grid2D {
    pub fn new(half_extent: f64, n: usize) -> Result<Self, GridError> {
        if !(half_extent.is_finite() && half_extent > 0.0) {
            return Err(GridError::BadExtent(half_extent));
        }
        if n % 2 == 1 {
            return Err(GridError::OddGridSize(n));
        }
        if n < 32 {
            return Err(GridError::GridTooSmall(n));
        }
        Ok(Self { half_extent, n, h: 2.0 * half_extent / n as f64 })
    }

    pub fn half_extent(&self) -> f64 {
        self.half_extent
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn len(&self) -> usize {
        self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Coordinate of node index `i` along either axis.
    #[inline]
    pub fn coord(&self, i: usize) -> f64 {
        -self.half_extent + (i as f64 + 0.5) * self.h
    }

    /// Flat index of node `(i1, i2)`; rows run along `x2`.
    #[inline]
    pub fn index(&self, i1: usize, i2: usize) -> usize {
        i2 * self.n + i1
    }

    /// `(x1, x2)` of a flat index.
    #[inline]
    pub fn position(&self, idx: usize) -> (f64, f64) {
        (self.coord(idx % self.n), self.coord(idx / self.n))
    }

    #[inline]
    pub fn radius(&self, idx: usize) -> f64 {
        let (x1, x2) = self.position(idx);
        x1.hypot(x2)
    }

    /// Distance (in rings) from node `(i1, i2)` to the outer edge; 0 on the outermost ring.
    #[inline]
    pub fn ring(&self, idx: usize) -> usize {
        let i1 = idx % self.n;
        let i2 = idx / self.n;
        let n = self.n - 1;
        i1.min(n - i1).min(i2).min(n - i2)
    }

    /// Same grid with the spacing halved.
    pub fn refined(&self) -> Self {
        Self::new(self.half_extent, 2 * self.n).expect("refining a valid grid")
    }
}

/// `make_grid` in the vocabulary of the rest of the crate.
pub fn make_grid(half_extent: f64, n: usize) -> Result<Grid2D, GridError> {
    Grid2D::new(half_extent, n)
}
