//! Fourth-order finite differences on cell-centered grids.
//!
//! Interior nodes use centered five-point stencils; the two outermost nodes
//! on each side use one-sided stencils of the same order. Every application
//! degrades the two outer rings, which is tracked through the field margin.

use rayon::prelude::*;

use crate::field::{ScalarField, C64, I};
use crate::grid::Grid2D;

const D1_INT: [f64; 5] = [1.0, -8.0, 0.0, 8.0, -1.0];
const D1_L0: [f64; 5] = [-25.0, 48.0, -36.0, 16.0, -3.0];
const D1_L1: [f64; 5] = [-3.0, -10.0, 18.0, -6.0, 1.0];
const D1_R1: [f64; 5] = [-1.0, 6.0, -18.0, 10.0, 3.0];
const D1_R0: [f64; 5] = [3.0, -16.0, 36.0, -48.0, 25.0];

const D2_INT: [f64; 5] = [-1.0, 16.0, -30.0, 16.0, -1.0];
const D2_L0: [f64; 6] = [45.0, -154.0, 214.0, -156.0, 61.0, -10.0];
const D2_L1: [f64; 6] = [10.0, -15.0, -4.0, 14.0, -6.0, 1.0];
const D2_R1: [f64; 6] = [1.0, -6.0, 14.0, -4.0, -15.0, 10.0];
const D2_R0: [f64; 6] = [-10.0, 61.0, -156.0, 214.0, -154.0, 45.0];

/// Which one-dimensional operator to apply.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Order {
    First,
    Second,
}

/// Complex derivative `d = (d1 - i d2)/sqrt 2` or `dbar = (d1 + i d2)/sqrt 2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Which {
    Dz,
    Dzbar,
}

/// Sparse rows of a 1D operator (unscaled, i.e. times `12 h^order`).
struct Op1D {
    rows: Vec<Vec<(usize, f64)>>,
}

impl Op1D {
    fn new(n: usize, order: Order) -> Self {
        let mut rows = Vec::with_capacity(n);
        for i in 0..n {
            let (start, c): (usize, &[f64]) = match order {
                Order::First => match i {
                    0 => (0, &D1_L0),
                    1 => (0, &D1_L1),
                    _ if i == n - 2 => (n - 5, &D1_R1),
                    _ if i == n - 1 => (n - 5, &D1_R0),
                    _ => (i - 2, &D1_INT),
                },
                Order::Second => match i {
                    0 => (0, &D2_L0),
                    1 => (0, &D2_L1),
                    _ if i == n - 2 => (n - 6, &D2_R1),
                    _ if i == n - 1 => (n - 6, &D2_R0),
                    _ => (i - 2, &D2_INT),
                },
            };
            rows.push(
                c.iter().enumerate().filter(|(_, &w)| w != 0.0).map(|(k, &w)| (start + k, w)).collect(),
            );
        }
        Self { rows }
    }

    fn transposed(&self) -> Self {
        let n = self.rows.len();
        let mut rows = vec![Vec::new(); n];
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, w) in row {
                rows[j].push((i, w));
            }
        }
        Self { rows }
    }
}

fn op(n: usize, order: Order, transpose: bool) -> Op1D {
    let o = Op1D::new(n, order);
    if transpose {
        o.transposed()
    } else {
        o
    }
}

/// Applies a 1D operator along `axis` (0: x1, contiguous; 1: x2, across rows).
fn apply_axis(src: &[C64], n: usize, axis: usize, o: &Op1D, scale: f64) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0); n * n];
    if axis == 0 {
        out.par_chunks_mut(n).zip(src.par_chunks(n)).for_each(|(orow, srow)| {
            for (i, o_i) in orow.iter_mut().enumerate() {
                let mut acc = C64::new(0.0, 0.0);
                for &(j, w) in &o.rows[i] {
                    acc += srow[j] * w;
                }
                *o_i = acc * scale;
            }
        });
    } else {
        out.par_chunks_mut(n).enumerate().for_each(|(row, orow)| {
            for &(j, w) in &o.rows[row] {
                let srow = &src[j * n..(j + 1) * n];
                for (a, &b) in orow.iter_mut().zip(srow) {
                    *a += b * w;
                }
            }
            for a in orow.iter_mut() {
                *a *= scale;
            }
        });
    }
    out
}

/// Raw partial derivative along `axis` of a flat array on grid `g`.
pub fn partial_raw(g: &Grid2D, src: &[C64], axis: usize, order: Order) -> Vec<C64> {
    let n = g.n();
    let scale = match order {
        Order::First => 1.0 / (12.0 * g.h()),
        Order::Second => 1.0 / (12.0 * g.h() * g.h()),
    };
    apply_axis(src, n, axis, &op(n, order, false), scale)
}

/// Transpose of [`partial_raw`] as a real matrix.
pub fn partial_raw_t(g: &Grid2D, src: &[C64], axis: usize, order: Order) -> Vec<C64> {
    let n = g.n();
    let scale = match order {
        Order::First => 1.0 / (12.0 * g.h()),
        Order::Second => 1.0 / (12.0 * g.h() * g.h()),
    };
    apply_axis(src, n, axis, &op(n, order, true), scale)
}

fn combine(d1: Vec<C64>, d2: Vec<C64>, sign: f64) -> Vec<C64> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    d1.into_par_iter().zip(d2.into_par_iter()).map(|(a, b)| (a + I * b * sign) * s).collect()
}

/// Raw `d` / `dbar` on a flat array.
pub fn complex_raw(g: &Grid2D, src: &[C64], which: Which) -> Vec<C64> {
    let d1 = partial_raw(g, src, 0, Order::First);
    let d2 = partial_raw(g, src, 1, Order::First);
    combine(d1, d2, if which == Which::Dz { -1.0 } else { 1.0 })
}

/// Plain (non-conjugated) transpose of the matrix of [`complex_raw`].
pub fn complex_raw_t(g: &Grid2D, src: &[C64], which: Which) -> Vec<C64> {
    let d1 = partial_raw_t(g, src, 0, Order::First);
    let d2 = partial_raw_t(g, src, 1, Order::First);
    combine(d1, d2, if which == Which::Dz { -1.0 } else { 1.0 })
}

/// Conjugate transpose of the matrix of [`complex_raw`].
pub fn complex_raw_h(g: &Grid2D, src: &[C64], which: Which) -> Vec<C64> {
    let d1 = partial_raw_t(g, src, 0, Order::First);
    let d2 = partial_raw_t(g, src, 1, Order::First);
    combine(d1, d2, if which == Which::Dz { 1.0 } else { -1.0 })
}

/// `d f` or `dbar f`.
pub fn derivative(f: &ScalarField, which: Which) -> ScalarField {
    let g = *f.grid();
    ScalarField::from_parts(g, complex_raw(&g, f.values(), which), f.margin() + 2)
}

pub fn dz(f: &ScalarField) -> ScalarField {
    derivative(f, Which::Dz)
}

pub fn dzbar(f: &ScalarField) -> ScalarField {
    derivative(f, Which::Dzbar)
}

/// Cartesian partial derivative `d/dx_{axis+1}`.
pub fn partial(f: &ScalarField, axis: usize) -> ScalarField {
    let g = *f.grid();
    ScalarField::from_parts(g, partial_raw(&g, f.values(), axis, Order::First), f.margin() + 2)
}

/// Standard Laplacian `d1^2 + d2^2 = 2 d dbar`.
pub fn laplacian_std(f: &ScalarField) -> ScalarField {
    let g = *f.grid();
    let a = partial_raw(&g, f.values(), 0, Order::Second);
    let b = partial_raw(&g, f.values(), 1, Order::Second);
    let v = a.into_par_iter().zip(b.into_par_iter()).map(|(x, y)| x + y).collect();
    ScalarField::from_parts(g, v, f.margin() + 2)
}

/// Table of mixed derivatives `d^p dbar^q f` for `p + q <= max_order`,
/// indexed as `table[p][q]`.
pub fn mixed_table(f: &ScalarField, max_order: usize) -> Vec<Vec<ScalarField>> {
    let mut dbars = vec![f.clone()];
    for q in 1..=max_order {
        let next = dzbar(&dbars[q - 1]);
        dbars.push(next);
    }
    let mut table: Vec<Vec<ScalarField>> = vec![Vec::new(); max_order + 1];
    for (q, base) in dbars.into_iter().enumerate() {
        let mut cur = base;
        for p in 0..=(max_order - q) {
            if p > 0 {
                cur = dz(&cur);
            }
            table[p].push(cur.clone());
        }
    }
    table
}
