//! FFT-based operators on zero-padded grids: free-space convolution with the
//! screened Green's function and Fourier multipliers.

use std::f64::consts::PI;

use rayon::prelude::*;
use rustfft::{Fft, FftDirection, FftPlanner};

use crate::field::{ScalarField, C64};
use crate::grid::Grid2D;
use crate::special::bessel_k0;

/// Euler-Mascheroni constant.
const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Offset of the self-interaction weight from the continuum logarithm:
/// the lattice sum `h^2 sum' G(x_i)` plus `w_0` reproduces the continuum
/// Green's function only when `w_0 = h^2/(2 pi) (-ln(sqrt(c) h / 2) - gamma + C)`
/// with this `C`, obtained by extrapolating the lattice Green's function
/// residual to `h -> 0`.
const LATTICE_LOG_OFFSET: f64 = 1.310_53;

fn transpose(src: &[C64], dst: &mut [C64], m: usize) {
    const B: usize = 32;
    for ib in (0..m).step_by(B) {
        for jb in (0..m).step_by(B) {
            for i in ib..(ib + B).min(m) {
                for j in jb..(jb + B).min(m) {
                    dst[j * m + i] = src[i * m + j];
                }
            }
        }
    }
}

/// In-place 2D FFT of a row-major `m x m` array.
fn fft2(data: &mut [C64], m: usize, fft: &dyn Fft<f64>) {
    data.par_chunks_mut(m).for_each(|row| fft.process(row));
    let mut t = vec![C64::new(0.0, 0.0); m * m];
    transpose(data, &mut t, m);
    t.par_chunks_mut(m).for_each(|col| fft.process(col));
    transpose(&t, data, m);
}

struct Padded {
    m: usize,
    forward: std::sync::Arc<dyn Fft<f64>>,
    inverse: std::sync::Arc<dyn Fft<f64>>,
}

impl Padded {
    fn new(n: usize) -> Self {
        let m = 2 * n;
        let mut planner = FftPlanner::new();
        Self { m, forward: planner.plan_fft(m, FftDirection::Forward), inverse: planner.plan_fft(m, FftDirection::Inverse) }
    }

    fn embed(&self, f: &ScalarField) -> Vec<C64> {
        let n = f.grid().n();
        let mut out = vec![C64::new(0.0, 0.0); self.m * self.m];
        for i2 in 0..n {
            out[i2 * self.m..i2 * self.m + n].copy_from_slice(&f.values()[i2 * n..(i2 + 1) * n]);
        }
        out
    }

    fn extract(&self, data: &[C64], f: &ScalarField) -> ScalarField {
        let n = f.grid().n();
        let scale = 1.0 / (self.m * self.m) as f64;
        let values = (0..n * n).map(|idx| data[(idx / n) * self.m + idx % n] * scale).collect();
        ScalarField::new(*f.grid(), values).expect("finite convolution").with_margin(f.margin())
    }
}

/// Self-interaction weight of one cell.
fn diagonal_weight(c: f64, h: f64) -> f64 {
    h * h / (2.0 * PI) * (-(c.sqrt() * h / 2.0).ln() - EULER_GAMMA + LATTICE_LOG_OFFSET)
}

/// `u(x) = sum_y h^2 G_c(x - y) f(y)` with `G_c(r) = K0(sqrt(c) r)/(2 pi)`,
/// the free-space Green's function of `-lap + c`.
///
/// # Panics
/// If `c` is not positive.
pub fn greens_apply(f: &ScalarField, c: f64) -> ScalarField {
    assert!(c > 0.0, "screening constant must be positive");
    let g = *f.grid();
    let n = g.n();
    let h = g.h();
    let pad = Padded::new(n);
    let m = pad.m;
    let sc = c.sqrt();
    let mut kernel: Vec<C64> = (0..m * m)
        .into_par_iter()
        .map(|idx| {
            let (i, j) = (idx / m, idx % m);
            let di = if i < n { i as f64 } else { i as f64 - m as f64 };
            let dj = if j < n { j as f64 } else { j as f64 - m as f64 };
            if i == n || j == n {
                return C64::new(0.0, 0.0);
            }
            let r = h * di.hypot(dj);
            if r == 0.0 {
                C64::new(diagonal_weight(c, h), 0.0)
            } else {
                C64::new(bessel_k0(sc * r).unwrap_or(0.0) * h * h / (2.0 * PI), 0.0)
            }
        })
        .collect();
    let mut data = pad.embed(f);
    fft2(&mut kernel, m, pad.forward.as_ref());
    fft2(&mut data, m, pad.forward.as_ref());
    data.par_iter_mut().zip(kernel.par_iter()).for_each(|(d, k)| *d *= k);
    fft2(&mut data, m, pad.inverse.as_ref());
    pad.extract(&data, f)
}

/// Applies the Fourier multiplier `symbol(|k|^2)` with zero padding.
pub fn fourier_multiplier<S>(f: &ScalarField, symbol: S) -> ScalarField
where
    S: Fn(f64) -> f64 + Sync,
{
    fourier_multiplier_2d(f, |k1, k2| symbol(k1 * k1 + k2 * k2))
}

/// Applies the Fourier multiplier `symbol(k1, k2)` with zero padding.
pub fn fourier_multiplier_2d<S>(f: &ScalarField, symbol: S) -> ScalarField
where
    S: Fn(f64, f64) -> f64 + Sync,
{
    let g = *f.grid();
    let pad = Padded::new(g.n());
    let m = pad.m;
    let dk = 2.0 * PI / (m as f64 * g.h());
    let freq = |i: usize| if i <= m / 2 { i as f64 } else { i as f64 - m as f64 };
    let mut data = pad.embed(f);
    fft2(&mut data, m, pad.forward.as_ref());
    data.par_iter_mut().enumerate().for_each(|(idx, d)| {
        *d *= symbol(freq(idx % m) * dk, freq(idx / m) * dk);
    });
    fft2(&mut data, m, pad.inverse.as_ref());
    pad.extract(&data, f)
}

/// Applies `symbol(k1, k2)` on the periodic extension of a flat `n x n`
/// array. Cheaper than [`fourier_multiplier_2d`] but wraps around the box.
pub fn periodic_multiplier_2d<S>(g: &Grid2D, src: &[C64], symbol: S) -> Vec<C64>
where
    S: Fn(f64, f64) -> f64 + Sync,
{
    let m = g.n();
    let mut planner = FftPlanner::new();
    let forward = planner.plan_fft(m, FftDirection::Forward);
    let inverse = planner.plan_fft(m, FftDirection::Inverse);
    let dk = 2.0 * PI / (m as f64 * g.h());
    let freq = |i: usize| if i <= m / 2 { i as f64 } else { i as f64 - m as f64 };
    let scale = 1.0 / (m * m) as f64;
    let mut data = src.to_vec();
    fft2(&mut data, m, forward.as_ref());
    data.par_iter_mut().enumerate().for_each(|(idx, d)| {
        *d *= symbol(freq(idx % m) * dk, freq(idx / m) * dk) * scale;
    });
    fft2(&mut data, m, inverse.as_ref());
    data
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;

    #[test]
    fn identity_multiplier_roundtrips() {
        let g = make_grid(2.0, 32).unwrap();
        let f = ScalarField::from_fn(g, |x, y| C64::new(x * y, x - y));
        let u = fourier_multiplier(&f, |_| 1.0);
        assert!((&u - &f).interior_sup(0) < 1e-13);
    }

    #[test]
    fn periodic_multiplier_differentiates_plane_waves() {
        let g = make_grid(PI, 32).unwrap();
        let f = ScalarField::from_fn(g, |x, y| C64::new((2.0 * x + 3.0 * y).cos(), 0.0));
        let u = periodic_multiplier_2d(&g, f.values(), |k1, k2| 1.0 / (1.0 + k1 * k1 + k2 * k2));
        let gap = u.iter().zip(f.values()).map(|(a, b)| (a - b / 14.0).norm()).fold(0.0, f64::max);
        assert!(gap < 1e-14, "{gap}");
    }

    #[test]
    fn convolution_is_linear_and_symmetric() {
        let g = make_grid(4.0, 32).unwrap();
        let mut e1 = vec![C64::new(0.0, 0.0); g.len()];
        let mut e2 = e1.clone();
        let (i, j) = (g.index(5, 9), g.index(20, 14));
        e1[i] = C64::new(1.0, 0.0);
        e2[j] = C64::new(1.0, 0.0);
        let u1 = greens_apply(&ScalarField::new(g, e1).unwrap(), 1.5);
        let u2 = greens_apply(&ScalarField::new(g, e2).unwrap(), 1.5);
        assert!((u1.values()[j] - u2.values()[i]).norm() < 1e-15);
        assert!(u1.values().iter().all(|v| v.re > 0.0));
    }
}
