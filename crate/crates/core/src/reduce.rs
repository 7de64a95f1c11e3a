//! Deterministic reductions.
//!
//! Values are summed in fixed-size chunks (sequentially inside a chunk, in
//! parallel across chunks) and the chunk sums are then combined by a fixed
//! pairwise tree. The result does not depend on the rayon thread count.

use num_complex::Complex64;
use rayon::prelude::*;

const CHUNK: usize = 1024;

fn tree<T: Copy + std::ops::Add<Output = T>>(mut v: Vec<T>, zero: T) -> T {
    if v.is_empty() {
        return zero;
    }
    while v.len() > 1 {
        let next: Vec<T> = v
            .chunks(2)
            .map(|c| if c.len() == 2 { c[0] + c[1] } else { c[0] })
            .collect();
        v = next;
    }
    v[0]
}

pub fn sum_f64(xs: &[f64]) -> f64 {
    let partial: Vec<f64> = xs.par_chunks(CHUNK).map(|c| c.iter().sum::<f64>()).collect();
    tree(partial, 0.0)
}

pub fn sum_c64(xs: &[Complex64]) -> Complex64 {
    let zero = Complex64::new(0.0, 0.0);
    let partial: Vec<Complex64> = xs
        .par_chunks(CHUNK)
        .map(|c| c.iter().fold(zero, |a, &b| a + b))
        .collect();
    tree(partial, zero)
}

/// Sum of `f(i)` for `i < len`, reduced deterministically.
pub fn sum_map<F>(len: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    let chunks = len.div_ceil(CHUNK);
    let partial: Vec<f64> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let end = ((c + 1) * CHUNK).min(len);
            (c * CHUNK..end).map(&f).sum::<f64>()
        })
        .collect();
    tree(partial, 0.0)
}

/// Real inner product `Re sum conj(a) b`.
pub fn dot_re(a: &[Complex64], b: &[Complex64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    sum_map(a.len(), |i| a[i].re * b[i].re + a[i].im * b[i].im)
}

pub fn norm2(a: &[Complex64]) -> f64 {
    dot_re(a, a).sqrt()
}

/// Maximum of `f(i)`; max is order independent so no tree is needed.
pub fn max_map<F>(len: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    (0..len).into_par_iter().map(f).reduce(|| 0.0, f64::max)
}
