//! Krylov solvers on complex vectors viewed as real vector spaces.
//!
//! Inner products are `Re <u, v>`, so complex-antilinear operators are
//! handled the same way as linear ones.

use rayon::prelude::*;
use thiserror::Error;

use crate::field::C64;
use crate::reduce::{dot_re, norm2};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolveError {
    #[error("no convergence after {iterations} iterations (relative residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("operator is not positive definite (curvature {0:e})")]
    Indefinite(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveStats {
    pub iterations: usize,
    pub relative_residual: f64,
}

fn axpy_in_place(y: &mut [C64], a: f64, x: &[C64]) {
    y.par_iter_mut().zip(x.par_iter()).for_each(|(yi, xi)| *yi += xi * a);
}

fn sub(a: &[C64], b: &[C64]) -> Vec<C64> {
    a.par_iter().zip(b.par_iter()).map(|(x, y)| x - y).collect()
}

/// Conjugate gradients for a self-adjoint positive-definite `apply`.
/// Stops when `||b - A x|| <= tol ||b||`.
pub fn cg<A>(apply: A, b: &[C64], x0: Option<Vec<C64>>, tol: f64, max_iter: usize) -> Result<(Vec<C64>, SolveStats), SolveError>
where
    A: Fn(&[C64]) -> Vec<C64>,
{
    let bnorm = norm2(b);
    let mut x = x0.unwrap_or_else(|| vec![C64::new(0.0, 0.0); b.len()]);
    if bnorm == 0.0 && x.iter().all(|v| *v == C64::new(0.0, 0.0)) {
        return Ok((x, SolveStats { iterations: 0, relative_residual: 0.0 }));
    }
    let target = tol * bnorm.max(f64::MIN_POSITIVE);
    let mut r = sub(b, &apply(&x));
    let mut p = r.clone();
    let mut rr = dot_re(&r, &r);
    for it in 0..max_iter {
        if rr.sqrt() <= target {
            return Ok((x, SolveStats { iterations: it, relative_residual: rr.sqrt() / bnorm.max(f64::MIN_POSITIVE) }));
        }
        let ap = apply(&p);
        let curv = dot_re(&p, &ap);
        if curv <= 0.0 {
            return Err(SolveError::Indefinite(curv));
        }
        let alpha = rr / curv;
        axpy_in_place(&mut x, alpha, &p);
        axpy_in_place(&mut r, -alpha, &ap);
        let rr_new = dot_re(&r, &r);
        let beta = rr_new / rr;
        rr = rr_new;
        p.par_iter_mut().zip(r.par_iter()).for_each(|(pi, ri)| *pi = ri + *pi * beta);
    }
    // Report the true residual, not the recursive one.
    let res = norm2(&sub(b, &apply(&x))) / bnorm.max(f64::MIN_POSITIVE);
    if res <= tol {
        return Ok((x, SolveStats { iterations: max_iter, relative_residual: res }));
    }
    Err(SolveError::NoConvergence { iterations: max_iter, residual: res })
}

/// Restarted GMRES(`restart`) for a square real-linear `apply`, starting
/// from zero. `max_iter` counts operator applications. Stops when
/// `||b - A x|| <= tol ||b||`.
pub fn gmres<A>(apply: A, b: &[C64], restart: usize, tol: f64, max_iter: usize) -> Result<(Vec<C64>, SolveStats), SolveError>
where
    A: Fn(&[C64]) -> Vec<C64>,
{
    let bnorm = norm2(b);
    let mut x = vec![C64::new(0.0, 0.0); b.len()];
    if bnorm == 0.0 {
        return Ok((x, SolveStats { iterations: 0, relative_residual: 0.0 }));
    }
    let m = restart.max(1);
    let mut applied = 0;
    let mut res = 1.0;
    while applied < max_iter {
        let r = sub(b, &apply(&x));
        applied += 1;
        let beta = norm2(&r);
        res = beta / bnorm;
        if res <= tol {
            return Ok((x, SolveStats { iterations: applied, relative_residual: res }));
        }
        let mut basis: Vec<Vec<C64>> = vec![r.par_iter().map(|v| v / beta).collect()];
        // Hessenberg columns after Givens rotation, rotations, and rhs.
        let mut hess: Vec<Vec<f64>> = Vec::with_capacity(m);
        let mut rot: Vec<(f64, f64)> = Vec::with_capacity(m);
        let mut g = vec![0.0; m + 1];
        g[0] = beta;
        for j in 0..m {
            let mut w = apply(&basis[j]);
            applied += 1;
            let mut col = vec![0.0; j + 2];
            for (i, v) in basis.iter().enumerate() {
                let hij = dot_re(v, &w);
                col[i] = hij;
                axpy_in_place(&mut w, -hij, v);
            }
            let wn = norm2(&w);
            col[j + 1] = wn;
            for (i, &(c, s)) in rot.iter().enumerate() {
                let (a, b2) = (col[i], col[i + 1]);
                col[i] = c * a + s * b2;
                col[i + 1] = -s * a + c * b2;
            }
            let den = col[j].hypot(col[j + 1]);
            let (c, s) = if den == 0.0 { (1.0, 0.0) } else { (col[j] / den, col[j + 1] / den) };
            col[j] = den;
            col[j + 1] = 0.0;
            rot.push((c, s));
            g[j + 1] = -s * g[j];
            g[j] *= c;
            hess.push(col);
            let done = g[j + 1].abs() / bnorm <= tol || wn == 0.0 || applied >= max_iter;
            if !done {
                basis.push(w.par_iter().map(|v| v / wn).collect());
            }
            if done || j + 1 == m {
                let k = j + 1;
                let mut y = vec![0.0; k];
                for i in (0..k).rev() {
                    let mut acc = g[i];
                    for l in i + 1..k {
                        acc -= hess[l][i] * y[l];
                    }
                    y[i] = acc / hess[i][i];
                }
                for (i, yi) in y.iter().enumerate() {
                    axpy_in_place(&mut x, *yi, &basis[i]);
                }
                break;
            }
        }
    }
    let r = sub(b, &apply(&x));
    res = res.min(norm2(&r) / bnorm);
    if norm2(&r) / bnorm <= tol {
        return Ok((x, SolveStats { iterations: applied, relative_residual: norm2(&r) / bnorm }));
    }
    Err(SolveError::NoConvergence { iterations: applied, residual: res })
}
