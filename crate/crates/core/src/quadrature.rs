//! Integrals, weighted norms and radial decay fits of grid fields.

use crate::field::{ScalarField, C64};
use crate::grid::GridError;
use crate::reduce;
use crate::stencil::{self, Order};

/// `h^2` times the deterministic pairwise sum of the samples.
pub fn integrate(f: &ScalarField) -> C64 {
    let h = f.grid().h();
    reduce::sum_c64(f.values()) * (h * h)
}

/// The `(l, n)` pair of the weighted space `H_l(n)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WeightedNormSpec {
    pub weight_power: u32,
    pub derivative_order: usize,
}

impl WeightedNormSpec {
    pub fn new(weight_power: u32, derivative_order: usize) -> Result<Self, GridError> {
        if derivative_order > 2 {
            return Err(GridError::BadNormSpec(derivative_order));
        }
        Ok(Self { weight_power, derivative_order })
    }
}

/// Max over nodes and `|alpha| <= l` of `(1 + |x|^n) |d^alpha f|`.
pub fn weighted_sup_norm(f: &ScalarField, spec: WeightedNormSpec) -> f64 {
    let g = *f.grid();
    let mut derivs: Vec<Vec<C64>> = vec![f.values().to_vec()];
    if spec.derivative_order >= 1 {
        let d1 = stencil::partial_raw(&g, f.values(), 0, Order::First);
        let d2 = stencil::partial_raw(&g, f.values(), 1, Order::First);
        if spec.derivative_order >= 2 {
            derivs.push(stencil::partial_raw(&g, f.values(), 0, Order::Second));
            derivs.push(stencil::partial_raw(&g, f.values(), 1, Order::Second));
            derivs.push(stencil::partial_raw(&g, &d1, 1, Order::First));
        }
        derivs.push(d1);
        derivs.push(d2);
    }
    let p = spec.weight_power as i32;
    derivs
        .iter()
        .map(|d| {
            reduce::max_map(g.len(), |idx| (1.0 + g.radius(idx).powi(p)) * d[idx].norm())
        })
        .fold(0.0, f64::max)
}

/// Per-shell maximum of `|f|` and the radius where it is attained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShellMax {
    pub r: f64,
    pub value: f64,
}

/// Maxima of `|f|` over `shells` equal-width shells of `r` in `[r_lo, r_hi)`,
/// skipping the record margin; empty shells are dropped.
pub fn shell_maxima(f: &ScalarField, edges: &[f64]) -> Vec<ShellMax> {
    let g = *f.grid();
    let rings = f.record_margin();
    let m = edges.len().saturating_sub(1);
    let mut best = vec![ShellMax { r: 0.0, value: -1.0 }; m];
    for idx in 0..g.len() {
        if g.ring(idx) < rings {
            continue;
        }
        let r = g.radius(idx);
        if r < edges[0] || r >= edges[m] {
            continue;
        }
        let s = edges.partition_point(|&e| e <= r) - 1;
        let v = f.values()[idx].norm();
        if v > best[s].value {
            best[s] = ShellMax { r, value: v };
        }
    }
    best.into_iter().filter(|s| s.value >= 0.0).collect()
}

/// Ordinary least-squares slope of `y` against `x`.
pub fn ls_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

const FIT_SHELLS: usize = 12;

/// Exponent `p` in `|f| = O(r^-p)`: slope of `log max|f|` against `-log r`
/// over logarithmically spaced shells in `[r_min, r_max]`.
pub fn decay_exponent_fit(f: &ScalarField, r_min: f64, r_max: f64) -> Result<f64, GridError> {
    if !(r_min > 0.0 && r_max > r_min) {
        return Err(GridError::EmptyAnnulus(r_min, r_max));
    }
    let ratio = r_max / r_min;
    let edges: Vec<f64> =
        (0..=FIT_SHELLS).map(|s| r_min * ratio.powf(s as f64 / FIT_SHELLS as f64)).collect();
    let shells = shell_maxima(f, &edges);
    if shells.len() < 2 {
        return Err(GridError::EmptyAnnulus(r_min, r_max));
    }
    let usable: Vec<&ShellMax> = shells.iter().filter(|s| s.value >= 1e-300).collect();
    if usable.len() < 2 {
        return Err(GridError::DegenerateFit);
    }
    let x: Vec<f64> = usable.iter().map(|s| -s.r.ln()).collect();
    let y: Vec<f64> = usable.iter().map(|s| s.value.ln()).collect();
    Ok(ls_slope(&x, &y))
}

/// Adaptive Simpson quadrature of a smooth function on `[a, b]` to absolute
/// tolerance `tol`, with Richardson correction on accepted panels.
pub fn adaptive_integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson(fa: f64, fm: f64, fb: f64, a: f64, b: f64) -> f64 {
        (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    }
    #[allow(clippy::too_many_arguments)]
    fn rec<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = simpson(fa, flm, fm, a, m);
        let right = simpson(fm, frm, fb, m, b);
        let delta = left + right - whole;
        if depth >= 60 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth + 1) + rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth + 1)
    }
    if a == b {
        return 0.0;
    }
    let (fa, fm, fb) = (f(a), f(0.5 * (a + b)), f(b));
    rec(&f, a, b, fa, fm, fb, simpson(fa, fm, fb, a, b), tol, 0)
}
