//! The four pipeline stages and their reports.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use ncvortex_core::field::{z_of, C64};
use ncvortex_core::fock::{fock_report, op_derivative, op_trace_integral, varphi_bound_check, Derivative, FockError, TruncatedOperator};
use ncvortex_core::grid::make_grid;
use ncvortex_core::moyal::{
    action_value, coeff_c_k, coeff_d_k, coeff_e_k, star_commutator, MoyalError, StarTruncation, ThetaSeries,
};
use ncvortex_core::perturbation::{cross_validation_gap, decay_row, preservation_report, solve_series, PerturbationError};
use ncvortex_core::taubes::{
    bps_residuals, lift_to_grid, magnetic_field, solve_radial_taubes, taubes_decay_check, vortex_number, TaubesError,
    VortexProfile,
};
use ncvortex_core::{GaugeField, ScalarField};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::RunConfig;

#[derive(Debug, Error)]
pub enum StageError {
    #[error(transparent)]
    Taubes(#[from] TaubesError),
    #[error(transparent)]
    Moyal(#[from] MoyalError),
    #[error(transparent)]
    Perturbation(#[from] PerturbationError),
    #[error(transparent)]
    Fock(#[from] FockError),
    #[error(transparent)]
    Grid(#[from] ncvortex_core::GridError),
}

/// Vortex-number tolerance of the commutative stage.
pub const QUANTIZATION_TOLERANCE: f64 = 1e-3;

/// Tolerance on the Fock residuals and charge.
pub const FOCK_TOLERANCE: f64 = 1e-12;

/// Commutative solution on the run grid.
#[derive(Debug, Serialize, Deserialize, Clone, PartialEq)]
pub struct TaubesReport {
    pub winding: i64,
    pub n0: f64,
    pub bps_residual_1: f64,
    pub bps_residual_2: f64,
    pub action: f64,
    pub decay_epsilon: f64,
    pub decay_bound_constant: f64,
    pub decay_measured_rate: Option<f64>,
    pub decay_pass: bool,
    pub pass: bool,
}

pub struct TaubesOutput {
    pub profile: VortexProfile,
    pub phi: ScalarField,
    pub gauge: GaugeField,
    pub report: TaubesReport,
}

pub fn run_taubes(cfg: &RunConfig) -> Result<TaubesOutput, StageError> {
    let profile = solve_radial_taubes(cfg.winding, cfg.profile_r_max, cfg.profile_n_r, cfg.tolerance("profile"))?;
    let g = make_grid(cfg.half_extent, cfg.grid_n)?;
    let (phi, gauge) = lift_to_grid(&profile, &g)?;
    let n0 = vortex_number(&magnetic_field(&gauge).re())?;
    let (r1, r2) = bps_residuals(&phi, &gauge);
    let decay = taubes_decay_check(&phi, cfg.decay_epsilon)?;
    let commutative = ThetaSeries::commutative(phi.clone(), gauge.clone(), StarTruncation::new(0, 0.0)?)?;
    let (action, _) = action_value(&commutative);
    let pass = (n0 - cfg.winding as f64).abs() <= QUANTIZATION_TOLERANCE && decay.pass;
    let report = TaubesReport {
        winding: cfg.winding,
        n0,
        bps_residual_1: r1.record_sup(),
        bps_residual_2: r2.record_sup(),
        action,
        decay_epsilon: decay.epsilon,
        decay_bound_constant: decay.bound_constant,
        decay_measured_rate: decay.measured_rate,
        decay_pass: decay.pass,
        pass,
    };
    Ok(TaubesOutput { profile, phi, gauge, report })
}

/// Star-product sanity on the run grid and the order-1 sources.
#[derive(Debug, Serialize, Deserialize, Clone, PartialEq)]
pub struct MoyalReport {
    pub theta: f64,
    /// Record sup of `[z, zbar]_1 - 1`.
    pub commutator_defect: f64,
    /// Record sups of `C_1`, `D_1`, `E_1`; absent when the series order is 0.
    pub source_sup: Option<[f64; 3]>,
    pub pass: bool,
}

pub struct MoyalOutput {
    pub series: ThetaSeries,
    /// `C_1`, `D_1`, `E_1` when the order is at least 1.
    pub sources: Option<[ScalarField; 3]>,
    pub report: MoyalReport,
}

pub fn run_moyal(cfg: &RunConfig, phi: ScalarField, gauge: GaugeField) -> Result<MoyalOutput, StageError> {
    let g = *phi.grid();
    let z = ScalarField::from_fn(g, z_of);
    let c = star_commutator(&z, &z.conj(), StarTruncation::new(1, cfg.theta)?)?;
    let commutator_defect = c[1].map(|v| v - 1.0).record_sup().max(c[0].record_sup());
    let series = ThetaSeries::commutative(phi, gauge, StarTruncation::new(cfg.order, cfg.theta)?)?;
    let sources = if cfg.order >= 1 {
        Some([coeff_c_k(&series, 1)?, coeff_d_k(&series, 1)?, coeff_e_k(&series, 1, cfg.mask_radius)?])
    } else {
        None
    };
    let source_sup = sources.as_ref().map(|s| [s[0].record_sup(), s[1].record_sup(), s[2].record_sup()]);
    let finite = source_sup.map_or(true, |s| s.iter().all(|v| v.is_finite()));
    let pass = commutator_defect <= 1e-10 && finite;
    Ok(MoyalOutput { series, sources, report: MoyalReport { theta: cfg.theta, commutator_defect, source_sup, pass } })
}

/// Fitted decay exponents of one order.
#[derive(Debug, Serialize, Deserialize, Clone, PartialEq)]
pub struct DecayExponents {
    pub phi: f64,
    pub gauge: f64,
    pub d: f64,
    pub e: f64,
    pub meets_conservative: bool,
}

#[derive(Debug, Serialize, Deserialize, Clone, PartialEq)]
pub struct PerturbReport {
    pub n0: f64,
    pub flux: Vec<f64>,
    pub n_deformed: f64,
    pub residual_sup: Vec<f64>,
    pub cross_gap: Option<f64>,
    /// Keyed `order_k`.
    pub decay_exponents: BTreeMap<String, DecayExponents>,
    pub pass: bool,
}

/// Solves orders `1..=K` in place and reports on them.
pub fn run_perturbation(cfg: &RunConfig, series: &mut ThetaSeries) -> Result<PerturbReport, StageError> {
    solve_series(series, cfg.tolerance("linear"))?;
    let rep = preservation_report(series, cfg.order)?;
    let cross_gap = if cfg.order >= 1 {
        Some(cross_validation_gap(series, 1, 0.0, cfg.cross_window.0, cfg.cross_window.1, cfg.tolerance("schrodinger"))?)
    } else {
        None
    };
    let mut decay_exponents = BTreeMap::new();
    for k in 1..=cfg.order {
        let row = decay_row(series, k, cfg.mask_radius, cfg.decay_window.0, cfg.decay_window.1)?;
        decay_exponents.insert(
            format!("order_{k}"),
            DecayExponents { phi: row.phi, gauge: row.gauge, d: row.d, e: row.e, meets_conservative: row.meets_conservative() },
        );
    }
    Ok(PerturbReport {
        n0: rep.n0,
        flux: rep.flux,
        n_deformed: rep.n_deformed,
        residual_sup: rep.residual_sup,
        cross_gap,
        decay_exponents,
        pass: rep.pass,
    })
}

#[derive(Debug, Serialize, Deserialize, Clone, PartialEq)]
pub struct FockStageReport {
    pub bps_residual_1: f64,
    pub bps_residual_2: f64,
    pub charge: f64,
    pub unitarity_defect_rank: usize,
    pub varphi_bound_pass: bool,
    /// `|int d f|` for a seeded random operator supported well inside the
    /// truncation; zero up to roundoff.
    pub probe_derivative_integral: f64,
    pub pass: bool,
}

/// Operator vortex checks plus the profile bound on `(0, 10 sqrt(theta)]`.
pub fn run_fock(dim: usize, margin: usize, theta: f64, samples: usize, seed: u64) -> Result<FockStageReport, StageError> {
    let r = fock_report(dim, margin, theta)?;
    let bound = varphi_bound_check(theta, 10.0 * theta.sqrt(), samples)?;
    let probe = probe_operator(dim, margin, seed)?;
    let probe_derivative_integral = [Derivative::D, Derivative::Dbar]
        .into_iter()
        .map(|w| op_derivative(&probe, w, theta).and_then(|d| op_trace_integral(&d, theta)).map(|v| v.norm()))
        .collect::<Result<Vec<_>, _>>()?
        .into_iter()
        .fold(0.0, f64::max);
    let pass = r.bps_residual_1 <= FOCK_TOLERANCE
        && r.bps_residual_2 <= FOCK_TOLERANCE
        && (r.charge - 1.0).abs() <= FOCK_TOLERANCE
        && bound.pass
        && probe_derivative_integral <= 1e-10 * (2.0 * PI * theta).max(1.0);
    Ok(FockStageReport {
        bps_residual_1: r.bps_residual_1,
        bps_residual_2: r.bps_residual_2,
        charge: r.charge,
        unitarity_defect_rank: r.unitarity_defect_rank,
        varphi_bound_pass: bound.pass,
        probe_derivative_integral,
        pass,
    })
}

/// Random complex entries on the leading block of size `dim - 2 margin`.
fn probe_operator(dim: usize, margin: usize, seed: u64) -> Result<TruncatedOperator, FockError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = dim.saturating_sub(2 * margin);
    let mut f = TruncatedOperator::zeros(dim, margin)?.entries().clone();
    for i in 0..m {
        for j in 0..m {
            f[(i, j)] = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        }
    }
    TruncatedOperator::new(f, margin)
}
