use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use ncvortex::config::RunConfig;
use ncvortex::pipeline::{flat_csv, perturb_csv, to_json, write_atomic, PipelineError};
use ncvortex::stages::{run_fock, run_moyal, run_perturbation, run_taubes, StageError};
use ncvortex::{compare_baseline, exit, run_pipeline, CompareError, Tolerances};
use ncvortex_core::taubes::solve_radial_taubes;

#[derive(Parser)]
#[command(version, about = "Abelian Higgs vortices and their Moyal deformations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the radial profile equation and write the profile file.
    Taubes {
        #[arg(long, default_value_t = 1)]
        winding: i64,
        #[arg(long, default_value_t = 16.0)]
        rmax: f64,
        #[arg(long, default_value_t = 4096)]
        nr: usize,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Solve the deformation orders and write the preservation report.
    Perturb {
        #[arg(long, default_value_t = 1)]
        winding: i64,
        #[arg(long, default_value_t = 1)]
        order: usize,
        #[arg(long, default_value_t = 0.1)]
        theta: f64,
        #[arg(long, default_value_t = 512)]
        grid: usize,
        #[arg(long, default_value_t = 16.0)]
        rmax: f64,
        #[arg(long, default_value_t = 4096)]
        nr: usize,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[arg(long, default_value_t = 1.0)]
        mask: f64,
        #[arg(long)]
        report: PathBuf,
    },
    /// Check the truncated operator vortex and the profile bound.
    Fock {
        #[arg(long, default_value_t = 128)]
        dim: usize,
        #[arg(long, default_value_t = 1.0)]
        theta: f64,
        #[arg(long, default_value_t = 16)]
        margin: usize,
        #[arg(long, default_value_t = 200)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        report: PathBuf,
    },
    /// Run every stage from a config file.
    Pipeline {
        #[arg(long)]
        config: PathBuf,
        /// Overrides `output.dir`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare a JSON report with a baseline.
    Compare {
        #[arg(long)]
        report: PathBuf,
        #[arg(long)]
        baseline: PathBuf,
        /// Default relative tolerance.
        #[arg(long, default_value_t = 1e-9)]
        rtol: f64,
        /// Per-key relative tolerance, `key=value`; repeatable.
        #[arg(long = "tol", value_parser = parse_tolerance)]
        tolerances: Vec<(String, f64)>,
    },
}

fn parse_tolerance(s: &str) -> Result<(String, f64), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("expected key=value, got {s:?}"))?;
    let v: f64 = v.trim().parse().map_err(|e| format!("{k}: {e}"))?;
    Ok((k.trim().to_string(), v))
}

fn config_from(lines: &[(&str, String)]) -> Result<RunConfig, ExitCode> {
    let text: String = lines.iter().map(|(k, v)| format!("{k} = {v}\n")).collect();
    RunConfig::parse(&text).map_err(|e| {
        eprintln!("config error: {e}");
        ExitCode::from(exit::CONFIG as u8)
    })
}

fn stage_failed(stage: &str, e: impl std::fmt::Display) -> ExitCode {
    eprintln!("stage {stage} failed: {e}");
    ExitCode::from(exit::STAGE as u8)
}

fn write_report(path: &Path, json: &[u8], csv: &[u8]) -> Result<(), ExitCode> {
    write_atomic(path, json)
        .and_then(|_| write_atomic(&path.with_extension("csv"), csv))
        .map_err(|e| stage_failed("output", e))
}

fn verdict(pass: bool) -> ExitCode {
    println!("verdict: {}", if pass { "pass" } else { "fail" });
    ExitCode::from(if pass { exit::PASS } else { exit::STAGE } as u8)
}

fn run(cli: Cli) -> Result<ExitCode, ExitCode> {
    match cli.command {
        Command::Taubes { winding, rmax, nr, tol, out } => {
            config_from(&[
                ("vortex.winding", winding.to_string()),
                ("grid.half_extent", rmax.to_string()),
                ("profile.r_max", rmax.to_string()),
                ("profile.n_r", nr.to_string()),
                ("tol.profile", tol.to_string()),
                ("series.order", "0".into()),
            ])?;
            let p = solve_radial_taubes(winding, rmax, nr, tol).map_err(|e| stage_failed("taubes", e))?;
            p.save(&out).map_err(|e| stage_failed("output", e))?;
            println!("profile written to {}", out.display());
            Ok(ExitCode::SUCCESS)
        }
        Command::Perturb { winding, order, theta, grid, rmax, nr, tol, mask, report } => {
            let cfg = config_from(&[
                ("vortex.winding", winding.to_string()),
                ("series.order", order.to_string()),
                ("series.theta", theta.to_string()),
                ("grid.n", grid.to_string()),
                ("grid.half_extent", rmax.to_string()),
                ("profile.n_r", nr.to_string()),
                ("tol.linear", tol.to_string()),
                ("mask.radius", mask.to_string()),
            ])?;
            let t = run_taubes(&cfg).map_err(|e| stage_failed("taubes", e))?;
            let mut m = run_moyal(&cfg, t.phi, t.gauge).map_err(|e| stage_failed("moyal", e))?;
            let r = run_perturbation(&cfg, &mut m.series).map_err(|e: StageError| stage_failed("perturbation", e))?;
            write_report(&report, &to_json(&r), &perturb_csv(&r))?;
            println!("n0 = {}, n_deformed = {}, flux = {:?}", r.n0, r.n_deformed, r.flux);
            Ok(verdict(r.pass))
        }
        Command::Fock { dim, theta, margin, samples, seed, report } => {
            config_from(&[
                ("fock.dim", dim.to_string()),
                ("fock.theta", theta.to_string()),
                ("fock.margin", margin.to_string()),
                ("fock.samples", samples.to_string()),
            ])?;
            let r = run_fock(dim, margin, theta, samples, seed).map_err(|e| stage_failed("fock", e))?;
            write_report(&report, &to_json(&r), &flat_csv(&r))?;
            println!("charge = {}, residuals = ({:e}, {:e})", r.charge, r.bps_residual_1, r.bps_residual_2);
            Ok(verdict(r.pass))
        }
        Command::Pipeline { config, out } => {
            let mut cfg = RunConfig::load(&config).map_err(|e| {
                eprintln!("config error: {e}");
                ExitCode::from(exit::CONFIG as u8)
            })?;
            if let Some(dir) = out {
                cfg.output_dir = dir;
            }
            match run_pipeline(&cfg) {
                Ok(m) => {
                    for s in &m.stages {
                        println!("{}: {} ({:.2} s)", s.name, if s.pass == Some(true) { "pass" } else { "fail" }, s.seconds);
                    }
                    Ok(verdict(m.pass()))
                }
                Err(PipelineError::Config(e)) => {
                    eprintln!("config error: {e}");
                    Err(ExitCode::from(exit::CONFIG as u8))
                }
                Err(e) => {
                    eprintln!("{e}");
                    Err(ExitCode::from(exit::STAGE as u8))
                }
            }
        }
        Command::Compare { report, baseline, rtol, tolerances } => {
            let tol = Tolerances { default: rtol, per_key: tolerances.into_iter().collect() };
            match compare_baseline(&report, &baseline, &tol) {
                Ok(v) if v.pass() => {
                    println!("match: {} keys within tolerance", v.compared);
                    Ok(ExitCode::SUCCESS)
                }
                Ok(v) => {
                    for x in &v.violations {
                        println!("mismatch {x}");
                    }
                    Ok(ExitCode::from(exit::MISMATCH as u8))
                }
                Err(e @ CompareError::SchemaMismatch { .. }) => {
                    println!("{e}");
                    Ok(ExitCode::from(exit::MISMATCH as u8))
                }
                Err(e) => {
                    eprintln!("{e}");
                    Err(ExitCode::from(exit::CONFIG as u8))
                }
            }
        }
    }
}

fn main() -> ExitCode {
    run(Cli::parse()).unwrap_or_else(|code| code)
}
