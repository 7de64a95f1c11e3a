//! Stage orchestration, persistence and the run manifest.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use ncvortex_core::snapshot::save_snapshot;
use ncvortex_core::ScalarField;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::config::{ConfigError, RunConfig};
use crate::stages::{run_fock, run_moyal, run_perturbation, run_taubes, StageError};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("stage {stage} failed: {diagnostic}")]
    StageFailure { stage: String, diagnostic: String, manifest: Box<RunManifest> },
    #[error("output error on {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    pub name: String,
    pub seconds: f64,
    /// `None` while the stage errored before producing a verdict.
    pub pass: Option<bool>,
    pub diagnostic: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileRecord {
    /// Path relative to the output directory.
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub config_hash: String,
    pub version: String,
    pub stages: Vec<StageRecord>,
    pub files: Vec<FileRecord>,
}

impl RunManifest {
    /// True when every stage ran and passed.
    pub fn pass(&self) -> bool {
        self.stages.iter().all(|s| s.pass == Some(true))
    }
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> PipelineError + '_ {
    move |source| PipelineError::Io { path: path.to_path_buf(), source }
}

/// Writes through a temporary file in the same directory and renames.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), PipelineError> {
    let tmp = path.with_extension("tmp");
    let mut f = fs::File::create(&tmp).map_err(io_err(&tmp))?;
    f.write_all(bytes).and_then(|_| f.sync_all()).map_err(io_err(&tmp))?;
    fs::rename(&tmp, path).map_err(io_err(path))
}

pub fn to_json<T: Serialize>(value: &T) -> Vec<u8> {
    let mut s = serde_json::to_vec_pretty(value).expect("reports serialize");
    s.push(b'\n');
    s
}

/// `key,value` CSV of a flat JSON object; nested values are written as JSON.
pub fn flat_csv<T: Serialize>(value: &T) -> Vec<u8> {
    let v = serde_json::to_value(value).expect("reports serialize");
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["key", "value"]).expect("in-memory write");
    if let serde_json::Value::Object(map) = v {
        for (k, x) in map {
            let cell = match x {
                serde_json::Value::String(s) => s,
                other => other.to_string(),
            };
            w.write_record([k, cell]).expect("in-memory write");
        }
    }
    w.into_inner().expect("in-memory write")
}

/// One row per order: flux, residual and decay exponents.
pub fn perturb_csv(r: &crate::stages::PerturbReport) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["order", "flux", "residual_sup", "phi", "gauge", "d", "e"]).expect("in-memory write");
    for k in 0..r.flux.len() {
        let d = r.decay_exponents.get(&format!("order_{k}"));
        let cell = |f: fn(&crate::stages::DecayExponents) -> f64| d.map(|d| f(d).to_string()).unwrap_or_default();
        w.write_record([
            k.to_string(),
            r.flux[k].to_string(),
            r.residual_sup[k].to_string(),
            cell(|d| d.phi),
            cell(|d| d.gauge),
            cell(|d| d.d),
            cell(|d| d.e),
        ])
        .expect("in-memory write");
    }
    w.into_inner().expect("in-memory write")
}

struct Run {
    dir: PathBuf,
    manifest: RunManifest,
}

impl Run {
    fn write(&mut self, name: &str, bytes: &[u8]) -> Result<(), PipelineError> {
        write_atomic(&self.dir.join(name), bytes)?;
        self.record(name, bytes);
        Ok(())
    }

    fn snapshot(&mut self, name: &str, f: &ScalarField) -> Result<(), PipelineError> {
        let path = self.dir.join(name);
        save_snapshot(f, &path).map_err(io_err(&path))?;
        let bytes = fs::read(&path).map_err(io_err(&path))?;
        self.record(name, &bytes);
        Ok(())
    }

    fn record(&mut self, name: &str, bytes: &[u8]) {
        self.manifest.files.retain(|f| f.path != name);
        self.manifest.files.push(FileRecord {
            path: name.to_string(),
            bytes: bytes.len() as u64,
            sha256: hex::encode(Sha256::digest(bytes)),
        });
        self.manifest.files.sort_by(|a, b| a.path.cmp(&b.path));
    }

    fn flush(&self) -> Result<(), PipelineError> {
        write_atomic(&self.dir.join(MANIFEST_FILE), &to_json(&self.manifest))
    }

    /// Times `body`, records the verdict and rewrites the manifest; an error
    /// halts the run with the partial manifest on disk.
    fn stage<T>(
        &mut self,
        name: &str,
        body: impl FnOnce(&mut Self) -> Result<(T, bool), StageFailureCause>,
    ) -> Result<T, PipelineError> {
        let start = Instant::now();
        let out = body(self);
        let seconds = start.elapsed().as_secs_f64();
        match out {
            Ok((value, pass)) => {
                self.manifest.stages.push(StageRecord { name: name.into(), seconds, pass: Some(pass), diagnostic: None });
                self.flush()?;
                Ok(value)
            }
            Err(StageFailureCause::Io(e)) => Err(e),
            Err(StageFailureCause::Numeric(e)) => {
                let diagnostic = e.to_string();
                self.manifest.stages.push(StageRecord {
                    name: name.into(),
                    seconds,
                    pass: None,
                    diagnostic: Some(diagnostic.clone()),
                });
                self.flush()?;
                Err(PipelineError::StageFailure { stage: name.into(), diagnostic, manifest: Box::new(self.manifest.clone()) })
            }
        }
    }
}

enum StageFailureCause {
    Numeric(StageError),
    Io(PipelineError),
}

impl From<StageError> for StageFailureCause {
    fn from(e: StageError) -> Self {
        Self::Numeric(e)
    }
}

impl From<PipelineError> for StageFailureCause {
    fn from(e: PipelineError) -> Self {
        Self::Io(e)
    }
}

/// Runs taubes, moyal, perturbation and (if enabled) fock in order.
///
/// Failed verdicts are recorded and the run continues; numerical errors halt
/// it. Outputs from an earlier run in the same directory are removed first so
/// the inventory matches the directory.
pub fn run_pipeline(cfg: &RunConfig) -> Result<RunManifest, PipelineError> {
    cfg.validate()?;
    let dir = cfg.output_dir.clone();
    fs::create_dir_all(&dir).map_err(io_err(&dir))?;
    clear_previous(&dir)?;
    let mut run = Run {
        dir,
        manifest: RunManifest {
            config_hash: cfg.hash(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            stages: Vec::new(),
            files: Vec::new(),
        },
    };
    run.write("config.txt", cfg.canonical_text().as_bytes())?;
    run.flush()?;

    let taubes = run.stage("taubes", |run| {
        let out = run_taubes(cfg)?;
        run.write("profile.txt", out.profile.to_text().as_bytes())?;
        run.snapshot("phi_0.ncvf", &out.phi)?;
        run.snapshot("abar_0.ncvf", &out.gauge.abar)?;
        run.write("taubes.json", &to_json(&out.report))?;
        run.write("taubes.csv", &flat_csv(&out.report))?;
        let pass = out.report.pass;
        Ok((out, pass))
    })?;

    let mut moyal = run.stage("moyal", |run| {
        let out = run_moyal(cfg, taubes.phi, taubes.gauge)?;
        if let Some(src) = &out.sources {
            for (name, f) in ["c_1", "d_1", "e_1"].iter().zip(src) {
                run.snapshot(&format!("{name}.ncvf"), f)?;
            }
        }
        run.write("moyal.json", &to_json(&out.report))?;
        run.write("moyal.csv", &flat_csv(&out.report))?;
        let pass = out.report.pass;
        Ok((out, pass))
    })?;

    run.stage("perturbation", |run| {
        let report = run_perturbation(cfg, &mut moyal.series)?;
        for k in 1..=cfg.order {
            run.snapshot(&format!("phi_{k}.ncvf"), moyal.series.phi(k))?;
            run.snapshot(&format!("abar_{k}.ncvf"), &moyal.series.gauge(k).abar)?;
        }
        run.write("perturb.json", &to_json(&report))?;
        run.write("perturb.csv", &perturb_csv(&report))?;
        Ok(((), report.pass))
    })?;

    if cfg.fock_enabled {
        run.stage("fock", |run| {
            let report = run_fock(cfg.fock_dim, cfg.fock_margin, cfg.fock_theta, cfg.fock_samples, cfg.seed)?;
            run.write("fock.json", &to_json(&report))?;
            run.write("fock.csv", &flat_csv(&report))?;
            Ok(((), report.pass))
        })?;
    }
    Ok(run.manifest)
}

/// Removes the files listed by an earlier manifest, then the manifest.
fn clear_previous(dir: &Path) -> Result<(), PipelineError> {
    let path = dir.join(MANIFEST_FILE);
    let Ok(text) = fs::read_to_string(&path) else {
        return Ok(());
    };
    if let Ok(old) = serde_json::from_str::<RunManifest>(&text) {
        for f in old.files {
            let p = dir.join(&f.path);
            if p.parent() == Some(dir) && p.exists() {
                fs::remove_file(&p).map_err(io_err(&p))?;
            }
        }
    }
    fs::remove_file(&path).map_err(io_err(&path))
}
