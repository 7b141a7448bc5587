//! Seeded sweeps over architecture rows. Each (problem, row, seed) job
//! persists its own JSON record and checkpoint; existing records are reused,
//! so an interrupted sweep resumes where it stopped.

use std::path::{Path, PathBuf};
use std::time::Instant;

use pikan_core::metrics::ErrorReport;
use pikan_core::networks::Checkpoint;
use pikan_core::training::{train, TrainConfig};
use pikan_core::{NetworkKind, ProblemId};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{ArchRow, SuiteConfig};
use crate::{io_err, write_atomic, HarnessError, Result};

/// Per-seed error fields as stored in run and result files.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeedErrors {
    pub rel_l2_pct: f64,
    pub linf: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grad_rel_l2_pct: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grad_linf: Option<f64>,
}

impl From<&ErrorReport> for SeedErrors {
    fn from(r: &ErrorReport) -> Self {
        Self {
            rel_l2_pct: r.rel_l2_pct,
            linf: r.linf,
            grad_rel_l2_pct: r.grad_rel_l2_pct,
            grad_linf: r.grad_linf,
        }
    }
}

impl SeedErrors {
    pub fn report(&self) -> ErrorReport {
        ErrorReport {
            rel_l2_pct: self.rel_l2_pct,
            linf: self.linf,
            grad_rel_l2_pct: self.grad_rel_l2_pct,
            grad_linf: self.grad_linf,
            n_eval_points: 0,
        }
    }
}

/// Identity of an architecture within a problem.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ArchKey {
    pub problem: ProblemId,
    pub method: NetworkKind,
    pub hidden: usize,
    pub width: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub order: Option<usize>,
}

impl ArchKey {
    pub fn from_config(cfg: &TrainConfig) -> Self {
        let spec = &cfg.spec;
        let kan = spec.kind == NetworkKind::Kan;
        Self {
            problem: cfg.problem,
            method: spec.kind,
            hidden: spec.hidden_layers(),
            width: spec.hidden_width(),
            grid: kan.then_some(spec.grid),
            order: kan.then_some(spec.order),
        }
    }

    /// Directory-safe name, e.g. `mlp_H1_W40` or `kan_H1_W7_G3_k3`.
    pub fn slug(&self) -> String {
        let mut s = format!("{}_H{}_W{}", self.method, self.hidden, self.width);
        if let (Some(g), Some(k)) = (self.grid, self.order) {
            s.push_str(&format!("_G{g}_k{k}"));
        }
        s
    }

    pub fn run_dir(&self, out: &Path) -> PathBuf {
        out.join("runs").join(self.problem.as_str()).join(self.slug())
    }
}

/// Everything recorded for one seeded training run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    #[serde(flatten)]
    pub arch: ArchKey,
    pub params: usize,
    pub seed: u64,
    pub learning_rate: f64,
    pub iterations: usize,
    pub n_collocation: usize,
    pub best_loss: f64,
    pub best_iteration: usize,
    pub errors: SeedErrors,
    pub loss_history: Vec<f64>,
    pub aborted: Option<String>,
    pub runtime_s: Option<f64>,
}

pub fn run_path(out: &Path, arch: &ArchKey, seed: u64) -> PathBuf {
    arch.run_dir(out).join(format!("seed_{seed}.json"))
}

pub fn checkpoint_path(out: &Path, arch: &ArchKey, seed: u64) -> PathBuf {
    arch.run_dir(out).join(format!("seed_{seed}.ckpt"))
}

/// Trains one seed and writes its record and best-parameter checkpoint.
pub fn execute(cfg: &TrainConfig, seed: u64, out: &Path, timing: bool) -> Result<RunRecord> {
    let start = Instant::now();
    let result = train(cfg, seed)?;
    let elapsed = start.elapsed().as_secs_f64();
    let arch = ArchKey::from_config(cfg);
    let record = RunRecord {
        arch,
        params: cfg.spec.param_count(),
        seed,
        learning_rate: cfg.learning_rate,
        iterations: cfg.iterations,
        n_collocation: cfg.n_collocation,
        best_loss: result.best_loss,
        best_iteration: result.best_iteration,
        errors: SeedErrors::from(&result.metrics),
        loss_history: result.loss_history,
        aborted: result.aborted,
        runtime_s: timing.then_some(elapsed),
    };
    let dir = arch.run_dir(out);
    std::fs::create_dir_all(&dir).map_err(io_err(&dir))?;
    Checkpoint::new(cfg.spec.clone(), &result.best_params)?.save(&checkpoint_path(out, &arch, seed))?;
    write_atomic(&run_path(out, &arch, seed), serde_json::to_string_pretty(&record)?.as_bytes())?;
    Ok(record)
}

pub fn load_run(path: &Path) -> Result<RunRecord> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    Ok(serde_json::from_str(&text)?)
}

/// Every run record stored under `out/runs`, sorted by architecture and seed.
pub fn load_runs(out: &Path) -> Result<Vec<RunRecord>> {
    let mut runs = Vec::new();
    let root = out.join("runs");
    let mut stack = vec![root.clone()];
    while let Some(dir) = stack.pop() {
        let entries = match std::fs::read_dir(&dir) {
            Ok(e) => e,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound && dir == root => break,
            Err(e) => return Err(io_err(&dir)(e)),
        };
        for entry in entries {
            let path = entry.map_err(io_err(&dir))?.path();
            if path.is_dir() {
                stack.push(path);
            } else if path.extension().is_some_and(|e| e == "json") {
                runs.push(load_run(&path)?);
            }
        }
    }
    runs.sort_by(|a, b| (a.arch, a.seed).cmp(&(b.arch, b.seed)));
    Ok(runs)
}

#[derive(Clone, Debug)]
pub struct Job {
    pub config: TrainConfig,
    pub row: ArchRow,
    pub seed: u64,
}

pub fn jobs(cfg: &SuiteConfig) -> Result<Vec<Job>> {
    let mut jobs = Vec::new();
    for &problem in &cfg.problems {
        for row in cfg.rows(problem) {
            let config = cfg.train_config(problem, row)?;
            for seed in 0..cfg.seeds as u64 {
                jobs.push(Job {
                    config: config.clone(),
                    row: *row,
                    seed,
                });
            }
        }
    }
    Ok(jobs)
}

/// Runs every job of `cfg` on a pool of `threads` workers (all cores when
/// `None`), skipping jobs whose record already exists. Records come back
/// sorted by architecture and seed.
pub fn run_suite(cfg: &SuiteConfig, threads: Option<usize>, timing: bool) -> Result<Vec<RunRecord>> {
    cfg.validate()?;
    let jobs = jobs(cfg)?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| HarnessError::Config(format!("thread pool: {e}")))?;
    let mut runs = pool.install(|| {
        jobs.par_iter()
            .map(|job| {
                let path = run_path(&cfg.out, &ArchKey::from_config(&job.config), job.seed);
                if path.exists() {
                    let stored = load_run(&path)?;
                    if stored.iterations == job.config.iterations
                        && stored.n_collocation == job.config.n_collocation
                        && stored.learning_rate == job.config.learning_rate
                    {
                        return Ok(stored);
                    }
                }
                execute(&job.config, job.seed, &cfg.out, timing)
            })
            .collect::<Result<Vec<_>>>()
    })?;
    runs.sort_by(|a, b| (a.arch, a.seed).cmp(&(b.arch, b.seed)));
    Ok(runs)
}
