//! Aggregation of stored runs into `results.json`, the best-per-method
//! `summary.csv` and one CSV per problem table.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use pikan_core::metrics::{aggregate, AggregateStats, MeanStd};
use pikan_core::{NetworkKind, Problem, ProblemId};
use serde::{Deserialize, Serialize};

use crate::suite::{ArchKey, RunRecord, SeedErrors};
use crate::tables::table_number;
use crate::{io_err, write_atomic, HarnessError, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeedSummary {
    pub seed: u64,
    pub best_loss: f64,
    pub best_iteration: usize,
    pub errors: SeedErrors,
}

/// One architecture of one problem, aggregated over its seeds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub problem: ProblemId,
    pub method: NetworkKind,
    pub hidden: usize,
    pub width: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub order: Option<usize>,
    pub params: usize,
    pub seeds: Vec<SeedSummary>,
    pub aggregate: AggregateStats,
    pub runtime_s: Option<f64>,
}

impl ResultRecord {
    pub fn arch(&self) -> ArchKey {
        ArchKey {
            problem: self.problem,
            method: self.method,
            hidden: self.hidden,
            width: self.width,
            grid: self.grid,
            order: self.order,
        }
    }
}

/// Groups runs by architecture. Parameter counts are recomputed from the
/// architecture rather than copied from the run files.
pub fn build_records(runs: &[RunRecord]) -> Result<Vec<ResultRecord>> {
    let mut groups: BTreeMap<ArchKey, Vec<&RunRecord>> = BTreeMap::new();
    for r in runs {
        groups.entry(r.arch).or_default().push(r);
    }
    groups
        .into_iter()
        .map(|(arch, mut group)| {
            group.sort_by_key(|r| r.seed);
            let problem = Problem::new(arch.problem);
            let s = problem.schedule();
            let spec = pikan_core::NetworkSpec::with_hidden(
                arch.method,
                arch.hidden,
                arch.width,
                arch.grid.unwrap_or(s.grid),
                arch.order.unwrap_or(s.order),
                problem.domain(),
            )?;
            let reports: Vec<_> = group.iter().map(|r| r.errors.report()).collect();
            let runtime_s = group.iter().map(|r| r.runtime_s).sum::<Option<f64>>();
            Ok(ResultRecord {
                problem: arch.problem,
                method: arch.method,
                hidden: arch.hidden,
                width: arch.width,
                grid: arch.grid,
                order: arch.order,
                params: spec.param_count(),
                seeds: group
                    .iter()
                    .map(|r| SeedSummary {
                        seed: r.seed,
                        best_loss: r.best_loss,
                        best_iteration: r.best_iteration,
                        errors: r.errors,
                    })
                    .collect(),
                aggregate: aggregate(&reports)?,
                runtime_s,
            })
        })
        .collect()
}

/// Lowest mean relative L² error among `records` of one method.
pub fn best_of(records: &[ResultRecord], problem: ProblemId, method: NetworkKind) -> Option<&ResultRecord> {
    records
        .iter()
        .filter(|r| r.problem == problem && r.method == method)
        .min_by(|a, b| a.aggregate.rel_l2_pct.mean.total_cmp(&b.aggregate.rel_l2_pct.mean))
}

/// "mean (std)" in two-significant-digit scientific notation.
pub fn mean_std_cell(m: &MeanStd) -> String {
    format!("{:.2e} ({:.2e})", m.mean, m.std)
}

/// Best PINN against best PIKAN for one problem.
#[derive(Clone, Debug, PartialEq)]
pub struct Claim {
    pub problem: ProblemId,
    pub pinn: ArchKey,
    pub pinn_rel_l2: MeanStd,
    pub pikan: ArchKey,
    pub pikan_rel_l2: MeanStd,
}

impl Claim {
    pub fn holds(&self) -> bool {
        self.pikan_rel_l2.mean < self.pinn_rel_l2.mean
    }
}

/// One claim per problem that has records for both methods.
pub fn claims(records: &[ResultRecord]) -> Vec<Claim> {
    ProblemId::ALL
        .iter()
        .filter_map(|&p| {
            let pinn = best_of(records, p, NetworkKind::Mlp)?;
            let pikan = best_of(records, p, NetworkKind::Kan)?;
            Some(Claim {
                problem: p,
                pinn: pinn.arch(),
                pinn_rel_l2: pinn.aggregate.rel_l2_pct,
                pikan: pikan.arch(),
                pikan_rel_l2: pikan.aggregate.rel_l2_pct,
            })
        })
        .collect()
}

pub fn write_results_json(path: &Path, records: &[ResultRecord]) -> Result<()> {
    let mut text = serde_json::to_string_pretty(records)?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

pub fn read_results_json(path: &Path) -> Result<Vec<ResultRecord>> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    Ok(serde_json::from_str(&text)?)
}

fn csv_bytes(header: &[&str], rows: Vec<Vec<String>>) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    w.into_inner()
        .map_err(|e| HarnessError::Config(format!("csv buffer: {}", e.error())))
}

pub fn summary_csv(records: &[ResultRecord]) -> Result<Vec<u8>> {
    let cells = |r: Option<&ResultRecord>| match r {
        Some(r) => [
            format!("{:.2e}", r.aggregate.rel_l2_pct.mean),
            format!("{:.2e}", r.aggregate.rel_l2_pct.std),
        ],
        None => [String::new(), String::new()],
    };
    let rows = ProblemId::ALL
        .iter()
        .filter(|&&p| records.iter().any(|r| r.problem == p))
        .map(|&p| {
            let (equation, kind) = Problem::new(p).label();
            let mut row = vec![equation.to_string(), kind.to_string()];
            row.extend(cells(best_of(records, p, NetworkKind::Mlp)));
            row.extend(cells(best_of(records, p, NetworkKind::Kan)));
            row
        })
        .collect();
    csv_bytes(
        &[
            "equation",
            "type",
            "best_pinn_rel_l2_mean",
            "best_pinn_rel_l2_std",
            "best_pikan_rel_l2_mean",
            "best_pikan_rel_l2_std",
        ],
        rows,
    )
}

/// Rows of one problem in table layout: PINN rows first, then PIKAN, each
/// by depth and width. Gradient cells are empty where no closed form exists.
pub fn table_csv(records: &[ResultRecord], problem: ProblemId) -> Result<Vec<u8>> {
    let mut selected: Vec<&ResultRecord> = records.iter().filter(|r| r.problem == problem).collect();
    selected.sort_by_key(|r| r.arch());
    let opt = |m: Option<MeanStd>| m.as_ref().map(mean_std_cell).unwrap_or_default();
    let rows = selected
        .iter()
        .map(|r| {
            let a = &r.aggregate;
            vec![
                r.method.method_name().to_string(),
                r.hidden.to_string(),
                r.width.to_string(),
                r.params.to_string(),
                mean_std_cell(&a.rel_l2_pct),
                mean_std_cell(&a.linf),
                opt(a.grad_rel_l2_pct),
                opt(a.grad_linf),
            ]
        })
        .collect();
    csv_bytes(
        &["method", "H", "W", "params", "rel_l2_pct", "linf", "grad_rel_l2_pct", "grad_linf"],
        rows,
    )
}

pub fn table_path(out: &Path, problem: ProblemId) -> PathBuf {
    out.join("tables")
        .join(format!("table_{}_{}.csv", table_number(problem), problem.as_str()))
}

/// Writes `results.json`, `summary.csv` and the per-problem tables under
/// `out`, returning the paths written.
pub fn emit_results(out: &Path, records: &[ResultRecord]) -> Result<Vec<PathBuf>> {
    if records.is_empty() {
        return Err(HarnessError::Usage("no runs to report".into()));
    }
    let mut written = vec![out.join("results.json"), out.join("summary.csv")];
    write_results_json(&written[0], records)?;
    write_atomic(&written[1], &summary_csv(records)?)?;
    for &p in ProblemId::ALL.iter() {
        if records.iter().any(|r| r.problem == p) {
            let path = table_path(out, p);
            write_atomic(&path, &table_csv(records, p)?)?;
            written.push(path);
        }
    }
    Ok(written)
}
