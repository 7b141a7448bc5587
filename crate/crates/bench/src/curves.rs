//! Loss curves of the best seed (lowest relative L² error) per architecture,
//! as CSV and as a bare SVG polyline on a log axis.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use pikan_core::metrics::ema_smooth;
use pikan_core::ProblemId;

use crate::suite::{ArchKey, RunRecord};
use crate::{write_atomic, HarnessError, Result};

/// Smoothing used when none is requested. PDE figures are drawn unsmoothed.
pub fn default_alpha(problem: ProblemId) -> f64 {
    match problem {
        ProblemId::Laplace | ProblemId::Poisson | ProblemId::Wave | ProblemId::Burgers => 1.0,
        _ => 0.05,
    }
}

/// Run with the lowest relative L² error for each architecture; ties go to
/// the lower seed.
pub fn best_runs(runs: &[RunRecord]) -> BTreeMap<ArchKey, &RunRecord> {
    let mut best: BTreeMap<ArchKey, &RunRecord> = BTreeMap::new();
    for r in runs {
        let better = match best.get(&r.arch) {
            Some(b) => (r.errors.rel_l2_pct, r.seed) < (b.errors.rel_l2_pct, b.seed),
            None => true,
        };
        if better {
            best.insert(r.arch, r);
        }
    }
    best
}

pub fn curve_csv(history: &[f64], alpha: f64) -> Result<Vec<u8>> {
    let smoothed = ema_smooth(history, alpha)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["iteration", "loss", "smoothed"])?;
    for (i, (raw, s)) in history.iter().zip(&smoothed).enumerate() {
        w.write_record([i.to_string(), format!("{raw:e}"), format!("{s:e}")])?;
    }
    w.into_inner()
        .map_err(|e| HarnessError::Config(format!("csv buffer: {}", e.error())))
}

/// Polyline of `series` against iteration with a base-10 log y axis.
pub fn curve_svg(series: &[f64], title: &str) -> String {
    let (w, h, pad) = (640.0, 400.0, 50.0);
    let logs: Vec<f64> = series.iter().map(|v| v.max(f64::MIN_POSITIVE).log10()).collect();
    let lo = logs.iter().cloned().fold(f64::INFINITY, f64::min).floor();
    let hi = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max).ceil().max(lo + 1.0);
    let n = series.len().max(2) - 1;
    let sx = |i: usize| pad + (w - 2.0 * pad) * i as f64 / n as f64;
    let sy = |l: f64| h - pad - (h - 2.0 * pad) * (l - lo) / (hi - lo);

    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#);
    let _ = writeln!(s, r#"<text x="{pad}" y="{}" font-size="14">{}</text>"#, pad / 2.0, escape(title));
    let _ = writeln!(
        s,
        r#"<path d="M{pad},{pad} L{pad},{b} L{r},{b}" fill="none" stroke="black"/>"#,
        b = h - pad,
        r = w - pad
    );
    for decade in lo as i32..=hi as i32 {
        let y = sy(decade as f64);
        let _ = writeln!(s, r#"<text x="5" y="{y:.1}" font-size="10">1e{decade}</text>"#);
    }
    let _ = writeln!(s, r#"<text x="{}" y="{}" font-size="10">{n}</text>"#, w - pad, h - pad / 2.0);
    let points: Vec<String> = logs.iter().enumerate().map(|(i, &l)| format!("{:.1},{:.1}", sx(i), sy(l))).collect();
    let _ = writeln!(s, r#"<polyline fill="none" stroke="steelblue" points="{}"/>"#, points.join(" "));
    s.push_str("</svg>\n");
    s
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Writes `curves/{problem}/{arch}.csv` (and `.svg` when `svg` is set) for
/// the best seed of every architecture in `runs`.
pub fn emit_curves(out: &Path, runs: &[RunRecord], alpha: Option<f64>, svg: bool) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    for (arch, run) in best_runs(runs) {
        let alpha = alpha.unwrap_or_else(|| default_alpha(arch.problem));
        let base = out.join("curves").join(arch.problem.as_str()).join(arch.slug());
        let csv_path = base.with_extension("csv");
        write_atomic(&csv_path, &curve_csv(&run.loss_history, alpha)?)?;
        written.push(csv_path);
        if svg {
            let smoothed = ema_smooth(&run.loss_history, alpha)?;
            let title = format!("{} {} seed {}", arch.problem, arch.slug(), run.seed);
            let svg_path = base.with_extension("svg");
            write_atomic(&svg_path, curve_svg(&smoothed, &title).as_bytes())?;
            written.push(svg_path);
        }
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::suite::SeedErrors;
    use pikan_core::NetworkKind;

    fn run(seed: u64, rel: f64, history: Vec<f64>) -> RunRecord {
        RunRecord {
            arch: ArchKey {
                problem: ProblemId::Logistic,
                method: NetworkKind::Mlp,
                hidden: 1,
                width: 40,
                grid: None,
                order: None,
            },
            params: 121,
            seed,
            learning_rate: 1e-2,
            iterations: history.len(),
            n_collocation: 100,
            best_loss: 0.0,
            best_iteration: 0,
            errors: SeedErrors {
                rel_l2_pct: rel,
                linf: 0.0,
                grad_rel_l2_pct: None,
                grad_linf: None,
            },
            loss_history: history,
            aborted: None,
            runtime_s: None,
        }
    }

    #[test]
    fn picks_seed_with_lowest_error() {
        let runs = vec![run(0, 2.0, vec![1.0]), run(1, 0.5, vec![2.0]), run(2, 0.5, vec![3.0])];
        let best = best_runs(&runs);
        assert_eq!(best.len(), 1);
        assert_eq!(best.values().next().unwrap().seed, 1);
    }

    #[test]
    fn unit_alpha_keeps_raw_column() {
        let history = vec![1.0, 0.5, 0.25, 0.3];
        let text = String::from_utf8(curve_csv(&history, 1.0).unwrap()).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), history.len() + 1);
        for line in &lines[1..] {
            let f: Vec<&str> = line.split(',').collect();
            assert_eq!(f[1], f[2]);
        }
    }

    #[test]
    fn files_written_with_schedule_length() {
        let dir = tempfile::tempdir().unwrap();
        let runs = vec![run(0, 1.0, vec![1.0, 0.1, 0.01]), run(1, 0.1, vec![2.0, 0.2, 0.02])];
        let written = emit_curves(dir.path(), &runs, Some(0.5), true).unwrap();
        assert_eq!(written.len(), 2);
        let text = std::fs::read_to_string(&written[0]).unwrap();
        assert_eq!(text.lines().count(), 4);
        assert!(text.lines().nth(1).unwrap().starts_with("0,2e0,2e0"));
        let svg = std::fs::read_to_string(&written[1]).unwrap();
        assert!(svg.starts_with("<svg") && svg.contains("<polyline"));
    }
}
