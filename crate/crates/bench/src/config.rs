//! Suite configuration: which problems and architecture rows to train, how
//! many seeds, and optional schedule overrides.
//!
//! Config files are flat `key = value` text; `#` starts a comment.
//!
//! ```text
//! mode = desk
//! problems = logistic, harmonic
//! seeds = 3
//! out = runs-desk
//! iterations = 2000
//! iterations.harmonic = 1000
//! learning_rate.logistic = 0.01
//! collocation.heat = 400
//! rows.logistic = pinn:1:40, pikan:1:7
//! rows.oscillatory = pikan:2:10:5:3
//! ```
//!
//! A row is `method:H:W` with an optional `:G:k` for KANs. Per-problem keys
//! take precedence over global ones.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use pikan_core::training::TrainConfig;
use pikan_core::{NetworkKind, NetworkSpec, Problem, ProblemId};

use crate::tables::{find_row, rows_for};
use crate::{HarnessError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    /// Full schedules; every row must reproduce its tabulated count.
    Paper,
    /// Fewer seeds, shorter schedules and a coarse PDE collocation grid.
    Desk,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ArchRow {
    pub method: NetworkKind,
    pub hidden: usize,
    pub width: usize,
    pub grid: Option<usize>,
    pub order: Option<usize>,
}

impl ArchRow {
    pub fn new(method: NetworkKind, hidden: usize, width: usize) -> Self {
        Self {
            method,
            hidden,
            width,
            grid: None,
            order: None,
        }
    }

    pub fn spec(&self, problem: &Problem) -> Result<NetworkSpec> {
        let s = problem.schedule();
        Ok(NetworkSpec::with_hidden(
            self.method,
            self.hidden,
            self.width,
            self.grid.unwrap_or(s.grid),
            self.order.unwrap_or(s.order),
            problem.domain(),
        )?)
    }
}

impl fmt::Display for ArchRow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.method.method_name().to_lowercase(), self.hidden, self.width)?;
        if let (Some(g), Some(k)) = (self.grid, self.order) {
            write!(f, ":{g}:{k}")?;
        }
        Ok(())
    }
}

impl FromStr for ArchRow {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || HarnessError::Usage(format!("bad architecture row '{s}', expected method:H:W[:G:k]"));
        let parts: Vec<&str> = s.trim().split(':').map(str::trim).collect();
        if parts.len() != 3 && parts.len() != 5 {
            return Err(bad());
        }
        let method: NetworkKind = parts[0]
            .parse()
            .map_err(|_| HarnessError::Usage(format!("unknown architecture '{}'", parts[0])))?;
        let num = |p: &str| p.parse::<usize>().map_err(|_| bad());
        let mut row = ArchRow::new(method, num(parts[1])?, num(parts[2])?);
        if parts.len() == 5 {
            if method == NetworkKind::Mlp {
                return Err(bad());
            }
            row.grid = Some(num(parts[3])?);
            row.order = Some(num(parts[4])?);
        }
        Ok(row)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Overrides {
    pub iterations: Option<usize>,
    pub learning_rate: Option<f64>,
    pub collocation: Option<usize>,
}

impl Overrides {
    fn or(self, fallback: Overrides) -> Overrides {
        Overrides {
            iterations: self.iterations.or(fallback.iterations),
            learning_rate: self.learning_rate.or(fallback.learning_rate),
            collocation: self.collocation.or(fallback.collocation),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SuiteConfig {
    pub mode: Mode,
    pub problems: Vec<ProblemId>,
    pub rows: BTreeMap<ProblemId, Vec<ArchRow>>,
    pub seeds: usize,
    pub out: PathBuf,
    pub overrides: Overrides,
    pub problem_overrides: BTreeMap<ProblemId, Overrides>,
}

pub const DESK_PDE_COLLOCATION: usize = 400;
pub const DESK_ITERATION_DIVISOR: usize = 10;

fn table_rows(problem: ProblemId) -> Vec<ArchRow> {
    rows_for(problem).map(|r| ArchRow::new(r.method, r.hidden, r.width)).collect()
}

impl SuiteConfig {
    /// Every table row of every problem, 10 seeds, full schedules.
    pub fn paper() -> Self {
        Self {
            mode: Mode::Paper,
            problems: ProblemId::ALL.to_vec(),
            rows: ProblemId::ALL.iter().map(|&p| (p, table_rows(p))).collect(),
            seeds: 10,
            out: PathBuf::from("pikan-out"),
            overrides: Overrides::default(),
            problem_overrides: BTreeMap::new(),
        }
    }

    /// Same grid as [`SuiteConfig::paper`] at a fraction of the cost.
    pub fn desk() -> Self {
        let mut cfg = Self::paper();
        cfg.mode = Mode::Desk;
        cfg.seeds = 3;
        cfg
    }

    pub fn preset(mode: Mode) -> Self {
        match mode {
            Mode::Paper => Self::paper(),
            Mode::Desk => Self::desk(),
        }
    }

    /// Parses a config file. `mode` selects the preset that the remaining
    /// keys modify; `default_mode` applies when the file has no `mode` key.
    pub fn parse(text: &str, default_mode: Mode) -> Result<Self> {
        let mut entries = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| HarnessError::Usage(format!("line {}: expected key = value", lineno + 1)))?;
            entries.push((key.trim().to_string(), value.trim().to_string()));
        }

        let mode = match entries.iter().find(|(k, _)| k == "mode") {
            Some((_, v)) => parse_mode(v)?,
            None => default_mode,
        };
        let mut cfg = Self::preset(mode);
        let mut explicit_rows = BTreeMap::new();
        for (key, value) in &entries {
            let (base, target) = match key.split_once('.') {
                Some((b, p)) => (b, Some(parse_problem(p)?)),
                None => (key.as_str(), None),
            };
            match (base, target) {
                ("mode", None) => {}
                ("problems", None) => cfg.problems = parse_list(value, parse_problem)?,
                ("seeds", None) => cfg.seeds = parse_num(key, value)?,
                ("out", None) => cfg.out = PathBuf::from(value),
                ("rows", Some(p)) => {
                    explicit_rows.insert(p, parse_list(value, |s| s.parse::<ArchRow>())?);
                }
                ("iterations" | "learning_rate" | "collocation", _) => {
                    let o = match target {
                        Some(p) => cfg.problem_overrides.entry(p).or_default(),
                        None => &mut cfg.overrides,
                    };
                    match base {
                        "iterations" => o.iterations = Some(parse_num(key, value)?),
                        "learning_rate" => o.learning_rate = Some(parse_num(key, value)?),
                        _ => o.collocation = Some(parse_num(key, value)?),
                    }
                }
                _ => return Err(HarnessError::Usage(format!("unknown config key '{key}'"))),
            }
        }
        cfg.rows.extend(explicit_rows);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn rows(&self, problem: ProblemId) -> &[ArchRow] {
        self.rows.get(&problem).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Effective overrides for `problem`: per-problem keys, then global keys,
    /// then the preset.
    pub fn overrides_for(&self, problem: ProblemId) -> Overrides {
        let preset = match self.mode {
            Mode::Desk => desk_overrides(problem),
            Mode::Paper => Overrides::default(),
        };
        let specific = self.problem_overrides.get(&problem).copied().unwrap_or_default();
        specific.or(self.overrides).or(preset)
    }

    pub fn train_config(&self, problem: ProblemId, row: &ArchRow) -> Result<TrainConfig> {
        let p = Problem::new(problem);
        let mut cfg = TrainConfig::new(&p, row.spec(&p)?);
        let o = self.overrides_for(problem);
        if let Some(n) = o.iterations {
            cfg.iterations = n;
        }
        if let Some(lr) = o.learning_rate {
            cfg.learning_rate = lr;
        }
        if let Some(n) = o.collocation {
            cfg.n_collocation = n;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.seeds == 0 {
            return Err(HarnessError::Config("need at least one seed".into()));
        }
        if self.problems.is_empty() {
            return Err(HarnessError::Config("no problems selected".into()));
        }
        for &problem in &self.problems {
            for row in self.rows(problem) {
                let cfg = self.train_config(problem, row)?;
                if self.mode == Mode::Paper {
                    check_paper_row(problem, row, &cfg.spec)?;
                }
            }
        }
        Ok(())
    }
}

/// Desk-scale schedule: a tenth of the iterations and, for PDEs, a 20×20
/// collocation grid.
pub fn desk_overrides(problem: ProblemId) -> Overrides {
    let p = Problem::new(problem);
    Overrides {
        iterations: Some(p.schedule().iterations / DESK_ITERATION_DIVISOR),
        learning_rate: None,
        collocation: (!p.is_ode()).then_some(DESK_PDE_COLLOCATION),
    }
}

/// Hard error unless `row` is a tabulated architecture whose computed
/// parameter count equals the printed one.
pub fn check_paper_row(problem: ProblemId, row: &ArchRow, spec: &NetworkSpec) -> Result<()> {
    let printed = find_row(problem, row.method, row.hidden, row.width).ok_or_else(|| {
        HarnessError::Config(format!("{problem}: {row} is not a tabulated architecture"))
    })?;
    if !printed.count_matches(spec) {
        return Err(HarnessError::Config(format!(
            "{problem}: {row} has {} parameters, the table lists {}",
            spec.param_count(),
            printed.params
        )));
    }
    Ok(())
}

pub fn parse_mode(s: &str) -> Result<Mode> {
    match s {
        "paper" => Ok(Mode::Paper),
        "desk" => Ok(Mode::Desk),
        _ => Err(HarnessError::Usage(format!("unknown mode '{s}', expected paper or desk"))),
    }
}

pub fn parse_problem(s: &str) -> Result<ProblemId> {
    s.trim()
        .parse()
        .map_err(|_| HarnessError::Usage(format!("unknown problem '{}'", s.trim())))
}

fn parse_list<T>(value: &str, f: impl Fn(&str) -> Result<T>) -> Result<Vec<T>> {
    value.split(',').map(str::trim).filter(|s| !s.is_empty()).map(f).collect()
}

fn parse_num<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| HarnessError::Usage(format!("{key}: cannot parse '{value}'")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_cover_all_tables() {
        let paper = SuiteConfig::paper();
        assert_eq!(paper.seeds, 10);
        assert_eq!(paper.rows.values().map(Vec::len).sum::<usize>(), 60);
        paper.validate().unwrap();
        let desk = SuiteConfig::desk();
        let heat = desk.train_config(ProblemId::Heat, &ArchRow::new(NetworkKind::Kan, 3, 5)).unwrap();
        assert_eq!((heat.iterations, heat.n_collocation), (500, 400));
        let airy = desk.train_config(ProblemId::Airy, &ArchRow::new(NetworkKind::Mlp, 2, 20)).unwrap();
        assert_eq!((airy.iterations, airy.n_collocation, airy.learning_rate), (2000, 100, 5e-3));
    }

    #[test]
    fn rows_roundtrip_through_text() {
        for s in ["pinn:1:40", "pikan:2:10:5:3"] {
            assert_eq!(s.parse::<ArchRow>().unwrap().to_string(), s);
        }
        assert!("pinn:1:40:5:3".parse::<ArchRow>().is_err());
        assert!(matches!("transformer:1:4".parse::<ArchRow>(), Err(HarnessError::Usage(_))));
    }

    #[test]
    fn override_precedence() {
        let text = "mode = desk\nproblems = heat, logistic\niterations = 7\niterations.heat = 3\nlearning_rate = 0.5\n";
        let cfg = SuiteConfig::parse(text, Mode::Paper).unwrap();
        assert_eq!(cfg.mode, Mode::Desk);
        let row = ArchRow::new(NetworkKind::Mlp, 1, 40);
        let heat = cfg.train_config(ProblemId::Heat, &ArchRow::new(NetworkKind::Mlp, 2, 20)).unwrap();
        assert_eq!((heat.iterations, heat.n_collocation, heat.learning_rate), (3, 400, 0.5));
        let logistic = cfg.train_config(ProblemId::Logistic, &row).unwrap();
        assert_eq!(logistic.iterations, 7);
    }

    #[test]
    fn paper_mode_rejects_untabulated_rows() {
        let err = SuiteConfig::parse("problems = logistic\nrows.logistic = pinn:1:41\n", Mode::Paper).unwrap_err();
        assert!(matches!(err, HarnessError::Config(_)), "{err}");
        // A tabulated (H, W) with a grid that changes the count.
        let err = SuiteConfig::parse("problems = logistic\nrows.logistic = pikan:1:7:4:3\n", Mode::Paper).unwrap_err();
        assert!(err.to_string().contains("parameters"), "{err}");
        // The same rows are allowed at desk scale.
        SuiteConfig::parse("problems = logistic\nrows.logistic = pikan:1:7:4:3\n", Mode::Desk).unwrap();
        // The oscillatory PIKAN trains at G = 5 but is checked against its printed count.
        SuiteConfig::parse("problems = oscillatory\nrows.oscillatory = pikan:1:7\n", Mode::Paper).unwrap();
    }

    #[test]
    fn unknown_names_are_usage_errors() {
        for text in ["problems = schrodinger", "colour = blue", "rows.logistic = cnn:1:2", "seeds"] {
            assert!(matches!(SuiteConfig::parse(text, Mode::Desk), Err(HarnessError::Usage(_))), "{text}");
        }
        assert!(matches!(SuiteConfig::parse("seeds = 0", Mode::Desk), Err(HarnessError::Config(_))));
    }
}
