//! Benchmark architecture rows with their reference parameter counts and
//! errors, one row per (method, H, W).

use pikan_core::networks::{kan_param_count, mlp_param_count};
use pikan_core::{NetworkKind, NetworkSpec, Problem, ProblemId};

/// One architecture row: reported parameter count and `(mean, std)` errors
/// in the units of the tables (relative errors in percent).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PaperRow {
    pub problem: ProblemId,
    pub method: NetworkKind,
    pub hidden: usize,
    pub width: usize,
    pub params: usize,
    /// Grid size that reproduces the printed parameter count when it
    /// differs from the grid used for training.
    pub printed_grid: Option<usize>,
    pub rel_l2: (f64, f64),
    pub linf: (f64, f64),
    pub grad_rel_l2: Option<(f64, f64)>,
    pub grad_linf: Option<(f64, f64)>,
}

#[allow(clippy::too_many_arguments)]
const fn r(
    problem: ProblemId,
    method: NetworkKind,
    hidden: usize,
    width: usize,
    params: usize,
    printed_grid: Option<usize>,
    rel_l2: (f64, f64),
    linf: (f64, f64),
    grad_rel_l2: Option<(f64, f64)>,
    grad_linf: Option<(f64, f64)>,
) -> PaperRow {
    PaperRow {
        problem,
        method,
        hidden,
        width,
        params,
        printed_grid,
        rel_l2,
        linf,
        grad_rel_l2,
        grad_linf,
    }
}

#[rustfmt::skip]
pub static PAPER_ROWS: [PaperRow; 60] = [
    r(ProblemId::Logistic, NetworkKind::Mlp, 1, 40, 121, None, (7.70e-2, 9.90e-2), (7.35e-4, 8.81e-4), Some((4.00e-1, 4.68e-1)), Some((6.32e-3, 1.06e-2))),
    r(ProblemId::Logistic, NetworkKind::Mlp, 2, 9, 118, None, (5.99e1, 4.89e1), (5.64e-1, 4.61e-1), Some((1.05e2, 8.59e1)), Some((2.54e0, 2.08e0))),
    r(ProblemId::Logistic, NetworkKind::Mlp, 3, 7, 134, None, (8.00e1, 4.00e1), (7.53e-1, 3.77e-1), Some((1.43e2, 7.14e1)), Some((3.71e0, 1.87e0))),
    r(ProblemId::Logistic, NetworkKind::Mlp, 4, 5, 106, None, (9.00e1, 3.00e1), (8.49e-1, 2.83e-1), Some((1.61e2, 5.36e1)), Some((4.13e0, 1.40e0))),
    r(ProblemId::Logistic, NetworkKind::Kan, 1, 7, 112, None, (1.94e-3, 1.36e-4), (2.91e-5, 2.12e-6), Some((6.05e-2, 2.58e-3)), Some((3.06e-4, 1.06e-5))),
    r(ProblemId::Logistic, NetworkKind::Kan, 2, 3, 120, None, (2.67e-3, 3.98e-4), (4.64e-5, 6.13e-6), Some((4.92e-2, 1.99e-3)), Some((3.50e-4, 2.66e-5))),
    r(ProblemId::Logistic, NetworkKind::Kan, 3, 2, 96, None, (3.20e-3, 6.70e-4), (5.19e-5, 8.18e-6), Some((6.26e-2, 9.74e-4)), Some((3.41e-4, 6.78e-6))),
    r(ProblemId::Logistic, NetworkKind::Kan, 4, 2, 128, None, (4.75e-3, 2.60e-3), (5.75e-5, 2.42e-5), Some((6.15e-2, 1.68e-3)), Some((3.59e-4, 2.84e-5))),
    r(ProblemId::Oscillatory, NetworkKind::Mlp, 1, 46, 139, None, (2.39e0, 3.82e-1), (6.57e-2, 6.52e-3), None, None),
    r(ProblemId::Oscillatory, NetworkKind::Mlp, 2, 10, 141, None, (1.76e-1, 2.53e-1), (4.79e-3, 6.72e-3), None, None),
    r(ProblemId::Oscillatory, NetworkKind::Mlp, 3, 7, 134, None, (8.29e-2, 1.33e-1), (2.80e-3, 5.03e-3), None, None),
    r(ProblemId::Oscillatory, NetworkKind::Mlp, 4, 6, 145, None, (6.48e-2, 5.24e-2), (2.08e-3, 2.02e-3), None, None),
    r(ProblemId::Oscillatory, NetworkKind::Kan, 1, 7, 112, Some(3), (2.35e-2, 1.77e-3), (7.45e-4, 4.37e-5), None, None),
    r(ProblemId::Oscillatory, NetworkKind::Kan, 2, 3, 120, Some(3), (1.01e-2, 1.70e-3), (3.78e-4, 3.69e-5), None, None),
    r(ProblemId::Oscillatory, NetworkKind::Kan, 3, 2, 96, Some(3), (2.21e-2, 8.26e-3), (6.27e-4, 2.15e-4), None, None),
    r(ProblemId::Oscillatory, NetworkKind::Kan, 4, 2, 128, Some(3), (1.06e-2, 2.50e-3), (2.91e-4, 5.48e-5), None, None),
    r(ProblemId::Harmonic, NetworkKind::Mlp, 1, 40, 121, None, (8.55e0, 3.85e0), (3.14e-2, 1.42e-2), Some((8.69e0, 3.91e0)), Some((8.53e-2, 3.82e-2))),
    r(ProblemId::Harmonic, NetworkKind::Mlp, 2, 9, 118, None, (1.54e-1, 1.29e-1), (5.64e-4, 4.39e-4), Some((1.89e-1, 1.19e-1)), Some((2.69e-3, 1.58e-3))),
    r(ProblemId::Harmonic, NetworkKind::Mlp, 3, 7, 134, None, (2.80e-1, 2.63e-1), (1.03e-3, 1.00e-3), Some((3.17e-1, 2.89e-1)), Some((4.52e-3, 4.11e-3))),
    r(ProblemId::Harmonic, NetworkKind::Mlp, 4, 5, 106, None, (4.92e-1, 5.75e-1), (1.71e-3, 1.91e-3), Some((5.11e-1, 5.62e-1)), Some((6.21e-3, 6.01e-3))),
    r(ProblemId::Harmonic, NetworkKind::Kan, 1, 7, 112, None, (1.44e-2, 2.98e-3), (5.68e-5, 1.45e-5), Some((1.74e-2, 6.19e-4)), Some((4.37e-4, 1.81e-5))),
    r(ProblemId::Harmonic, NetworkKind::Kan, 2, 3, 120, None, (4.89e-2, 1.94e-2), (1.92e-4, 7.80e-5), Some((4.62e-2, 1.93e-2)), Some((6.73e-4, 2.05e-4))),
    r(ProblemId::Harmonic, NetworkKind::Kan, 3, 2, 96, None, (1.21e-1, 6.65e-3), (4.38e-4, 2.56e-5), Some((1.22e-1, 6.41e-3)), Some((1.49e-3, 6.67e-5))),
    r(ProblemId::Harmonic, NetworkKind::Kan, 4, 2, 128, None, (1.58e-1, 5.57e-3), (5.76e-4, 1.67e-5), Some((1.56e-1, 5.44e-3)), Some((1.70e-3, 4.74e-5))),
    r(ProblemId::Airy, NetworkKind::Mlp, 1, 64, 193, None, (3.80e1, 2.21e1), (4.59e0, 2.67e0), None, None),
    r(ProblemId::Airy, NetworkKind::Mlp, 2, 12, 193, None, (7.02e-1, 5.43e-1), (8.48e-2, 6.72e-2), None, None),
    r(ProblemId::Airy, NetworkKind::Mlp, 3, 9, 208, None, (1.91e1, 3.58e1), (2.29e0, 4.30e0), None, None),
    r(ProblemId::Airy, NetworkKind::Kan, 1, 12, 192, None, (5.21e-1, 1.35e-1), (6.48e-2, 1.70e-2), None, None),
    r(ProblemId::Airy, NetworkKind::Kan, 2, 4, 192, None, (2.32e-2, 1.80e-2), (3.22e-3, 1.96e-3), None, None),
    r(ProblemId::Airy, NetworkKind::Kan, 3, 3, 192, None, (2.30e-1, 1.79e-1), (2.78e-2, 2.17e-2), None, None),
    r(ProblemId::Laplace, NetworkKind::Mlp, 1, 175, 701, None, (3.01e0, 1.92e-1), (3.96e-2, 3.43e-3), Some((8.05e0, 4.85e-1)), Some((6.21e-1, 4.28e-2))),
    r(ProblemId::Laplace, NetworkKind::Mlp, 2, 24, 697, None, (5.01e-1, 9.37e-2), (7.07e-3, 1.70e-3), Some((1.44e0, 2.78e-1)), Some((1.32e-1, 2.84e-2))),
    r(ProblemId::Laplace, NetworkKind::Mlp, 3, 17, 681, None, (5.46e-1, 1.22e-1), (8.52e-3, 1.90e-3), Some((1.44e0, 2.15e-1)), Some((1.11e-1, 2.52e-2))),
    r(ProblemId::Laplace, NetworkKind::Kan, 1, 23, 690, None, (5.79e-2, 9.66e-4), (9.94e-4, 1.97e-5), Some((1.67e-1, 1.74e-3)), Some((1.57e-2, 3.71e-5))),
    r(ProblemId::Laplace, NetworkKind::Kan, 2, 7, 700, None, (2.69e-1, 1.92e-3), (6.20e-3, 4.62e-5), Some((8.50e-1, 1.89e-3)), Some((1.13e-1, 4.44e-4))),
    r(ProblemId::Laplace, NetworkKind::Kan, 3, 5, 650, None, (3.47e-1, 4.60e-3), (5.90e-3, 1.17e-4), Some((1.04e0, 1.16e-2)), Some((8.92e-2, 1.48e-3))),
    r(ProblemId::Poisson, NetworkKind::Mlp, 1, 175, 701, None, (1.95e-1, 1.06e-1), (4.77e-3, 1.38e-3), Some((4.74e-1, 1.33e-1)), Some((6.99e-2, 1.70e-2))),
    r(ProblemId::Poisson, NetworkKind::Mlp, 2, 24, 697, None, (2.44e-1, 6.87e-2), (6.38e-3, 1.98e-3), Some((6.39e-1, 1.81e-1)), Some((9.60e-2, 3.19e-2))),
    r(ProblemId::Poisson, NetworkKind::Mlp, 3, 17, 681, None, (3.30e-1, 1.07e-1), (1.15e-2, 4.97e-3), Some((9.92e-1, 2.82e-1)), Some((1.63e-1, 6.12e-2))),
    r(ProblemId::Poisson, NetworkKind::Kan, 1, 23, 690, None, (8.24e-2, 1.74e-3), (2.54e-3, 1.72e-5), Some((3.30e-1, 4.67e-4)), Some((5.10e-2, 1.72e-4))),
    r(ProblemId::Poisson, NetworkKind::Kan, 2, 7, 700, None, (1.97e-1, 5.69e-4), (5.73e-3, 3.21e-5), Some((7.17e-1, 7.77e-4)), Some((1.39e-1, 2.67e-4))),
    r(ProblemId::Poisson, NetworkKind::Kan, 3, 5, 650, None, (1.91e-1, 1.92e-3), (5.23e-3, 4.35e-5), Some((7.54e-1, 2.88e-3)), Some((1.44e-1, 9.71e-4))),
    r(ProblemId::Heat, NetworkKind::Mlp, 1, 175, 701, None, (7.92e0, 8.07e-1), (7.14e-2, 5.58e-3), Some((1.24e1, 8.09e-1)), Some((1.83e0, 9.62e-2))),
    r(ProblemId::Heat, NetworkKind::Mlp, 2, 24, 697, None, (8.73e-1, 2.93e-1), (6.58e-3, 2.33e-3), Some((1.67e0, 6.34e-1)), Some((3.37e-1, 1.40e-1))),
    r(ProblemId::Heat, NetworkKind::Mlp, 3, 17, 681, None, (8.52e-1, 4.41e-1), (4.94e-3, 2.19e-3), Some((1.04e0, 4.83e-1)), Some((1.73e-1, 9.78e-2))),
    r(ProblemId::Heat, NetworkKind::Kan, 1, 23, 690, None, (1.85e0, 8.51e-3), (1.72e-2, 5.47e-5), Some((4.40e0, 4.81e-3)), Some((8.76e-1, 7.10e-4))),
    r(ProblemId::Heat, NetworkKind::Kan, 2, 7, 700, None, (8.55e-1, 8.01e-3), (7.31e-3, 1.22e-4), Some((1.91e0, 2.03e-2)), Some((3.87e-1, 5.31e-3))),
    r(ProblemId::Heat, NetworkKind::Kan, 3, 5, 650, None, (4.46e-1, 4.13e-3), (3.24e-3, 4.94e-5), Some((8.56e-1, 3.60e-3)), Some((1.78e-1, 6.03e-4))),
    r(ProblemId::Wave, NetworkKind::Mlp, 1, 175, 701, None, (5.64e-1, 1.97e-1), (7.55e-3, 1.87e-3), Some((1.58e0, 4.41e-1)), Some((1.62e-1, 5.72e-2))),
    r(ProblemId::Wave, NetworkKind::Mlp, 2, 24, 697, None, (5.56e-1, 1.70e-1), (7.83e-3, 1.79e-3), Some((1.75e0, 4.55e-1)), Some((2.01e-1, 4.94e-2))),
    r(ProblemId::Wave, NetworkKind::Mlp, 3, 17, 681, None, (8.55e-1, 3.42e-1), (1.26e-2, 5.46e-3), Some((2.36e0, 8.27e-1)), Some((2.32e-1, 1.43e-1))),
    r(ProblemId::Wave, NetworkKind::Kan, 1, 23, 690, None, (3.70e-1, 4.91e-4), (6.04e-3, 2.89e-5), Some((1.35e0, 1.45e-3)), Some((2.17e-1, 8.28e-4))),
    r(ProblemId::Wave, NetworkKind::Kan, 2, 7, 700, None, (3.06e-1, 1.04e-3), (4.77e-3, 3.87e-5), Some((1.04e0, 2.07e-3)), Some((7.33e-2, 7.67e-4))),
    r(ProblemId::Wave, NetworkKind::Kan, 3, 5, 650, None, (1.80e-1, 7.30e-4), (3.99e-3, 1.15e-4), Some((7.40e-1, 3.28e-3)), Some((1.05e-1, 2.78e-3))),
    r(ProblemId::Burgers, NetworkKind::Mlp, 1, 175, 701, None, (9.55e-1, 2.29e-1), (2.66e-2, 7.09e-3), None, None),
    r(ProblemId::Burgers, NetworkKind::Mlp, 2, 24, 697, None, (1.90e-1, 6.52e-2), (5.47e-3, 1.69e-3), None, None),
    r(ProblemId::Burgers, NetworkKind::Mlp, 3, 17, 681, None, (1.13e-1, 3.84e-2), (3.57e-3, 1.03e-3), None, None),
    r(ProblemId::Burgers, NetworkKind::Kan, 1, 23, 690, None, (3.28e-2, 1.67e-3), (1.11e-3, 8.45e-5), None, None),
    r(ProblemId::Burgers, NetworkKind::Kan, 2, 7, 700, None, (2.16e-2, 3.05e-3), (7.48e-4, 2.88e-5), None, None),
    r(ProblemId::Burgers, NetworkKind::Kan, 3, 5, 650, None, (4.01e-2, 5.89e-3), (1.38e-3, 5.57e-5), None, None),
];

/// Number of the table holding `problem`'s architecture rows.
pub fn table_number(problem: ProblemId) -> usize {
    2 + ProblemId::ALL.iter().position(|&p| p == problem).expect("listed problem")
}

pub fn rows_for(problem: ProblemId) -> impl Iterator<Item = &'static PaperRow> {
    PAPER_ROWS.iter().filter(move |r| r.problem == problem)
}

pub fn find_row(problem: ProblemId, method: NetworkKind, hidden: usize, width: usize) -> Option<&'static PaperRow> {
    rows_for(problem).find(|r| r.method == method && r.hidden == hidden && r.width == width)
}

impl PaperRow {
    /// Network trained for this row under the problem's schedule.
    pub fn spec(&self) -> NetworkSpec {
        let problem = Problem::new(self.problem);
        let s = problem.schedule();
        NetworkSpec::with_hidden(self.method, self.hidden, self.width, s.grid, s.order, problem.domain())
            .expect("tabulated architectures are valid")
    }

    /// Parameter count from the count formulas, using the printed grid
    /// where one is recorded.
    pub fn computed_params(&self) -> usize {
        let spec = self.spec();
        match self.method {
            NetworkKind::Mlp => mlp_param_count(&spec.widths),
            NetworkKind::Kan => kan_param_count(&spec.widths, self.printed_grid.unwrap_or(spec.grid), spec.order),
        }
    }

    /// Whether `count`, computed for a network of this row, agrees with the
    /// printed parameter count.
    pub fn count_matches(&self, spec: &NetworkSpec) -> bool {
        let count = match (spec.kind, self.printed_grid) {
            (NetworkKind::Kan, Some(g)) => kan_param_count(&spec.widths, g, spec.order),
            _ => spec.param_count(),
        };
        count == self.params
    }
}

#[derive(Clone, Debug)]
pub struct CountCheck {
    pub row: &'static PaperRow,
    pub computed: usize,
}

impl CountCheck {
    pub fn ok(&self) -> bool {
        self.computed == self.row.params
    }
}

/// Recomputes every printed parameter count.
pub fn paper_check() -> Vec<CountCheck> {
    PAPER_ROWS
        .iter()
        .map(|row| CountCheck {
            row,
            computed: row.computed_params(),
        })
        .collect()
}

/// Best reported row per method, selected by lowest mean relative L² error.
pub fn reported_best(problem: ProblemId, method: NetworkKind) -> &'static PaperRow {
    rows_for(problem)
        .filter(|r| r.method == method)
        .min_by(|a, b| a.rel_l2.0.total_cmp(&b.rel_l2.0))
        .expect("every problem has rows for both methods")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn row_counts_per_table() {
        let n = |p| rows_for(p).count();
        assert_eq!(n(ProblemId::Logistic), 8);
        assert_eq!(n(ProblemId::Oscillatory), 8);
        assert_eq!(n(ProblemId::Harmonic), 8);
        for p in [ProblemId::Airy, ProblemId::Laplace, ProblemId::Poisson, ProblemId::Heat, ProblemId::Wave, ProblemId::Burgers] {
            assert_eq!(n(p), 6);
        }
        assert_eq!(table_number(ProblemId::Logistic), 2);
        assert_eq!(table_number(ProblemId::Burgers), 10);
    }

    #[test]
    fn every_count_reproduced() {
        let checks = paper_check();
        assert_eq!(checks.len(), 60);
        for c in &checks {
            assert!(c.ok(), "{:?}: {} vs {}", c.row, c.computed, c.row.params);
        }
    }

    #[test]
    fn oscillatory_trains_with_the_stated_grid() {
        let row = find_row(ProblemId::Oscillatory, NetworkKind::Kan, 1, 7).unwrap();
        let spec = row.spec();
        assert_eq!(spec.grid, 5);
        assert_eq!(spec.param_count(), 140);
        assert!(row.count_matches(&spec));
        assert_eq!(row.params, 112);
    }

    #[test]
    fn gradient_columns_only_for_closed_forms() {
        for row in &PAPER_ROWS {
            let closed = Problem::new(row.problem).has_closed_form();
            assert_eq!(row.grad_rel_l2.is_some(), closed);
            assert_eq!(row.grad_linf.is_some(), closed);
        }
    }

    #[test]
    fn best_rows_reproduce_summary_table() {
        let summary = [
            (ProblemId::Logistic, (7.70e-2, 9.90e-2), (1.94e-3, 1.36e-4)),
            (ProblemId::Oscillatory, (6.48e-2, 5.24e-2), (1.01e-2, 1.70e-3)),
            (ProblemId::Harmonic, (1.54e-1, 1.29e-1), (1.44e-2, 2.98e-3)),
            (ProblemId::Airy, (7.02e-1, 5.43e-1), (2.32e-2, 1.80e-2)),
            (ProblemId::Laplace, (5.01e-1, 9.37e-2), (5.79e-2, 9.66e-4)),
            (ProblemId::Poisson, (1.95e-1, 1.06e-1), (8.24e-2, 1.74e-3)),
            (ProblemId::Heat, (8.52e-1, 4.41e-1), (4.46e-1, 4.13e-3)),
            (ProblemId::Wave, (5.56e-1, 1.70e-1), (1.80e-1, 7.30e-4)),
            (ProblemId::Burgers, (1.13e-1, 3.84e-2), (2.16e-2, 3.05e-3)),
        ];
        for (p, pinn, pikan) in summary {
            assert_eq!(reported_best(p, NetworkKind::Mlp).rel_l2, pinn, "{p}");
            assert_eq!(reported_best(p, NetworkKind::Kan).rel_l2, pikan, "{p}");
            assert!(pikan.0 < pinn.0);
        }
    }
}
