//! Run report of a Parareal solve and the performance metrics derived from it.

use thiserror::Error;

use crate::problem::{Problem, State, Trajectory};
use crate::scalar::Scalar;
use crate::stepper::StepStats;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DiagnosticsError {
    #[error("no samples to aggregate")]
    Empty,
    #[error("timings must be positive, got {0}")]
    NonPositive(f64),
}

/// Per-iteration and per-window record of one Parareal run.
///
/// Matrices are indexed `[iteration k - 1][window j - 1]`. Wall-clock
/// fields (`time_*`, `total_wall`) are the only non-deterministic content.
#[derive(Debug, Clone, PartialEq)]
pub struct PararealReport<S> {
    pub n_windows: usize,
    /// Iteration at which the run converged, `None` if it hit `k_max`.
    pub converged_at: Option<usize>,
    pub err_per_iter: Vec<S>,
    /// Window boundaries `t_0..t_N`.
    pub boundaries: Vec<S>,
    /// Number of steps `M` of the first adaptive coarse solve.
    pub coarse_steps: usize,
    /// Updated boundary states `U_j^(k)` for `j = 0..N`.
    pub boundary_states: Vec<Vec<State<S>>>,
    /// Fine results `F(t_j, t_{j-1}, U_{j-1}^(k))` for `j = 1..N`.
    pub fine_states: Vec<Vec<State<S>>>,
    pub first_coarse_stats: StepStats,
    pub coarse_nr_iters: Vec<Vec<usize>>,
    pub fine_nr_iters: Vec<Vec<usize>>,
    pub fine_steps: Vec<Vec<usize>>,
    /// Wall time of the first adaptive coarse solve, s.
    pub time_first_coarse: f64,
    /// Coarse wall time per iteration, s. Entry 0 is the first adaptive solve.
    pub time_coarse_per_iter: Vec<f64>,
    /// Fixed-grid coarse wall time per window; zero in iteration 1.
    pub time_coarse_per_window: Vec<Vec<f64>>,
    /// Fine wall time per window, measured inside each worker.
    pub time_fine_per_window: Vec<Vec<f64>>,
    pub total_wall: f64,
}

impl<S: Scalar> PararealReport<S> {
    pub fn iterations(&self) -> usize {
        self.err_per_iter.len()
    }

    pub fn final_error(&self) -> Option<S> {
        self.err_per_iter.last().copied()
    }

    /// Fine wall time per window summed over all iterations.
    pub fn cumulative_fine_times(&self) -> Vec<f64> {
        let mut cum = vec![0.0; self.n_windows];
        for row in &self.time_fine_per_window {
            for (c, t) in cum.iter_mut().zip(row) {
                *c += t;
            }
        }
        cum
    }

    /// Fine Newton-Raphson iterations per window summed over all iterations;
    /// a deterministic stand-in for the cumulative fine times.
    pub fn cumulative_fine_nr_iters(&self) -> Vec<usize> {
        let mut cum = vec![0; self.n_windows];
        for row in &self.fine_nr_iters {
            for (c, n) in cum.iter_mut().zip(row) {
                *c += n;
            }
        }
        cum
    }

    pub fn total_coarse_time(&self) -> f64 {
        self.time_coarse_per_iter.iter().sum()
    }
}

/// Ratio of the smallest to the largest cumulative per-window fine time.
pub fn load_balance(cum_fine_per_window: &[f64]) -> Result<f64, DiagnosticsError> {
    if cum_fine_per_window.is_empty() {
        return Err(DiagnosticsError::Empty);
    }
    if let Some(&bad) = cum_fine_per_window.iter().find(|&&t| !(t > 0.0)) {
        return Err(DiagnosticsError::NonPositive(bad));
    }
    let min = cum_fine_per_window
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    let max = cum_fine_per_window.iter().copied().fold(0.0, f64::max);
    Ok(min / max)
}

/// Actual speedup: sequential fine wall time over Parareal wall time.
pub fn speedup<S: Scalar>(report: &PararealReport<S>, sequential_wall: f64) -> f64 {
    sequential_wall / report.total_wall
}

/// Upper bound `N / K`, as an exact ratio (published tables round it).
pub fn max_possible_speedup(n_windows: usize, k: usize) -> f64 {
    assert!(k >= 1, "iteration count must be at least 1");
    n_windows as f64 / k as f64
}

/// Minimum, average and maximum over windows of the cumulative fine time.
pub fn fine_time_stats<S: Scalar>(
    report: &PararealReport<S>,
) -> Result<(f64, f64, f64), DiagnosticsError> {
    if report.time_fine_per_window.is_empty() || report.n_windows == 0 {
        return Err(DiagnosticsError::Empty);
    }
    let cum = report.cumulative_fine_times();
    let min = cum.iter().copied().fold(f64::INFINITY, f64::min);
    let max = cum.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let avg = cum.iter().sum::<f64>() / cum.len() as f64;
    Ok((min, avg, max))
}

/// `|T_max(run) - T_max(reference)|` at every reference time, with the run
/// linearly interpolated onto the reference times.
pub fn tmax_error_series<S: Scalar, P: Problem<S> + ?Sized>(
    problem: &P,
    run: &Trajectory<S>,
    reference: &Trajectory<S>,
) -> Vec<(S, S)> {
    reference
        .entries()
        .iter()
        .map(|(t, u_ref)| {
            let t_run = run.interpolate_with(*t, |u| problem.max_temperature(u));
            (*t, (t_run - problem.max_temperature(u_ref)).abs())
        })
        .collect()
}

/// Largest value of [`tmax_error_series`].
pub fn max_tmax_error<S: Scalar, P: Problem<S> + ?Sized>(
    problem: &P,
    run: &Trajectory<S>,
    reference: &Trajectory<S>,
) -> S {
    tmax_error_series(problem, run, reference)
        .into_iter()
        .map(|(_, e)| e)
        .fold(S::zero(), S::max)
}
