//! Parareal with automatic time-window partitioning.
//!
//! Iteration 1 runs an adaptive coarse solve over the whole interval; its
//! `M` step times `t_hat` define the window boundaries
//! `t_j = t_hat[floor(M j / N)]` and serve as the fixed grid of every later
//! coarse solve. Each iteration then runs the fine propagator concurrently
//! on all windows, and iterations `k >= 2` first sweep the coarse propagator
//! sequentially with the correction
//! `U_j^(k) = F(U_{j-1}^(k-1)) + G(U_{j-1}^(k)) - G(U_{j-1}^(k-1))`.
//! The run stops once the largest jump of the maximum temperature between
//! the fine solution and the updated state at any boundary drops below
//! `tol_pr`.

use std::fmt;
use std::time::Instant;

use rayon::prelude::*;
use thiserror::Error;

use crate::diagnostics::PararealReport;
use crate::problem::{state_linear_combination, Problem, State, Trajectory};
use crate::scalar::Scalar;
use crate::stepper::{
    adaptive_integrate, fixed_integrate, Integration, IntegrationError, StepperTolerances,
};

/// Default iteration cap.
pub const DEFAULT_K_MAX: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PararealConfig<S> {
    pub n_windows: usize,
    /// Convergence tolerance on the boundary jump of the maximum temperature, K.
    pub tol_pr: S,
    pub fine_tol: StepperTolerances<S>,
    /// Used by both coarse propagators; `tol_t` only matters for the first one.
    pub coarse_tol: StepperTolerances<S>,
    pub k_max: usize,
}

impl<S: Scalar> PararealConfig<S> {
    pub fn validate(&self) -> Result<(), String> {
        if self.n_windows == 0 {
            return Err("number of windows must be at least 1".to_string());
        }
        if !(self.tol_pr > S::zero()) {
            return Err(format!("tol_pr must be positive, got {}", self.tol_pr));
        }
        if self.k_max == 0 {
            return Err("k_max must be at least 1".to_string());
        }
        self.fine_tol
            .validate()
            .map_err(|e| format!("fine tolerances: {e}"))?;
        self.coarse_tol
            .validate()
            .map_err(|e| format!("coarse tolerances: {e}"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PartitionError {
    #[error(
        "first coarse solve produced {steps} steps for {windows} windows; \
         reduce N or tighten tol_t of the first coarse propagator"
    )]
    TooFewSteps { steps: usize, windows: usize },
    #[error("coarse grid times are not strictly increasing")]
    NotIncreasing,
    #[error("number of windows must be at least 1")]
    NoWindows,
}

/// Which propagator call an integration failure came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    FirstCoarse,
    Coarse { iteration: usize, window: usize },
    Fine { iteration: usize, window: usize },
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Stage::FirstCoarse => write!(f, "first adaptive coarse solve"),
            Stage::Coarse { iteration, window } => {
                write!(f, "coarse solve (iteration {iteration}, window {window})")
            }
            Stage::Fine { iteration, window } => {
                write!(f, "fine solve (iteration {iteration}, window {window})")
            }
        }
    }
}

/// Stitched fine trajectory and report of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct PararealOutcome<S> {
    pub trajectory: Trajectory<S>,
    pub report: PararealReport<S>,
}

#[derive(Debug, Error)]
pub enum PararealError<S: Scalar> {
    #[error("invalid Parareal configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Partition(#[from] PartitionError),
    #[error("{stage} failed: {source}")]
    Integration {
        stage: Stage,
        #[source]
        source: IntegrationError,
    },
    #[error("Parareal did not converge within {} iterations", .0.report.iterations())]
    NotConverged(Box<PararealOutcome<S>>),
}

/// Indices `floor(M j / N)` for `j = 0..N`.
pub fn partition_indices(m: usize, n: usize) -> Result<Vec<usize>, PartitionError> {
    if n == 0 {
        return Err(PartitionError::NoWindows);
    }
    if m < n {
        return Err(PartitionError::TooFewSteps {
            steps: m,
            windows: n,
        });
    }
    Ok((0..=n).map(|j| m * j / n).collect())
}

/// Window boundaries `t_j = t_hat[floor(M j / N)]`, `M = t_hat.len() - 1`.
pub fn partition_windows<S: Scalar>(t_hat: &[S], n: usize) -> Result<Vec<S>, PartitionError> {
    if t_hat.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(PartitionError::NotIncreasing);
    }
    let m = t_hat.len().saturating_sub(1);
    Ok(partition_indices(m, n)?
        .into_iter()
        .map(|i| t_hat[i])
        .collect())
}

/// Contiguous slice of `t_hat` from `t_a` to `t_b` inclusive.
///
/// Panics if either endpoint is not an element of `t_hat`; window
/// boundaries are drawn from `t_hat`, so this only fires on misuse.
pub fn coarse_window_grid<S: Scalar>(t_hat: &[S], t_a: S, t_b: S) -> &[S] {
    let find = |t: S| {
        t_hat
            .binary_search_by(|x| x.partial_cmp(&t).expect("finite grid times"))
            .unwrap_or_else(|_| panic!("{t} is not a coarse grid time"))
    };
    let (a, b) = (find(t_a), find(t_b));
    assert!(a < b, "window start must precede its end");
    &t_hat[a..=b]
}

/// Correction `fine_prev + (coarse_new - coarse_prev)`.
pub fn parareal_update<S: Scalar>(
    fine_prev: &State<S>,
    coarse_new: &State<S>,
    coarse_prev: &State<S>,
) -> State<S> {
    let correction = state_linear_combination(S::one(), coarse_new, -S::one(), coarse_prev);
    state_linear_combination(S::one(), fine_prev, S::one(), &correction)
}

/// Largest boundary jump `|max_T(U_j) - max_T(fine_j)|` over windows.
pub fn pr_error<S: Scalar, P: Problem<S> + ?Sized>(
    problem: &P,
    updated: &[State<S>],
    fine: &[State<S>],
) -> S {
    assert_eq!(updated.len(), fine.len(), "boundary count mismatch");
    updated
        .iter()
        .zip(fine)
        .map(|(u, f)| (problem.max_temperature(u) - problem.max_temperature(f)).abs())
        .fold(S::zero(), S::max)
}

struct FineResult<S> {
    integration: Integration<S>,
    wall: f64,
}

/// Runs Parareal on `[t_0, t_n]` from `u_0` using the current rayon pool for
/// the fine loop.
pub fn run_parareal<S: Scalar, P: Problem<S> + ?Sized>(
    problem: &P,
    t_0: S,
    t_n: S,
    u_0: &State<S>,
    cfg: &PararealConfig<S>,
) -> Result<PararealOutcome<S>, PararealError<S>> {
    cfg.validate().map_err(PararealError::InvalidConfig)?;
    if !(t_0 < t_n) {
        return Err(PararealError::InvalidConfig(format!(
            "need t_0 < t_N, got [{t_0}, {t_n}]"
        )));
    }
    let run_start = Instant::now();
    let n = cfg.n_windows;

    let first_start = Instant::now();
    let first = adaptive_integrate(problem, t_0, t_n, u_0, &cfg.coarse_tol).map_err(|source| {
        PararealError::Integration {
            stage: Stage::FirstCoarse,
            source,
        }
    })?;
    let time_first_coarse = first_start.elapsed().as_secs_f64();

    let t_hat = first.trajectory.times();
    let boundaries = partition_windows(&t_hat, n)?;
    let mut updated: Vec<State<S>> = boundaries
        .iter()
        .map(|&t| {
            first
                .trajectory
                .state_at(t)
                .expect("boundaries are coarse grid times")
                .clone()
        })
        .collect();
    updated[0] = u_0.clone();
    let mut coarse_prev: Vec<State<S>> = updated[1..].to_vec();

    let mut report = PararealReport {
        n_windows: n,
        converged_at: None,
        err_per_iter: Vec::new(),
        boundaries: boundaries.clone(),
        coarse_steps: t_hat.len() - 1,
        boundary_states: Vec::new(),
        fine_states: Vec::new(),
        first_coarse_stats: first.stats,
        coarse_nr_iters: Vec::new(),
        fine_nr_iters: Vec::new(),
        fine_steps: Vec::new(),
        time_first_coarse,
        time_coarse_per_iter: Vec::new(),
        time_coarse_per_window: Vec::new(),
        time_fine_per_window: Vec::new(),
        total_wall: 0.0,
    };

    let mut fine_prev: Vec<State<S>> = Vec::new();
    let mut k = 0;
    loop {
        k += 1;

        if k == 1 {
            report.time_coarse_per_iter.push(time_first_coarse);
            report.time_coarse_per_window.push(vec![0.0; n]);
            report.coarse_nr_iters.push(vec![0; n]);
        } else {
            let sweep_start = Instant::now();
            let mut window_times = Vec::with_capacity(n);
            let mut window_nr = Vec::with_capacity(n);
            let mut coarse_new = Vec::with_capacity(n);
            for j in 1..=n {
                let t = Instant::now();
                let grid = coarse_window_grid(&t_hat, boundaries[j - 1], boundaries[j]);
                let out = fixed_integrate(problem, grid, &updated[j - 1], &cfg.coarse_tol)
                    .map_err(|source| PararealError::Integration {
                        stage: Stage::Coarse {
                            iteration: k,
                            window: j,
                        },
                        source,
                    })?;
                let coarse_j = out.trajectory.last_state().clone();
                updated[j] = parareal_update(&fine_prev[j - 1], &coarse_j, &coarse_prev[j - 1]);
                coarse_new.push(coarse_j);
                window_nr.push(out.stats.nr_iterations);
                window_times.push(t.elapsed().as_secs_f64());
            }
            coarse_prev = coarse_new;
            report
                .time_coarse_per_iter
                .push(sweep_start.elapsed().as_secs_f64());
            report.time_coarse_per_window.push(window_times);
            report.coarse_nr_iters.push(window_nr);
        }

        let fine: Vec<Result<FineResult<S>, IntegrationError>> = (1..=n)
            .into_par_iter()
            .map(|j| {
                let start = Instant::now();
                let integration = adaptive_integrate(
                    problem,
                    boundaries[j - 1],
                    boundaries[j],
                    &updated[j - 1],
                    &cfg.fine_tol,
                )?;
                Ok(FineResult {
                    integration,
                    wall: start.elapsed().as_secs_f64(),
                })
            })
            .collect();
        let mut fine_results = Vec::with_capacity(n);
        for (idx, res) in fine.into_iter().enumerate() {
            fine_results.push(res.map_err(|source| PararealError::Integration {
                stage: Stage::Fine {
                    iteration: k,
                    window: idx + 1,
                },
                source,
            })?);
        }

        let fine_ends: Vec<State<S>> = fine_results
            .iter()
            .map(|r| r.integration.trajectory.last_state().clone())
            .collect();
        let err = pr_error(problem, &updated[1..], &fine_ends);

        report.err_per_iter.push(err);
        report.boundary_states.push(updated.clone());
        report.fine_states.push(fine_ends.clone());
        report
            .time_fine_per_window
            .push(fine_results.iter().map(|r| r.wall).collect());
        report.fine_nr_iters.push(
            fine_results
                .iter()
                .map(|r| r.integration.stats.nr_iterations)
                .collect(),
        );
        report.fine_steps.push(
            fine_results
                .iter()
                .map(|r| r.integration.stats.accepted)
                .collect(),
        );

        let converged = err < cfg.tol_pr;
        if converged || k >= cfg.k_max {
            if converged {
                report.converged_at = Some(k);
            }
            report.total_wall = run_start.elapsed().as_secs_f64();
            let trajectory = stitch(fine_results.into_iter().map(|r| r.integration));
            let outcome = PararealOutcome { trajectory, report };
            return if converged {
                Ok(outcome)
            } else {
                Err(PararealError::NotConverged(Box::new(outcome)))
            };
        }
        fine_prev = fine_ends;
    }
}

/// [`run_parareal`] on a dedicated pool of `workers` threads.
pub fn run_parareal_with_workers<S: Scalar, P: Problem<S> + ?Sized>(
    problem: &P,
    t_0: S,
    t_n: S,
    u_0: &State<S>,
    cfg: &PararealConfig<S>,
    workers: usize,
) -> Result<PararealOutcome<S>, PararealError<S>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| PararealError::InvalidConfig(format!("cannot build worker pool: {e}")))?;
    pool.install(|| run_parareal(problem, t_0, t_n, u_0, cfg))
}

/// Concatenates window trajectories; a boundary present in two windows
/// keeps the entry of the earlier (fine-propagated) one.
fn stitch<S: Scalar>(windows: impl IntoIterator<Item = Integration<S>>) -> Trajectory<S> {
    let mut entries: Vec<(S, State<S>)> = Vec::new();
    for w in windows {
        let mut it = w.trajectory.into_entries().into_iter();
        if !entries.is_empty() {
            it.next();
        }
        entries.extend(it);
    }
    Trajectory::from_entries(entries).expect("windows are contiguous and increasing")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coil::LinearTest;

    fn st(v: &[f64]) -> State<f64> {
        State::new(v.to_vec()).unwrap()
    }

    #[test]
    fn partition_examples() {
        assert_eq!(
            partition_indices(16, 8).unwrap(),
            vec![0, 2, 4, 6, 8, 10, 12, 14, 16]
        );
        assert_eq!(partition_indices(10, 4).unwrap(), vec![0, 2, 5, 7, 10]);
        assert_eq!(partition_indices(5, 5).unwrap(), vec![0, 1, 2, 3, 4, 5]);
        assert_eq!(
            partition_indices(3, 4),
            Err(PartitionError::TooFewSteps {
                steps: 3,
                windows: 4
            })
        );
        let t_hat = [0.0, 0.1, 0.3, 0.7, 1.5];
        assert_eq!(partition_windows(&t_hat, 2).unwrap(), vec![0.0, 0.3, 1.5]);
        assert_eq!(
            partition_windows(&[0.0, 1.0, 1.0], 1),
            Err(PartitionError::NotIncreasing)
        );
    }

    #[test]
    fn window_grid_examples() {
        let t_hat = [0.0, 1.0, 2.0, 3.0];
        assert_eq!(coarse_window_grid(&t_hat, 1.0, 3.0), &[1.0, 2.0, 3.0]);
        assert_eq!(coarse_window_grid(&t_hat, 1.0, 2.0), &[1.0, 2.0]);
        assert_eq!(coarse_window_grid(&t_hat, 0.0, 3.0), &t_hat);
    }

    #[test]
    #[should_panic(expected = "not a coarse grid time")]
    fn window_grid_rejects_foreign_time() {
        let _ = coarse_window_grid(&[0.0, 1.0, 2.0], 0.5, 2.0);
    }

    #[test]
    fn update_examples() {
        let fine = st(&[1.0, 2.0]);
        let c = st(&[0.3, 7.1]);
        assert_eq!(parareal_update(&fine, &c, &c), fine);
        let c_new = st(&[3.0, 4.0]);
        assert_eq!(parareal_update(&fine, &c_new, &fine), c_new);
        assert_eq!(
            parareal_update(&st(&[1.0, 2.0]), &st(&[3.0, 4.0]), &st(&[2.0, 2.0])),
            st(&[2.0, 4.0])
        );
    }

    #[test]
    fn pr_error_examples() {
        let p = LinearTest::new(-1.0, st(&[1.0]));
        let u = vec![st(&[77.0]), st(&[78.0])];
        assert_eq!(pr_error(&p, &u, &u), 0.0);
        let e = pr_error(&p, &[st(&[77.0])], &[st(&[77.003])]);
        assert!((e - 0.003).abs() < 1e-12);
        let e = pr_error(
            &p,
            &[st(&[1.0]), st(&[1.0]), st(&[1.0])],
            &[st(&[1.001]), st(&[0.993]), st(&[1.002])],
        );
        assert!((e - 0.007).abs() < 1e-12);
    }

    #[test]
    fn config_validation() {
        let tol = StepperTolerances {
            tol_nr: 1e-6,
            tol_t: 1e-4,
            dt_init: 0.01,
            dt_min: 1e-9,
            dt_max: 0.1,
            nr_max_iters: 10,
        };
        let cfg = PararealConfig {
            n_windows: 4,
            tol_pr: 1e-3,
            fine_tol: tol,
            coarse_tol: tol,
            k_max: DEFAULT_K_MAX,
        };
        assert!(cfg.validate().is_ok());
        assert!(PararealConfig {
            n_windows: 0,
            ..cfg
        }
        .validate()
        .is_err());
        assert!(PararealConfig { tol_pr: 0.0, ..cfg }.validate().is_err());
        assert!(PararealConfig { k_max: 0, ..cfg }.validate().is_err());
    }

    #[test]
    fn partition_error_surfaces_from_run() {
        let p = LinearTest::new(0.0, st(&[1.0]));
        let tol = StepperTolerances {
            tol_nr: 1e-6,
            tol_t: 1e-4,
            dt_init: 1.0,
            dt_min: 1e-9,
            dt_max: 1.0,
            nr_max_iters: 10,
        };
        let cfg = PararealConfig {
            n_windows: 8,
            tol_pr: 1e-3,
            fine_tol: tol,
            coarse_tol: tol,
            k_max: 5,
        };
        // Constant solution: the coarse solve takes two steps of 1 s.
        let err = run_parareal(&p, 0.0, 2.0, &st(&[1.0]), &cfg).unwrap_err();
        assert!(matches!(
            err,
            PararealError::Partition(PartitionError::TooFewSteps { windows: 8, .. })
        ));
    }
}
