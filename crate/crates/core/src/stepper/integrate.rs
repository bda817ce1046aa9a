use super::newton::implicit_euler_step;
use super::{IntegrationError, StepStats, StepperTolerances};
use crate::problem::{Problem, State, Trajectory};
use crate::scalar::Scalar;

/// Safety factor of the step-size controller.
const SAFETY: f64 = 0.9;
/// Lower bound on the error ratio, relative to `tol_t`.
const LTE_FLOOR: f64 = 1e-12;

/// Trajectory plus the counters of the call that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct Integration<S> {
    pub trajectory: Trajectory<S>,
    pub stats: StepStats,
}

/// Polynomial extrapolation from at most the last two accepted samples:
/// constant for one sample, linear for two.
pub fn predict<S: Scalar>(history: &[(S, State<S>)], t_next: S) -> State<S> {
    match history {
        [] => panic!("prediction needs at least one sample"),
        [(_, u)] => u.clone(),
        [.., (t0, u0), (t1, u1)] => {
            let w = (t_next - *t0) / (*t1 - *t0);
            State::from_vec_unchecked(
                u0.as_slice()
                    .iter()
                    .zip(u1.as_slice())
                    .map(|(&a, &b)| a + w * (b - a))
                    .collect(),
            )
        }
    }
}

/// Local truncation error estimate: the difference in maximum temperature
/// between corrector and predictor.
pub fn estimate_lte<S: Scalar, P: Problem<S> + ?Sized>(
    problem: &P,
    u_solved: &State<S>,
    u_predicted: &State<S>,
) -> S {
    assert_eq!(
        u_solved.dim(),
        u_predicted.dim(),
        "state dimension mismatch"
    );
    (problem.max_temperature(u_solved) - problem.max_temperature(u_predicted)).abs()
}

/// Adaptive implicit Euler from `(t_a, u_a)` to exactly `t_b`, landing on
/// every forced event time of the problem inside the interval.
pub fn adaptive_integrate<S: Scalar, P: Problem<S> + ?Sized>(
    problem: &P,
    t_a: S,
    t_b: S,
    u_a: &State<S>,
    tol: &StepperTolerances<S>,
) -> Result<Integration<S>, IntegrationError> {
    if !(t_a < t_b) || !t_a.is_finite() || !t_b.is_finite() {
        return Err(IntegrationError::InvalidInterval {
            t_a: t_a.to_f64_lossy(),
            t_b: t_b.to_f64_lossy(),
        });
    }
    tol.validate()
        .map_err(IntegrationError::InvalidTolerances)?;
    if !u_a.is_finite() {
        return Err(IntegrationError::NonFiniteInitial);
    }

    let mut targets = problem.forced_event_times(t_a, t_b);
    targets.push(t_b);
    let mut target_idx = 0;

    let mut trajectory = Trajectory::new(t_a, u_a.clone());
    let mut stats = StepStats::default();
    let mut t = t_a;
    let mut u = u_a.clone();
    let mut dt = tol.dt_init;
    let two = S::lit(2.0);

    while t < t_b {
        let target = targets[target_idx];
        let t_next = if t + dt >= target {
            target
        } else if t + two * dt > target {
            // Split the remainder evenly instead of leaving a sliver.
            t + (target - t) / two
        } else {
            t + dt
        };
        let h = t_next - t;

        let entries = trajectory.entries();
        let history = &entries[entries.len().saturating_sub(2)..];
        let guess = predict(history, t_next);

        let accepted = match implicit_euler_step(problem, t, h, &u, &guess, tol) {
            Ok(step) => {
                stats.nr_iterations += step.nr_iterations;
                let lte = estimate_lte(problem, &step.state, &guess);
                if lte < tol.tol_t {
                    let ratio = tol.tol_t / lte.max(S::lit(LTE_FLOOR) * tol.tol_t);
                    dt = (S::lit(SAFETY) * h * ratio.sqrt())
                        .max(tol.dt_min)
                        .min(tol.dt_max);
                    stats.accepted += 1;
                    trajectory.push(t_next, step.state.clone());
                    u = step.state;
                    t = t_next;
                    if t_next == target {
                        target_idx += 1;
                    }
                    true
                } else {
                    stats.rejected += 1;
                    false
                }
            }
            Err(failure) => {
                stats.nr_iterations += failure.iterations;
                stats.failed_solves += 1;
                false
            }
        };

        if !accepted {
            dt = h / two;
            if dt < tol.dt_min {
                return Err(IntegrationError::StepUnderflow {
                    t: t.to_f64_lossy(),
                    dt: dt.to_f64_lossy(),
                });
            }
        }
    }

    Ok(Integration { trajectory, stats })
}

/// Implicit Euler on exactly the given grid, without step rejection.
/// The previous state is the Newton-Raphson initial guess.
pub fn fixed_integrate<S: Scalar, P: Problem<S> + ?Sized>(
    problem: &P,
    grid: &[S],
    u_a: &State<S>,
    tol: &StepperTolerances<S>,
) -> Result<Integration<S>, IntegrationError> {
    if grid.len() < 2 {
        return Err(IntegrationError::InvalidGrid(
            "grid needs at least two points".to_string(),
        ));
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(IntegrationError::InvalidGrid(
            "grid times must be strictly increasing".to_string(),
        ));
    }
    tol.validate()
        .map_err(IntegrationError::InvalidTolerances)?;
    if !u_a.is_finite() {
        return Err(IntegrationError::NonFiniteInitial);
    }

    let mut trajectory = Trajectory::new(grid[0], u_a.clone());
    let mut stats = StepStats::default();
    let mut u = u_a.clone();
    for pair in grid.windows(2) {
        let (t, t_next) = (pair[0], pair[1]);
        let h = t_next - t;
        let step = implicit_euler_step(problem, t, h, &u, &u, tol).map_err(|source| {
            IntegrationError::FixedStepFailed {
                t: t.to_f64_lossy(),
                dt: h.to_f64_lossy(),
                source,
            }
        })?;
        stats.nr_iterations += step.nr_iterations;
        stats.accepted += 1;
        trajectory.push(t_next, step.state.clone());
        u = step.state;
    }
    Ok(Integration { trajectory, stats })
}
