use super::linalg::Matrix;
use super::{StepFailed, StepFailure, StepperTolerances};
use crate::problem::{state_linear_combination, Problem, State};
use crate::scalar::Scalar;

/// Relative finite-difference perturbation: `1e-7`, or `sqrt(eps)` when the
/// scalar type cannot resolve that (single precision).
pub fn fd_step_scale<S: Scalar>() -> S {
    S::lit(1e-7).max(S::epsilon().sqrt())
}

/// Forward-difference Jacobian of `rhs` at `(t, u)` with per-component
/// perturbation `fd_step_scale * max(|u_i|, 1)`.
pub fn newton_jacobian<S: Scalar, P: Problem<S> + ?Sized>(
    problem: &P,
    t: S,
    u: &State<S>,
) -> Matrix<S> {
    let f0 = problem.rhs(t, u);
    jacobian_with_base(problem, t, u, &f0)
}

fn jacobian_with_base<S: Scalar, P: Problem<S> + ?Sized>(
    problem: &P,
    t: S,
    u: &State<S>,
    f0: &State<S>,
) -> Matrix<S> {
    let n = u.dim();
    let scale = fd_step_scale::<S>();
    let mut jac = Matrix::zeros(n);
    let mut shifted = u.as_slice().to_vec();
    for col in 0..n {
        let base = shifted[col];
        let delta = scale * base.abs().max(S::one());
        shifted[col] = base + delta;
        // Use the representable perturbation actually applied.
        let applied = shifted[col] - base;
        let f1 = problem.rhs(t, &State::from_vec_unchecked(shifted.clone()));
        for row in 0..n {
            jac.set(row, col, (f1[row] - f0[row]) / applied);
        }
        shifted[col] = base;
    }
    jac
}

/// Converged implicit Euler step.
#[derive(Debug, Clone, PartialEq)]
pub struct ImplicitStep<S> {
    pub state: State<S>,
    pub nr_iterations: usize,
}

/// Solves `u - u_prev - dt * rhs(t + dt, u) = 0` by Newton-Raphson from `guess`.
///
/// Converged once the maximum temperature changes by less than `tol_nr`
/// between two iterates and the residual norm is below its initial value.
pub fn implicit_euler_step<S: Scalar, P: Problem<S> + ?Sized>(
    problem: &P,
    t: S,
    dt: S,
    u_prev: &State<S>,
    guess: &State<S>,
    tol: &StepperTolerances<S>,
) -> Result<ImplicitStep<S>, StepFailed> {
    assert!(dt > S::zero(), "implicit Euler step needs dt > 0, got {dt}");
    assert_eq!(u_prev.dim(), guess.dim(), "guess dimension mismatch");
    let t_new = t + dt;
    let n = u_prev.dim();
    let identity = Matrix::identity(n);

    let residual = |u: &State<S>, f: &State<S>| {
        // u - u_prev - dt f
        let diff = state_linear_combination(S::one(), u, -S::one(), u_prev);
        state_linear_combination(S::one(), &diff, -dt, f)
    };

    let mut u = guess.clone();
    let mut f = problem.rhs(t_new, &u);
    let mut r = residual(&u, &f);
    let r0 = r.norm();
    if !r0.is_finite() {
        return Err(StepFailed {
            iterations: 0,
            kind: StepFailure::NonFinite,
        });
    }

    for m in 1..=tol.nr_max_iters {
        let jac = identity.add_scaled(-dt, &jacobian_with_base(problem, t_new, &u, &f));
        let neg_r: Vec<S> = r.as_slice().iter().map(|&v| -v).collect();
        let delta = jac.solve(&neg_r).ok_or(StepFailed {
            iterations: m,
            kind: StepFailure::SingularJacobian,
        })?;
        let u_next = State::from_vec_unchecked(
            u.as_slice()
                .iter()
                .zip(&delta)
                .map(|(&a, &d)| a + d)
                .collect(),
        );
        if !u_next.is_finite() {
            return Err(StepFailed {
                iterations: m,
                kind: StepFailure::NonFinite,
            });
        }
        f = problem.rhs(t_new, &u_next);
        r = residual(&u_next, &f);
        let rn = r.norm();
        if !rn.is_finite() {
            return Err(StepFailed {
                iterations: m,
                kind: StepFailure::NonFinite,
            });
        }
        let temp_change = (problem.max_temperature(&u_next) - problem.max_temperature(&u)).abs();
        u = u_next;
        if temp_change < tol.tol_nr && (rn < r0 || rn == S::zero()) {
            return Ok(ImplicitStep {
                state: u,
                nr_iterations: m,
            });
        }
    }
    Err(StepFailed {
        iterations: tol.nr_max_iters,
        kind: StepFailure::NotConverged,
    })
}
