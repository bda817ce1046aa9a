//! Implicit Euler time integration with Newton-Raphson linearization.
//!
//! Two drivers share one step kernel: [`adaptive_integrate`] (the fine
//! propagator and the first coarse propagator) controls the step size from
//! the predictor/corrector difference of the maximum temperature, and
//! [`fixed_integrate`] (the later coarse propagator) steps on a given grid.

mod integrate;
mod linalg;
mod newton;

use thiserror::Error;

use crate::scalar::Scalar;

pub use integrate::{adaptive_integrate, estimate_lte, fixed_integrate, predict, Integration};
pub use linalg::Matrix;
pub use newton::{fd_step_scale, implicit_euler_step, newton_jacobian, ImplicitStep};

/// Tolerances and step limits of one propagator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepperTolerances<S> {
    /// Newton-Raphson tolerance on the change of the maximum temperature, K.
    pub tol_nr: S,
    /// Step acceptance tolerance on the estimated local truncation error of
    /// the maximum temperature, K.
    pub tol_t: S,
    pub dt_init: S,
    pub dt_min: S,
    pub dt_max: S,
    pub nr_max_iters: usize,
}

impl<S: Scalar> StepperTolerances<S> {
    pub fn validate(&self) -> Result<(), String> {
        for (name, v) in [
            ("tol_nr", self.tol_nr),
            ("tol_t", self.tol_t),
            ("dt_init", self.dt_init),
            ("dt_min", self.dt_min),
            ("dt_max", self.dt_max),
        ] {
            if !(v.is_finite() && v > S::zero()) {
                return Err(format!("{name} must be positive and finite, got {v}"));
            }
        }
        if self.nr_max_iters == 0 {
            return Err("nr_max_iters must be at least 1".to_string());
        }
        if !(self.dt_min <= self.dt_init && self.dt_init <= self.dt_max) {
            return Err(format!(
                "need dt_min <= dt_init <= dt_max, got {} / {} / {}",
                self.dt_min, self.dt_init, self.dt_max
            ));
        }
        Ok(())
    }

    /// Copy with both temperature tolerances set to `tol` (kelvin).
    pub fn with_tolerance(mut self, tol: S) -> Self {
        self.tol_nr = tol;
        self.tol_t = tol;
        self
    }
}

/// Why a Newton-Raphson solve gave up.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepFailure {
    NotConverged,
    NonFinite,
    SingularJacobian,
}

impl std::fmt::Display for StepFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            StepFailure::NotConverged => "no convergence within the iteration limit",
            StepFailure::NonFinite => "non-finite iterate",
            StepFailure::SingularJacobian => "singular Jacobian",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("Newton-Raphson step failed after {iterations} iterations: {kind}")]
pub struct StepFailed {
    pub iterations: usize,
    pub kind: StepFailure,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IntegrationError {
    #[error("invalid integration interval [{t_a}, {t_b}]")]
    InvalidInterval { t_a: f64, t_b: f64 },
    #[error("invalid time grid: {0}")]
    InvalidGrid(String),
    #[error("invalid tolerances: {0}")]
    InvalidTolerances(String),
    #[error("initial state is not finite")]
    NonFiniteInitial,
    #[error("step size {dt} s fell below dt_min at t = {t} s; tolerances unattainable")]
    StepUnderflow { t: f64, dt: f64 },
    #[error("fixed-grid step from t = {t} s with dt = {dt} s failed: {source}")]
    FixedStepFailed {
        t: f64,
        dt: f64,
        #[source]
        source: StepFailed,
    },
}

/// Counters gathered by one integration call.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StepStats {
    pub accepted: usize,
    pub rejected: usize,
    pub failed_solves: usize,
    pub nr_iterations: usize,
}

impl std::ops::AddAssign for StepStats {
    fn add_assign(&mut self, rhs: Self) {
        self.accepted += rhs.accepted;
        self.rejected += rhs.rejected;
        self.failed_solves += rhs.failed_solves;
        self.nr_iterations += rhs.nr_iterations;
    }
}
