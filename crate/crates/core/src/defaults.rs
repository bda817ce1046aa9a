//! Shipped run settings for the coil problem.
//!
//! The CLI example configuration mirrors these values; tests that speak of
//! "the default configuration" build it from here.

use crate::parareal::{PararealConfig, DEFAULT_K_MAX};
use crate::scalar::Scalar;
use crate::stepper::StepperTolerances;

pub const T_START: f64 = 0.0;
pub const T_END: f64 = 250.0;

/// Parareal tolerance on the boundary jump of the maximum temperature, K.
pub const TOL_PR: f64 = 10e-3;
/// Newton-Raphson tolerance of both coarse propagators, K.
pub const COARSE_TOL_NR: f64 = 10e-3;
/// Step tolerance of the first adaptive coarse propagator, K.
pub const COARSE_TOL_T: f64 = 50e-3;
/// Fine tolerance used when none is given, K.
pub const FINE_TOL: f64 = 0.1e-3;

pub fn fine_tolerances<S: Scalar>(tol: S) -> StepperTolerances<S> {
    StepperTolerances {
        tol_nr: tol,
        tol_t: tol,
        dt_init: S::lit(1e-3),
        dt_min: S::lit(1e-9),
        dt_max: S::lit(2.0),
        nr_max_iters: 50,
    }
}

pub fn coarse_tolerances<S: Scalar>() -> StepperTolerances<S> {
    StepperTolerances {
        tol_nr: S::lit(COARSE_TOL_NR),
        tol_t: S::lit(COARSE_TOL_T),
        dt_init: S::lit(1e-2),
        dt_min: S::lit(1e-9),
        dt_max: S::lit(5.0),
        nr_max_iters: 50,
    }
}

pub fn parareal_config<S: Scalar>(n_windows: usize, fine_tol: S) -> PararealConfig<S> {
    PararealConfig {
        n_windows,
        tol_pr: S::lit(TOL_PR),
        fine_tol: fine_tolerances(fine_tol),
        coarse_tol: coarse_tolerances(),
        k_max: DEFAULT_K_MAX,
    }
}
