//! Parallel-in-time integration with Parareal.
//!
//! The first iteration runs an adaptive coarse propagator over the whole
//! interval and derives the time windows from its steps, so no user-chosen
//! partition is needed. Fine and coarse propagators are implicit Euler with
//! Newton-Raphson; every convergence decision is taken on the maximum
//! temperature of the state. A lumped model of a no-insulation HTS pancake
//! coil ([`coil::NiCoil`]) and a linear test problem are included.
//!
//! All numerics are generic over [`Scalar`]; the `*64` / `*32` aliases below
//! fix the precision.

// `!(a < b)` is used on purpose so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod coil;
pub mod defaults;
pub mod diagnostics;
pub mod parareal;
pub mod problem;
pub mod scalar;
pub mod stepper;

pub use coil::{CoilParams, LinearTest, ModelError, NiCoil, RampSchedule};
pub use diagnostics::{
    fine_time_stats, load_balance, max_possible_speedup, speedup, DiagnosticsError, PararealReport,
};
pub use parareal::{
    run_parareal, run_parareal_with_workers, PararealConfig, PararealError, PararealOutcome,
    PartitionError,
};
pub use problem::{state_linear_combination, Problem, State, Trajectory};
pub use scalar::Scalar;
pub use stepper::{
    adaptive_integrate, fixed_integrate, IntegrationError, StepStats, StepperTolerances,
};

pub type State64 = State<f64>;
pub type Trajectory64 = Trajectory<f64>;
pub type CoilParams64 = CoilParams<f64>;
pub type RampSchedule64 = RampSchedule<f64>;
pub type NiCoil64 = NiCoil<f64>;
pub type LinearTest64 = LinearTest<f64>;
pub type StepperTolerances64 = StepperTolerances<f64>;
pub type PararealConfig64 = PararealConfig<f64>;
pub type PararealReport64 = PararealReport<f64>;

pub type State32 = State<f32>;
pub type Trajectory32 = Trajectory<f32>;
pub type NiCoil32 = NiCoil<f32>;
pub type LinearTest32 = LinearTest<f32>;
pub type StepperTolerances32 = StepperTolerances<f32>;
pub type PararealConfig32 = PararealConfig<f32>;
