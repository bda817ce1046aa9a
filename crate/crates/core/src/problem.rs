//! State vectors, trajectories and the abstract time-dependent ODE problem.
//!
//! A [`Problem`] describes the semi-discrete system `d_t u = rhs(t, u)`
//! together with the quantity used for every convergence decision in the
//! crate: the maximum temperature contained in a state vector.

use std::ops::Index;

use thiserror::Error;

use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StateError {
    #[error("state component {index} is not finite")]
    NonFinite { index: usize },
    #[error("state must have at least one component")]
    Empty,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TrajectoryError {
    #[error("trajectory is empty")]
    Empty,
    #[error("times not strictly increasing at entry {index}")]
    NotIncreasing { index: usize },
    #[error("trajectory starts at {found}, expected {expected}")]
    WrongStart { expected: f64, found: f64 },
    #[error("trajectory ends at {found}, expected {expected}")]
    WrongEnd { expected: f64, found: f64 },
}

/// Unknown vector of a problem at one instant. Layout is defined by the
/// owning [`Problem`]; the state itself carries no metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct State<S> {
    values: Vec<S>,
}

impl<S: Scalar> State<S> {
    /// Builds a state, rejecting empty or non-finite input.
    pub fn new(values: Vec<S>) -> Result<Self, StateError> {
        if values.is_empty() {
            return Err(StateError::Empty);
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(StateError::NonFinite { index });
        }
        Ok(Self { values })
    }

    /// Builds a state without the finiteness check. Solver internals use
    /// this for trial iterates and call [`State::is_finite`] before accepting.
    pub fn from_vec_unchecked(values: Vec<S>) -> Self {
        Self { values }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            values: vec![S::zero(); dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn as_slice(&self) -> &[S] {
        &self.values
    }

    pub fn into_vec(self) -> Vec<S> {
        self.values
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// Euclidean norm.
    pub fn norm(&self) -> S {
        self.values.iter().map(|&v| v * v).sum::<S>().sqrt()
    }
}

impl<S> Index<usize> for State<S> {
    type Output = S;

    fn index(&self, i: usize) -> &S {
        &self.values[i]
    }
}

/// Returns `a*x + b*y` componentwise.
///
/// Panics on dimension mismatch: states of one problem always share a
/// dimension, so a mismatch is a programming error.
pub fn state_linear_combination<S: Scalar>(a: S, x: &State<S>, b: S, y: &State<S>) -> State<S> {
    assert_eq!(
        x.dim(),
        y.dim(),
        "state dimension mismatch in linear combination"
    );
    let values = x
        .values
        .iter()
        .zip(&y.values)
        .map(|(&xi, &yi)| a * xi + b * yi)
        .collect();
    State { values }
}

/// Maximum over the given components of a state.
pub fn max_over<S: Scalar>(s: &State<S>, components: &[usize]) -> S {
    components
        .iter()
        .map(|&i| s[i])
        .fold(S::neg_infinity(), S::max)
}

/// Ordered `(time, state)` samples produced by a propagator.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<S> {
    entries: Vec<(S, State<S>)>,
}

impl<S: Scalar> Trajectory<S> {
    pub fn new(t0: S, u0: State<S>) -> Self {
        Self {
            entries: vec![(t0, u0)],
        }
    }

    /// Builds a trajectory from raw entries, checking strict monotonicity.
    pub fn from_entries(entries: Vec<(S, State<S>)>) -> Result<Self, TrajectoryError> {
        let traj = Self { entries };
        traj.check_monotone()?;
        Ok(traj)
    }

    /// Appends an entry. Panics if `t` does not exceed the last time.
    pub fn push(&mut self, t: S, u: State<S>) {
        let last = self.end_time();
        assert!(t > last, "trajectory times must increase: {t} after {last}");
        self.entries.push((t, u));
    }

    pub fn entries(&self) -> &[(S, State<S>)] {
        &self.entries
    }

    pub fn into_entries(self) -> Vec<(S, State<S>)> {
        self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Number of steps (entries minus one).
    pub fn steps(&self) -> usize {
        self.entries.len().saturating_sub(1)
    }

    pub fn times(&self) -> Vec<S> {
        self.entries.iter().map(|(t, _)| *t).collect()
    }

    pub fn start_time(&self) -> S {
        self.entries[0].0
    }

    pub fn end_time(&self) -> S {
        self.entries[self.entries.len() - 1].0
    }

    pub fn last_state(&self) -> &State<S> {
        &self.entries[self.entries.len() - 1].1
    }

    /// State stored at exactly time `t`, if any.
    pub fn state_at(&self, t: S) -> Option<&State<S>> {
        self.entries
            .binary_search_by(|(ti, _)| ti.partial_cmp(&t).expect("finite times"))
            .ok()
            .map(|i| &self.entries[i].1)
    }

    /// Linear interpolation of a scalar quantity of the state at time `t`,
    /// clamped to the first/last entry outside the covered range.
    pub fn interpolate_with<F>(&self, t: S, quantity: F) -> S
    where
        F: Fn(&State<S>) -> S,
    {
        let n = self.entries.len();
        if t <= self.entries[0].0 {
            return quantity(&self.entries[0].1);
        }
        if t >= self.entries[n - 1].0 {
            return quantity(&self.entries[n - 1].1);
        }
        let hi = self.entries.partition_point(|(ti, _)| *ti < t);
        let (t1, u1) = &self.entries[hi];
        if *t1 == t {
            return quantity(u1);
        }
        let (t0, u0) = &self.entries[hi - 1];
        let w = (t - *t0) / (*t1 - *t0);
        let q0 = quantity(u0);
        let q1 = quantity(u1);
        q0 + w * (q1 - q0)
    }

    fn check_monotone(&self) -> Result<(), TrajectoryError> {
        if self.entries.is_empty() {
            return Err(TrajectoryError::Empty);
        }
        for (i, pair) in self.entries.windows(2).enumerate() {
            if pair[1].0 <= pair[0].0 {
                return Err(TrajectoryError::NotIncreasing { index: i + 1 });
            }
        }
        Ok(())
    }

    /// Checks strict monotonicity and exact landing on `[t_a, t_b]`.
    pub fn validate(&self, t_a: S, t_b: S) -> Result<(), TrajectoryError> {
        self.check_monotone()?;
        if self.start_time() != t_a {
            return Err(TrajectoryError::WrongStart {
                expected: t_a.to_f64_lossy(),
                found: self.start_time().to_f64_lossy(),
            });
        }
        if self.end_time() != t_b {
            return Err(TrajectoryError::WrongEnd {
                expected: t_b.to_f64_lossy(),
                found: self.end_time().to_f64_lossy(),
            });
        }
        Ok(())
    }
}

/// A time-dependent nonlinear ODE system in explicit-derivative form.
///
/// Implementations hold read-only parameters only, so one instance can be
/// shared by all concurrent fine-propagator workers.
pub trait Problem<S: Scalar>: Sync {
    fn dimension(&self) -> usize;

    /// Time derivative `d_t u` at `(t, u)`. Must be deterministic.
    fn rhs(&self, t: S, u: &State<S>) -> State<S>;

    /// Largest temperature contained in `u`, in kelvin.
    fn max_temperature(&self, u: &State<S>) -> S;

    /// Instants strictly inside `(t_a, t_b)` where the forcing changes slope.
    /// Sorted and duplicate-free.
    fn forced_event_times(&self, t_a: S, t_b: S) -> Vec<S>;

    fn initial_state(&self) -> State<S>;
}

impl<S: Scalar, P: Problem<S> + ?Sized> Problem<S> for &P {
    fn dimension(&self) -> usize {
        (**self).dimension()
    }

    fn rhs(&self, t: S, u: &State<S>) -> State<S> {
        (**self).rhs(t, u)
    }

    fn max_temperature(&self, u: &State<S>) -> S {
        (**self).max_temperature(u)
    }

    fn forced_event_times(&self, t_a: S, t_b: S) -> Vec<S> {
        (**self).forced_event_times(t_a, t_b)
    }

    fn initial_state(&self) -> State<S> {
        (**self).initial_state()
    }
}
