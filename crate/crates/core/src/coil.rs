//! Lumped circuit-thermal model of a no-insulation HTS pancake coil, and a
//! scalar linear test problem with a closed-form solution.
//!
//! The coil state is `[I_theta, T]`: the azimuthal current through the HTS
//! winding and the lumped winding temperature. The source current splits
//! between the azimuthal path (inductive, power-law resistive) and the
//! radial path through the turn-to-turn contact resistance:
//!
//! ```text
//! I_r = I_s(t) - I_theta
//! L dI_theta/dt = R_c I_r - rho(J, T) (ell / A) I_theta,   J = I_theta / A
//! C dT/dt       = R_c I_r^2 + rho(J, T) (ell / A) I_theta^2 - h (T - T_op)
//! ```

use thiserror::Error;

use crate::problem::{Problem, State};
use crate::scalar::Scalar;

/// Relative floor on the critical current density, active at and above `T_c`.
pub const JC_FLOOR: f64 = 1e-6;

/// Index of the azimuthal current in the coil state.
pub const I_THETA: usize = 0;
/// Index of the temperature in the coil state.
pub const TEMPERATURE: usize = 1;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("critical current density must be positive, got {0}")]
    NonPositiveCriticalDensity(f64),
    #[error("invalid coil parameter: {0}")]
    InvalidParameter(String),
    #[error("ramp breakpoints must have strictly increasing, non-negative times")]
    InvalidRamp,
}

/// Physical constants of the lumped coil surrogate (SI units).
#[derive(Debug, Clone, PartialEq)]
pub struct CoilParams<S> {
    /// Critical electric field, V/m.
    pub e_c: S,
    /// Critical current density at `T_op`, A/m².
    pub j_c0: S,
    /// Power-law index.
    pub n: S,
    /// Critical temperature, K.
    pub t_c: S,
    /// Operating (bath) temperature, K.
    pub t_op: S,
    /// Azimuthal loop inductance, H.
    pub inductance: S,
    /// Turn-to-turn plus winding-terminal contact resistance, Ω.
    pub r_contact: S,
    /// HTS cross-section, m².
    pub a_hts: S,
    /// Effective conductor length, m.
    pub length: S,
    /// Lumped heat capacity, J/K.
    pub heat_capacity: S,
    /// Cooling conductance to the bath, W/K.
    pub cooling: S,
    /// Central axial field per ampere of azimuthal current, T/A.
    pub beta: S,
}

impl<S: Scalar> Default for CoilParams<S> {
    fn default() -> Self {
        Self {
            e_c: S::lit(1e-4),
            j_c0: S::lit(2.5e8),
            n: S::lit(25.0),
            t_c: S::lit(92.0),
            t_op: S::lit(77.0),
            inductance: S::lit(1e-3),
            r_contact: S::lit(1e-4),
            a_hts: S::lit(1e-6),
            length: S::lit(1.0),
            heat_capacity: S::lit(1.0),
            cooling: S::lit(0.01),
            beta: S::lit(1e-3),
        }
    }
}

impl<S: Scalar> CoilParams<S> {
    pub fn validate(&self) -> Result<(), ModelError> {
        let positive = [
            ("E_c", self.e_c),
            ("J_c0", self.j_c0),
            ("n", self.n),
            ("T_c", self.t_c),
            ("T_op", self.t_op),
            ("L", self.inductance),
            ("R_c", self.r_contact),
            ("A_hts", self.a_hts),
            ("ell", self.length),
            ("C", self.heat_capacity),
            ("h", self.cooling),
            ("beta", self.beta),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > S::zero()) {
                return Err(ModelError::InvalidParameter(format!(
                    "{name} must be positive and finite, got {v}"
                )));
            }
        }
        if self.n < S::one() {
            return Err(ModelError::InvalidParameter(format!(
                "n must be >= 1, got {}",
                self.n
            )));
        }
        if self.t_c <= self.t_op {
            return Err(ModelError::InvalidParameter(
                "T_c must exceed T_op".to_string(),
            ));
        }
        Ok(())
    }
}

/// Piecewise-linear source current starting at `(0 s, 0 A)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RampSchedule<S> {
    breakpoints: Vec<(S, S)>,
}

impl<S: Scalar> RampSchedule<S> {
    /// `breakpoints` are `(t_end, I_end)` pairs; times must be strictly
    /// increasing and non-negative.
    pub fn new(breakpoints: Vec<(S, S)>) -> Result<Self, ModelError> {
        let increasing = breakpoints.windows(2).all(|w| w[1].0 > w[0].0);
        let valid = breakpoints
            .iter()
            .all(|(t, i)| t.is_finite() && i.is_finite() && *t >= S::zero());
        if !(increasing && valid) {
            return Err(ModelError::InvalidRamp);
        }
        Ok(Self { breakpoints })
    }

    pub fn breakpoints(&self) -> &[(S, S)] {
        &self.breakpoints
    }

    /// Breakpoint times strictly inside `(t_a, t_b)`.
    pub fn breakpoint_times_in(&self, t_a: S, t_b: S) -> Vec<S> {
        self.breakpoints
            .iter()
            .map(|(t, _)| *t)
            .filter(|&t| t > t_a && t < t_b)
            .collect()
    }
}

impl<S: Scalar> Default for RampSchedule<S> {
    fn default() -> Self {
        Self {
            breakpoints: vec![
                (S::lit(50.0), S::lit(100.0)),
                (S::lit(150.0), S::lit(100.0)),
                (S::lit(200.0), S::zero()),
            ],
        }
    }
}

/// Power-law resistivity `(E_c/J_c) (|J|/J_c)^(n-1)` in Ω·m.
pub fn hts_resistivity<S: Scalar>(j: S, j_c: S, e_c: S, n: S) -> Result<S, ModelError> {
    if !(j_c > S::zero()) {
        return Err(ModelError::NonPositiveCriticalDensity(j_c.to_f64_lossy()));
    }
    Ok(e_c / j_c * (j.abs() / j_c).powf(n - S::one()))
}

/// Temperature-dependent critical current density, linear between `T_op`
/// and `T_c` with a relative floor of [`JC_FLOOR`].
pub fn critical_current_density<S: Scalar>(t: S, params: &CoilParams<S>) -> S {
    let frac = (params.t_c - t) / (params.t_c - params.t_op);
    params.j_c0 * frac.max(S::lit(JC_FLOOR)).min(S::one())
}

/// Source current at time `t`; held constant after the last breakpoint.
pub fn source_current<S: Scalar>(t: S, ramp: &RampSchedule<S>) -> S {
    let mut t_prev = S::zero();
    let mut i_prev = S::zero();
    for &(t_end, i_end) in &ramp.breakpoints {
        if t <= t_end {
            if t_end == t_prev {
                return i_end;
            }
            let w = (t - t_prev) / (t_end - t_prev);
            return i_prev + w * (i_end - i_prev);
        }
        t_prev = t_end;
        i_prev = i_end;
    }
    i_prev
}

/// Central axial flux density `B_z = beta * I_theta`, in tesla.
pub fn axial_field<S: Scalar>(s: &State<S>, params: &CoilParams<S>) -> S {
    params.beta * s[I_THETA]
}

/// Right-hand side `[dI_theta/dt, dT/dt]` of the coil surrogate.
pub fn coil_rhs<S: Scalar>(
    t: S,
    s: &State<S>,
    params: &CoilParams<S>,
    ramp: &RampSchedule<S>,
) -> State<S> {
    let i_theta = s[I_THETA];
    let temp = s[TEMPERATURE];
    let i_radial = source_current(t, ramp) - i_theta;
    let j_c = critical_current_density(temp, params);
    let rho = hts_resistivity(i_theta / params.a_hts, j_c, params.e_c, params.n)
        .expect("critical current density is floored above zero");
    let r_hts = rho * params.length / params.a_hts;

    let d_current = (params.r_contact * i_radial - r_hts * i_theta) / params.inductance;
    let heating = params.r_contact * i_radial * i_radial + r_hts * i_theta * i_theta;
    let d_temp = (heating - params.cooling * (temp - params.t_op)) / params.heat_capacity;
    State::from_vec_unchecked(vec![d_current, d_temp])
}

/// `d_t u = lambda u`, componentwise.
pub fn linear_test_rhs<S: Scalar>(_t: S, s: &State<S>, lambda: S) -> State<S> {
    State::from_vec_unchecked(s.as_slice().iter().map(|&v| lambda * v).collect())
}

/// The no-insulation coil as a [`Problem`].
#[derive(Debug, Clone, PartialEq)]
pub struct NiCoil<S> {
    pub params: CoilParams<S>,
    pub ramp: RampSchedule<S>,
}

impl<S: Scalar> NiCoil<S> {
    pub fn new(params: CoilParams<S>, ramp: RampSchedule<S>) -> Result<Self, ModelError> {
        params.validate()?;
        Ok(Self { params, ramp })
    }

    pub fn source_current(&self, t: S) -> S {
        source_current(t, &self.ramp)
    }

    pub fn axial_field(&self, s: &State<S>) -> S {
        axial_field(s, &self.params)
    }
}

impl<S: Scalar> Default for NiCoil<S> {
    fn default() -> Self {
        Self {
            params: CoilParams::default(),
            ramp: RampSchedule::default(),
        }
    }
}

impl<S: Scalar> Problem<S> for NiCoil<S> {
    fn dimension(&self) -> usize {
        2
    }

    fn rhs(&self, t: S, u: &State<S>) -> State<S> {
        coil_rhs(t, u, &self.params, &self.ramp)
    }

    fn max_temperature(&self, u: &State<S>) -> S {
        u[TEMPERATURE]
    }

    fn forced_event_times(&self, t_a: S, t_b: S) -> Vec<S> {
        self.ramp.breakpoint_times_in(t_a, t_b)
    }

    fn initial_state(&self) -> State<S> {
        State::from_vec_unchecked(vec![S::zero(), self.params.t_op])
    }
}

/// `d_t u = lambda u` with every component treated as a temperature.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearTest<S> {
    pub lambda: S,
    pub u0: State<S>,
}

impl<S: Scalar> LinearTest<S> {
    pub fn new(lambda: S, u0: State<S>) -> Self {
        Self { lambda, u0 }
    }

    /// Closed-form solution `u0 exp(lambda (t - t0))`.
    pub fn exact(&self, t0: S, t: S) -> State<S> {
        let g = (self.lambda * (t - t0)).exp();
        State::from_vec_unchecked(self.u0.as_slice().iter().map(|&v| v * g).collect())
    }
}

impl<S: Scalar> Problem<S> for LinearTest<S> {
    fn dimension(&self) -> usize {
        self.u0.dim()
    }

    fn rhs(&self, t: S, u: &State<S>) -> State<S> {
        linear_test_rhs(t, u, self.lambda)
    }

    fn max_temperature(&self, u: &State<S>) -> S {
        u.as_slice().iter().copied().fold(S::neg_infinity(), S::max)
    }

    fn forced_event_times(&self, _t_a: S, _t_b: S) -> Vec<S> {
        Vec::new()
    }

    fn initial_state(&self) -> State<S> {
        self.u0.clone()
    }
}
