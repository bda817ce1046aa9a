use parareal_core::{LinearTest64, NiCoil64, Problem, State64};

/// Problem selected by the configuration.
#[derive(Debug, Clone)]
pub enum Model {
    Coil(NiCoil64),
    Linear(LinearTest64),
}

impl Model {
    /// Headers of the state columns in trajectory files.
    pub fn state_columns(&self) -> Vec<String> {
        match self {
            Model::Coil(_) => vec!["I_theta_A".into(), "T_K".into()],
            Model::Linear(p) => (0..p.dimension()).map(|i| format!("u{i}")).collect(),
        }
    }

    /// Headers of the derived columns after `T_max_K`.
    pub fn derived_columns(&self) -> &'static [&'static str] {
        match self {
            Model::Coil(_) => &["B_z_T", "I_source_A"],
            Model::Linear(_) => &[],
        }
    }

    pub fn derived_values(&self, t: f64, u: &State64) -> Vec<f64> {
        match self {
            Model::Coil(c) => vec![c.axial_field(u), c.source_current(t)],
            Model::Linear(_) => vec![],
        }
    }
}

impl Problem<f64> for Model {
    fn dimension(&self) -> usize {
        match self {
            Model::Coil(p) => p.dimension(),
            Model::Linear(p) => p.dimension(),
        }
    }

    fn rhs(&self, t: f64, u: &State64) -> State64 {
        match self {
            Model::Coil(p) => p.rhs(t, u),
            Model::Linear(p) => p.rhs(t, u),
        }
    }

    fn max_temperature(&self, u: &State64) -> f64 {
        match self {
            Model::Coil(p) => p.max_temperature(u),
            Model::Linear(p) => p.max_temperature(u),
        }
    }

    fn forced_event_times(&self, t_a: f64, t_b: f64) -> Vec<f64> {
        match self {
            Model::Coil(p) => p.forced_event_times(t_a, t_b),
            Model::Linear(p) => p.forced_event_times(t_a, t_b),
        }
    }

    fn initial_state(&self) -> State64 {
        match self {
            Model::Coil(p) => p.initial_state(),
            Model::Linear(p) => p.initial_state(),
        }
    }
}
