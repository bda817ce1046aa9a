//! Run configuration file (TOML). Tolerances are given in millikelvin and
//! converted to kelvin here; everything else is SI.

use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context, Result};
use parareal_core::{
    defaults, CoilParams64, LinearTest, NiCoil, NiCoil64, PararealConfig64, RampSchedule, State,
    StepperTolerances64,
};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

const MK: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProblemKind {
    NiCoil,
    LinearTest,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSection {
    pub kind: ProblemKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TimeSection {
    pub t_start_s: f64,
    pub t_end_s: f64,
}

impl Default for TimeSection {
    fn default() -> Self {
        Self {
            t_start_s: defaults::T_START,
            t_end_s: defaults::T_END,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CoilSection {
    pub e_c: f64,
    pub j_c0: f64,
    pub n: f64,
    pub t_c: f64,
    pub t_op: f64,
    pub inductance: f64,
    pub r_contact: f64,
    pub a_hts: f64,
    pub length: f64,
    pub heat_capacity: f64,
    pub cooling: f64,
    pub beta: f64,
}

impl Default for CoilSection {
    fn default() -> Self {
        let p = CoilParams64::default();
        Self {
            e_c: p.e_c,
            j_c0: p.j_c0,
            n: p.n,
            t_c: p.t_c,
            t_op: p.t_op,
            inductance: p.inductance,
            r_contact: p.r_contact,
            a_hts: p.a_hts,
            length: p.length,
            heat_capacity: p.heat_capacity,
            cooling: p.cooling,
            beta: p.beta,
        }
    }
}

impl From<&CoilSection> for CoilParams64 {
    fn from(c: &CoilSection) -> Self {
        CoilParams64 {
            e_c: c.e_c,
            j_c0: c.j_c0,
            n: c.n,
            t_c: c.t_c,
            t_op: c.t_op,
            inductance: c.inductance,
            r_contact: c.r_contact,
            a_hts: c.a_hts,
            length: c.length,
            heat_capacity: c.heat_capacity,
            cooling: c.cooling,
            beta: c.beta,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RampSection {
    /// `[time_s, current_A]` pairs; linear from `(t_start, 0)`.
    pub breakpoints: Vec<[f64; 2]>,
}

impl Default for RampSection {
    fn default() -> Self {
        Self {
            breakpoints: NiCoil64::default()
                .ramp
                .breakpoints()
                .iter()
                .map(|&(t, i)| [t, i])
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LinearSection {
    pub lambda: f64,
    pub u0: Vec<f64>,
}

impl Default for LinearSection {
    fn default() -> Self {
        Self {
            lambda: -1.0,
            u0: vec![1.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PararealSection {
    pub n_windows: usize,
    pub tol_pr_mk: f64,
    pub k_max: usize,
}

impl Default for PararealSection {
    fn default() -> Self {
        Self {
            n_windows: 8,
            tol_pr_mk: defaults::TOL_PR / MK,
            k_max: parareal_core::parareal::DEFAULT_K_MAX,
        }
    }
}

/// Fine propagator: `tol_NR = tol_t = tol_mk`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FineSection {
    pub tol_mk: f64,
    pub dt_init_s: f64,
    pub dt_min_s: f64,
    pub dt_max_s: f64,
    pub nr_max_iters: usize,
}

impl Default for FineSection {
    fn default() -> Self {
        let t = defaults::fine_tolerances(defaults::FINE_TOL);
        Self {
            tol_mk: defaults::FINE_TOL / MK,
            dt_init_s: t.dt_init,
            dt_min_s: t.dt_min,
            dt_max_s: t.dt_max,
            nr_max_iters: t.nr_max_iters,
        }
    }
}

impl FineSection {
    pub fn tolerances(&self, tol_mk: f64) -> StepperTolerances64 {
        StepperTolerances64 {
            tol_nr: tol_mk * MK,
            tol_t: tol_mk * MK,
            dt_init: self.dt_init_s,
            dt_min: self.dt_min_s,
            dt_max: self.dt_max_s,
            nr_max_iters: self.nr_max_iters,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CoarseSection {
    pub tol_nr_mk: f64,
    pub tol_t_mk: f64,
    pub dt_init_s: f64,
    pub dt_min_s: f64,
    pub dt_max_s: f64,
    pub nr_max_iters: usize,
}

impl Default for CoarseSection {
    fn default() -> Self {
        let t = defaults::coarse_tolerances::<f64>();
        Self {
            tol_nr_mk: t.tol_nr / MK,
            tol_t_mk: t.tol_t / MK,
            dt_init_s: t.dt_init,
            dt_min_s: t.dt_min,
            dt_max_s: t.dt_max,
            nr_max_iters: t.nr_max_iters,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StudySection {
    pub n_windows_list: Vec<usize>,
    pub fine_tol_mk_list: Vec<f64>,
    /// Tolerance of the error reference; a tenth of the tightest listed
    /// tolerance when absent.
    pub reference_tol_mk: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSection {
    pub out_dir: Option<PathBuf>,
    pub workers: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub problem: ProblemSection,
    #[serde(default)]
    pub time: TimeSection,
    #[serde(default)]
    pub coil: CoilSection,
    #[serde(default)]
    pub ramp: RampSection,
    #[serde(default)]
    pub linear_test: LinearSection,
    #[serde(default)]
    pub parareal: PararealSection,
    #[serde(default)]
    pub fine: FineSection,
    #[serde(default)]
    pub coarse: CoarseSection,
    #[serde(default)]
    pub study: StudySection,
    #[serde(default)]
    pub run: RunSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            problem: ProblemSection {
                kind: ProblemKind::NiCoil,
            },
            time: TimeSection::default(),
            coil: CoilSection::default(),
            ramp: RampSection::default(),
            linear_test: LinearSection::default(),
            parareal: PararealSection::default(),
            fine: FineSection::default(),
            coarse: CoarseSection::default(),
            study: StudySection::default(),
            run: RunSection::default(),
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config file {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("invalid config file {}", path.display()))
    }

    pub fn parse(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        ensure!(
            self.time.t_end_s > self.time.t_start_s,
            "time.t_end_s must exceed time.t_start_s"
        );
        ensure!(
            self.parareal.tol_pr_mk > 0.0 && self.parareal.tol_pr_mk.is_finite(),
            "parareal.tol_pr_mk must be positive"
        );
        ensure!(
            self.fine.tol_mk > 0.0 && self.fine.tol_mk.is_finite(),
            "fine.tol_mk must be positive"
        );
        for tol in &self.study.fine_tol_mk_list {
            ensure!(
                *tol > 0.0 && tol.is_finite(),
                "study.fine_tol_mk_list: {tol} is not positive"
            );
        }
        if let Some(r) = self.study.reference_tol_mk {
            ensure!(
                r > 0.0 && r.is_finite(),
                "study.reference_tol_mk must be positive"
            );
        }
        ensure!(
            self.run.workers != Some(0),
            "run.workers must be at least 1"
        );
        self.parareal_config(self.parareal.n_windows, self.fine.tol_mk)
            .validate()
            .map_err(anyhow::Error::msg)?;
        self.model()?;
        Ok(())
    }

    pub fn fine_tolerances(&self, tol_mk: f64) -> StepperTolerances64 {
        self.fine.tolerances(tol_mk)
    }

    pub fn coarse_tolerances(&self) -> StepperTolerances64 {
        let c = &self.coarse;
        StepperTolerances64 {
            tol_nr: c.tol_nr_mk * MK,
            tol_t: c.tol_t_mk * MK,
            dt_init: c.dt_init_s,
            dt_min: c.dt_min_s,
            dt_max: c.dt_max_s,
            nr_max_iters: c.nr_max_iters,
        }
    }

    pub fn parareal_config(&self, n_windows: usize, fine_tol_mk: f64) -> PararealConfig64 {
        PararealConfig64 {
            n_windows,
            tol_pr: self.parareal.tol_pr_mk * MK,
            fine_tol: self.fine_tolerances(fine_tol_mk),
            coarse_tol: self.coarse_tolerances(),
            k_max: self.parareal.k_max,
        }
    }

    pub fn model(&self) -> Result<Model> {
        match self.problem.kind {
            ProblemKind::NiCoil => {
                let ramp = RampSchedule::new(
                    self.ramp.breakpoints.iter().map(|b| (b[0], b[1])).collect(),
                )?;
                Ok(Model::Coil(NiCoil::new((&self.coil).into(), ramp)?))
            }
            ProblemKind::LinearTest => {
                let l = &self.linear_test;
                if !l.lambda.is_finite() {
                    bail!("linear_test.lambda must be finite");
                }
                let u0 = State::new(l.u0.clone()).context("linear_test.u0")?;
                Ok(Model::Linear(LinearTest::new(l.lambda, u0)))
            }
        }
    }

    /// Hex SHA-256 of the canonical serialization, shortened to 16 digits.
    pub fn run_id(&self) -> String {
        let canonical = toml::to_string(self).expect("config serializes");
        hex::encode(&Sha256::digest(canonical.as_bytes())[..8])
    }

    /// Copy describing one Parareal cell of a study.
    pub fn cell(&self, n_windows: usize, fine_tol_mk: f64) -> RunConfig {
        let mut c = self.clone();
        c.parareal.n_windows = n_windows;
        c.fine.tol_mk = fine_tol_mk;
        c.study = StudySection::default();
        c
    }
}

pub use crate::model::Model;
