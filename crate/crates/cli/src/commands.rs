use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{anyhow, Context};
use parareal_core::diagnostics::tmax_error_series;
use parareal_core::stepper::Integration;
use parareal_core::{
    adaptive_integrate, load_balance, max_possible_speedup, run_parareal_with_workers, speedup,
    PararealError, PararealOutcome, Problem,
};

use crate::config::RunConfig;
use crate::model::Model;
use crate::output::{num, write_report_rows, write_trajectory, writer, REPORT_HEADER};

/// Why a command stopped; maps onto the process exit code.
#[derive(Debug)]
pub enum Failure {
    /// Unreadable or invalid configuration (exit 1).
    Config(anyhow::Error),
    /// Integration, partition or output failure (exit 2).
    Run(anyhow::Error),
    /// Parareal hit `k_max`; outputs were still written (exit 3).
    NotConverged(String),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Config(_) => 1,
            Failure::Run(_) => 2,
            Failure::NotConverged(_) => 3,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Config(e) => write!(f, "configuration error: {e:#}"),
            Failure::Run(e) => write!(f, "run failed: {e:#}"),
            Failure::NotConverged(msg) => write!(f, "{msg}"),
        }
    }
}

fn run_err(e: impl Into<anyhow::Error>) -> Failure {
    Failure::Run(e.into())
}

/// Command-line overrides shared by all subcommands.
#[derive(Debug, Clone, Default)]
pub struct Options {
    pub out: Option<PathBuf>,
    pub workers: Option<usize>,
}

impl Options {
    fn out_dir(&self, cfg: &RunConfig) -> Result<PathBuf, Failure> {
        let dir = self
            .out
            .clone()
            .or_else(|| cfg.run.out_dir.clone())
            .unwrap_or_else(|| PathBuf::from("results"));
        std::fs::create_dir_all(&dir)
            .with_context(|| format!("cannot create output directory {}", dir.display()))
            .map_err(Failure::Run)?;
        Ok(dir)
    }

    fn workers(&self, cfg: &RunConfig, n_windows: usize) -> usize {
        self.workers.or(cfg.run.workers).unwrap_or_else(|| {
            let available = std::thread::available_parallelism().map_or(1, |n| n.get());
            n_windows.min(available).max(1)
        })
    }
}

fn model(cfg: &RunConfig) -> Result<Model, Failure> {
    cfg.model().map_err(Failure::Config)
}

fn timed_sequential(
    cfg: &RunConfig,
    model: &Model,
    tol_mk: f64,
) -> anyhow::Result<(Integration<f64>, f64)> {
    let start = Instant::now();
    let run = adaptive_integrate(
        model,
        cfg.time.t_start_s,
        cfg.time.t_end_s,
        &model.initial_state(),
        &cfg.fine_tolerances(tol_mk),
    )
    .with_context(|| format!("sequential fine run at {tol_mk} mK"))?;
    Ok((run, start.elapsed().as_secs_f64()))
}

pub fn sequential(cfg: &RunConfig, opts: &Options) -> Result<(), Failure> {
    let model = model(cfg)?;
    let out = opts.out_dir(cfg)?;
    let (run, wall) = timed_sequential(cfg, &model, cfg.fine.tol_mk).map_err(run_err)?;
    write_trajectory(
        &out.join("sequential_trajectory.csv"),
        &model,
        &run.trajectory,
    )
    .map_err(run_err)?;

    let s = run.stats;
    let t_max_end = model.max_temperature(run.trajectory.last_state());
    let mut w = writer(&out.join("sequential_summary.csv")).map_err(run_err)?;
    let write = |w: &mut csv::Writer<_>| -> anyhow::Result<()> {
        w.write_record([
            "run_id",
            "fine_tol_mK",
            "wall_s",
            "steps",
            "rejected",
            "failed_solves",
            "nr_iters",
            "T_max_end_K",
        ])?;
        w.write_record([
            cfg.run_id(),
            num(cfg.fine.tol_mk),
            num(wall),
            s.accepted.to_string(),
            s.rejected.to_string(),
            s.failed_solves.to_string(),
            s.nr_iterations.to_string(),
            num(t_max_end),
        ])?;
        w.flush()?;
        Ok(())
    };
    write(&mut w).map_err(run_err)?;
    println!(
        "sequential: {} steps ({} rejected), {} NR iterations, {:.3} s wall, T_max(end) = {} K",
        s.accepted,
        s.rejected,
        s.nr_iterations,
        wall,
        num(t_max_end)
    );
    Ok(())
}

enum CellResult {
    Converged(PararealOutcome<f64>),
    NotConverged(PararealOutcome<f64>),
}

fn parareal_cell(
    cfg: &RunConfig,
    model: &Model,
    n_windows: usize,
    fine_tol_mk: f64,
    workers: usize,
) -> Result<CellResult, Failure> {
    let pc = cfg.parareal_config(n_windows, fine_tol_mk);
    match run_parareal_with_workers(
        model,
        cfg.time.t_start_s,
        cfg.time.t_end_s,
        &model.initial_state(),
        &pc,
        workers,
    ) {
        Ok(o) => Ok(CellResult::Converged(o)),
        Err(PararealError::NotConverged(o)) => Ok(CellResult::NotConverged(*o)),
        Err(e @ PararealError::InvalidConfig(_)) => Err(Failure::Config(anyhow!(e))),
        Err(e) => Err(Failure::Run(anyhow!(e))),
    }
}

pub fn parareal(cfg: &RunConfig, opts: &Options, with_baseline: bool) -> Result<(), Failure> {
    let model = model(cfg)?;
    let out = opts.out_dir(cfg)?;
    let n = cfg.parareal.n_windows;
    let workers = opts.workers(cfg, n);
    let run_id = cfg.run_id();

    let result = parareal_cell(cfg, &model, n, cfg.fine.tol_mk, workers)?;
    let (outcome, converged) = match result {
        CellResult::Converged(o) => (o, true),
        CellResult::NotConverged(o) => (o, false),
    };
    let baseline_wall = if with_baseline {
        let (run, wall) = timed_sequential(cfg, &model, cfg.fine.tol_mk).map_err(run_err)?;
        write_trajectory(
            &out.join("sequential_trajectory.csv"),
            &model,
            &run.trajectory,
        )
        .map_err(run_err)?;
        Some(wall)
    } else {
        None
    };

    let report = &outcome.report;
    write_trajectory(
        &out.join("parareal_trajectory.csv"),
        &model,
        &outcome.trajectory,
    )
    .map_err(run_err)?;
    let write_report = || -> anyhow::Result<()> {
        let mut w = writer(&out.join("parareal_report.csv"))?;
        w.write_record(REPORT_HEADER)?;
        write_report_rows(&mut w, &run_id, report)?;
        w.flush()?;
        Ok(())
    };
    write_report().map_err(run_err)?;

    let k = report.iterations();
    let l = load_balance(&report.cumulative_fine_times()).unwrap_or(f64::NAN);
    let s = baseline_wall.map(|seq| speedup(report, seq));
    let write_summary = || -> anyhow::Result<()> {
        let mut w = writer(&out.join("parareal_summary.csv"))?;
        w.write_record([
            "run_id",
            "N",
            "K",
            "converged",
            "k",
            "err_mK",
            "l",
            "N_over_K",
            "speedup",
        ])?;
        for (i, err) in report.err_per_iter.iter().enumerate() {
            w.write_record([
                run_id.clone(),
                n.to_string(),
                k.to_string(),
                converged.to_string(),
                (i + 1).to_string(),
                num(err * 1e3),
                num(l),
                num(max_possible_speedup(n, k)),
                s.map(num).unwrap_or_default(),
            ])?;
        }
        w.flush()?;
        Ok(())
    };
    write_summary().map_err(run_err)?;

    let err_k = report.final_error().unwrap_or(f64::NAN) * 1e3;
    print!(
        "parareal: N = {n}, K = {k}, err = {} mK, l = {:.3}, {workers} workers, {:.3} s wall",
        num(err_k),
        l,
        report.total_wall
    );
    match s {
        Some(s) => println!(", speedup {s:.3}"),
        None => println!(),
    }
    if converged {
        Ok(())
    } else {
        Err(Failure::NotConverged(format!(
            "Parareal did not converge within k_max = {} iterations (err = {} mK); \
             outputs written to {}",
            cfg.parareal.k_max,
            num(err_k),
            out.display()
        )))
    }
}

pub const STUDY_HEADER: [&str; 8] = [
    "run_id",
    "N",
    "fine_tol_mK",
    "K",
    "err_K_mK",
    "max_speedup",
    "actual_speedup",
    "status",
];

pub fn study(cfg: &RunConfig, opts: &Options) -> Result<(), Failure> {
    let ns = &cfg.study.n_windows_list;
    let tols = &cfg.study.fine_tol_mk_list;
    if ns.is_empty() || tols.is_empty() {
        return Err(Failure::Config(anyhow!(
            "study.n_windows_list and study.fine_tol_mk_list must both be non-empty"
        )));
    }
    if let Some(bad) = ns.iter().find(|&&n| n == 0) {
        return Err(Failure::Config(anyhow!(
            "study.n_windows_list contains {bad}"
        )));
    }
    let model = model(cfg)?;
    let out = opts.out_dir(cfg)?;

    let tightest = tols.iter().copied().fold(f64::INFINITY, f64::min);
    let ref_tol = cfg.study.reference_tol_mk.unwrap_or(tightest / 10.0);
    let (reference, _) = timed_sequential(cfg, &model, ref_tol)
        .context("error reference")
        .map_err(run_err)?;
    println!("study: reference at {} mK", num(ref_tol));

    let io = |p: &Path| writer(p).map_err(run_err);
    let mut table = io(&out.join("study_table.csv"))?;
    let mut errors = io(&out.join("study_tmax_error.csv"))?;
    let mut reports = io(&out.join("study_report.csv"))?;
    table.write_record(STUDY_HEADER).map_err(run_err)?;
    errors
        .write_record(["fine_tol_mK", "reference_tol_mK", "time_s", "T_max_error_K"])
        .map_err(run_err)?;
    reports.write_record(REPORT_HEADER).map_err(run_err)?;

    for &tol in tols {
        let baseline = timed_sequential(cfg, &model, tol);
        if let Ok((run, _)) = &baseline {
            for (t, e) in tmax_error_series(&model, &run.trajectory, &reference.trajectory) {
                errors
                    .write_record([num(tol), num(ref_tol), num(t), num(e)])
                    .map_err(run_err)?;
            }
        }
        for &n in ns {
            let cell_cfg = cfg.cell(n, tol);
            let run_id = cell_cfg.run_id();
            let mut row = vec![run_id.clone(), n.to_string(), num(tol)];
            let cell = match &baseline {
                Err(e) => Err(format!("baseline failed: {e:#}")),
                Ok(_) => parareal_cell(&cell_cfg, &model, n, tol, opts.workers(cfg, n))
                    .map_err(|f| format!("failed: {f}")),
            };
            match cell {
                Ok(result) => {
                    let (o, status) = match result {
                        CellResult::Converged(o) => (o, "converged"),
                        CellResult::NotConverged(o) => (o, "not_converged"),
                    };
                    let r = &o.report;
                    let k = r.iterations();
                    let seq_wall = baseline.as_ref().map(|b| b.1).unwrap_or(f64::NAN);
                    row.extend([
                        k.to_string(),
                        num(r.final_error().unwrap_or(f64::NAN) * 1e3),
                        num(max_possible_speedup(n, k)),
                        num(speedup(r, seq_wall)),
                        status.to_string(),
                    ]);
                    write_report_rows(&mut reports, &run_id, r).map_err(run_err)?;
                    println!("  N = {n}, tol = {} mK: K = {k}, {status}", num(tol));
                }
                Err(msg) => {
                    row.extend([String::new(), String::new(), String::new(), String::new()]);
                    row.push(msg.replace(['\n', '\r'], " "));
                    println!("  N = {n}, tol = {} mK: {msg}", num(tol));
                }
            }
            table.write_record(&row).map_err(run_err)?;
        }
    }
    for w in [&mut table, &mut errors, &mut reports] {
        w.flush().map_err(run_err)?;
    }
    Ok(())
}
