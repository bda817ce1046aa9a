use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

const EXAMPLE: &str = include_str!("../config/ni_coil.toml");

fn parareal(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_parareal"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("run.toml");
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_path(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.unwrap().iter().map(String::from).collect())
        .collect();
    (header, rows)
}

fn column(header: &[String], name: &str) -> usize {
    header
        .iter()
        .position(|h| h == name)
        .unwrap_or_else(|| panic!("no column {name}"))
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn run_in(dir: &TempDir, config: &str, args: &[&str]) -> Output {
    let cfg = write_config(dir.path(), config);
    let out_dir = dir.path().join("out");
    let mut full = args.to_vec();
    full.extend(["--config", &cfg, "--out", out_dir.to_str().unwrap()]);
    parareal(&full)
}

const LINEAR: &str = "[problem]\nkind = \"linear_test\"\n[time]\nt_start_s = 0.0\nt_end_s = 1.0\n\
[linear_test]\nlambda = -1.0\nu0 = [1.0]\n[fine]\ntol_mk = 0.01\ndt_max_s = 0.01\n";

#[test]
fn sequential_linear_reaches_closed_form() {
    let dir = TempDir::new().unwrap();
    let out = run_in(&dir, LINEAR, &["sequential"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let (header, rows) = read_csv(&dir.path().join("out/sequential_trajectory.csv"));
    assert_eq!(header, ["time_s", "u0", "T_max_K"]);
    let last = rows.last().unwrap();
    assert_eq!(last[0], "1");
    let end: f64 = last[1].parse().unwrap();
    assert!((end - (-1.0f64).exp()).abs() < 5e-3, "{end}");
    let (header, rows) = read_csv(&dir.path().join("out/sequential_summary.csv"));
    assert_eq!(rows.len(), 1);
    assert_eq!(header[0], "run_id");
}

#[test]
fn missing_config_names_the_path() {
    let out = parareal(&["sequential", "--config", "/nonexistent/run.toml"]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("/nonexistent/run.toml"));
}

#[test]
fn malformed_config_and_usage_errors_exit_one() {
    let dir = TempDir::new().unwrap();
    let out = run_in(
        &dir,
        "[problem]\nkind = \"ni_coil\"\n[fine]\ntol_mk = 0.0\n",
        &["sequential"],
    );
    assert_eq!(code(&out), 1);
    let out = run_in(&dir, "not toml at all [", &["parareal"]);
    assert_eq!(code(&out), 1);
    assert_eq!(code(&parareal(&["frobnicate"])), 1);
    assert_eq!(code(&parareal(&["parareal", "--workers", "0"])), 1);
}

#[test]
fn sequential_coil_rows_contain_breakpoints() {
    let dir = TempDir::new().unwrap();
    let out = run_in(&dir, EXAMPLE, &["sequential", "--seed", "7"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let (header, rows) = read_csv(&dir.path().join("out/sequential_trajectory.csv"));
    assert_eq!(
        header,
        [
            "time_s",
            "I_theta_A",
            "T_K",
            "T_max_K",
            "B_z_T",
            "I_source_A"
        ]
    );
    let times: Vec<&str> = rows.iter().map(|r| r[0].as_str()).collect();
    for bp in ["0", "50", "150", "200", "250"] {
        assert!(times.contains(&bp), "missing t = {bp}");
    }
}

#[test]
fn parareal_default_coil_converges() {
    let dir = TempDir::new().unwrap();
    let out = run_in(
        &dir,
        EXAMPLE,
        &["parareal", "--with-baseline", "--workers", "2"],
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let base = dir.path().join("out");

    let (header, rows) = read_csv(&base.join("parareal_summary.csv"));
    let k: usize = rows[0][column(&header, "K")].parse().unwrap();
    assert!(k <= 8);
    assert_eq!(rows.len(), k);
    let last_err: f64 = rows[k - 1][column(&header, "err_mK")].parse().unwrap();
    assert!(last_err < 10.0);
    assert!(!rows[0][column(&header, "speedup")].is_empty());
    let n_over_k: f64 = rows[0][column(&header, "N_over_K")].parse().unwrap();
    assert_eq!(n_over_k, 8.0 / k as f64);

    let (header, rows) = read_csv(&base.join("parareal_report.csv"));
    assert_eq!(
        header,
        [
            "run_id",
            "N",
            "k",
            "j",
            "t_start_s",
            "t_end_s",
            "fine_wall_s",
            "coarse_wall_s",
            "nr_iters"
        ]
    );
    assert_eq!(rows.len(), 8 * k);
    assert_eq!(rows[0][column(&header, "t_start_s")], "0");
    assert_eq!(rows[7][column(&header, "t_end_s")], "250");

    assert!(base.join("parareal_trajectory.csv").exists());
    assert!(base.join("sequential_trajectory.csv").exists());
}

#[test]
fn coarse_equal_to_fine_gives_single_iteration() {
    let dir = TempDir::new().unwrap();
    let cfg = "[problem]\nkind = \"ni_coil\"\n[parareal]\nn_windows = 4\n\
[fine]\ntol_mk = 1.0\ndt_init_s = 1e-2\ndt_max_s = 5.0\n\
[coarse]\ntol_nr_mk = 1.0\ntol_t_mk = 1.0\n";
    let out = run_in(&dir, cfg, &["parareal"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let (header, rows) = read_csv(&dir.path().join("out/parareal_summary.csv"));
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0][column(&header, "K")], "1");
    let err: f64 = rows[0][column(&header, "err_mK")].parse().unwrap();
    // Equal up to the fine predictor restarting at each window start.
    assert!(err < 2.0, "{err}");
}

#[test]
fn iteration_cap_exits_three_with_report() {
    let dir = TempDir::new().unwrap();
    let cfg = EXAMPLE.replace("k_max = 20", "k_max = 1");
    let out = run_in(&dir, &cfg, &["parareal"]);
    assert_eq!(code(&out), 3, "{}", String::from_utf8_lossy(&out.stderr));
    let (_, rows) = read_csv(&dir.path().join("out/parareal_report.csv"));
    assert_eq!(rows.len(), 8);
    assert!(rows.iter().all(|r| r[2] == "1"));
    let (header, rows) = read_csv(&dir.path().join("out/parareal_summary.csv"));
    assert_eq!(rows[0][column(&header, "converged")], "false");
}

#[test]
fn too_many_windows_exits_two_with_hint() {
    let dir = TempDir::new().unwrap();
    let cfg = EXAMPLE.replace("n_windows = 8", "n_windows = 5000");
    let out = run_in(&dir, &cfg, &["parareal"]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("reduce N"));
}

#[test]
fn study_single_cell() {
    let dir = TempDir::new().unwrap();
    let cfg = EXAMPLE
        .replace("n_windows_list = [8, 16, 24]", "n_windows_list = [8]")
        .replace(
            "fine_tol_mk_list = [10.0, 1.0, 0.1]",
            "fine_tol_mk_list = [10.0]",
        );
    let out = run_in(&dir, &cfg, &["study"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let base = dir.path().join("out");
    let (header, rows) = read_csv(&base.join("study_table.csv"));
    assert_eq!(
        header,
        [
            "run_id",
            "N",
            "fine_tol_mK",
            "K",
            "err_K_mK",
            "max_speedup",
            "actual_speedup",
            "status"
        ]
    );
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0][1], "8");
    assert_eq!(rows[0][2], "10");
    let (header, rows) = read_csv(&base.join("study_tmax_error.csv"));
    assert_eq!(
        header,
        ["fine_tol_mK", "reference_tol_mK", "time_s", "T_max_error_K"]
    );
    assert!(!rows.is_empty());
    assert!(rows.iter().all(|r| r[1] == "1"));
}

#[test]
fn study_grid_has_table_shape() {
    let dir = TempDir::new().unwrap();
    let cfg = EXAMPLE.replace(
        "fine_tol_mk_list = [10.0, 1.0, 0.1]",
        "fine_tol_mk_list = [10.0, 1.0]",
    );
    let out = run_in(&dir, &cfg, &["study"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let (header, rows) = read_csv(&dir.path().join("out/study_table.csv"));
    assert_eq!(rows.len(), 6);
    let status = column(&header, "status");
    assert!(rows
        .iter()
        .all(|r| r[status] == "converged" || r[status] == "not_converged"));
    let (_, report_rows) = read_csv(&dir.path().join("out/study_report.csv"));
    let ids: std::collections::BTreeSet<&str> = report_rows.iter().map(|r| r[0].as_str()).collect();
    assert_eq!(ids.len(), 6);
}

#[test]
fn empty_study_list_is_config_error() {
    let dir = TempDir::new().unwrap();
    let out = run_in(&dir, "[problem]\nkind = \"ni_coil\"\n", &["study"]);
    assert_eq!(code(&out), 1);
}

/// Non-wall-clock columns must match byte for byte between runs.
#[test]
fn reruns_are_reproducible() {
    let strip = |path: &Path, drop: &[&str]| -> Vec<Vec<String>> {
        let (header, rows) = read_csv(path);
        let keep: Vec<usize> = (0..header.len())
            .filter(|&i| !drop.contains(&header[i].as_str()))
            .collect();
        rows.into_iter()
            .map(|r| keep.iter().map(|&i| r[i].clone()).collect())
            .collect()
    };
    let mut results = Vec::new();
    for _ in 0..2 {
        let dir = TempDir::new().unwrap();
        let out = run_in(&dir, EXAMPLE, &["parareal", "--workers", "3"]);
        assert_eq!(code(&out), 0);
        let base = dir.path().join("out");
        results.push((
            std::fs::read(base.join("parareal_trajectory.csv")).unwrap(),
            strip(
                &base.join("parareal_report.csv"),
                &["fine_wall_s", "coarse_wall_s"],
            ),
            strip(&base.join("parareal_summary.csv"), &["l", "speedup"]),
        ));
    }
    assert_eq!(results[0], results[1]);
}
