//! CSV writers. Numbers are printed with 12 significant digits in `%g` style
//! so repeated runs produce byte-identical deterministic columns.

use std::fs::File;
use std::path::Path;

use anyhow::{Context, Result};
use parareal_core::{PararealReport64, Problem, Trajectory64};

use crate::model::Model;

/// `%.12g`: shortest of fixed or scientific, trailing zeros removed.
pub fn num(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{:.11e}", x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        trim_zeros(&format!("{:.*}", decimals, x)).to_string()
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{}{:02}", trim_zeros(mantissa), sign, exp.abs())
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub fn writer(path: &Path) -> Result<csv::Writer<File>> {
    csv::Writer::from_path(path).with_context(|| format!("cannot create {}", path.display()))
}

pub fn write_trajectory(path: &Path, model: &Model, traj: &Trajectory64) -> Result<()> {
    let mut w = writer(path)?;
    let mut header = vec!["time_s".to_string()];
    header.extend(model.state_columns());
    header.push("T_max_K".into());
    header.extend(model.derived_columns().iter().map(|s| s.to_string()));
    w.write_record(&header)?;
    for (t, u) in traj.entries() {
        let mut row = vec![num(*t)];
        row.extend(u.as_slice().iter().map(|&v| num(v)));
        row.push(num(model.max_temperature(u)));
        row.extend(model.derived_values(*t, u).into_iter().map(num));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub const REPORT_HEADER: [&str; 9] = [
    "run_id",
    "N",
    "k",
    "j",
    "t_start_s",
    "t_end_s",
    "fine_wall_s",
    "coarse_wall_s",
    "nr_iters",
];

/// One row per iteration `k` and window `j`. `nr_iters` counts the fine and
/// fixed-grid coarse Newton iterations spent on that window.
pub fn write_report_rows<W: std::io::Write>(
    w: &mut csv::Writer<W>,
    run_id: &str,
    report: &PararealReport64,
) -> Result<()> {
    let n = report.n_windows;
    for k in 0..report.iterations() {
        for j in 0..n {
            let nr = report.fine_nr_iters[k][j] + report.coarse_nr_iters[k][j];
            w.write_record([
                run_id.to_string(),
                n.to_string(),
                (k + 1).to_string(),
                (j + 1).to_string(),
                num(report.boundaries[j]),
                num(report.boundaries[j + 1]),
                num(report.time_fine_per_window[k][j]),
                num(report.time_coarse_per_window[k][j]),
                nr.to_string(),
            ])?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::num;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(num(0.0), "0");
        assert_eq!(num(1.0), "1");
        assert_eq!(num(-2.5), "-2.5");
        assert_eq!(num(250.0), "250");
        assert_eq!(num(1.0 / 3.0), "0.333333333333");
        assert_eq!(num(77.12345678901), "77.123456789");
        assert_eq!(num(1e-4), "0.0001");
        assert_eq!(num(1.5e-7), "1.5e-07");
        assert_eq!(num(2.5e8), "250000000");
        assert_eq!(num(1e12), "1e+12");
        assert_eq!(num(999999999999.9), "1e+12");
        assert_eq!(num(f64::NAN), "NaN");
    }

    #[test]
    fn round_trips_to_twelve_digits() {
        for x in [std::f64::consts::PI, 1.0e-9 / 7.0, 78.5234987, -0.1] {
            let back: f64 = num(x).parse().unwrap();
            assert!(((back - x) / x).abs() < 1e-11, "{x} -> {}", num(x));
        }
    }
}
