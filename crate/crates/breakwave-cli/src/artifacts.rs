//! Deterministic artifact writers: JSON reports and CSV plot data.
//! Floats print in shortest round-trip form, so identical runs produce
//! byte-identical files.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use breakwave::grid::GridFunction;
use breakwave::profile::Profile;
use breakwave::solver::SimResult;

use crate::CliError;

/// Write `contents` to `dir/file`, creating the directory if needed.
pub fn write(dir: &Path, file: &str, contents: &str) -> Result<PathBuf, CliError> {
    std::fs::create_dir_all(dir)
        .map_err(|e| CliError::Runtime(format!("cannot create {}: {e}", dir.display())))?;
    let path = dir.join(file);
    std::fs::write(&path, contents)
        .map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display())))?;
    Ok(path)
}

/// Pretty JSON with a trailing newline.
pub fn to_json(value: &impl Serialize) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types serialize");
    s.push('\n');
    s
}

/// CSV table over f64 rows.
pub fn csv(header: &str, rows: impl Iterator<Item = Vec<f64>>) -> String {
    let mut out = String::from(header);
    out.push('\n');
    for row in rows {
        for (j, v) in row.iter().enumerate() {
            if j > 0 {
                out.push(',');
            }
            write!(out, "{v}").expect("write to String");
        }
        out.push('\n');
    }
    out
}

/// Gradient-extrema history: t, m1, m2 and their refined locations.
pub fn gradient_csv(result: &SimResult) -> String {
    csv(
        "t,m1,m2,xi1,xi2",
        result.gradient.iter().map(|g| vec![g.t, g.m1, g.m2, g.xi1, g.xi2]),
    )
}

/// Transport-rate samples of the nonlinearity coefficient at both extrema.
pub fn f11_csv(result: &SimResult) -> String {
    csv(
        "t,rate1,rate2,u1,u2",
        result.f11.iter().map(|s| vec![s.t, s.rate1, s.rate2, s.u1, s.u2]),
    )
}

/// Two-column plot data: t against the slope minimum m1.
pub fn plot_csv(result: &SimResult) -> String {
    csv("t,m1", result.gradient.iter().map(|g| vec![g.t, g.m1]))
}

/// One solution state as x, u rows.
pub fn state_csv(u: &GridFunction) -> String {
    csv("x,u", (0..u.len()).map(|i| vec![u.x(i), u.values()[i]]))
}

/// Initial profile and its closed-form derivative.
pub fn profile_csv(profile: &Profile, u0: &GridFunction) -> String {
    csv(
        "x,u0,du0",
        (0..u0.len()).map(|i| {
            let x = u0.x(i);
            vec![x, u0.values()[i], profile.deriv(x)]
        }),
    )
}
