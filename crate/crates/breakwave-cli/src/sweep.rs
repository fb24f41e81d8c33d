//! Concurrent parameter sweeps over a scenario template.
//!
//! Axis values are written into the raw scenario JSON at dotted paths; a
//! path whose template value is an integer receives rounded integers (so
//! `threshold.grid_points` and `solver.grid_size` sweep cleanly). Grid
//! points run on up to `BREAKWAVE_THREADS` workers (default: available
//! parallelism), and the CSV rows come out in grid order — axis 0 outer,
//! axis 1 inner — no matter how the work is scheduled.

use std::fmt::Write as _;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde_json::Value;

use breakwave::solver::Solver;
use breakwave::threshold;

use crate::commands::compute_threshold;
use crate::config::{Scenario, SweepConfig};
use crate::{artifacts, CliError, RunArgs};

struct Row {
    axes: Vec<f64>,
    satisfied: bool,
    mu: f64,
    blowup_bound: Option<f64>,
    t_star: Option<f64>,
    t_double_star: Option<f64>,
    ce98_margin: f64,
    breaking: Option<(f64, f64)>,
}

pub fn run(args: &RunArgs) -> Result<(), CliError> {
    let text = std::fs::read_to_string(&args.config)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", args.config.display())))?;
    let mut raw: Value = serde_json::from_str(&text)
        .map_err(|e| CliError::Config(format!("{}: {e}", args.config.display())))?;

    // fold the command-line overrides into the template document so every
    // grid point inherits them
    if let Some(word) = args.mu.as_deref() {
        crate::config::parse_mu(word)?;
        set_raw(&mut raw, "threshold", "mu", json_mu(word));
    }
    if let Some(n) = args.grid {
        set_raw(&mut raw, "solver", "grid_size", Value::from(n));
    }
    if let Some(s) = args.seed {
        raw.as_object_mut()
            .ok_or_else(|| CliError::Config("scenario must be a JSON object".into()))?
            .insert("seed".into(), Value::from(s));
    }

    let template: Scenario = serde_json::from_value(raw.clone())
        .map_err(|e| CliError::Config(format!("{}: {e}", args.config.display())))?;
    template.resolve()?;
    let sweep = template
        .sweep
        .clone()
        .ok_or_else(|| CliError::Config("scenario has no `sweep` block".into()))?;
    if sweep.axes.is_empty() || sweep.axes.len() > 2 {
        return Err(CliError::Config(format!(
            "sweep needs one or two axes, got {}",
            sweep.axes.len()
        )));
    }
    for axis in &sweep.axes {
        if axis.count == 0 {
            return Err(CliError::Config(format!("sweep axis `{}` has count 0", axis.path)));
        }
        // fail fast on typo'd paths before spawning workers
        set_path(&mut raw.clone(), &axis.path, axis.start)?;
    }

    let counts: Vec<usize> = sweep.axes.iter().map(|a| a.count).collect();
    let total: usize = counts.iter().product();
    let workers = worker_count(total)?;
    let next = AtomicUsize::new(0);
    let cells: Vec<Mutex<Option<Result<Row, CliError>>>> =
        (0..total).map(|_| Mutex::new(None)).collect();

    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= total {
                    break;
                }
                let row = run_point(&raw, &sweep, &counts, i);
                *cells[i].lock().expect("no poisoned cell") = Some(row);
            });
        }
    });

    let mut rows = Vec::with_capacity(total);
    for cell in cells {
        rows.push(cell.into_inner().expect("no poisoned cell").expect("every point ran")?);
    }

    let csv = render(&sweep, &rows);
    artifacts::write(&args.out, &format!("{}.sweep.csv", template.name), &csv)?;
    print!("{csv}");
    Ok(())
}

fn json_mu(word: &str) -> Value {
    match word.parse::<f64>() {
        Ok(v) => Value::from(v),
        Err(_) => Value::from(word), // "auto"; validated by parse_mu above
    }
}

fn set_raw(doc: &mut Value, section: &str, key: &str, value: Value) {
    let root = doc.as_object_mut().expect("validated as object");
    let section = root.entry(section).or_insert_with(|| Value::Object(Default::default()));
    if let Some(obj) = section.as_object_mut() {
        obj.insert(key.into(), value);
    }
}

fn worker_count(total: usize) -> Result<usize, CliError> {
    let available = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1);
    let cap = match std::env::var("BREAKWAVE_THREADS") {
        Ok(v) => v.parse::<usize>().ok().filter(|&n| n >= 1).ok_or_else(|| {
            CliError::Config(format!("BREAKWAVE_THREADS must be a positive integer, got `{v}`"))
        })?,
        Err(_) => available,
    };
    Ok(cap.min(total).max(1))
}

/// Write `value` at a dotted path like `profile.params.amplitude`; the
/// path must already exist in the template.
fn set_path(doc: &mut Value, path: &str, value: f64) -> Result<(), CliError> {
    let parts: Vec<&str> = path.split('.').collect();
    let mut cur = doc;
    for (k, part) in parts.iter().enumerate() {
        let obj = cur.as_object_mut().ok_or_else(|| {
            CliError::Config(format!(
                "sweep axis path `{path}`: `{}` is not an object",
                parts[..k].join(".")
            ))
        })?;
        cur = obj.get_mut(*part).ok_or_else(|| {
            CliError::Config(format!(
                "sweep axis path `{path}` not found in scenario (missing `{part}`)"
            ))
        })?;
    }
    if cur.is_u64() || cur.is_i64() {
        *cur = Value::from(value.round() as i64);
    } else if cur.is_number() {
        *cur = serde_json::Number::from_f64(value)
            .map(Value::Number)
            .ok_or_else(|| {
                CliError::Config(format!("sweep axis `{path}`: value {value} is not finite"))
            })?;
    } else {
        return Err(CliError::Config(format!(
            "sweep axis path `{path}` does not point at a number"
        )));
    }
    Ok(())
}

fn run_point(raw: &Value, sweep: &SweepConfig, counts: &[usize], index: usize) -> Result<Row, CliError> {
    // row-major decode: axis 0 outer, axis 1 inner
    let inner = if counts.len() == 2 { counts[1] } else { 1 };
    let idx = [index / inner, index % inner];

    let mut doc = raw.clone();
    let mut axes = Vec::with_capacity(sweep.axes.len());
    for (a, axis) in sweep.axes.iter().enumerate() {
        let v = axis.value(idx[a]);
        set_path(&mut doc, &axis.path, v)?;
        axes.push(v);
    }
    doc.as_object_mut().expect("validated as object").remove("sweep");
    let scenario: Scenario = serde_json::from_value(doc)
        .map_err(|e| CliError::Config(format!("sweep point {index}: {e}")))?;

    let resolved = scenario.resolve()?;
    let stats = resolved.profile.stats();
    let report = compute_threshold(&scenario, &stats, &resolved)?;
    let baseline = threshold::ce98(&stats, &resolved.kernel);
    let breaking = if sweep.simulate {
        let u0 = resolved.profile.sample()?;
        let solver = Solver::new(resolved.flux, resolved.kernel);
        let result = solver.simulate(&u0, &scenario.solver.params())?;
        result.breaking.map(|b| b.interval)
    } else {
        None
    };

    Ok(Row {
        axes,
        satisfied: report.satisfied,
        mu: report.mu,
        blowup_bound: report.blowup_bound,
        t_star: report.t_star,
        t_double_star: report.t_double_star,
        ce98_margin: baseline.margin,
        breaking,
    })
}

fn cell(v: Option<f64>) -> String {
    v.map(|v| format!("{v}")).unwrap_or_default()
}

fn render(sweep: &SweepConfig, rows: &[Row]) -> String {
    let mut out = String::new();
    for axis in &sweep.axes {
        write!(out, "{},", axis.path).expect("write to String");
    }
    out.push_str("satisfied,mu,blowup_bound,t_star,t_double_star,ce98_margin");
    if sweep.simulate {
        out.push_str(",break_lo,break_hi");
    }
    out.push('\n');
    for row in rows {
        for v in &row.axes {
            write!(out, "{v},").expect("write to String");
        }
        write!(
            out,
            "{},{},{},{},{},{}",
            row.satisfied,
            row.mu,
            cell(row.blowup_bound),
            cell(row.t_star),
            cell(row.t_double_star),
            row.ce98_margin
        )
        .expect("write to String");
        if sweep.simulate {
            let (lo, hi) = match row.breaking {
                Some((lo, hi)) => (Some(lo), Some(hi)),
                None => (None, None),
            };
            write!(out, ",{},{}", cell(lo), cell(hi)).expect("write to String");
        }
        out.push('\n');
    }
    out
}
