//! The scenario commands: threshold, simulate, verify, and riccati.
//!
//! Every command prints its report JSON to stdout and writes the same
//! bytes (plus any CSV plot data) under the output directory, keyed by the
//! scenario name.

use std::path::Path;

use serde::Serialize;

use breakwave::profile::ProfileStats;
use breakwave::riccati::{self, RiccatiPair};
use breakwave::solver::{BreakSignal, SimResult, Solver};
use breakwave::threshold::{self, Ce98Report, ThresholdReport};

use crate::artifacts;
use crate::config::{MuSpec, Resolved, RiccatiConfig, Scenario};
use crate::CliError;

/// Evaluate the breaking threshold (fixed μ or band optimization).
/// Failures here are configuration-determined, so they exit as such.
pub fn compute_threshold(scenario: &Scenario, stats: &ProfileStats, resolved: &Resolved)
    -> Result<ThresholdReport, CliError>
{
    match scenario.threshold.mu {
        MuSpec::Auto => {
            threshold::optimize_mu(stats, &resolved.kernel, scenario.threshold.grid_points)
        }
        MuSpec::Fixed(mu) => threshold::check_theorem(stats, &resolved.kernel, mu),
    }
    .map_err(|e| CliError::Config(format!("threshold: {e}")))
}

#[derive(Serialize)]
struct ThresholdArtifact<'a> {
    name: &'a str,
    seed: u64,
    threshold: &'a ThresholdReport,
    ce98: &'a Ce98Report,
}

pub fn threshold(scenario: &Scenario, out: &Path) -> Result<(), CliError> {
    let resolved = scenario.resolve()?;
    let stats = resolved.profile.stats();
    let report = compute_threshold(scenario, &stats, &resolved)?;
    let baseline = threshold::ce98(&stats, &resolved.kernel);
    let text = artifacts::to_json(&ThresholdArtifact {
        name: &scenario.name,
        seed: scenario.seed,
        threshold: &report,
        ce98: &baseline,
    });
    artifacts::write(out, &format!("{}.threshold.json", scenario.name), &text)?;
    print!("{text}");
    Ok(())
}

#[derive(Serialize)]
pub struct BreakingArtifact {
    pub t_lo: f64,
    pub t_hi: f64,
    pub signal: &'static str,
    pub m1: f64,
    pub m2: f64,
}

#[derive(Serialize)]
pub struct SimArtifact<'a> {
    name: &'a str,
    seed: u64,
    grid_size: usize,
    domain_half_length: f64,
    cfl: f64,
    horizon: f64,
    steps: usize,
    final_time: f64,
    mass_initial: f64,
    mass_final: f64,
    mass_drift: f64,
    min_u: f64,
    max_u: f64,
    breaking: Option<BreakingArtifact>,
}

fn sim_artifact<'a>(scenario: &'a Scenario, result: &SimResult) -> SimArtifact<'a> {
    SimArtifact {
        name: &scenario.name,
        seed: scenario.seed,
        grid_size: scenario.solver.grid_size,
        domain_half_length: scenario.solver.domain_half_length,
        cfl: scenario.solver.cfl,
        horizon: scenario.solver.horizon,
        steps: result.steps,
        final_time: result.final_time,
        mass_initial: result.mass_initial,
        mass_final: result.mass_final,
        mass_drift: result.mass_drift,
        min_u: result.min_u,
        max_u: result.max_u,
        breaking: result.breaking.as_ref().map(|b| BreakingArtifact {
            t_lo: b.interval.0,
            t_hi: b.interval.1,
            signal: match b.signal {
                BreakSignal::GradientThreshold => "gradient_threshold",
                BreakSignal::StepCollapse => "step_collapse",
            },
            m1: b.m1,
            m2: b.m2,
        }),
    }
}

fn run_simulation(scenario: &Scenario, resolved: &Resolved) -> Result<SimResult, CliError> {
    let u0 = resolved.profile.sample()?;
    let solver = Solver::new(resolved.flux, resolved.kernel);
    Ok(solver.simulate(&u0, &scenario.solver.params())?)
}

fn write_sim_artifacts(
    scenario: &Scenario,
    out: &Path,
    resolved: &Resolved,
    result: &SimResult,
) -> Result<String, CliError> {
    let name = &scenario.name;
    let text = artifacts::to_json(&sim_artifact(scenario, result));
    artifacts::write(out, &format!("{name}.result.json"), &text)?;
    artifacts::write(out, &format!("{name}.gradient.csv"), &artifacts::gradient_csv(result))?;
    artifacts::write(out, &format!("{name}.f11.csv"), &artifacts::f11_csv(result))?;
    artifacts::write(out, &format!("{name}.plot.csv"), &artifacts::plot_csv(result))?;
    artifacts::write(out, &format!("{name}.final.csv"), &artifacts::state_csv(&result.final_state))?;
    let u0 = resolved.profile.sample()?;
    artifacts::write(
        out,
        &format!("{name}.profile.csv"),
        &artifacts::profile_csv(&resolved.profile, &u0),
    )?;
    for (k, (_, state)) in result.snapshots.iter().enumerate() {
        artifacts::write(out, &format!("{name}.snap{k}.csv"), &artifacts::state_csv(state))?;
    }
    Ok(text)
}

pub fn simulate(scenario: &Scenario, out: &Path) -> Result<(), CliError> {
    let resolved = scenario.resolve()?;
    let result = run_simulation(scenario, &resolved)?;
    let text = write_sim_artifacts(scenario, out, &resolved, &result)?;
    print!("{text}");
    Ok(())
}

#[derive(Serialize)]
struct VerifyArtifact<'a> {
    name: &'a str,
    seed: u64,
    threshold: &'a ThresholdReport,
    ce98: &'a Ce98Report,
    simulation: SimArtifact<'a>,
    /// 1.1 × blowup_bound: the latest start the observed breaking may have.
    bound_with_tolerance: Option<f64>,
    verdict: &'a str,
}

fn opt(v: Option<f64>) -> String {
    v.map(|v| format!("{v:.6}")).unwrap_or_else(|| "none".into())
}

/// Threshold plus simulation. PASS means the prediction held: breaking was
/// observed and its bracket starts no later than 1.1 × blowup_bound. An
/// unsatisfied threshold yields NO_PREDICTION (success — nothing to check).
pub fn verify(scenario: &Scenario, out: &Path) -> Result<(), CliError> {
    let resolved = scenario.resolve()?;
    let stats = resolved.profile.stats();
    let report = compute_threshold(scenario, &stats, &resolved)?;
    let baseline = threshold::ce98(&stats, &resolved.kernel);
    let result = run_simulation(scenario, &resolved)?;
    write_sim_artifacts(scenario, out, &resolved, &result)?;

    let bound = if report.satisfied { report.blowup_bound } else { None };
    let tolerant = bound.map(|b| 1.1 * b);
    let (verdict, detail) = match (tolerant, result.breaking.as_ref()) {
        (None, b) => (
            "NO_PREDICTION",
            format!("threshold not satisfied; breaking observed: {}", b.is_some()),
        ),
        (Some(limit), Some(ev)) if ev.interval.0 <= limit => (
            "PASS",
            format!(
                "breaking bracket [{:.6}, {:.6}] starts within 1.1 x bound = {:.6}",
                ev.interval.0, ev.interval.1, limit
            ),
        ),
        (Some(limit), Some(ev)) => (
            "FAIL",
            format!(
                "breaking starts at t >= {:.6}, later than 1.1 x bound = {:.6}",
                ev.interval.0, limit
            ),
        ),
        (Some(limit), None) => (
            "FAIL",
            format!(
                "no breaking detected by t = {:.6}; 1.1 x bound = {:.6}",
                result.final_time, limit
            ),
        ),
    };

    let text = artifacts::to_json(&VerifyArtifact {
        name: &scenario.name,
        seed: scenario.seed,
        threshold: &report,
        ce98: &baseline,
        simulation: sim_artifact(scenario, &result),
        bound_with_tolerance: tolerant,
        verdict,
    });
    artifacts::write(out, &format!("{}.verify.json", scenario.name), &text)?;

    println!("scenario             {}", scenario.name);
    println!("mu                   {:.6}", report.mu);
    println!("threshold satisfied  {}", report.satisfied);
    println!("ce98 margin          {:.6}", baseline.margin);
    println!("blowup_bound         {}", opt(report.blowup_bound));
    println!("t_star               {}", opt(report.t_star));
    println!("t_double_star        {}", opt(report.t_double_star));
    match result.breaking.as_ref() {
        Some(ev) => println!(
            "breaking bracket     [{:.6}, {:.6}]",
            ev.interval.0, ev.interval.1
        ),
        None => println!("breaking bracket     none by t = {:.6}", result.final_time),
    }
    println!("bound x 1.1          {}", opt(tolerant));
    println!("verdict              {verdict}  ({detail})");

    if verdict == "FAIL" {
        return Err(CliError::Failed(detail));
    }
    Ok(())
}

#[derive(Serialize)]
struct RiccatiArtifact<'a> {
    name: &'a str,
    mu: f64,
    k0: f64,
    m1_0: f64,
    m2_0: f64,
    dt: f64,
    horizon: f64,
    samples: usize,
    /// Bracket around the detected pole of the coupled pair, if any.
    blowup: Option<(f64, f64)>,
    /// Closed-form pole 1/(m(0)μ) of the decoupled comparison scalar.
    scalar_pole: Option<f64>,
}

/// Integrate the coupled slope-comparison pair seeded from the profile's
/// slope extrema (or explicit m1/m2 from the scenario).
pub fn riccati(scenario: &Scenario, out: &Path) -> Result<(), CliError> {
    let resolved = scenario.resolve()?;
    let stats = resolved.profile.stats();
    let report = compute_threshold(scenario, &stats, &resolved)?;
    let rc = scenario.riccati.clone().unwrap_or(RiccatiConfig {
        dt: 1e-4,
        horizon: scenario.solver.horizon,
        m1: None,
        m2: None,
    });
    let pair = RiccatiPair {
        mu: report.mu,
        k0: resolved.kernel.at_zero(),
        m1_0: rc.m1.unwrap_or(stats.inf_slope),
        m2_0: rc.m2.unwrap_or(stats.sup_slope),
    };
    let traj = pair.integrate(rc.dt, rc.horizon)?;
    let text = artifacts::to_json(&RiccatiArtifact {
        name: &scenario.name,
        mu: pair.mu,
        k0: pair.k0,
        m1_0: pair.m1_0,
        m2_0: pair.m2_0,
        dt: rc.dt,
        horizon: rc.horizon,
        samples: traj.times.len(),
        blowup: traj.blowup,
        scalar_pole: riccati::blowup_time(report.m0, report.mu),
    });
    artifacts::write(out, &format!("{}.riccati.json", scenario.name), &text)?;
    let table = artifacts::csv(
        "t,m1,m2",
        traj.times
            .iter()
            .zip(traj.m1.iter().zip(traj.m2.iter()))
            .map(|(&t, (&m1, &m2))| vec![t, m1, m2]),
    );
    artifacts::write(out, &format!("{}.riccati.csv", scenario.name), &table)?;
    print!("{text}");
    Ok(())
}
