//! Built-in property suites: randomized checks of the analytic
//! inequalities plus the numerical oracles, for smoke-testing a build.
//! One PASS/FAIL line per suite; any failure exits with the verification
//! failure code.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use breakwave::flux::FluxModel;
use breakwave::grid::GridFunction;
use breakwave::kernel::Kernel;
use breakwave::riccati::{closed_form, RiccatiPair};
use breakwave::solver::{Solver, SolverParams};
use breakwave::threshold;

use crate::CliError;

type Suite = fn(u64) -> Result<String, String>;

pub fn run(seed: u64) -> Result<(), CliError> {
    let suites: &[(&str, Suite)] = &[
        ("kappa-wedge-inequality", wedge),
        ("comparison-clock-order", clock_order),
        ("band-endpoint-kappa", endpoint),
        ("riccati-closed-form", riccati_oracle),
        ("convolution-backends", convolution),
        ("mass-conservation", conservation),
    ];
    let mut failed = 0;
    for (name, suite) in suites {
        let start = Instant::now();
        match suite(seed) {
            Ok(detail) => {
                println!("PASS {name:<24} {detail} ({} ms)", start.elapsed().as_millis())
            }
            Err(why) => {
                failed += 1;
                println!("FAIL {name:<24} {why}");
            }
        }
    }
    if failed > 0 {
        Err(CliError::Failed(format!("{failed} selftest suite(s) failed")))
    } else {
        Ok(())
    }
}

/// The κ choice must keep (3/4)/(κA)^{3/2} strictly above B/(A − Aκ).
fn wedge(seed: u64) -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut min_margin = f64::INFINITY;
    for i in 0..10_000 {
        let a = rng.gen_range(1e-12..=10.0);
        let b = rng.gen_range(1e-12..=10.0);
        let k = threshold::kappa_from_ab(a, b);
        let lhs = 0.75 / (k * a).powf(1.5);
        let rhs = b / (a - a * k);
        if !(lhs > rhs) {
            return Err(format!("sample {i}: A={a}, B={b} gives lhs={lhs} <= rhs={rhs}"));
        }
        min_margin = min_margin.min(lhs - rhs);
    }
    let k = threshold::kappa_from_ab(1.0, 0.75);
    if (k - 0.5).abs() > 1e-15 {
        return Err(format!("spot check: kappa(1, 3/4) = {k}, want 0.5"));
    }
    Ok(format!("10000 samples, min margin {min_margin:.3e}"))
}

/// Strictly inside the band, the clocks order as t* < t**.
fn clock_order(seed: u64) -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let mut min_gap = f64::INFINITY;
    for i in 0..10_000 {
        let u_max = rng.gen_range(-0.9..=10.0);
        let u_min = rng.gen_range(-0.9..=u_max);
        let mu = threshold::band_floor(u_max) * rng.gen_range(1e-6..=1.0 - 1e-6);
        let m = rng.gen_range(1e-6..=10.0);
        let kappa = threshold::kappa(mu, u_min, u_max).map_err(|e| e.to_string())?;
        let (_, t_star, t_double_star) =
            threshold::comparison_times(mu, kappa, u_min, u_max, m).map_err(|e| e.to_string())?;
        if !(t_double_star > t_star) {
            return Err(format!(
                "sample {i}: mu={mu}, u_min={u_min}, u_max={u_max}, M={m}: t*={t_star} >= t**={t_double_star}"
            ));
        }
        min_gap = min_gap.min(t_double_star - t_star);
    }
    Ok(format!("10000 samples, min t** - t* = {min_gap:.3e}"))
}

/// At the band floor with u_m = u_M the κ formula collapses to 1.
fn endpoint(seed: u64) -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xe9d);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let u = rng.gen_range(-0.9..=10.0);
        let kappa = threshold::kappa(threshold::band_floor(u), u, u).map_err(|e| e.to_string())?;
        worst = worst.max((kappa - 1.0).abs());
    }
    if worst > 1e-12 {
        return Err(format!("endpoint kappa off by {worst:.3e} > 1e-12"));
    }
    Ok(format!("100 samples, max |kappa - 1| = {worst:.3e}"))
}

/// Decoupled pair against m(t) = m₀/(1 − m₀μt), plus fourth-order halving.
fn riccati_oracle(_seed: u64) -> Result<String, String> {
    let (m0, mu) = (-2.0, -1.5);
    let pole = 1.0 / (m0 * mu);
    let sup_err = |dt: f64| -> Result<f64, String> {
        let pair = RiccatiPair { mu, k0: 0.0, m1_0: m0, m2_0: m0 };
        let traj = pair.integrate(dt, 0.9 * pole).map_err(|e| e.to_string())?;
        let mut sup = 0.0f64;
        for (t, m) in traj.times.iter().zip(traj.m1.iter()) {
            let exact = closed_form(m0, mu, *t).map_err(|e| e.to_string())?;
            sup = sup.max((m - exact).abs());
        }
        Ok(sup)
    };
    let err = sup_err(5e-4)?;
    if err > 1e-6 {
        return Err(format!("sup error {err:.3e} > 1e-6 at dt = 5e-4"));
    }
    let (coarse, fine) = (sup_err(5e-3)?, sup_err(2.5e-3)?);
    let ratio = coarse / fine;
    if ratio < 8.0 {
        return Err(format!("halving ratio {ratio:.2} < 8"));
    }
    Ok(format!("sup err {err:.3e}, halving ratio {ratio:.1}"))
}

/// Transform and trapezoid backends compute the same periodic operator.
fn convolution(_seed: u64) -> Result<String, String> {
    let kernel = Kernel::whitham();
    let u = GridFunction::from_fn(256, 20.0, |x| {
        (-x * x / 4.0).exp() * (1.0 + 0.3 * x.sin())
    })
    .map_err(|e| e.to_string())?;
    let fast = kernel.convolve(&u).map_err(|e| e.to_string())?;
    let direct = kernel.convolve_direct(&u).map_err(|e| e.to_string())?;
    let mut diff = 0.0f64;
    for (a, b) in fast.values().iter().zip(direct.values()) {
        diff = diff.max((a - b).abs());
    }
    if diff > 1e-10 {
        return Err(format!("backends differ by {diff:.3e} > 1e-10"));
    }
    Ok(format!("N=256, max |fft - direct| = {diff:.3e}"))
}

/// The flux-difference scheme must conserve mass to rounding.
fn conservation(_seed: u64) -> Result<String, String> {
    let solver = Solver::new(
        FluxModel::WhithamLinear { c0: 1.0, h0: 1.0 },
        Kernel::whitham(),
    );
    let u0 = GridFunction::from_fn(256, 20.0, |x| 0.1 * (-x * x / 4.0).exp())
        .map_err(|e| e.to_string())?;
    let params = SolverParams {
        horizon: 0.3,
        max_dt: Some(1e-3),
        record_every: 64,
        ..SolverParams::default()
    };
    let result = solver.simulate(&u0, &params).map_err(|e| e.to_string())?;
    if result.steps < 200 {
        return Err(format!("only {} steps; wanted a longer run", result.steps));
    }
    if result.mass_drift > 1e-8 {
        return Err(format!("mass drift {:.3e} > 1e-8", result.mass_drift));
    }
    Ok(format!("drift {:.3e} over {} steps", result.mass_drift, result.steps))
}
