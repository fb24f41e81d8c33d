//! Riccati comparison dynamics for slope extrema.
//!
//! Along characteristics the extremal slopes m₁ ≈ inf u_x and m₂ ≈ sup u_x
//! of the drift equation obey, after bounding the nonlocal terms,
//!
//! ```text
//! ṁ₁ = μ m₁² + K(0)(m₂ − m₁)
//! ṁ₂ = μ m₂² + K(0)(m₂ − m₁)
//! ```
//!
//! with μ < 0 a uniform bound on −f′(u).  The decoupled scalar equation
//! ṁ = μ m² has the closed form m(t) = m₀/(1 − m₀ μ t), blowing up at
//! t = 1/(m₀μ) when m₀μ > 0.  The coupled pair preserves the region
//! m₁ + m₂ ≤ 2K(0)/μ: on its boundary, d(m₁+m₂)/dt = 2μm₂² ≤ 0.
//!
//! A variable-coefficient scalar form ṁ = a(t)m² + b(t) is provided for
//! driving the quadratic rate from a path t ↦ u(t) (e.g. a = −f′∘u) or an
//! external forcing.  All integrators are classical RK4 with a step cap
//! 0.1/stiffness so the quadratic term never moves m by more than ~10% per
//! step; blow-up is reported as the interval between the last finite sample
//! and the detection time.

use crate::{Error, Result};

/// Magnitude at which a trajectory is declared blown up.
pub const BLOWUP_MAGNITUDE: f64 = 1e8;

/// Smallest step the adaptive cap may request before integration stops.
pub const MIN_STEP: f64 = 1e-12;

/// m₀/(1 − m₀ μ t); errors at or past the pole.
pub fn closed_form(m0: f64, mu: f64, t: f64) -> Result<f64> {
    let denom = 1.0 - m0 * mu * t;
    if denom <= 0.0 {
        return Err(Error::PoleEvaluation { t });
    }
    Ok(m0 / denom)
}

/// Pole location 1/(m₀μ) of the closed form, when one exists ahead in time.
pub fn blowup_time(m0: f64, mu: f64) -> Option<f64> {
    let p = m0 * mu;
    (p > 0.0).then(|| 1.0 / p)
}

/// Coupled extremal-slope system with quadratic rate μ and coupling K(0).
#[derive(Debug, Clone, Copy)]
pub struct RiccatiPair {
    pub mu: f64,
    pub k0: f64,
    pub m1_0: f64,
    pub m2_0: f64,
}

/// Time series of a pair integration; `blowup` brackets the detected pole.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub m1: Vec<f64>,
    pub m2: Vec<f64>,
    pub blowup: Option<(f64, f64)>,
}

fn check_step_params(dt: f64, horizon: f64) -> Result<()> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::InvalidParam { name: "dt", reason: format!("must be positive and finite, got {dt}") });
    }
    if !(horizon >= 0.0) || !horizon.is_finite() {
        return Err(Error::InvalidParam { name: "horizon", reason: format!("must be nonnegative and finite, got {horizon}") });
    }
    Ok(())
}

impl RiccatiPair {
    fn rhs(&self, m1: f64, m2: f64) -> (f64, f64) {
        let coupling = self.k0 * (m2 - m1);
        (self.mu * m1 * m1 + coupling, self.mu * m2 * m2 + coupling)
    }

    /// RK4 up to `horizon` with base step `dt` (shrunk adaptively near a pole).
    pub fn integrate(&self, dt: f64, horizon: f64) -> Result<Trajectory> {
        check_step_params(dt, horizon)?;
        let (mut m1, mut m2) = (self.m1_0, self.m2_0);
        let mut t = 0.0;
        let mut traj = Trajectory {
            times: vec![0.0],
            m1: vec![m1],
            m2: vec![m2],
            blowup: None,
        };
        while t < horizon {
            let remaining = horizon - t;
            if remaining < MIN_STEP {
                break; // landed on the horizon up to rounding
            }
            let scale = m1.abs().max(m2.abs()).max(1.0);
            let stiffness = self.mu.abs() * scale + 2.0 * self.k0.abs();
            let cap = if stiffness > 0.0 { 0.1 / stiffness } else { dt };
            let h = dt.min(cap).min(remaining);
            if h < MIN_STEP {
                traj.blowup = Some((t, t));
                break;
            }
            let (k1a, k1b) = self.rhs(m1, m2);
            let (k2a, k2b) = self.rhs(m1 + 0.5 * h * k1a, m2 + 0.5 * h * k1b);
            let (k3a, k3b) = self.rhs(m1 + 0.5 * h * k2a, m2 + 0.5 * h * k2b);
            let (k4a, k4b) = self.rhs(m1 + h * k3a, m2 + h * k3b);
            let prev_t = t;
            m1 += h / 6.0 * (k1a + 2.0 * k2a + 2.0 * k3a + k4a);
            m2 += h / 6.0 * (k1b + 2.0 * k2b + 2.0 * k3b + k4b);
            t += h;
            if !m1.is_finite() || !m2.is_finite() || m1.abs().max(m2.abs()) >= BLOWUP_MAGNITUDE {
                traj.blowup = Some((prev_t, t));
                break;
            }
            traj.times.push(t);
            traj.m1.push(m1);
            traj.m2.push(m2);
        }
        Ok(traj)
    }
}

/// Time series of a scalar integration.
#[derive(Debug, Clone)]
pub struct ScalarTrajectory {
    pub times: Vec<f64>,
    pub m: Vec<f64>,
    pub blowup: Option<(f64, f64)>,
}

/// RK4 for ṁ = a(t)m² + b(t) with the same step policy as the pair.
pub fn integrate_scalar(
    coeff: impl Fn(f64) -> f64,
    forcing: impl Fn(f64) -> f64,
    m0: f64,
    dt: f64,
    horizon: f64,
) -> Result<ScalarTrajectory> {
    check_step_params(dt, horizon)?;
    let rhs = |t: f64, m: f64| coeff(t) * m * m + forcing(t);
    let mut m = m0;
    let mut t = 0.0;
    let mut traj = ScalarTrajectory { times: vec![0.0], m: vec![m0], blowup: None };
    while t < horizon {
        let remaining = horizon - t;
        if remaining < MIN_STEP {
            break; // landed on the horizon up to rounding
        }
        let stiffness = coeff(t).abs() * m.abs().max(1.0);
        let cap = if stiffness > 0.0 { 0.1 / stiffness } else { dt };
        let h = dt.min(cap).min(remaining);
        if h < MIN_STEP {
            traj.blowup = Some((t, t));
            break;
        }
        let k1 = rhs(t, m);
        let k2 = rhs(t + 0.5 * h, m + 0.5 * h * k1);
        let k3 = rhs(t + 0.5 * h, m + 0.5 * h * k2);
        let k4 = rhs(t + h, m + h * k3);
        let prev_t = t;
        m += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        t += h;
        if !m.is_finite() || m.abs() >= BLOWUP_MAGNITUDE {
            traj.blowup = Some((prev_t, t));
            break;
        }
        traj.times.push(t);
        traj.m.push(m);
    }
    Ok(traj)
}
