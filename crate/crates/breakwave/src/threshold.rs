//! Breaking thresholds for the drift equation u_t + f(u)u_x + K∗u_x = 0,
//! f(u) = 3√(1+u) − 2.
//!
//! For a comparison parameter μ in the admissible band
//! [−(3/2)/√(1+u₀^M), 0), breaking is guaranteed when
//!
//! ```text
//! inf u₀′ ≤ min( 2K(0)/μ − sup u₀′,  K(0)/μ + E(μ, κ, u₀^m, u₀^M) ),
//! ```
//!
//! with u₀^m, u₀^M the profile values at the slope extrema and
//!
//! ```text
//! κ = [ (4/3)μ√(1+u₀^m) + 2√(1+u₀^m)/√(1+u₀^M) + 1 ]⁻¹        (in (0, 1])
//! M = ‖K′‖_{L∞} ‖u₀‖_{L¹}
//! E = (1/μ) · (3/4)M/(κ(1+u₀^m))^{3/2} · (μ + (3/2)/√(1+u₀^M))⁻¹  (≤ 0)
//! ```
//!
//! and the comparison clocks
//!
//! ```text
//! M̃  = (3/4)M / (κ(1+u₀^m))^{3/2}
//! t*  = (μ + (3/2)/√(1+u₀^M)) / M̃
//! t** = (1/M)(1 + u₀^m − ((3/4)M/M̃)^{2/3})
//! ```
//!
//! satisfy 1/(m(0)μ) ≤ t* < t**, where m(0) = inf u₀′ − K(0)/μ; the pole
//! 1/(m(0)μ) is the reported upper bound on the breaking time. The κ choice
//! is exactly the one that makes the t*-vs-t** wedge work: for A, B > 0,
//! κ = (3/(4√A))/(B + (3/4)/√A) gives (3/4)/(κA)^{3/2} > B/(A − Aκ).
//!
//! The baseline condition inf u₀′ + sup u₀′ < −2K(0) (no drift-rate decay)
//! is kept alongside for comparison.

use serde::Serialize;

use crate::kernel::Kernel;
use crate::profile::ProfileStats;
use crate::{Error, Result};

/// Lower edge of the admissible μ band, −(3/2)/√(1+u_max).
pub fn band_floor(u_max: f64) -> f64 {
    -1.5 / (1.0 + u_max).sqrt()
}

fn check_band(mu: f64, u_max: f64, include_floor: bool) -> Result<()> {
    let lo = band_floor(u_max);
    let slack = 1e-12 * lo.abs();
    let below = if include_floor { mu < lo - slack } else { mu <= lo + slack };
    if below || mu >= 0.0 || !mu.is_finite() {
        return Err(Error::MuOutsideBand { mu, lo });
    }
    Ok(())
}

fn check_states(u_min: f64, u_max: f64) -> Result<()> {
    if u_min <= -1.0 {
        return Err(Error::InvalidParam {
            name: "u_min",
            reason: format!("profile value {u_min} at the slope extremum is at or below the drift floor -1"),
        });
    }
    if u_min > u_max {
        return Err(Error::InvalidParam {
            name: "u_min",
            reason: format!("u_min = {u_min} exceeds u_max = {u_max}"),
        });
    }
    Ok(())
}

/// M = ‖K′‖_{L∞}·‖u₀‖_{L¹}; errors for kernels without an essentially
/// bounded derivative (use their mollified variants).
pub fn kernel_mass_constant(kernel: &Kernel, stats: &ProfileStats) -> Result<f64> {
    Ok(kernel.deriv_sup()? * stats.l1_norm)
}

/// κ in wedge form: for A = 1+u₀^m and B = μ + (3/2)/√(1+u₀^M),
/// κ = (3/(4√A)) / (B + 3/(4√A)).  This is the unique weight making the
/// strict inequality (3/4)/(κA)^{3/2} > B/(A − Aκ) hold for all A, B > 0.
pub fn kappa_from_ab(a: f64, b: f64) -> f64 {
    let c = 0.75 / a.sqrt();
    c / (b + c)
}

/// κ(μ, u₀^m, u₀^M); equals 1 exactly at the band floor, 1/3 as μ → 0⁻
/// when u₀^m = u₀^M = 0.
pub fn kappa(mu: f64, u_min: f64, u_max: f64) -> Result<f64> {
    check_states(u_min, u_max)?;
    check_band(mu, u_max, true)?;
    let sm = (1.0 + u_min).sqrt();
    let denom = (4.0 / 3.0) * mu * sm + 2.0 * sm / (1.0 + u_max).sqrt() + 1.0;
    if denom <= 0.0 {
        return Err(Error::MuOutsideBand { mu, lo: band_floor(u_max) });
    }
    Ok(1.0 / denom)
}

/// E(μ, κ, u₀^m, u₀^M; M) ≤ 0; undefined at the band floor where
/// μ + (3/2)/√(1+u₀^M) vanishes.
pub fn balance_e(mu: f64, kappa: f64, u_min: f64, u_max: f64, m: f64) -> Result<f64> {
    check_states(u_min, u_max)?;
    check_band(mu, u_max, false)?;
    let b = mu + 1.5 / (1.0 + u_max).sqrt();
    if b <= 0.0 {
        return Err(Error::EndpointUndefined { mu });
    }
    Ok((0.75 * m / (kappa * (1.0 + u_min)).powf(1.5)) / (mu * b))
}

/// Comparison clocks (M̃, t*, t**); requires M > 0 (zero kernel mass means
/// no breaking is predicted via this bound).
pub fn comparison_times(
    mu: f64,
    kappa: f64,
    u_min: f64,
    u_max: f64,
    m: f64,
) -> Result<(f64, f64, f64)> {
    check_states(u_min, u_max)?;
    check_band(mu, u_max, false)?;
    if m == 0.0 {
        return Err(Error::TimesUndefined);
    }
    let b = mu + 1.5 / (1.0 + u_max).sqrt();
    if b <= 0.0 {
        return Err(Error::EndpointUndefined { mu });
    }
    let m_tilde = 0.75 * m / (kappa * (1.0 + u_min)).powf(1.5);
    let t_star = b / m_tilde;
    let t_double_star = (1.0 + u_min - (0.75 * m / m_tilde).powf(2.0 / 3.0)) / m;
    Ok((m_tilde, t_star, t_double_star))
}

/// Everything the threshold check produces, serialized as the report schema.
#[derive(Debug, Clone, Serialize)]
pub struct ThresholdReport {
    pub mu: f64,
    pub kappa: f64,
    #[serde(rename = "E")]
    pub e: f64,
    #[serde(rename = "M")]
    pub m: f64,
    #[serde(rename = "M_tilde")]
    pub m_tilde: Option<f64>,
    pub t_star: Option<f64>,
    pub t_double_star: Option<f64>,
    /// 2K(0)/μ − sup u₀′.
    pub rhs1: f64,
    /// K(0)/μ + E.
    pub rhs2: f64,
    pub inf_slope: f64,
    pub sup_slope: f64,
    pub satisfied: bool,
    /// 1/(m(0)μ), the breaking-time upper bound; absent when the condition
    /// fails or degenerates.
    pub blowup_bound: Option<f64>,
    /// m(0) = inf u₀′ − K(0)/μ (not part of the report schema).
    #[serde(skip)]
    pub m0: f64,
}

/// Evaluate the breaking condition at a fixed μ strictly inside the band.
pub fn check_theorem(stats: &ProfileStats, kernel: &Kernel, mu: f64) -> Result<ThresholdReport> {
    let (u_min, u_max) = (stats.u_min(), stats.u_max());
    check_states(u_min, u_max)?;
    check_band(mu, u_max, false)?;
    let k0 = kernel.at_zero();
    let m = kernel_mass_constant(kernel, stats)?;
    let kap = kappa(mu, u_min, u_max)?;
    let e = balance_e(mu, kap, u_min, u_max, m)?;
    let (m_tilde, t_star, t_double_star) = match comparison_times(mu, kap, u_min, u_max, m) {
        Ok((mt, ts, tss)) => (Some(mt), Some(ts), Some(tss)),
        Err(Error::TimesUndefined) => (None, None, None),
        Err(other) => return Err(other),
    };
    let rhs1 = 2.0 * k0 / mu - stats.sup_slope;
    let rhs2 = k0 / mu + e;
    let satisfied = stats.inf_slope <= rhs1.min(rhs2);
    let m0 = stats.inf_slope - k0 / mu;
    let blowup_bound = if satisfied && m0 < 0.0 { Some(1.0 / (m0 * mu)) } else { None };
    Ok(ThresholdReport {
        mu,
        kappa: kap,
        e,
        m,
        m_tilde,
        t_star,
        t_double_star,
        rhs1,
        rhs2,
        inf_slope: stats.inf_slope,
        sup_slope: stats.sup_slope,
        satisfied,
        blowup_bound,
        m0,
    })
}

/// Scan a uniform μ grid over the open band (relative endpoint margin 1e−3)
/// and return the report with the largest margin min(rhs1, rhs2) − inf u₀′.
pub fn optimize_mu(stats: &ProfileStats, kernel: &Kernel, grid_points: usize) -> Result<ThresholdReport> {
    if grid_points < 2 {
        return Err(Error::InvalidParam {
            name: "grid_points",
            reason: format!("need at least 2, got {grid_points}"),
        });
    }
    check_states(stats.u_min(), stats.u_max())?;
    let lo = band_floor(stats.u_max());
    let a = lo * (1.0 - 1e-3);
    let b = lo * 1e-3;
    let mut best: Option<ThresholdReport> = None;
    for k in 0..grid_points {
        let mu = a + (b - a) * k as f64 / (grid_points - 1) as f64;
        let report = check_theorem(stats, kernel, mu)?;
        let margin = report.rhs1.min(report.rhs2) - report.inf_slope;
        let better = match &best {
            None => true,
            Some(r) => margin > r.rhs1.min(r.rhs2) - r.inf_slope,
        };
        if better {
            best = Some(report);
        }
    }
    Ok(best.expect("grid_points >= 2"))
}

/// Baseline breaking condition inf u₀′ + sup u₀′ < −2K(0) and its margin.
#[derive(Debug, Clone, Serialize)]
pub struct Ce98Report {
    pub satisfied: bool,
    /// −2K(0) − (inf u₀′ + sup u₀′); positive iff satisfied.
    pub margin: f64,
}

pub fn ce98(stats: &ProfileStats, kernel: &Kernel) -> Ce98Report {
    let margin = -2.0 * kernel.at_zero() - (stats.inf_slope + stats.sup_slope);
    Ce98Report { satisfied: margin > 0.0, margin }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::{Profile, ProfileShape};
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn zero_stats() -> ProfileStats {
        Profile::with_defaults(ProfileShape::GaussianBump {
            amplitude: 0.0,
            width: 1.0,
            center: 0.0,
        })
        .unwrap()
        .stats()
    }

    fn steep_ramp() -> ProfileStats {
        Profile::with_defaults(ProfileShape::RampBump {
            height: 0.4,
            sup_slope: 0.2,
            inf_slope: -6.0,
            center: 0.0,
            plateau: 0.0,
        })
        .unwrap()
        .stats()
    }

    #[test]
    fn kappa_is_one_at_band_floor() {
        for u in [0.0, 0.5, 3.0] {
            let mu = band_floor(u);
            assert_relative_eq!(kappa(mu, u, u).unwrap(), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn wedge_form_agrees_with_the_band_form() {
        // κ(μ, u_m, u_M) is kappa_from_ab at A = 1+u_m, B = μ + 1.5/√(1+u_M)
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let u_min = rng.gen_range(-0.9..4.0);
            let u_max = u_min + rng.gen_range(0.0..3.0);
            let mu = band_floor(u_max) * rng.gen_range(0.01..0.999);
            let a = 1.0 + u_min;
            let b = mu + 1.5 / (1.0 + u_max).sqrt();
            assert_relative_eq!(
                kappa(mu, u_min, u_max).unwrap(),
                kappa_from_ab(a, b),
                epsilon = 1e-13,
                max_relative = 1e-13
            );
        }
        // spot: A = 1, B = 3/4 gives κ = 1/2 and wedge sides 2.1213… > 1.5
        let kap = kappa_from_ab(1.0, 0.75);
        assert_relative_eq!(kap, 0.5, epsilon = 1e-15);
        let lhs = 0.75 / (kap * 1.0).powf(1.5);
        assert_relative_eq!(lhs, 2.1213203435596424, epsilon = 1e-12);
        assert!(lhs > 0.75 / (1.0 - kap));
    }

    #[test]
    fn kappa_spot_values() {
        assert_relative_eq!(kappa(-0.75, 0.0, 0.0).unwrap(), 0.5, epsilon = 1e-14);
        // μ → 0⁻ limit is 1/3 for u_m = u_M = 0
        assert_relative_eq!(kappa(-1e-12, 0.0, 0.0).unwrap(), 1.0 / 3.0, epsilon = 1e-9);
        assert!(matches!(
            kappa(-2.0, 0.0, 0.0),
            Err(Error::MuOutsideBand { .. })
        ));
        assert!(kappa(0.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn balance_e_spot_value_and_sign() {
        let e = balance_e(-0.75, 0.5, 0.0, 0.0, 1.0).unwrap();
        assert_relative_eq!(e, -3.771236166328254, epsilon = 1e-12);
        assert_eq!(balance_e(-0.75, 0.5, 0.0, 0.0, 0.0).unwrap(), 0.0);
        // undefined exactly at the band floor
        assert!(matches!(
            balance_e(band_floor(0.0), 1.0, 0.0, 0.0, 1.0),
            Err(Error::MuOutsideBand { .. }) | Err(Error::EndpointUndefined { .. })
        ));
    }

    #[test]
    fn balance_e_monotone_in_extremal_states() {
        // increasing in u_min, decreasing in u_max over the working box
        let mu = -0.4;
        let m = 1.3;
        let mut prev = f64::NEG_INFINITY;
        for um in [-0.5, -0.2, 0.0, 0.4, 1.0] {
            let e = balance_e(mu, kappa(mu, um, 2.0).unwrap(), um, 2.0, m).unwrap();
            assert!(e > prev, "E not increasing in u_min at {um}");
            prev = e;
        }
        let mut prev = f64::INFINITY;
        for umax in [1.0, 2.0, 4.0, 8.0] {
            let e = balance_e(mu, kappa(mu, 0.5, umax).unwrap(), 0.5, umax, m).unwrap();
            assert!(e < prev, "E not decreasing in u_max at {umax}");
            prev = e;
        }
    }

    #[test]
    fn comparison_times_spot_values() {
        let (mt, ts, tss) = comparison_times(-0.75, 0.5, 0.0, 0.0, 1.0).unwrap();
        assert_relative_eq!(mt, 2.121320343559643, epsilon = 1e-12);
        assert_relative_eq!(ts, 0.3535533905932738, epsilon = 1e-12);
        assert_relative_eq!(tss, 0.5, epsilon = 1e-12);
        assert!(matches!(
            comparison_times(-0.75, 0.5, 0.0, 0.0, 0.0),
            Err(Error::TimesUndefined)
        ));
    }

    #[test]
    fn t_double_star_collapses_to_closed_form() {
        // ((3/4)M/M̃)^{2/3} = κ(1+u_m), so t** = (1+u_m)(1−κ)/M
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..500 {
            let u_min = rng.gen_range(-0.9..4.0);
            let u_max = u_min + rng.gen_range(0.0..4.0);
            let lo = band_floor(u_max);
            let mu = lo * rng.gen_range(0.05..0.95);
            let m = rng.gen_range(0.01..10.0);
            let kap = kappa(mu, u_min, u_max).unwrap();
            let (_, t_star, t_dd) = comparison_times(mu, kap, u_min, u_max, m).unwrap();
            let closed = (1.0 + u_min) * (1.0 - kap) / m;
            assert_relative_eq!(t_dd, closed, epsilon = 1e-10, max_relative = 1e-10);
            assert!(t_star < t_dd, "clock ordering violated: {t_star} vs {t_dd}");
        }
    }

    #[test]
    fn zero_profile_never_satisfies() {
        let stats = zero_stats();
        let report = check_theorem(&stats, &Kernel::whitham(), -0.75).unwrap();
        assert!(!report.satisfied);
        assert!(report.blowup_bound.is_none());
        assert!(report.t_star.is_none()); // M = 0: no clocks
        assert_eq!(report.e, 0.0);
    }

    #[test]
    fn symmetric_profiles_never_satisfy() {
        // inf + sup = 0 defeats rhs1 = 2K(0)/μ − sup for every admissible μ
        let stats = Profile::with_defaults(ProfileShape::GaussianBump {
            amplitude: 2.0,
            width: 1.0,
            center: 0.0,
        })
        .unwrap()
        .stats();
        let report = optimize_mu(&stats, &Kernel::whitham(), 64).unwrap();
        assert!(!report.satisfied);
    }

    #[test]
    fn steep_ramp_satisfies_and_orders_the_clocks() {
        let stats = steep_ramp();
        let report = optimize_mu(&stats, &Kernel::whitham(), 128).unwrap();
        assert!(report.satisfied, "report: {report:?}");
        let bound = report.blowup_bound.unwrap();
        let t_star = report.t_star.unwrap();
        let t_dd = report.t_double_star.unwrap();
        assert!(bound > 0.0);
        assert!(bound <= t_star + 1e-12, "pole {bound} vs t* {t_star}");
        assert!(t_star < t_dd);
        assert!(report.kappa > 0.0 && report.kappa <= 1.0);
        assert!(report.e <= 0.0);
    }

    #[test]
    fn optimizer_beats_or_matches_every_grid_point() {
        let stats = steep_ramp();
        let kernel = Kernel::whitham();
        let best = optimize_mu(&stats, &kernel, 64).unwrap();
        let best_margin = best.rhs1.min(best.rhs2) - best.inf_slope;
        let lo = band_floor(stats.u_max());
        for k in 0..64 {
            let mu = lo * (1.0 - 1e-3) + (lo * 1e-3 - lo * (1.0 - 1e-3)) * k as f64 / 63.0;
            let r = check_theorem(&stats, &kernel, mu).unwrap();
            assert!(r.rhs1.min(r.rhs2) - r.inf_slope <= best_margin + 1e-12);
        }
    }

    #[test]
    fn optimizer_margin_stable_under_grid_refinement() {
        let stats = steep_ramp();
        let kernel = Kernel::whitham();
        let coarse = optimize_mu(&stats, &kernel, 64).unwrap();
        let fine = optimize_mu(&stats, &kernel, 256).unwrap();
        let mc = coarse.rhs1.min(coarse.rhs2) - coarse.inf_slope;
        let mf = fine.rhs1.min(fine.rhs2) - fine.inf_slope;
        assert!((mf - mc).abs() <= 0.05 * mf.abs().max(1e-12), "{mc} vs {mf}");
    }

    #[test]
    fn ce98_spot_values() {
        let kernel = Kernel::whitham();
        let sym = Profile::with_defaults(ProfileShape::GaussianBump {
            amplitude: 3.0,
            width: 1.0,
            center: 0.0,
        })
        .unwrap()
        .stats();
        let r = ce98(&sym, &kernel);
        assert!(!r.satisfied); // inf + sup = 0 > −2K(0)
        assert_relative_eq!(r.margin, -std::f64::consts::FRAC_PI_2, epsilon = 1e-12);

        let ramp = Profile::with_defaults(ProfileShape::RampBump {
            height: 0.8,
            sup_slope: 0.05,
            inf_slope: -2.2,
            center: -2.0,
            plateau: 0.0,
        })
        .unwrap()
        .stats();
        let r = ce98(&ramp, &kernel);
        assert!(r.satisfied);
        assert_relative_eq!(r.margin, 2.15 - std::f64::consts::FRAC_PI_2, epsilon = 1e-12);
    }

    #[test]
    fn report_serializes_the_schema_keys() {
        let stats = steep_ramp();
        let report = optimize_mu(&stats, &Kernel::whitham(), 64).unwrap();
        let json = serde_json::to_value(&report).unwrap();
        let obj = json.as_object().unwrap();
        for key in [
            "mu", "kappa", "E", "M", "M_tilde", "t_star", "t_double_star", "rhs1", "rhs2",
            "inf_slope", "sup_slope", "satisfied", "blowup_bound",
        ] {
            assert!(obj.contains_key(key), "missing key {key}");
        }
        assert_eq!(obj.len(), 13, "unexpected extra keys: {obj:?}");
    }
}
