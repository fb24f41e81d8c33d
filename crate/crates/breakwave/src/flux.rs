//! Flux catalogue F(u, ū) and its partial derivatives.
//!
//! Models (w stands for ū):
//!
//! * `TrafficArrhenius`      F = u(1−u)e^{−w}          F11 = −2e^{−w} < 0
//! * `WhithamLinear`         F = (3c₀/4h₀)u² + w       F11 = 3c₀/2h₀
//! * `KellerSegelLogistic`   F = u(1−u)w               F11 = −2w
//! * `Suspension`            F = u + wu                F11 = 0
//! * `TrafficConcaveConvex`  F = u(1−u)²e^{−w}         F11 = (6u−4)e^{−w},
//!   concave for u < 2/3, convex past it
//! * `RevertedWhithamDrift`  F = 2(1+u)^{3/2} − 2u + w, the conservative
//!   antiderivative form of the drift equation u_t + f(u)u_x + K∗u_x = 0
//!   with f(u) = 3√(1+u) − 2 (so F1 = f, defined for u > −1)
//!
//! Along a characteristic, the genuine-nonlinearity coefficient F11 evolves by
//!
//! ```text
//! Ḟ11 = (−F111·F2 + F1·F112)·ū_x + F112·ū_t,
//! ```
//!
//! the u_x terms cancelling; `f11_rate` evaluates that identity pointwise.

use crate::{Error, Result};

/// First and second partial derivatives of F(u, ū).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Partials {
    pub f1: f64,
    pub f2: f64,
    pub f11: f64,
    pub f12: f64,
    pub f22: f64,
}

/// Local drift supplied as closed forms; the extension point for custom
/// f(u) beyond the built-in square-root drift.
pub trait Drift {
    fn value(&self, u: f64) -> f64;
    fn slope(&self, u: f64) -> f64;
    fn curvature(&self, u: f64) -> f64;
    /// Lower edge of the admissible state space, if any.
    fn floor(&self) -> f64 {
        f64::NEG_INFINITY
    }
}

/// f(u) = 3√(1+u) − 2, f'(u) = (3/2)(1+u)^{−1/2}, f''(u) = −(3/4)(1+u)^{−3/2}.
#[derive(Debug, Clone, Copy, Default)]
pub struct SqrtDrift;

impl Drift for SqrtDrift {
    fn value(&self, u: f64) -> f64 {
        3.0 * (1.0 + u).sqrt() - 2.0
    }
    fn slope(&self, u: f64) -> f64 {
        1.5 / (1.0 + u).sqrt()
    }
    fn curvature(&self, u: f64) -> f64 {
        -0.75 / (1.0 + u).powf(1.5)
    }
    fn floor(&self) -> f64 {
        -1.0
    }
}

/// Flux models from the catalogue above.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FluxModel {
    TrafficArrhenius,
    WhithamLinear { c0: f64, h0: f64 },
    KellerSegelLogistic,
    Suspension,
    TrafficConcaveConvex,
    RevertedWhithamDrift,
}

impl FluxModel {
    pub fn name(&self) -> &'static str {
        match self {
            FluxModel::TrafficArrhenius => "TrafficArrhenius",
            FluxModel::WhithamLinear { .. } => "WhithamLinear",
            FluxModel::KellerSegelLogistic => "KellerSegelLogistic",
            FluxModel::Suspension => "Suspension",
            FluxModel::TrafficConcaveConvex => "TrafficConcaveConvex",
            FluxModel::RevertedWhithamDrift => "RevertedWhithamDrift",
        }
    }

    /// Lower state-space edge (−1 for the drift form).
    pub fn domain_floor(&self) -> f64 {
        match self {
            FluxModel::RevertedWhithamDrift => SqrtDrift.floor(),
            _ => f64::NEG_INFINITY,
        }
    }

    fn check_domain(&self, u: f64) -> Result<()> {
        if u <= self.domain_floor() {
            return Err(Error::DriftDomain { u, at: String::new() });
        }
        Ok(())
    }

    /// F(u, ū).
    pub fn eval(&self, u: f64, ubar: f64) -> Result<f64> {
        self.check_domain(u)?;
        Ok(match *self {
            FluxModel::TrafficArrhenius => u * (1.0 - u) * (-ubar).exp(),
            FluxModel::WhithamLinear { c0, h0 } => 0.75 * c0 / h0 * u * u + ubar,
            FluxModel::KellerSegelLogistic => u * (1.0 - u) * ubar,
            FluxModel::Suspension => u + ubar * u,
            FluxModel::TrafficConcaveConvex => u * (1.0 - u) * (1.0 - u) * (-ubar).exp(),
            FluxModel::RevertedWhithamDrift => 2.0 * (1.0 + u).powf(1.5) - 2.0 * u + ubar,
        })
    }

    /// First and second partials at (u, ū).
    pub fn partials(&self, u: f64, ubar: f64) -> Result<Partials> {
        self.check_domain(u)?;
        Ok(match *self {
            FluxModel::TrafficArrhenius => {
                let e = (-ubar).exp();
                Partials {
                    f1: (1.0 - 2.0 * u) * e,
                    f2: -u * (1.0 - u) * e,
                    f11: -2.0 * e,
                    f12: -(1.0 - 2.0 * u) * e,
                    f22: u * (1.0 - u) * e,
                }
            }
            FluxModel::WhithamLinear { c0, h0 } => {
                let q = 1.5 * c0 / h0;
                Partials { f1: q * u, f2: 1.0, f11: q, f12: 0.0, f22: 0.0 }
            }
            FluxModel::KellerSegelLogistic => Partials {
                f1: (1.0 - 2.0 * u) * ubar,
                f2: u * (1.0 - u),
                f11: -2.0 * ubar,
                f12: 1.0 - 2.0 * u,
                f22: 0.0,
            },
            FluxModel::Suspension => Partials {
                f1: 1.0 + ubar,
                f2: u,
                f11: 0.0,
                f12: 1.0,
                f22: 0.0,
            },
            FluxModel::TrafficConcaveConvex => {
                let e = (-ubar).exp();
                let g = u * (1.0 - u) * (1.0 - u);
                let g1 = (1.0 - u) * (1.0 - 3.0 * u);
                Partials {
                    f1: g1 * e,
                    f2: -g * e,
                    f11: (6.0 * u - 4.0) * e,
                    f12: -g1 * e,
                    f22: g * e,
                }
            }
            FluxModel::RevertedWhithamDrift => {
                let d = SqrtDrift;
                Partials {
                    f1: d.value(u),
                    f2: 1.0,
                    f11: d.slope(u),
                    f12: 0.0,
                    f22: 0.0,
                }
            }
        })
    }

    /// Third partials (F111, F112); closed forms exist for the whole catalogue.
    pub fn third_partials(&self, u: f64, ubar: f64) -> Result<(f64, f64)> {
        self.check_domain(u)?;
        Ok(match *self {
            FluxModel::TrafficArrhenius => (0.0, 2.0 * (-ubar).exp()),
            FluxModel::WhithamLinear { .. } => (0.0, 0.0),
            FluxModel::KellerSegelLogistic => (0.0, -2.0),
            FluxModel::Suspension => (0.0, 0.0),
            FluxModel::TrafficConcaveConvex => {
                let e = (-ubar).exp();
                (6.0 * e, (4.0 - 6.0 * u) * e)
            }
            FluxModel::RevertedWhithamDrift => (SqrtDrift.curvature(u), 0.0),
        })
    }

    /// Ḟ11 along a characteristic via the transport identity; needs the
    /// companion fields ū_x and ū_t at the same point.
    pub fn f11_rate(&self, u: f64, ubar: f64, ubar_x: f64, ubar_t: f64) -> Result<f64> {
        let p = self.partials(u, ubar)?;
        let (f111, f112) = self.third_partials(u, ubar)?;
        Ok((-f111 * p.f2 + p.f1 * f112) * ubar_x + f112 * ubar_t)
    }

    /// Local drift decomposition (f, f', f'') for drift-form models.
    pub fn drift(&self, u: f64) -> Result<(f64, f64, f64)> {
        match self {
            FluxModel::RevertedWhithamDrift => {
                self.check_domain(u)?;
                let d = SqrtDrift;
                Ok((d.value(u), d.slope(u), d.curvature(u)))
            }
            _ => Err(Error::NotDriftForm { model: self.name() }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const ALL: [FluxModel; 6] = [
        FluxModel::TrafficArrhenius,
        FluxModel::WhithamLinear { c0: 2.0, h0: 1.5 },
        FluxModel::KellerSegelLogistic,
        FluxModel::Suspension,
        FluxModel::TrafficConcaveConvex,
        FluxModel::RevertedWhithamDrift,
    ];

    #[test]
    fn traffic_flux_vanishes_at_jam_and_vacuum() {
        let m = FluxModel::TrafficArrhenius;
        for ubar in [-1.0, 0.0, 2.5] {
            assert_eq!(m.eval(0.0, ubar).unwrap(), 0.0);
            assert_eq!(m.eval(1.0, ubar).unwrap(), 0.0);
        }
        assert_relative_eq!(m.partials(0.3, 0.0).unwrap().f11, -2.0, epsilon = 1e-15);
    }

    #[test]
    fn keller_segel_spot_values() {
        let m = FluxModel::KellerSegelLogistic;
        assert_relative_eq!(m.eval(0.5, 1.0).unwrap(), 0.25, epsilon = 1e-15);
        // F11 = −2ū vanishes with the convolution
        assert_eq!(m.partials(0.7, 0.0).unwrap().f11, 0.0);
    }

    #[test]
    fn concave_convex_switches_at_two_thirds() {
        let m = FluxModel::TrafficConcaveConvex;
        let f11 = |u: f64| m.partials(u, 0.4).unwrap().f11;
        assert!(f11(0.5) < 0.0);
        assert!(f11(2.0 / 3.0).abs() < 1e-15);
        assert!(f11(0.8) > 0.0);
    }

    #[test]
    fn sqrt_drift_spot_values() {
        let m = FluxModel::RevertedWhithamDrift;
        let (f, fp, fpp) = m.drift(0.0).unwrap();
        assert_relative_eq!(f, 1.0, epsilon = 1e-15);
        assert_relative_eq!(fp, 1.5, epsilon = 1e-15);
        assert_relative_eq!(fpp, -0.75, epsilon = 1e-15);
        let (f, fp, fpp) = m.drift(3.0).unwrap();
        assert_relative_eq!(f, 4.0, epsilon = 1e-15);
        assert_relative_eq!(fp, 0.75, epsilon = 1e-15);
        assert_relative_eq!(fpp, -3.0 / 32.0, epsilon = 1e-15);
        // F1 is the drift itself
        assert_relative_eq!(m.partials(0.0, 9.9).unwrap().f1, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn drift_domain_is_guarded() {
        let m = FluxModel::RevertedWhithamDrift;
        assert!(matches!(m.eval(-1.0, 0.0), Err(Error::DriftDomain { .. })));
        assert!(matches!(m.drift(-1.5), Err(Error::DriftDomain { .. })));
        assert!(matches!(
            FluxModel::TrafficArrhenius.drift(0.0),
            Err(Error::NotDriftForm { .. })
        ));
    }

    #[test]
    fn partials_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0001);
        for model in ALL {
            for _ in 0..100 {
                let u = if matches!(model, FluxModel::RevertedWhithamDrift) {
                    rng.gen_range(-0.9..3.0)
                } else {
                    rng.gen_range(-2.0..2.0)
                };
                let w = rng.gen_range(-2.0..2.0);
                let d = 1e-5;
                // second differences divide by d², so they need a larger step
                // to stay above rounding noise
                let d2 = 1e-4;
                let f = |u: f64, w: f64| model.eval(u, w).unwrap();
                let p = model.partials(u, w).unwrap();
                let fd1 = (f(u + d, w) - f(u - d, w)) / (2.0 * d);
                let fd2 = (f(u, w + d) - f(u, w - d)) / (2.0 * d);
                let fd11 = (f(u + d2, w) - 2.0 * f(u, w) + f(u - d2, w)) / (d2 * d2);
                let fd22 = (f(u, w + d2) - 2.0 * f(u, w) + f(u, w - d2)) / (d2 * d2);
                let fd12 = (f(u + d2, w + d2) - f(u + d2, w - d2) - f(u - d2, w + d2)
                    + f(u - d2, w - d2))
                    / (4.0 * d2 * d2);
                let tol = |v: f64| 1e-5 * v.abs().max(1.0);
                assert!((p.f1 - fd1).abs() < tol(p.f1), "{model:?} F1 at ({u},{w})");
                assert!((p.f2 - fd2).abs() < tol(p.f2), "{model:?} F2 at ({u},{w})");
                assert!((p.f11 - fd11).abs() < tol(p.f11), "{model:?} F11 at ({u},{w})");
                assert!((p.f12 - fd12).abs() < tol(p.f12), "{model:?} F12 at ({u},{w})");
                assert!((p.f22 - fd22).abs() < tol(p.f22), "{model:?} F22 at ({u},{w})");
                // third partials against differences of the closed-form F11
                let (f111, f112) = model.third_partials(u, w).unwrap();
                let p11 = |u: f64, w: f64| model.partials(u, w).unwrap().f11;
                let fd111 = (p11(u + d, w) - p11(u - d, w)) / (2.0 * d);
                let fd112 = (p11(u, w + d) - p11(u, w - d)) / (2.0 * d);
                assert!((f111 - fd111).abs() < tol(f111), "{model:?} F111 at ({u},{w})");
                assert!((f112 - fd112).abs() < tol(f112), "{model:?} F112 at ({u},{w})");
            }
        }
    }

    #[test]
    fn f11_rate_vanishes_for_frozen_convolution() {
        for model in ALL {
            let u = if matches!(model, FluxModel::RevertedWhithamDrift) { 0.5 } else { -0.3 };
            assert_eq!(model.f11_rate(u, 0.8, 0.0, 0.0).unwrap(), 0.0, "{model:?}");
        }
    }

    #[test]
    fn keller_segel_f11_rate_spot_value() {
        // rate = (0 + F1·(−2))·ū_x − 2ū_t and F1(1/2, 1) = 0
        let m = FluxModel::KellerSegelLogistic;
        assert_relative_eq!(m.f11_rate(0.5, 1.0, 1.0, 0.0).unwrap(), 0.0, epsilon = 1e-15);
        // away from u = 1/2 the ū_x term survives: rate = −2(1−2u)ū·ū_x − 2ū_t
        let rate = m.f11_rate(0.25, 1.0, 1.0, 0.5).unwrap();
        assert_relative_eq!(rate, -2.0 * 0.5 * 1.0 - 2.0 * 0.5, epsilon = 1e-15);
    }

    #[test]
    fn drift_f11_rate_reduces_to_curvature_transport() {
        // drift form: Ḟ11 = −f''(u)·ū_x (F2 = 1, F112 = 0)
        let m = FluxModel::RevertedWhithamDrift;
        let u = 0.3;
        let ubar_x = -0.7;
        let expected = -SqrtDrift.curvature(u) * ubar_x;
        assert_relative_eq!(m.f11_rate(u, 2.0, ubar_x, 5.0).unwrap(), expected, epsilon = 1e-15);
    }

    #[test]
    fn custom_drift_plugs_into_the_trait() {
        struct Quadratic;
        impl Drift for Quadratic {
            fn value(&self, u: f64) -> f64 {
                0.5 * u * u
            }
            fn slope(&self, u: f64) -> f64 {
                u
            }
            fn curvature(&self, _: f64) -> f64 {
                1.0
            }
        }
        let d = Quadratic;
        assert_eq!(d.value(2.0), 2.0);
        assert_eq!(d.floor(), f64::NEG_INFINITY);
        // finite-difference sanity on the supplied closed forms
        let fd = (d.value(1.0 + 1e-6) - d.value(1.0 - 1e-6)) / 2e-6;
        assert_relative_eq!(d.slope(1.0), fd, epsilon = 1e-9);
    }
}
