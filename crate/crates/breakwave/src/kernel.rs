//! Convolution kernels K and the discrete operator ū = K∗u.
//!
//! The catalogue:
//!
//! * `WhithamExp`      K(r) = a·exp(−b|r|)           (a = π/4, b = π/2 for the
//!   exponential surrogate of the Whitham kernel)
//! * `LookAheadBox`    K(r) = K₀/γ on −γ ≤ r ≤ 0, else 0 (traffic look-ahead)
//! * `KellerSegelDeriv` K(r) = ∂r(e^{−|r|}/2)         (odd, jump at 0)
//! * `SuspensionBump`  K(r) = 2/(3(r²/4 − 1)) on |r| < 2, else 0, scaled as
//!   K_a(r) = a⁻¹K(r/a); negative, with a non-integrable edge singularity
//!
//! On the truncated periodic domain [−L, L) the operator is the discrete
//! periodic convolution with the 2L-periodized kernel,
//!
//! ```text
//! ū_i = h · Σ_j K_per(x_i − x_j) u_j,
//! ```
//!
//! so constants map to (≈) constants exactly uniformly and steady states
//! stay steady. Kernels that fail to decay below `DECAY_TOL` inside half a
//! period are rejected with the half-length that would be required.
//!
//! Two backends compute the same operator: an FFT route (circulant multiply)
//! and an O(N²) trapezoid-quadrature loop kept as its independent oracle.

use rustfft::{num_complex::Complex, FftPlanner};

use crate::grid::GridFunction;
use crate::{Error, Result};

/// Kernel mass outside the domain must fall below this for a run to be
/// accepted as a whole-line surrogate.
pub const DECAY_TOL: f64 = 1e-12;

/// Convolution kernel shapes. `ramp`/`smoothing` are optional C¹
/// mollification widths for the kernels whose derivative is otherwise
/// only distributional.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Kernel {
    /// a·exp(−b|r|); even, positive, mass 2a/b.
    WhithamExp { amplitude: f64, decay: f64 },
    /// K₀/γ on [−γ, 0]. With `ramp: Some(ε)` the edges get smoothstep ramps
    /// of width ε attached outside the support, preserving K(0) and sup K.
    LookAheadBox { k0: f64, gamma: f64, ramp: Option<f64> },
    /// ∂r(e^{−|r|}/2) = −sign(r)e^{−|r|}/2 with K(0) := 0 (odd principal
    /// value). With `smoothing: Some(ε)`, |r| is replaced by sqrt(r²+ε²).
    KellerSegelDeriv { smoothing: Option<f64> },
    /// a⁻¹·2/(3((r/a)²/4 − 1)) on |r| < 2a.
    SuspensionBump { scale: f64 },
}

/// C¹ smoothstep on [0,1]: s(0)=0, s(1)=1, s'(0)=s'(1)=0, max slope 3/2.
fn smoothstep(t: f64) -> f64 {
    t * t * (3.0 - 2.0 * t)
}

impl Kernel {
    /// Exponential surrogate with unit mass: K(r) = (π/4)·e^{−π|r|/2}.
    pub fn whitham() -> Self {
        Kernel::WhithamExp {
            amplitude: std::f64::consts::FRAC_PI_4,
            decay: std::f64::consts::FRAC_PI_2,
        }
    }

    /// Check shape parameters; called by the operators that need them sane.
    pub fn validate(&self) -> Result<()> {
        let bad = |name: &'static str, v: f64, want: &str| Error::InvalidParam {
            name,
            reason: format!("{want}, got {v}"),
        };
        match *self {
            Kernel::WhithamExp { amplitude, decay } => {
                if !amplitude.is_finite() || amplitude < 0.0 {
                    return Err(bad("amplitude", amplitude, "must be finite and >= 0"));
                }
                if !decay.is_finite() || decay <= 0.0 {
                    return Err(bad("decay", decay, "must be finite and > 0"));
                }
            }
            Kernel::LookAheadBox { k0, gamma, ramp } => {
                if !k0.is_finite() || k0 <= 0.0 {
                    return Err(bad("k0", k0, "must be finite and > 0"));
                }
                if !gamma.is_finite() || gamma <= 0.0 {
                    return Err(bad("gamma", gamma, "must be finite and > 0"));
                }
                if let Some(eps) = ramp {
                    if !eps.is_finite() || eps <= 0.0 || eps > gamma {
                        return Err(bad("ramp", eps, "must satisfy 0 < ramp <= gamma"));
                    }
                }
            }
            Kernel::KellerSegelDeriv { smoothing } => {
                if let Some(eps) = smoothing {
                    if !eps.is_finite() || eps <= 0.0 || eps > 1.0 {
                        return Err(bad("smoothing", eps, "must satisfy 0 < smoothing <= 1"));
                    }
                }
            }
            Kernel::SuspensionBump { scale } => {
                if !scale.is_finite() || scale <= 0.0 {
                    return Err(bad("scale", scale, "must be finite and > 0"));
                }
            }
        }
        Ok(())
    }

    /// Pointwise kernel value.
    pub fn eval(&self, r: f64) -> f64 {
        match *self {
            Kernel::WhithamExp { amplitude, decay } => amplitude * (-decay * r.abs()).exp(),
            Kernel::LookAheadBox { k0, gamma, ramp } => {
                let top = k0 / gamma;
                match ramp {
                    None => {
                        if (-gamma..=0.0).contains(&r) {
                            top
                        } else {
                            0.0
                        }
                    }
                    Some(eps) => {
                        if r < -gamma - eps || r > eps {
                            0.0
                        } else if r < -gamma {
                            top * smoothstep((r + gamma + eps) / eps)
                        } else if r <= 0.0 {
                            top
                        } else {
                            top * smoothstep((eps - r) / eps)
                        }
                    }
                }
            }
            Kernel::KellerSegelDeriv { smoothing } => match smoothing {
                None => {
                    if r == 0.0 {
                        0.0
                    } else {
                        -r.signum() * (-r.abs()).exp() / 2.0
                    }
                }
                Some(eps) => {
                    let rho = (r * r + eps * eps).sqrt();
                    -(r / rho) * (-rho).exp() / 2.0
                }
            },
            Kernel::SuspensionBump { scale } => {
                let s = r / scale;
                if s.abs() < 2.0 {
                    2.0 / (3.0 * (s * s / 4.0 - 1.0)) / scale
                } else {
                    0.0
                }
            }
        }
    }

    /// K(0), from the closed form.
    pub fn at_zero(&self) -> f64 {
        match *self {
            Kernel::WhithamExp { amplitude, .. } => amplitude,
            Kernel::LookAheadBox { k0, gamma, .. } => k0 / gamma,
            Kernel::KellerSegelDeriv { .. } => 0.0,
            Kernel::SuspensionBump { scale } => -2.0 / (3.0 * scale),
        }
    }

    /// Essential sup of |K'|, from the closed form. Errors for kernels whose
    /// derivative carries a singular part, pointing at the mollified variant.
    pub fn deriv_sup(&self) -> Result<f64> {
        match *self {
            Kernel::WhithamExp { amplitude, decay } => Ok(amplitude * decay),
            Kernel::LookAheadBox { k0, gamma, ramp } => match ramp {
                // smoothstep ramp of height K0/γ over width ε peaks at 3/2·height/ε
                Some(eps) => Ok(1.5 * k0 / (gamma * eps)),
                None => Err(Error::UnboundedDerivative {
                    kernel: "LookAheadBox",
                    hint: "; set `ramp` to use the C1 mollified box (default gamma/20)",
                }),
            },
            Kernel::KellerSegelDeriv { smoothing } => match smoothing {
                // max of |K_ε'| sits at r = 0 for ε <= 1
                Some(eps) => Ok((-eps).exp() / (2.0 * eps)),
                None => Err(Error::UnboundedDerivative {
                    kernel: "KellerSegelDeriv",
                    hint: "; set `smoothing` to bound the jump at r = 0",
                }),
            },
            Kernel::SuspensionBump { .. } => Err(Error::UnboundedDerivative {
                kernel: "SuspensionBump",
                hint: " (blows up at the support edge)",
            }),
        }
    }

    /// ∫|K| dr from the closed form; +∞ for the suspension kernel, whose
    /// edge singularity is not integrable.
    pub fn l1_norm(&self) -> f64 {
        match *self {
            Kernel::WhithamExp { amplitude, decay } => 2.0 * amplitude / decay,
            Kernel::LookAheadBox { k0, gamma, ramp } => match ramp {
                // each outside ramp adds (K0/γ)·ε/2 of mass
                Some(eps) => k0 * (1.0 + eps / gamma),
                None => k0,
            },
            Kernel::KellerSegelDeriv { smoothing } => match smoothing {
                // 2∫₀^∞ (r/ρ)e^{−ρ}/2 dr = ∫_ε^∞ e^{−ρ} dρ
                Some(eps) => (-eps).exp(),
                None => 1.0,
            },
            Kernel::SuspensionBump { .. } => f64::INFINITY,
        }
    }

    /// Smallest half-length outside of which |K| stays below `tol`.
    pub fn required_half_length(&self, tol: f64) -> f64 {
        match *self {
            Kernel::WhithamExp { amplitude, decay } => {
                if amplitude <= tol {
                    0.0
                } else {
                    (amplitude / tol).ln() / decay
                }
            }
            Kernel::LookAheadBox { gamma, ramp, .. } => gamma + ramp.unwrap_or(0.0),
            // |K(r)| <= e^{−|r|}/2 for both the exact and smoothed variants
            Kernel::KellerSegelDeriv { .. } => (1.0 / (2.0 * tol)).ln(),
            Kernel::SuspensionBump { scale } => 2.0 * scale,
        }
    }

    /// 2L-periodization Σ_k K(r + 2Lk) over |k| <= 2; enough images because
    /// check_domain already forces |K| below DECAY_TOL outside one half-period.
    fn periodized(&self, r: f64, period: f64) -> f64 {
        let mut acc = 0.0;
        for k in -2_i32..=2 {
            acc += self.eval(r + f64::from(k) * period);
        }
        acc
    }

    fn check_domain(&self, half_length: f64) -> Result<()> {
        self.validate()?;
        let needed = self.required_half_length(DECAY_TOL);
        if needed > half_length {
            return Err(Error::KernelDomain { needed, have: half_length, tol: DECAY_TOL });
        }
        Ok(())
    }

    /// Kernel samples in circular order: index m holds K_per at distance m·h
    /// (wrapped negative past N/2).
    fn circular_samples(&self, n: usize, h: f64) -> Vec<f64> {
        let period = n as f64 * h;
        (0..n)
            .map(|m| {
                let r = if m <= n / 2 {
                    m as f64 * h
                } else {
                    (m as f64 - n as f64) * h
                };
                self.periodized(r, period)
            })
            .collect()
    }

    /// ū = K∗u via the FFT backend (one forward/backward pair per call).
    pub fn convolve(&self, u: &GridFunction) -> Result<GridFunction> {
        self.check_domain(u.half_length())?;
        let n = u.len();
        let h = u.spacing();
        let kernel = self.circular_samples(n, h);

        let mut planner = FftPlanner::new();
        let fft = planner.plan_fft_forward(n);
        let ifft = planner.plan_fft_inverse(n);

        let mut a: Vec<Complex<f64>> =
            u.values().iter().map(|&v| Complex::new(v, 0.0)).collect();
        let mut b: Vec<Complex<f64>> =
            kernel.iter().map(|&v| Complex::new(v, 0.0)).collect();
        fft.process(&mut a);
        fft.process(&mut b);
        for (x, y) in a.iter_mut().zip(&b) {
            *x *= *y;
        }
        ifft.process(&mut a);

        let scale = h / n as f64; // quadrature weight; rustfft's inverse is unnormalized
        let values = a.iter().map(|c| c.re * scale).collect();
        GridFunction::new(values, u.half_length())
    }

    /// ū = K∗u by direct trapezoid quadrature of the periodized integral;
    /// O(N²), kept as the independent oracle for the FFT route.
    pub fn convolve_direct(&self, u: &GridFunction) -> Result<GridFunction> {
        self.check_domain(u.half_length())?;
        let n = u.len();
        let h = u.spacing();
        let period = 2.0 * u.half_length();
        let v = u.values();
        let mut out = vec![0.0; n];
        for (i, o) in out.iter_mut().enumerate() {
            let xi = u.x(i);
            let mut acc = 0.0;
            for (j, &uj) in v.iter().enumerate() {
                acc += self.periodized(xi - u.x(j), period) * uj;
            }
            *o = acc * h;
        }
        GridFunction::new(out, u.half_length())
    }

    /// K∗(u_x) with u_x the centered grid derivative. Commutes with taking
    /// ∂x of K∗u because both are circulant operators.
    pub fn convolve_deriv(&self, u: &GridFunction) -> Result<GridFunction> {
        self.convolve(&u.derivative())
    }

    /// Discrete L1 norm h·Σ|K_per| of the periodized samples. Finite even for
    /// the suspension kernel (nodes straddle the edge singularity), which is
    /// what the solver's time-step heuristic needs.
    pub fn periodized_l1(&self, half_length: f64, n: usize) -> f64 {
        let h = 2.0 * half_length / n as f64;
        self.circular_samples(n, h).iter().map(|v| v.abs()).sum::<f64>() * h
    }
}
