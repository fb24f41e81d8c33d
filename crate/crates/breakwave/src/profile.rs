//! Initial profiles u₀ with effective compact support and their slope
//! statistics.
//!
//! The breaking thresholds consume exactly four numbers from u₀: the slope
//! extrema inf u₀′ and sup u₀′, the profile values at the points ξ₁, ξ₂
//! where those extrema sit, and ‖u₀‖_{L¹}. Shapes:
//!
//! * `GaussianBump`  A·exp(−((x−c)/w)²); slope extrema at c ∓ w/√2 in closed
//!   form, sup u₀′ = (A/w)·√(2/e)
//! * `TanhFront`     −A·tanh(s(x−c))·exp(−((x−c)/w)²); a decaying front whose
//!   steepest descent sits at the center; extrema found by a dense 2¹⁶-point
//!   scan plus bisection on the sign changes of u₀″
//! * `RampBump`      compactly supported smoothstep ramp up / plateau / ramp
//!   down with *prescribed* min/max slope, handy for dialing in thresholds
//!
//! Profiles carry their truncated domain [−L, L) and grid size; construction
//! rejects shapes that have not decayed below 1e−12 at ±L.

use crate::grid::GridFunction;
use crate::{Error, Result};

/// How far a profile must have decayed at the domain edge.
pub const EDGE_TOL: f64 = 1e-12;

pub const DEFAULT_HALF_LENGTH: f64 = 20.0;
pub const DEFAULT_GRID_SIZE: usize = 2048;

/// Candidate slope extrema closer than this are reported as ambiguous.
const TIE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProfileShape {
    GaussianBump { amplitude: f64, width: f64, center: f64 },
    TanhFront { amplitude: f64, steepness: f64, center: f64, width: f64 },
    RampBump { height: f64, sup_slope: f64, inf_slope: f64, center: f64, plateau: f64 },
}

/// Slope statistics of u₀; everything the threshold formulas need.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileStats {
    pub inf_slope: f64,
    pub sup_slope: f64,
    /// Location of the slope minimum.
    pub xi1: f64,
    /// Location of the slope maximum.
    pub xi2: f64,
    pub u_at_xi1: f64,
    pub u_at_xi2: f64,
    pub l1_norm: f64,
    /// Set when the global slope extremum is not unique within tolerance
    /// (e.g. the zero profile); the leftmost candidate is reported.
    pub ambiguous: bool,
}

impl ProfileStats {
    /// u₀^m := min of u₀ over the two slope-extremum points.
    pub fn u_min(&self) -> f64 {
        self.u_at_xi1.min(self.u_at_xi2)
    }

    /// u₀^M := max of u₀ over the two slope-extremum points.
    pub fn u_max(&self) -> f64 {
        self.u_at_xi1.max(self.u_at_xi2)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Profile {
    shape: ProfileShape,
    half_length: f64,
    grid_size: usize,
}

fn smoothstep(t: f64) -> f64 {
    t * t * (3.0 - 2.0 * t)
}

/// d/dt smoothstep = 6t(1−t), peaking at 3/2.
fn smoothstep_d(t: f64) -> f64 {
    6.0 * t * (1.0 - t)
}

fn smoothstep_dd(t: f64) -> f64 {
    6.0 - 12.0 * t
}

impl Profile {
    pub fn new(shape: ProfileShape, half_length: f64, grid_size: usize) -> Result<Self> {
        if !grid_size.is_power_of_two() || grid_size < 2 {
            return Err(Error::NonPowerOfTwo { n: grid_size });
        }
        if !half_length.is_finite() || half_length <= 0.0 {
            return Err(Error::InvalidParam {
                name: "half_length",
                reason: format!("must be positive and finite, got {half_length}"),
            });
        }
        let bad = |name: &'static str, v: f64, want: &str| Error::InvalidParam {
            name,
            reason: format!("{want}, got {v}"),
        };
        match shape {
            ProfileShape::GaussianBump { amplitude, width, .. } => {
                if !amplitude.is_finite() {
                    return Err(bad("amplitude", amplitude, "must be finite"));
                }
                if !width.is_finite() || width <= 0.0 {
                    return Err(bad("width", width, "must be finite and > 0"));
                }
            }
            ProfileShape::TanhFront { amplitude, steepness, width, .. } => {
                if !amplitude.is_finite() {
                    return Err(bad("amplitude", amplitude, "must be finite"));
                }
                if !steepness.is_finite() || steepness <= 0.0 {
                    return Err(bad("steepness", steepness, "must be finite and > 0"));
                }
                if !width.is_finite() || width <= 0.0 {
                    return Err(bad("width", width, "must be finite and > 0"));
                }
            }
            ProfileShape::RampBump { height, sup_slope, inf_slope, center, plateau } => {
                if !height.is_finite() || height <= 0.0 {
                    return Err(bad("height", height, "must be finite and > 0"));
                }
                if !sup_slope.is_finite() || sup_slope <= 0.0 {
                    return Err(bad("sup_slope", sup_slope, "must be finite and > 0"));
                }
                if !inf_slope.is_finite() || inf_slope >= 0.0 {
                    return Err(bad("inf_slope", inf_slope, "must be finite and < 0"));
                }
                if !plateau.is_finite() || plateau < 0.0 {
                    return Err(bad("plateau", plateau, "must be finite and >= 0"));
                }
                let w = 1.5 * height / sup_slope + plateau + 1.5 * height / (-inf_slope);
                if center - w / 2.0 <= -half_length || center + w / 2.0 >= half_length {
                    return Err(Error::InvalidParam {
                        name: "support",
                        reason: format!(
                            "ramp support [{:.3}, {:.3}] exceeds domain [-{half_length}, {half_length}]",
                            center - w / 2.0,
                            center + w / 2.0
                        ),
                    });
                }
            }
        }
        let p = Self { shape, half_length, grid_size };
        let edge = p.eval(-half_length).abs().max(p.eval(half_length).abs());
        if edge >= EDGE_TOL {
            return Err(Error::InvalidParam {
                name: "half_length",
                reason: format!("|u0(+-L)| = {edge:e} has not decayed below {EDGE_TOL:e}"),
            });
        }
        Ok(p)
    }

    /// Shape on the default 2048-point [−20, 20) grid.
    pub fn with_defaults(shape: ProfileShape) -> Result<Self> {
        Self::new(shape, DEFAULT_HALF_LENGTH, DEFAULT_GRID_SIZE)
    }

    pub fn shape(&self) -> ProfileShape {
        self.shape
    }

    pub fn half_length(&self) -> f64 {
        self.half_length
    }

    pub fn grid_size(&self) -> usize {
        self.grid_size
    }

    /// Ramp geometry (support start, up width, plateau, down width).
    fn ramp_geometry(height: f64, sup: f64, inf: f64, center: f64, plateau: f64) -> (f64, f64, f64, f64) {
        let w_up = 1.5 * height / sup;
        let w_down = 1.5 * height / (-inf);
        let total = w_up + plateau + w_down;
        (center - total / 2.0, w_up, plateau, w_down)
    }

    /// u₀(x).
    pub fn eval(&self, x: f64) -> f64 {
        match self.shape {
            ProfileShape::GaussianBump { amplitude, width, center } => {
                let s = (x - center) / width;
                amplitude * (-s * s).exp()
            }
            ProfileShape::TanhFront { amplitude, steepness, center, width } => {
                let d = x - center;
                let g = (-(d / width) * (d / width)).exp();
                -amplitude * (steepness * d).tanh() * g
            }
            ProfileShape::RampBump { height, sup_slope, inf_slope, center, plateau } => {
                let (a, w_up, p, w_down) = Self::ramp_geometry(height, sup_slope, inf_slope, center, plateau);
                if x <= a || x >= a + w_up + p + w_down {
                    0.0
                } else if x < a + w_up {
                    height * smoothstep((x - a) / w_up)
                } else if x <= a + w_up + p {
                    height
                } else {
                    height * smoothstep((a + w_up + p + w_down - x) / w_down)
                }
            }
        }
    }

    /// u₀′(x), from the closed form.
    pub fn deriv(&self, x: f64) -> f64 {
        match self.shape {
            ProfileShape::GaussianBump { amplitude, width, center } => {
                let s = (x - center) / width;
                -2.0 * amplitude * s * (-s * s).exp() / width
            }
            ProfileShape::TanhFront { amplitude, steepness, center, width } => {
                let d = x - center;
                let t = (steepness * d).tanh();
                let g = (-(d / width) * (d / width)).exp();
                -amplitude * g * (steepness * (1.0 - t * t) - 2.0 * t * d / (width * width))
            }
            ProfileShape::RampBump { height, sup_slope, inf_slope, center, plateau } => {
                let (a, w_up, p, w_down) = Self::ramp_geometry(height, sup_slope, inf_slope, center, plateau);
                if x <= a || x >= a + w_up + p + w_down {
                    0.0
                } else if x < a + w_up {
                    height * smoothstep_d((x - a) / w_up) / w_up
                } else if x <= a + w_up + p {
                    0.0
                } else {
                    -height * smoothstep_d((a + w_up + p + w_down - x) / w_down) / w_down
                }
            }
        }
    }

    /// u₀″(x); what the extremum bisection brackets.
    pub fn second_deriv(&self, x: f64) -> f64 {
        match self.shape {
            ProfileShape::GaussianBump { amplitude, width, center } => {
                let s = (x - center) / width;
                amplitude * (4.0 * s * s - 2.0) * (-s * s).exp() / (width * width)
            }
            ProfileShape::TanhFront { amplitude, steepness, center, width } => {
                let d = x - center;
                let t = (steepness * d).tanh();
                let sech2 = 1.0 - t * t;
                let g = (-(d / width) * (d / width)).exp();
                let w2 = width * width;
                // (τg)'' with τ = tanh(s·d): τ″g + 2τ′g′ + τg″
                let term = -2.0 * steepness * steepness * t * sech2
                    + 2.0 * steepness * sech2 * (-2.0 * d / w2)
                    + t * (4.0 * d * d / (w2 * w2) - 2.0 / w2);
                -amplitude * g * term
            }
            ProfileShape::RampBump { height, sup_slope, inf_slope, center, plateau } => {
                let (a, w_up, p, w_down) = Self::ramp_geometry(height, sup_slope, inf_slope, center, plateau);
                if x <= a || x >= a + w_up + p + w_down {
                    0.0
                } else if x < a + w_up {
                    height * smoothstep_dd((x - a) / w_up) / (w_up * w_up)
                } else if x <= a + w_up + p {
                    0.0
                } else {
                    height * smoothstep_dd((a + w_up + p + w_down - x) / w_down) / (w_down * w_down)
                }
            }
        }
    }

    /// Sample u₀ on the profile's grid.
    pub fn sample(&self) -> Result<GridFunction> {
        GridFunction::from_fn(self.grid_size, self.half_length, |x| self.eval(x))
    }

    /// Slope extrema, their locations, profile values there, and ‖u₀‖_{L¹}.
    /// Closed forms where the shape admits them, scan + bisection otherwise.
    pub fn stats(&self) -> ProfileStats {
        match self.shape {
            ProfileShape::GaussianBump { amplitude, width, center } => {
                if amplitude == 0.0 {
                    return ProfileStats {
                        inf_slope: 0.0,
                        sup_slope: 0.0,
                        xi1: -self.half_length,
                        xi2: -self.half_length,
                        u_at_xi1: 0.0,
                        u_at_xi2: 0.0,
                        l1_norm: 0.0,
                        ambiguous: true,
                    };
                }
                let peak = (2.0_f64 / std::f64::consts::E).sqrt() * amplitude.abs() / width;
                let off = width / std::f64::consts::SQRT_2;
                // slope minimum on the downhill side of the bump
                let (xi1, xi2) = if amplitude > 0.0 {
                    (center + off, center - off)
                } else {
                    (center - off, center + off)
                };
                let u_ext = amplitude * (-0.5_f64).exp();
                ProfileStats {
                    inf_slope: -peak,
                    sup_slope: peak,
                    xi1,
                    xi2,
                    u_at_xi1: u_ext,
                    u_at_xi2: u_ext,
                    l1_norm: amplitude.abs() * width * std::f64::consts::PI.sqrt(),
                    ambiguous: false,
                }
            }
            ProfileShape::RampBump { height, sup_slope, inf_slope, center, plateau } => {
                let (a, w_up, p, w_down) = Self::ramp_geometry(height, sup_slope, inf_slope, center, plateau);
                ProfileStats {
                    inf_slope,
                    sup_slope,
                    xi1: a + w_up + p + w_down / 2.0,
                    xi2: a + w_up / 2.0,
                    u_at_xi1: height / 2.0,
                    u_at_xi2: height / 2.0,
                    l1_norm: height * (w_up / 2.0 + p + w_down / 2.0),
                    ambiguous: false,
                }
            }
            ProfileShape::TanhFront { amplitude, center, .. } => {
                if amplitude == 0.0 {
                    return ProfileStats {
                        inf_slope: 0.0,
                        sup_slope: 0.0,
                        xi1: -self.half_length,
                        xi2: -self.half_length,
                        u_at_xi1: 0.0,
                        u_at_xi2: 0.0,
                        l1_norm: 0.0,
                        ambiguous: true,
                    };
                }
                let (inf_slope, sup_slope, xi1, xi2, ambiguous) = self.scanned_slope_extrema();
                // |u₀| is smooth away from its single zero at the center
                let l = self.half_length;
                let f = |x: f64| self.eval(x).abs();
                let l1 = adaptive_simpson(&f, -l, center, 5e-11) + adaptive_simpson(&f, center, l, 5e-11);
                ProfileStats {
                    inf_slope,
                    sup_slope,
                    xi1,
                    xi2,
                    u_at_xi1: self.eval(xi1),
                    u_at_xi2: self.eval(xi2),
                    l1_norm: l1,
                    ambiguous,
                }
            }
        }
    }

    /// Dense 2¹⁶-point scan of u₀′ over [−L, L], refining each u₀″ sign
    /// change by bisection; returns (inf, sup, ξ1, ξ2, ambiguous).
    fn scanned_slope_extrema(&self) -> (f64, f64, f64, f64, bool) {
        let l = self.half_length;
        let n = 1 << 16;
        let h = 2.0 * l / n as f64;

        let mut candidates: Vec<f64> = vec![-l, l];
        let mut prev_x = -l;
        let mut prev_dd = self.second_deriv(prev_x);
        let mut flat = true;
        for i in 1..=n {
            let x = -l + i as f64 * h;
            let dd = self.second_deriv(x);
            if self.deriv(x).abs() > 1e-14 {
                flat = false;
            }
            if prev_dd == 0.0 {
                candidates.push(prev_x);
            } else if prev_dd * dd < 0.0 {
                candidates.push(bisect(|x| self.second_deriv(x), prev_x, x));
            }
            prev_x = x;
            prev_dd = dd;
        }
        if flat {
            return (0.0, 0.0, -l, -l, true);
        }

        let mut min_val = f64::INFINITY;
        let mut max_val = f64::NEG_INFINITY;
        for &c in &candidates {
            let v = self.deriv(c);
            min_val = min_val.min(v);
            max_val = max_val.max(v);
        }
        let near = |v: f64, target: f64| (v - target).abs() <= TIE_TOL * target.abs().max(1.0);
        let leftmost = |target: f64| -> (f64, usize) {
            let mut hits: Vec<f64> = candidates
                .iter()
                .copied()
                .filter(|&c| near(self.deriv(c), target))
                .collect();
            hits.sort_by(|a, b| a.partial_cmp(b).unwrap());
            hits.dedup_by(|a, b| (*a - *b).abs() < 1e-6);
            (hits[0], hits.len())
        };
        let (xi1, n1) = leftmost(min_val);
        let (xi2, n2) = leftmost(max_val);
        (min_val, max_val, xi1, xi2, n1 > 1 || n2 > 1)
    }
}

/// Bisection on a sign change of f over [a, b].
fn bisect(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let mut fa = f(a);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if b - a < 1e-14 * m.abs().max(1.0) {
            return m;
        }
        let fm = f(m);
        if fa * fm <= 0.0 {
            b = m;
        } else {
            a = m;
            fa = fm;
        }
    }
    0.5 * (a + b)
}

/// Adaptive Simpson quadrature with the usual 15-fold error estimate.
fn adaptive_simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson(fa: f64, fm: f64, fb: f64, a: f64, b: f64) -> f64 {
        (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    }
    #[allow(clippy::too_many_arguments)]
    fn go(
        f: &impl Fn(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = simpson(fa, flm, fm, a, m);
        let right = simpson(fm, frm, fb, m, b);
        if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
            return left + right + (left + right - whole) / 15.0;
        }
        go(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
            + go(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
    }
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    go(f, a, b, fa, fm, fb, simpson(fa, fm, fb, a, b), tol, 48)
}
