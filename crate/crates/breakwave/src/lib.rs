//! Numerical laboratory for wave breaking in nonlocal conservation laws
//!
//! ```text
//! u_t + ∂x F(u, ū) = 0,    ū = K∗u,
//! ```
//!
//! where K is an integrable convolution kernel. The crate has three legs:
//!
//! * analytic breaking thresholds for the drift form
//!   u_t + f(u)u_x + K∗u_x = 0 with f(u) = 3√(1+u) − 2
//!   (admissible-band optimization over the comparison parameter μ),
//! * Riccati comparison systems ṁ = g(t)m² + … whose finite-time poles
//!   bound the gradient blow-up time from above, and
//! * a conservative finite-volume solver (local Lax–Friedrichs flux,
//!   three-stage SSP Runge–Kutta) that tracks the extrema of u_x and
//!   corroborates the predicted breaking windows.
//!
//! Everything operates on a truncated periodic domain [−L, L) used as a
//! whole-line surrogate; profiles must effectively vanish at ±L and runs
//! are rejected if mass reaches the boundary.

pub mod error;
pub mod flux;
pub mod grid;
pub mod kernel;
pub mod profile;
pub mod riccati;
pub mod solver;
pub mod threshold;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
