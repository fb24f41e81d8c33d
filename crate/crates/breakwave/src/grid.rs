//! Uniform periodic grid on [-L, L).
//!
//! Nodes sit at x_i = -L + i*h with h = 2L/N and index i = 0..N-1; the
//! right endpoint +L is identified with -L. N is kept a power of two so
//! the transform-based convolution never needs padding tricks.

use crate::{Error, Result};

/// Scalar field sampled on the periodic grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    values: Vec<f64>,
    half_length: f64,
}

impl GridFunction {
    /// Wrap samples, enforcing a power-of-two length and finite entries.
    pub fn new(values: Vec<f64>, half_length: f64) -> Result<Self> {
        let n = values.len();
        if n < 2 || !n.is_power_of_two() {
            return Err(Error::NonPowerOfTwo { n });
        }
        if !half_length.is_finite() || half_length <= 0.0 {
            return Err(Error::InvalidParam {
                name: "half_length",
                reason: format!("must be positive and finite, got {half_length}"),
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { context: "grid values" });
        }
        Ok(Self { values, half_length })
    }

    /// All-zero field.
    pub fn zeros(n: usize, half_length: f64) -> Result<Self> {
        Self::new(vec![0.0; n], half_length)
    }

    /// Sample a closure at the nodes.
    pub fn from_fn(n: usize, half_length: f64, f: impl Fn(f64) -> f64) -> Result<Self> {
        let h = 2.0 * half_length / n as f64;
        let values = (0..n).map(|i| f(-half_length + i as f64 * h)).collect();
        Self::new(values, half_length)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn half_length(&self) -> f64 {
        self.half_length
    }

    /// Grid spacing h = 2L/N.
    pub fn spacing(&self) -> f64 {
        2.0 * self.half_length / self.len() as f64
    }

    /// Node abscissa x_i = -L + i*h.
    pub fn x(&self, i: usize) -> f64 {
        -self.half_length + i as f64 * self.spacing()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    /// Discrete mass h * sum(u_i): the trapezoid rule on a periodic grid.
    pub fn mass(&self) -> f64 {
        self.spacing() * self.values.iter().sum::<f64>()
    }

    /// Discrete L1 norm h * sum(|u_i|).
    pub fn l1_norm(&self) -> f64 {
        self.spacing() * self.values.iter().map(|v| v.abs()).sum::<f64>()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |a, v| a.max(v.abs()))
    }

    /// Second-order centered difference with periodic wrap.
    pub fn derivative(&self) -> GridFunction {
        let n = self.len();
        let two_h = 2.0 * self.spacing();
        let v = &self.values;
        let values = (0..n)
            .map(|i| (v[(i + 1) % n] - v[(i + n - 1) % n]) / two_h)
            .collect();
        GridFunction { values, half_length: self.half_length }
    }

    /// Linear interpolation at an arbitrary abscissa (periodic wrap).
    pub fn interp(&self, x: f64) -> f64 {
        let n = self.len();
        let h = self.spacing();
        let period = 2.0 * self.half_length;
        let mut s = (x + self.half_length).rem_euclid(period) / h;
        if !s.is_finite() {
            s = 0.0;
        }
        let i = (s.floor() as usize).min(n - 1);
        let frac = s - i as f64;
        let a = self.values[i];
        let b = self.values[(i + 1) % n];
        a + frac * (b - a)
    }
}
