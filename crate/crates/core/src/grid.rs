//! Periodic space-time grid.
//!
//! The spatial cell is `[-L/2, L/2)^d`, sampled at `x_j = -L/2 + j L / N`.
//! Fourier coefficients are taken relative to the cell's lower corner, so the
//! represented field is `f(x) = sum_m c_m exp(i k_m . (x + L/2))` with
//! `k_m = 2 pi m / L`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest supported spatial dimension.
pub const MAX_DIM: usize = 2;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TorusGrid {
    /// Spatial dimension, 1 or 2.
    pub dim: usize,
    /// Points per axis (power of two, at least 16).
    pub n: usize,
    /// Period of every axis.
    pub period: f64,
    /// Time horizon T.
    pub horizon: f64,
    /// Number of uniform time steps K.
    pub steps: usize,
}

impl TorusGrid {
    pub fn new(dim: usize, n: usize, period: f64, horizon: f64, steps: usize) -> Result<Self> {
        if !(1..=MAX_DIM).contains(&dim) {
            return Err(Error::invalid(format!("dimension must be 1 or 2, got {dim}")));
        }
        if n < 16 || !n.is_power_of_two() {
            return Err(Error::invalid(format!(
                "points per axis must be a power of two >= 16, got {n}"
            )));
        }
        if !(period > 0.0 && period.is_finite()) {
            return Err(Error::invalid(format!("period must be positive, got {period}")));
        }
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(Error::invalid(format!("horizon must be positive, got {horizon}")));
        }
        if steps == 0 {
            return Err(Error::invalid("time steps must be positive"));
        }
        Ok(Self { dim, n, period, horizon, steps })
    }

    /// Default one-dimensional grid on `[-pi, pi)` over `[0, 1]`.
    pub fn line(n: usize, steps: usize) -> Result<Self> {
        Self::new(1, n, 2.0 * std::f64::consts::PI, 1.0, steps)
    }

    /// Same spatial layout and horizon with a different resolution.
    pub fn refined(&self, n: usize, steps: usize) -> Result<Self> {
        Self::new(self.dim, n, self.period, self.horizon, steps)
    }

    /// Total number of spatial samples, `N^d`.
    pub fn len(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        self.period / self.n as f64
    }

    /// Volume of one grid cell, `h^d`.
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    pub fn volume(&self) -> f64 {
        self.period.powi(self.dim as i32)
    }

    pub fn origin(&self) -> f64 {
        -0.5 * self.period
    }

    pub fn dt(&self) -> f64 {
        self.horizon / self.steps as f64
    }

    pub fn time(&self, k: usize) -> f64 {
        if k == self.steps {
            self.horizon
        } else {
            k as f64 * self.dt()
        }
    }

    /// Signed mode number for an FFT-ordered index along one axis.
    pub fn mode(&self, i: usize) -> i64 {
        let n = self.n as i64;
        let i = i as i64;
        if i < n / 2 {
            i
        } else {
            i - n
        }
    }

    /// FFT-ordered index of a signed mode number along one axis.
    pub fn index_of_mode(&self, m: i64) -> usize {
        m.rem_euclid(self.n as i64) as usize
    }

    pub fn wavenumber(&self, i: usize) -> f64 {
        2.0 * std::f64::consts::PI * self.mode(i) as f64 / self.period
    }

    /// Splits a flat (row-major) index into per-axis indices.
    pub fn split(&self, flat: usize) -> [usize; MAX_DIM] {
        match self.dim {
            1 => [flat, 0],
            _ => [flat / self.n, flat % self.n],
        }
    }

    pub fn flat(&self, idx: [usize; MAX_DIM]) -> usize {
        match self.dim {
            1 => idx[0],
            _ => idx[0] * self.n + idx[1],
        }
    }

    /// Wave vector of a flat frequency index (unused axes are zero).
    pub fn wavevector(&self, flat: usize) -> [f64; MAX_DIM] {
        let idx = self.split(flat);
        let mut k = [0.0; MAX_DIM];
        for a in 0..self.dim {
            k[a] = self.wavenumber(idx[a]);
        }
        k
    }

    /// Signed mode numbers of a flat frequency index.
    pub fn modes(&self, flat: usize) -> [i64; MAX_DIM] {
        let idx = self.split(flat);
        let mut m = [0; MAX_DIM];
        for a in 0..self.dim {
            m[a] = self.mode(idx[a]);
        }
        m
    }

    pub fn k_squared(&self, flat: usize) -> f64 {
        let k = self.wavevector(flat);
        k.iter().map(|v| v * v).sum()
    }

    /// True when any axis of the flat index sits on the Nyquist mode `-N/2`.
    pub fn is_nyquist(&self, flat: usize) -> bool {
        let idx = self.split(flat);
        (0..self.dim).any(|a| idx[a] == self.n / 2)
    }

    /// Physical coordinates of a flat sample index.
    pub fn point(&self, flat: usize) -> [f64; MAX_DIM] {
        let idx = self.split(flat);
        let h = self.spacing();
        let mut x = [0.0; MAX_DIM];
        for a in 0..self.dim {
            x[a] = self.origin() + idx[a] as f64 * h;
        }
        x
    }

    /// Reduces a coordinate into the fundamental cell `[-L/2, L/2)`.
    pub fn wrap(&self, x: f64) -> f64 {
        if x >= self.origin() && x < -self.origin() {
            return x;
        }
        let shifted = (x - self.origin()).rem_euclid(self.period);
        shifted + self.origin()
    }

    /// Distance from a coordinate (already wrapped) to the nearest cell face.
    pub fn boundary_distance(&self, x: f64) -> f64 {
        let w = self.wrap(x);
        (w - self.origin()).min(-self.origin() - w)
    }
}
