//! The change of variables `phi = id + u` and its inverse.

use crate::error::{Error, Result};
use crate::field::{Arity, Stencil, TimeField};
use crate::grid::{TorusGrid, MAX_DIM};

/// A point of R^d; entries beyond the grid dimension are ignored.
pub type Point = [f64; MAX_DIM];
pub type Matrix = [[f64; MAX_DIM]; MAX_DIM];

/// Largest admissible `sup |grad u|`.
pub const GRADIENT_BOUND: f64 = 0.5;

/// Operator 2-norm of the leading `d x d` block.
pub fn operator_norm(m: &Matrix, dim: usize) -> f64 {
    if dim == 1 {
        return m[0][0].abs();
    }
    // largest singular value from the eigenvalues of m^T m
    let (a, b, c, d) = (m[0][0], m[0][1], m[1][0], m[1][1]);
    let p = a * a + c * c;
    let q = a * b + c * d;
    let r = b * b + d * d;
    let tr = p + r;
    let disc = ((p - r) * (p - r) + 4.0 * q * q).sqrt();
    (0.5 * (tr + disc)).sqrt()
}

/// Largest operator norm of a matrix-valued time field over slices and grid.
pub fn sup_operator_norm(grad: &TimeField) -> f64 {
    let g = *grad.grid();
    let d = g.dim;
    let mut best: f64 = 0.0;
    for s in grad.slices() {
        for j in 0..g.len() {
            let mut m = [[0.0; MAX_DIM]; MAX_DIM];
            for r in 0..d {
                for c in 0..d {
                    m[r][c] = s.values(r * d + c)[j];
                }
            }
            best = best.max(operator_norm(&m, d));
        }
    }
    best
}

/// Pair `(phi, psi)` built from a solution `u` of the resolvent equation.
#[derive(Clone, Debug)]
pub struct ZvonkinMap {
    lambda: f64,
    u: TimeField,
    grad: TimeField,
    grad_sup: f64,
    tolerance: f64,
    max_iterations: usize,
}

impl ZvonkinMap {
    /// Fails with [`Error::GradientBound`] unless `sup |grad u| <= 1/2`.
    pub fn build(u: TimeField, lambda: f64) -> Result<Self> {
        if u.arity() != Arity::Vector {
            return Err(Error::mismatch("map needs a vector-valued u"));
        }
        if !(lambda >= 0.0) {
            return Err(Error::invalid("lambda must be nonnegative"));
        }
        let grad = u.map_slices(|s| s.gradient())?;
        let grad_sup = sup_operator_norm(&grad);
        if grad_sup > GRADIENT_BOUND {
            return Err(Error::GradientBound { observed: grad_sup, bound: GRADIENT_BOUND });
        }
        Ok(Self { lambda, u, grad, grad_sup, tolerance: 1e-10, max_iterations: 60 })
    }

    /// Identity map on `grid`.
    pub fn identity(grid: TorusGrid, lambda: f64) -> Self {
        let zero = crate::field::SpectralField::zeros(grid, Arity::Vector);
        Self::build(TimeField::constant_in_time(zero), lambda).expect("zero field is admissible")
    }

    pub fn with_tolerance(mut self, tolerance: f64, max_iterations: usize) -> Self {
        self.tolerance = tolerance;
        self.max_iterations = max_iterations;
        self
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn u(&self) -> &TimeField {
        &self.u
    }

    pub fn grad_u(&self) -> &TimeField {
        &self.grad
    }

    pub fn grad_sup(&self) -> f64 {
        self.grad_sup
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    pub fn grid(&self) -> &TorusGrid {
        self.u.grid()
    }

    pub fn dim(&self) -> usize {
        self.u.grid().dim
    }

    pub fn locate(&self, t: f64) -> Result<(usize, f64)> {
        self.u.locate(t)
    }

    #[inline]
    pub(crate) fn u_at(&self, loc: (usize, f64), x: &Point) -> Point {
        let st = Stencil::new(self.grid(), x);
        let mut out = [0.0; MAX_DIM];
        for (c, o) in out.iter_mut().enumerate().take(self.dim()) {
            *o = self.u.interp_at(c, loc, &st);
        }
        out
    }

    /// `grad u` at `x` with entry `(i, j) = d_i u_j`.
    #[inline]
    pub(crate) fn grad_at(&self, loc: (usize, f64), x: &Point) -> Matrix {
        let d = self.dim();
        let st = Stencil::new(self.grid(), x);
        let mut m = [[0.0; MAX_DIM]; MAX_DIM];
        for i in 0..d {
            for j in 0..d {
                m[i][j] = self.grad.interp_at(i * d + j, loc, &st);
            }
        }
        m
    }

    pub fn forward(&self, t: f64, x: &Point) -> Result<Point> {
        let loc = self.locate(t)?;
        Ok(self.forward_at(loc, x))
    }

    #[inline]
    pub fn forward_at(&self, loc: (usize, f64), x: &Point) -> Point {
        let u = self.u_at(loc, x);
        let mut y = *x;
        for a in 0..self.dim() {
            y[a] += u[a];
        }
        y
    }

    pub fn invert(&self, t: f64, y: &Point) -> Result<Point> {
        let loc = self.locate(t)?;
        self.invert_at(loc, t, y)
    }

    /// Fixed-point inversion `x <- y - u(t, x)` started at `x = y`.
    pub fn invert_at(&self, loc: (usize, f64), t: f64, y: &Point) -> Result<Point> {
        self.invert_from(loc, t, y, y)
    }

    /// Same iteration started from `guess`.
    pub fn invert_from(&self, loc: (usize, f64), t: f64, y: &Point, guess: &Point) -> Result<Point> {
        let d = self.dim();
        let mut x = *guess;
        let mut step = f64::INFINITY;
        for _ in 0..self.max_iterations {
            let u = self.u_at(loc, &x);
            step = 0.0;
            for a in 0..d {
                let next = y[a] - u[a];
                step = step.max((next - x[a]).abs());
                x[a] = next;
            }
            if step <= self.tolerance {
                return Ok(x);
            }
        }
        Err(Error::InverseDiverged { t, residual: step, iterations: self.max_iterations })
    }

    /// Drift `lambda u(t, psi(t, y))` and diffusion `sigma` with
    /// `sigma_ij = delta_ij + d_j u_i` at `psi(t, y)`.
    pub fn y_coefficients(&self, t: f64, y: &Point) -> Result<(Point, Matrix)> {
        let loc = self.locate(t)?;
        let x = self.invert_at(loc, t, y)?;
        Ok(self.coefficients_at_preimage(loc, &x))
    }

    #[inline]
    pub(crate) fn coefficients_at_preimage(&self, loc: (usize, f64), x: &Point) -> (Point, Matrix) {
        let d = self.dim();
        let u = self.u_at(loc, x);
        let g = self.grad_at(loc, x);
        let mut drift = [0.0; MAX_DIM];
        let mut sigma = [[0.0; MAX_DIM]; MAX_DIM];
        for i in 0..d {
            drift[i] = self.lambda * u[i];
            for j in 0..d {
                sigma[i][j] = g[j][i] + if i == j { 1.0 } else { 0.0 };
            }
        }
        (drift, sigma)
    }

    /// Jacobian of `psi` at `y`, the inverse of the Jacobian of `phi` at `psi(t, y)`.
    pub fn inverse_jacobian(&self, t: f64, y: &Point) -> Result<Matrix> {
        let (_, s) = self.y_coefficients(t, y)?;
        let mut out = [[0.0; MAX_DIM]; MAX_DIM];
        if self.dim() == 1 {
            out[0][0] = 1.0 / s[0][0];
        } else {
            let det = s[0][0] * s[1][1] - s[0][1] * s[1][0];
            out[0][0] = s[1][1] / det;
            out[0][1] = -s[0][1] / det;
            out[1][0] = -s[1][0] / det;
            out[1][1] = s[0][0] / det;
        }
        Ok(out)
    }

    /// Initial value of the transformed process, `phi(0, x0)`.
    pub fn pushforward_initial(&self, x0: &Point) -> Point {
        self.forward_at((0, 0.0), x0)
    }
}
