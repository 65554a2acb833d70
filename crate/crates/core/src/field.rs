//! Band-limited fields on the periodic grid and their time-sampled families.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fft;
use crate::grid::{TorusGrid, MAX_DIM};

/// Shape of the value carried at each point.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Arity {
    Scalar,
    Vector,
    /// `d x d` matrix stored row-major; for gradients entry `(i, j)` is `d_i f_j`.
    Matrix,
}

impl Arity {
    pub fn components(self, dim: usize) -> usize {
        match self {
            Arity::Scalar => 1,
            Arity::Vector => dim,
            Arity::Matrix => dim * dim,
        }
    }
}

/// Off-grid evaluation method.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EvalMode {
    /// Periodic separable Catmull-Rom interpolation of the physical samples.
    Interp,
    /// Direct summation of the Fourier series.
    ExactFourier,
}

/// One time slice of a real field, stored as Fourier coefficients together
/// with the physical samples they reconstruct.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralField {
    grid: TorusGrid,
    arity: Arity,
    coeffs: Vec<Vec<Complex64>>,
    values: Vec<Vec<f64>>,
}

impl SpectralField {
    pub fn from_values(grid: TorusGrid, arity: Arity, values: Vec<Vec<f64>>) -> Result<Self> {
        check_components(&grid, arity, values.len())?;
        if values.iter().any(|v| v.len() != grid.len()) {
            return Err(Error::mismatch("sample count does not match grid"));
        }
        let coeffs = values
            .iter()
            .map(|v| fft::forward_real(v, grid.dim, grid.n))
            .collect();
        Ok(Self { grid, arity, coeffs, values })
    }

    /// Builds a field from coefficients, projecting onto real-valued fields.
    pub fn from_coeffs(grid: TorusGrid, arity: Arity, coeffs: Vec<Vec<Complex64>>) -> Result<Self> {
        check_components(&grid, arity, coeffs.len())?;
        if coeffs.iter().any(|c| c.len() != grid.len()) {
            return Err(Error::mismatch("coefficient count does not match grid"));
        }
        // real part of the represented field: average each mode with the
        // conjugate of its partner
        let coeffs: Vec<Vec<Complex64>> = coeffs
            .iter()
            .map(|c| {
                (0..grid.len())
                    .map(|m| {
                        let modes = grid.modes(m);
                        let mut idx = [0usize; MAX_DIM];
                        for a in 0..grid.dim {
                            idx[a] = grid.index_of_mode(-modes[a]);
                        }
                        0.5 * (c[m] + c[grid.flat(idx)].conj())
                    })
                    .collect()
            })
            .collect();
        Ok(Self::from_hermitian_coeffs(grid, arity, coeffs))
    }

    /// Builds a field from coefficients already known to be Hermitian.
    pub(crate) fn from_hermitian_coeffs(grid: TorusGrid, arity: Arity, coeffs: Vec<Vec<Complex64>>) -> Self {
        let values = coeffs
            .iter()
            .map(|c| fft::inverse_real(c, grid.dim, grid.n))
            .collect();
        Self { grid, arity, coeffs, values }
    }

    pub fn zeros(grid: TorusGrid, arity: Arity) -> Self {
        let nc = arity.components(grid.dim);
        Self {
            grid,
            arity,
            coeffs: vec![vec![Complex64::new(0.0, 0.0); grid.len()]; nc],
            values: vec![vec![0.0; grid.len()]; nc],
        }
    }

    pub fn constant(grid: TorusGrid, value: f64) -> Self {
        let mut coeffs = vec![Complex64::new(0.0, 0.0); grid.len()];
        coeffs[0] = Complex64::new(value, 0.0);
        Self {
            grid,
            arity: Arity::Scalar,
            coeffs: vec![coeffs],
            values: vec![vec![value; grid.len()]],
        }
    }

    /// Samples a scalar function at the grid points.
    pub fn from_fn(grid: TorusGrid, f: impl Fn(&[f64]) -> f64) -> Self {
        let values = (0..grid.len())
            .map(|j| f(&grid.point(j)[..grid.dim]))
            .collect();
        Self::from_values(grid, Arity::Scalar, vec![values]).expect("shape is consistent")
    }

    /// Stacks scalar fields into a vector or matrix field.
    pub fn from_components(parts: Vec<SpectralField>, arity: Arity) -> Result<Self> {
        let first = parts
            .first()
            .ok_or_else(|| Error::mismatch("no components given"))?;
        let grid = first.grid;
        check_components(&grid, arity, parts.len())?;
        let mut coeffs = Vec::with_capacity(parts.len());
        let mut values = Vec::with_capacity(parts.len());
        for p in parts {
            if p.grid != grid || p.arity != Arity::Scalar {
                return Err(Error::mismatch("components must be scalar fields on one grid"));
            }
            coeffs.extend(p.coeffs);
            values.extend(p.values);
        }
        Ok(Self { grid, arity, coeffs, values })
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    pub fn arity(&self) -> Arity {
        self.arity
    }

    pub fn num_components(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self, c: usize) -> &[Complex64] {
        &self.coeffs[c]
    }

    pub fn values(&self, c: usize) -> &[f64] {
        &self.values[c]
    }

    pub fn component(&self, c: usize) -> SpectralField {
        SpectralField {
            grid: self.grid,
            arity: Arity::Scalar,
            coeffs: vec![self.coeffs[c].clone()],
            values: vec![self.values[c].clone()],
        }
    }

    pub fn components(&self) -> Vec<SpectralField> {
        (0..self.num_components()).map(|c| self.component(c)).collect()
    }

    /// Applies a per-mode multiplier to every component.
    pub fn map_modes(&self, f: impl Fn(usize, Complex64) -> Complex64) -> SpectralField {
        let coeffs: Vec<Vec<Complex64>> = self
            .coeffs
            .iter()
            .map(|cs| cs.iter().enumerate().map(|(j, &c)| f(j, c)).collect())
            .collect();
        let values = coeffs
            .iter()
            .map(|c| fft::inverse_real(c, self.grid.dim, self.grid.n))
            .collect();
        SpectralField { grid: self.grid, arity: self.arity, coeffs, values }
    }

    /// Heat semigroup `exp(r Delta / 2)`.
    pub fn heat(&self, r: f64) -> Result<SpectralField> {
        if !(r >= 0.0) {
            return Err(Error::invalid(format!("heat semigroup needs r >= 0, got {r}")));
        }
        if r == 0.0 {
            return Ok(self.clone());
        }
        let grid = self.grid;
        Ok(self.map_modes(|j, c| {
            if j == 0 {
                c
            } else {
                c * (-0.5 * grid.k_squared(j) * r).exp()
            }
        }))
    }

    /// Convolution with the mollifier of index `n`, i.e. `heat(2 / n)`.
    pub fn mollify(&self, n: u32) -> Result<SpectralField> {
        if n == 0 {
            return Err(Error::invalid("mollification index must be >= 1"));
        }
        self.heat(2.0 / n as f64)
    }

    /// Spectral derivative along `axis` (0-based) of every component.
    /// Nyquist modes along the differentiated axis are dropped.
    pub fn derivative(&self, axis: usize) -> Result<SpectralField> {
        if axis >= self.grid.dim {
            return Err(Error::invalid(format!("axis {axis} out of range")));
        }
        let grid = self.grid;
        Ok(self.map_modes(|j, c| {
            let idx = grid.split(j);
            if idx[axis] == grid.n / 2 {
                Complex64::new(0.0, 0.0)
            } else {
                c * Complex64::new(0.0, grid.wavevector(j)[axis])
            }
        }))
    }

    /// Gradient of a scalar (vector result) or of a vector field (matrix
    /// result with entry `(i, j) = d_i f_j`).
    pub fn gradient(&self) -> Result<SpectralField> {
        let d = self.grid.dim;
        let arity = match self.arity {
            Arity::Scalar => Arity::Vector,
            Arity::Vector => Arity::Matrix,
            Arity::Matrix => return Err(Error::invalid("gradient of a matrix field")),
        };
        let parts: Vec<SpectralField> = (0..d)
            .map(|i| self.derivative(i))
            .collect::<Result<_>>()?;
        // entry (i, j) = d_i f_j
        let mut comps = Vec::with_capacity(d * self.num_components());
        for p in &parts {
            comps.extend(p.components());
        }
        SpectralField::from_components(comps, arity)
    }

    pub fn hessian(&self) -> Result<SpectralField> {
        if self.arity != Arity::Scalar {
            return Err(Error::invalid("hessian needs a scalar field"));
        }
        self.gradient()?.gradient()
    }

    pub fn laplacian(&self) -> SpectralField {
        let grid = self.grid;
        self.map_modes(|j, c| c * (-grid.k_squared(j)))
    }

    pub fn scaled(&self, a: f64) -> SpectralField {
        self.linear_combination(a, self, 0.0)
    }

    pub fn add(&self, other: &SpectralField) -> Result<SpectralField> {
        self.check_same(other)?;
        Ok(self.linear_combination(1.0, other, 1.0))
    }

    pub fn sub(&self, other: &SpectralField) -> Result<SpectralField> {
        self.check_same(other)?;
        Ok(self.linear_combination(1.0, other, -1.0))
    }

    /// `a * self + b * other`, no shape check.
    pub fn linear_combination(&self, a: f64, other: &SpectralField, b: f64) -> SpectralField {
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(x, y)| x.iter().zip(y).map(|(&p, &q)| p * a + q * b).collect())
            .collect();
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(x, y)| x.iter().zip(y).map(|(&p, &q)| a * p + b * q).collect())
            .collect();
        SpectralField { grid: self.grid, arity: self.arity, coeffs, values }
    }

    pub fn check_same(&self, other: &SpectralField) -> Result<()> {
        if self.grid != other.grid || self.arity != other.arity {
            return Err(Error::mismatch("fields differ in grid or arity"));
        }
        Ok(())
    }

    pub fn sup_norm(&self) -> f64 {
        self.values
            .iter()
            .flat_map(|v| v.iter())
            .fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// Grid sup distance to another field of the same shape.
    pub fn sup_distance(&self, other: &SpectralField) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).abs()))
            .fold(0.0, f64::max)
    }

    /// Dealiased (3/2-rule) pointwise product of two scalar fields.
    pub fn product(&self, other: &SpectralField) -> Result<SpectralField> {
        if self.grid != other.grid {
            return Err(Error::mismatch("product of fields on different grids"));
        }
        if self.arity != Arity::Scalar || other.arity != Arity::Scalar {
            return Err(Error::mismatch("product needs scalar fields"));
        }
        let dealias = Dealiaser::new(self.grid);
        let a = dealias.pad(&self.coeffs[0]);
        let b = dealias.pad(&other.coeffs[0]);
        let prod: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x * y).collect();
        Ok(dealias.truncate_field(&prod))
    }

    /// Dealiased `sum_i self_i * other_i` of two vector fields.
    pub fn dot(&self, other: &SpectralField) -> Result<SpectralField> {
        self.check_same(other)?;
        let dealias = Dealiaser::new(self.grid);
        let mut acc = vec![0.0; dealias.padded_len()];
        for c in 0..self.num_components() {
            let a = dealias.pad(&self.coeffs[c]);
            let b = dealias.pad(&other.coeffs[c]);
            for ((s, x), y) in acc.iter_mut().zip(&a).zip(&b) {
                *s += x * y;
            }
        }
        Ok(dealias.truncate_field(&acc))
    }

    /// Pairing `int f g dx` of two scalar fields via Parseval.
    pub fn pairing(&self, other: &SpectralField) -> f64 {
        let s: f64 = self.coeffs[0]
            .iter()
            .zip(other.coeffs[0].iter())
            .map(|(a, b)| (a * b.conj()).re)
            .sum();
        s * self.grid.volume()
    }

    /// Evaluates every component at `x` (any point of R^d).
    pub fn evaluate(&self, x: &[f64], mode: EvalMode) -> Vec<f64> {
        (0..self.num_components())
            .map(|c| match mode {
                EvalMode::Interp => self.interp_component(c, x),
                EvalMode::ExactFourier => self.fourier_component(c, x),
            })
            .collect()
    }

    /// Catmull-Rom interpolation of one component at `x`.
    #[inline]
    pub fn interp_component(&self, c: usize, x: &[f64]) -> f64 {
        let st = Stencil::new(&self.grid, x);
        st.apply(&self.grid, &self.values[c])
    }

    /// Direct Fourier summation of one component at `x`.
    pub fn fourier_component(&self, c: usize, x: &[f64]) -> f64 {
        let g = &self.grid;
        let phases: Vec<Vec<Complex64>> = (0..g.dim)
            .map(|a| {
                let rel = x[a] - g.origin();
                (0..g.n)
                    .map(|i| Complex64::from_polar(1.0, g.wavenumber(i) * rel))
                    .collect()
            })
            .collect();
        let mut s = 0.0;
        for (j, coef) in self.coeffs[c].iter().enumerate() {
            let idx = g.split(j);
            let mut ph = phases[0][idx[0]];
            if g.dim == 2 {
                ph *= phases[1][idx[1]];
            }
            s += (coef * ph).re;
        }
        s
    }
}

fn check_components(grid: &TorusGrid, arity: Arity, given: usize) -> Result<()> {
    let want = arity.components(grid.dim);
    if want != given {
        return Err(Error::mismatch(format!(
            "{arity:?} field in dimension {} needs {want} components, got {given}",
            grid.dim
        )));
    }
    Ok(())
}

/// Precomputed Catmull-Rom stencil for one evaluation point; reusable across
/// fields on the same grid.
#[derive(Clone, Copy, Debug)]
pub struct Stencil {
    idx: [[usize; 4]; MAX_DIM],
    w: [[f64; 4]; MAX_DIM],
}

impl Stencil {
    #[inline]
    pub fn new(grid: &TorusGrid, x: &[f64]) -> Self {
        let n = grid.n;
        let h = grid.spacing();
        let mut idx = [[0usize; 4]; MAX_DIM];
        let mut w = [[0.0; 4]; MAX_DIM];
        for a in 0..grid.dim {
            let p = ((x[a] - grid.origin()) / h).rem_euclid(n as f64);
            let fl = p.floor();
            let s = p - fl;
            let i = fl as usize % n;
            let s2 = s * s;
            let s3 = s2 * s;
            w[a] = [
                0.5 * (-s3 + 2.0 * s2 - s),
                0.5 * (3.0 * s3 - 5.0 * s2 + 2.0),
                0.5 * (-3.0 * s3 + 4.0 * s2 + s),
                0.5 * (s3 - s2),
            ];
            idx[a] = [(i + n - 1) % n, i, (i + 1) % n, (i + 2) % n];
        }
        Self { idx, w }
    }

    #[inline]
    pub fn apply(&self, grid: &TorusGrid, values: &[f64]) -> f64 {
        if grid.dim == 1 {
            let mut s = 0.0;
            for q in 0..4 {
                s += self.w[0][q] * values[self.idx[0][q]];
            }
            s
        } else {
            let n = grid.n;
            let mut s = 0.0;
            for p in 0..4 {
                let row = self.idx[0][p] * n;
                let mut r = 0.0;
                for q in 0..4 {
                    r += self.w[1][q] * values[row + self.idx[1][q]];
                }
                s += self.w[0][p] * r;
            }
            s
        }
    }
}

/// Zero-padding to `3N/2` points per axis for alias-free products.
/// Nyquist modes are discarded on both input and output.
pub struct Dealiaser {
    grid: TorusGrid,
    m: usize,
    map: Vec<Option<usize>>,
}

impl Dealiaser {
    pub fn new(grid: TorusGrid) -> Self {
        let m = 3 * grid.n / 2;
        let map = (0..grid.len())
            .map(|j| {
                if grid.is_nyquist(j) {
                    return None;
                }
                let modes = grid.modes(j);
                let mut flat = 0;
                for a in 0..grid.dim {
                    flat = flat * m + modes[a].rem_euclid(m as i64) as usize;
                }
                Some(flat)
            })
            .collect();
        Self { grid, m, map }
    }

    pub fn padded_len(&self) -> usize {
        self.m.pow(self.grid.dim as u32)
    }

    /// Physical samples of the field on the padded grid.
    pub fn pad(&self, coeffs: &[Complex64]) -> Vec<f64> {
        let mut buf = vec![Complex64::new(0.0, 0.0); self.padded_len()];
        for (j, target) in self.map.iter().enumerate() {
            if let Some(t) = target {
                buf[*t] = coeffs[j];
            }
        }
        fft::inverse_real(&buf, self.grid.dim, self.m)
    }

    /// Coefficients on the base grid of padded physical samples.
    pub fn truncate(&self, padded: &[f64]) -> Vec<Complex64> {
        let big = fft::forward_real(padded, self.grid.dim, self.m);
        self.map
            .iter()
            .map(|t| match t {
                Some(t) => big[*t],
                None => Complex64::new(0.0, 0.0),
            })
            .collect()
    }

    pub fn truncate_field(&self, padded: &[f64]) -> SpectralField {
        let coeffs = self.truncate(padded);
        let values = fft::inverse_real(&coeffs, self.grid.dim, self.grid.n);
        SpectralField {
            grid: self.grid,
            arity: Arity::Scalar,
            coeffs: vec![coeffs],
            values: vec![values],
        }
    }
}

/// Time interpolation rule of a [`TimeField`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum TimeInterp {
    #[default]
    Linear,
    PiecewiseConstantLeft,
}

/// A field sampled at the `K + 1` grid times `t_k = k T / K`.
#[derive(Clone, Debug, PartialEq)]
pub struct TimeField {
    slices: Vec<SpectralField>,
    interp: TimeInterp,
}

impl TimeField {
    pub fn new(slices: Vec<SpectralField>, interp: TimeInterp) -> Result<Self> {
        let first = slices
            .first()
            .ok_or_else(|| Error::mismatch("time field needs slices"))?;
        let grid = first.grid;
        if slices.len() != grid.steps + 1 {
            return Err(Error::mismatch(format!(
                "expected {} slices, got {}",
                grid.steps + 1,
                slices.len()
            )));
        }
        if slices.iter().any(|s| s.grid != grid || s.arity != first.arity) {
            return Err(Error::mismatch("slices differ in grid or arity"));
        }
        Ok(Self { slices, interp })
    }

    /// The same field at every grid time.
    pub fn constant_in_time(slice: SpectralField) -> Self {
        let k = slice.grid.steps;
        Self { slices: vec![slice; k + 1], interp: TimeInterp::Linear }
    }

    pub fn from_fn(grid: TorusGrid, f: impl Fn(f64, &[f64]) -> f64) -> Self {
        let slices = (0..=grid.steps)
            .map(|k| {
                let t = grid.time(k);
                SpectralField::from_fn(grid, |x| f(t, x))
            })
            .collect();
        Self { slices, interp: TimeInterp::Linear }
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.slices[0].grid
    }

    pub fn arity(&self) -> Arity {
        self.slices[0].arity
    }

    pub fn interp(&self) -> TimeInterp {
        self.interp
    }

    pub fn slices(&self) -> &[SpectralField] {
        &self.slices
    }

    pub fn slice(&self, k: usize) -> &SpectralField {
        &self.slices[k]
    }

    pub fn into_slices(self) -> Vec<SpectralField> {
        self.slices
    }

    pub fn map_slices(&self, f: impl Fn(&SpectralField) -> Result<SpectralField>) -> Result<TimeField> {
        let slices = self.slices.iter().map(f).collect::<Result<Vec<_>>>()?;
        TimeField::new(slices, self.interp)
    }

    pub fn component(&self, c: usize) -> TimeField {
        TimeField {
            slices: self.slices.iter().map(|s| s.component(c)).collect(),
            interp: self.interp,
        }
    }

    /// Slice index and weight of slice `k + 1` for time `t`.
    pub fn locate(&self, t: f64) -> Result<(usize, f64)> {
        let g = self.grid();
        if !(t >= 0.0 && t <= g.horizon) {
            return Err(Error::TimeOutOfRange { t, horizon: g.horizon });
        }
        let p = t / g.dt();
        let k = (p.floor() as usize).min(g.steps);
        if k == g.steps {
            return Ok((k, 0.0));
        }
        let w = match self.interp {
            TimeInterp::Linear => p - k as f64,
            TimeInterp::PiecewiseConstantLeft => 0.0,
        };
        Ok((k, w))
    }

    /// Value of component `c` at `(t, x)` given a precomputed location.
    #[inline]
    pub fn interp_at(&self, c: usize, loc: (usize, f64), st: &Stencil) -> f64 {
        let g = self.grid();
        let (k, w) = loc;
        let a = st.apply(g, &self.slices[k].values[c]);
        if w == 0.0 {
            a
        } else {
            let b = st.apply(g, &self.slices[k + 1].values[c]);
            (1.0 - w) * a + w * b
        }
    }

    pub fn evaluate(&self, t: f64, x: &[f64], mode: EvalMode) -> Result<Vec<f64>> {
        let (k, w) = self.locate(t)?;
        let a = self.slices[k].evaluate(x, mode);
        if w == 0.0 {
            return Ok(a);
        }
        let b = self.slices[k + 1].evaluate(x, mode);
        Ok(a.iter().zip(&b).map(|(p, q)| (1.0 - w) * p + w * q).collect())
    }

    /// The field at time `t` as a single slice (per the interpolation rule).
    pub fn at_time(&self, t: f64) -> Result<SpectralField> {
        let (k, w) = self.locate(t)?;
        if w == 0.0 {
            return Ok(self.slices[k].clone());
        }
        Ok(self.slices[k].linear_combination(1.0 - w, &self.slices[k + 1], w))
    }

    /// Largest grid sup-norm over slices.
    pub fn sup_norm(&self) -> f64 {
        self.slices.iter().map(|s| s.sup_norm()).fold(0.0, f64::max)
    }

    pub fn sup_distance(&self, other: &TimeField) -> f64 {
        self.slices
            .iter()
            .zip(&other.slices)
            .map(|(a, b)| a.sup_distance(b))
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn line(n: usize) -> TorusGrid {
        TorusGrid::line(n, 8).unwrap()
    }

    fn mode_field(grid: TorusGrid, k: f64) -> SpectralField {
        SpectralField::from_fn(grid, move |x| (k * x[0]).cos())
    }

    #[test]
    fn heat_zero_is_identity() {
        let f = SpectralField::from_fn(line(64), |x| (x[0]).sin() + 0.3 * (3.0 * x[0]).cos());
        assert_eq!(f.heat(0.0).unwrap(), f);
    }

    #[test]
    fn heat_damps_unit_mode() {
        let f = mode_field(line(64), 1.0);
        let g = f.heat(2.0).unwrap();
        let amp = 2.0 * g.coeffs(0)[1].norm();
        assert!((amp - (-1.0f64).exp()).abs() < 1e-14);
        assert!(f.heat(-1.0).is_err());
    }

    #[test]
    fn mollify_index_sixteen_on_mode_four() {
        let f = mode_field(line(64), 4.0);
        let g = f.mollify(16).unwrap();
        let amp = 2.0 * g.coeffs(0)[4].norm();
        assert!((amp - 0.367879441171).abs() < 1e-9);
        assert!(f.mollify(0).is_err());
    }

    #[test]
    fn heat_matches_periodized_kernel_convolution() {
        // brute-force physical-space convolution with the periodized Gaussian
        let grid = line(128);
        let bump = |x: f64| (-(x * x) / (2.0 * 0.25)).exp();
        let f = SpectralField::from_fn(grid, |x| bump(x[0]));
        let r = 0.1;
        let g = f.heat(r).unwrap();
        let h = grid.spacing();
        let l = grid.period;
        let mut worst: f64 = 0.0;
        for i in 0..grid.n {
            let xi = grid.point(i)[0];
            let mut s = 0.0;
            for j in 0..grid.n {
                let xj = grid.point(j)[0];
                let mut kern = 0.0;
                for w in -6..=6 {
                    let d = xi - xj + w as f64 * l;
                    kern += (-(d * d) / (2.0 * r)).exp() / (2.0 * PI * r).sqrt();
                }
                s += kern * f.values(0)[j] * h;
            }
            worst = worst.max((s - g.values(0)[i]).abs());
        }
        assert!(worst < 1e-10, "sup error {worst}");
    }

    #[test]
    fn derivative_of_sine() {
        let grid = TorusGrid::new(1, 64, 3.0, 1.0, 4).unwrap();
        let k = 2.0 * PI / 3.0;
        let f = SpectralField::from_fn(grid, |x| (k * x[0]).sin());
        let df = f.derivative(0).unwrap();
        let exact = SpectralField::from_fn(grid, |x| k * (k * x[0]).cos());
        assert!(df.sup_distance(&exact) < 1e-12);
        let c = SpectralField::constant(grid, 2.5);
        assert!(c.derivative(0).unwrap().sup_norm() < 1e-15);
        assert!(f.derivative(1).is_err());
    }

    #[test]
    fn gradient_matches_centered_differences() {
        // finite-difference oracle: error O(h^2)
        let grid = TorusGrid::new(2, 64, 2.0 * PI, 1.0, 4).unwrap();
        let f = |x: f64, y: f64| (x + 0.5).sin() * (2.0 * y).cos() + 0.2 * (3.0 * x - y).cos();
        let field = SpectralField::from_fn(grid, |p| f(p[0], p[1]));
        let grad = field.gradient().unwrap();
        let h = grid.spacing();
        let mut err: f64 = 0.0;
        for j in 0..grid.len() {
            let p = grid.point(j);
            let fx = (f(p[0] + h, p[1]) - f(p[0] - h, p[1])) / (2.0 * h);
            let fy = (f(p[0], p[1] + h) - f(p[0], p[1] - h)) / (2.0 * h);
            err = err.max((grad.values(0)[j] - fx).abs());
            err = err.max((grad.values(1)[j] - fy).abs());
        }
        // |f'''| <= ~ 9.5 so h^2/6 * 9.5 ~ 1.5e-2
        assert!(err < 2.0 * h * h, "err {err}");
    }

    #[test]
    fn interp_agrees_with_fourier_sum() {
        let grid = line(256);
        let f = mode_field(grid, 1.0);
        for &x in &[0.0123, -1.7, 2.9999, 5.5] {
            let a = f.evaluate(&[x], EvalMode::Interp)[0];
            let b = f.evaluate(&[x], EvalMode::ExactFourier)[0];
            assert!((a - b).abs() < 1e-6, "x {x}: {a} vs {b}");
            assert!((b - x.cos()).abs() < 1e-12);
        }
    }

    #[test]
    fn evaluation_is_periodic() {
        let grid = line(64);
        let f = SpectralField::from_fn(grid, |x| (x[0]).sin() + (2.0 * x[0]).cos());
        let tf = TimeField::constant_in_time(f);
        let a = tf.evaluate(0.3, &[0.77], EvalMode::Interp).unwrap();
        let b = tf.evaluate(0.3, &[0.77 + grid.period], EvalMode::Interp).unwrap();
        assert!((a[0] - b[0]).abs() < 1e-12);
        assert!(tf.evaluate(1.5, &[0.0], EvalMode::Interp).is_err());
        let c = TimeField::constant_in_time(SpectralField::constant(grid, 4.0));
        let v = c.evaluate(0.9, &[1.234], EvalMode::Interp).unwrap();
        assert!((v[0] - 4.0).abs() < 1e-14);
    }

    #[test]
    fn product_of_cosines() {
        let grid = line(32);
        let f = mode_field(grid, 1.0);
        let p = f.product(&f).unwrap();
        let exact = SpectralField::from_fn(grid, |x| 0.5 + 0.5 * (2.0 * x[0]).cos());
        assert!(p.sup_distance(&exact) < 1e-14);
        let one = SpectralField::constant(grid, 1.0);
        let g = SpectralField::from_fn(grid, |x| (3.0 * x[0]).sin());
        assert!(one.product(&g).unwrap().sup_distance(&g) < 1e-14);
    }
}
