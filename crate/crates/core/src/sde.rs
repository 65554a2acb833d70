//! Euler-Maruyama path ensembles for the transformed process and for the
//! mollified-drift process, sharing one Brownian stream per path.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Arity, Stencil, TimeField};
use crate::grid::{TorusGrid, MAX_DIM};
use crate::zvonkin::{Point, ZvonkinMap};

/// Salt separating the initial-sample streams from the Brownian streams.
const INITIAL_SALT: u64 = 0x9e37_79b9_7f4a_7c15;
const BLOCK: usize = 2048;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum InitialLaw {
    Dirac { point: Vec<f64> },
    Gaussian { mean: Vec<f64>, covariance: Vec<Vec<f64>> },
    Uniform { low: Vec<f64>, high: Vec<f64> },
    Mixture { components: Vec<InitialLaw>, weights: Vec<f64> },
}

impl Default for InitialLaw {
    fn default() -> Self {
        InitialLaw::Dirac { point: vec![0.0] }
    }
}

impl InitialLaw {
    pub fn dirac_origin(dim: usize) -> Self {
        InitialLaw::Dirac { point: vec![0.0; dim] }
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        let check_len = |v: &[f64], what: &str| {
            if v.len() != dim {
                Err(Error::invalid(format!("{what} has {} entries, expected {dim}", v.len())))
            } else if v.iter().any(|x| !x.is_finite()) {
                Err(Error::invalid(format!("{what} must be finite")))
            } else {
                Ok(())
            }
        };
        match self {
            InitialLaw::Dirac { point } => check_len(point, "dirac point"),
            InitialLaw::Gaussian { mean, covariance } => {
                check_len(mean, "gaussian mean")?;
                if covariance.len() != dim || covariance.iter().any(|r| r.len() != dim) {
                    return Err(Error::invalid("covariance must be a d x d matrix"));
                }
                cholesky(covariance).map(|_| ())
            }
            InitialLaw::Uniform { low, high } => {
                check_len(low, "uniform lower corner")?;
                check_len(high, "uniform upper corner")?;
                if low.iter().zip(high).any(|(a, b)| !(a < b)) {
                    return Err(Error::invalid("uniform box needs low < high on every axis"));
                }
                Ok(())
            }
            InitialLaw::Mixture { components, weights } => {
                if components.is_empty() || components.len() != weights.len() {
                    return Err(Error::invalid("mixture needs one weight per component"));
                }
                if weights.iter().any(|w| !(*w >= 0.0)) {
                    return Err(Error::invalid("mixture weights must be nonnegative"));
                }
                let total: f64 = weights.iter().sum();
                if (total - 1.0).abs() > 1e-9 {
                    return Err(Error::invalid(format!("mixture weights sum to {total}, not 1")));
                }
                components.iter().try_for_each(|c| c.validate(dim))
            }
        }
    }

    fn draw(&self, dim: usize, rng: &mut ChaCha8Rng) -> Point {
        let mut p = [0.0; MAX_DIM];
        match self {
            InitialLaw::Dirac { point } => p[..dim].copy_from_slice(point),
            InitialLaw::Gaussian { mean, covariance } => {
                let l = cholesky(covariance).expect("validated");
                let z: [f64; MAX_DIM] = [StandardNormal.sample(rng), StandardNormal.sample(rng)];
                for i in 0..dim {
                    p[i] = mean[i];
                    for j in 0..=i {
                        p[i] += l[i][j] * z[j];
                    }
                }
            }
            InitialLaw::Uniform { low, high } => {
                for i in 0..dim {
                    p[i] = rng.gen_range(low[i]..high[i]);
                }
            }
            InitialLaw::Mixture { components, weights } => {
                let u: f64 = rng.gen();
                let mut acc = 0.0;
                let mut pick = components.len() - 1;
                for (i, w) in weights.iter().enumerate() {
                    acc += w;
                    if u < acc {
                        pick = i;
                        break;
                    }
                }
                p = components[pick].draw(dim, rng);
            }
        }
        p
    }
}

/// Lower-triangular factor of a positive semidefinite `d x d` matrix.
fn cholesky(c: &[Vec<f64>]) -> Result<[[f64; MAX_DIM]; MAX_DIM]> {
    let tol = 1e-12;
    let mut l = [[0.0; MAX_DIM]; MAX_DIM];
    if c.iter().flatten().any(|x| !x.is_finite()) {
        return Err(Error::invalid("covariance must be finite"));
    }
    if c[0][0] < -tol {
        return Err(Error::invalid("covariance is not positive semidefinite"));
    }
    l[0][0] = c[0][0].max(0.0).sqrt();
    if c.len() == 2 {
        if (c[0][1] - c[1][0]).abs() > tol {
            return Err(Error::invalid("covariance must be symmetric"));
        }
        let det = c[0][0] * c[1][1] - c[0][1] * c[1][0];
        if c[1][1] < -tol || det < -tol {
            return Err(Error::invalid("covariance is not positive semidefinite"));
        }
        l[1][0] = if l[0][0] > 0.0 { c[1][0] / l[0][0] } else { 0.0 };
        l[1][1] = (c[1][1] - l[1][0] * l[1][0]).max(0.0).sqrt();
    }
    Ok(l)
}

/// `M` initial samples reduced to the fundamental cell. Sample `i` depends
/// only on `(seed, i)`.
pub fn sample_initial(law: &InitialLaw, grid: &TorusGrid, paths: usize, seed: u64) -> Result<Vec<Point>> {
    if paths == 0 {
        return Err(Error::invalid("need at least one path"));
    }
    law.validate(grid.dim)?;
    let dim = grid.dim;
    let samples: Vec<(Point, bool)> = (0..paths)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ INITIAL_SALT);
            rng.set_stream(i as u64);
            let mut p = law.draw(dim, &mut rng);
            let mut moved = false;
            for v in p.iter_mut().take(dim) {
                let w = grid.wrap(*v);
                moved |= w != *v;
                *v = w;
            }
            (p, moved)
        })
        .collect();
    let outside = samples.iter().filter(|s| s.1).count();
    if outside > 0 {
        log::warn!("{outside} of {paths} initial samples fell outside the cell and were wrapped");
    }
    Ok(samples.into_iter().map(|s| s.0).collect())
}

/// Which per-path arrays an ensemble keeps.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Storage {
    pub x: bool,
    pub y: bool,
    pub dw: bool,
}

impl Default for Storage {
    fn default() -> Self {
        Self { x: true, y: false, dw: true }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimParams {
    pub paths: usize,
    pub steps: usize,
    pub seed: u64,
    /// Brownian draws per step; each step's increment is the sum of
    /// `substeps` finer draws, so runs with `(K, 2s)` and `(2K, s)` share
    /// their noise path by path.
    pub substeps: usize,
    pub storage: Storage,
}

impl SimParams {
    pub fn new(paths: usize, steps: usize, seed: u64) -> Self {
        Self { paths, steps, seed, substeps: 1, storage: Storage::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.paths == 0 || self.steps == 0 {
            return Err(Error::invalid("need at least one path and one step"));
        }
        if self.substeps == 0 {
            return Err(Error::invalid("substeps must be positive"));
        }
        Ok(())
    }
}

/// Simulated paths on the uniform grid `t_k = k T / K`, stored path-major.
#[derive(Clone, Debug, PartialEq)]
pub struct PathEnsemble {
    pub dim: usize,
    pub paths: usize,
    pub steps: usize,
    pub horizon: f64,
    pub seed: u64,
    /// `paths * (steps + 1) * dim`
    pub x: Option<Vec<f64>>,
    pub y: Option<Vec<f64>>,
    /// `paths * steps * dim`
    pub dw: Option<Vec<f64>>,
    /// Fraction of path-steps of X closer than `L/10` to the cell faces.
    pub boundary_fraction: f64,
}

impl PathEnsemble {
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

    fn x_slice(&self) -> Result<&[f64]> {
        self.x.as_deref().ok_or_else(|| Error::invalid("ensemble carries no X paths"))
    }

    fn y_slice(&self) -> Result<&[f64]> {
        self.y.as_deref().ok_or_else(|| Error::invalid("ensemble carries no Y paths"))
    }

    fn dw_slice(&self) -> Result<&[f64]> {
        self.dw.as_deref().ok_or_else(|| Error::invalid("ensemble carries no increments"))
    }

    fn point(data: &[f64], dim: usize, stride: usize, i: usize, k: usize) -> Point {
        let mut p = [0.0; MAX_DIM];
        let base = (i * stride + k) * dim;
        p[..dim].copy_from_slice(&data[base..base + dim]);
        p
    }

    pub fn x_at(&self, i: usize, k: usize) -> Result<Point> {
        Ok(Self::point(self.x_slice()?, self.dim, self.steps + 1, i, k))
    }

    pub fn y_at(&self, i: usize, k: usize) -> Result<Point> {
        Ok(Self::point(self.y_slice()?, self.dim, self.steps + 1, i, k))
    }

    pub fn dw_at(&self, i: usize, k: usize) -> Result<Point> {
        Ok(Self::point(self.dw_slice()?, self.dim, self.steps, i, k))
    }

    /// Positions of all paths at step `k`.
    pub fn x_column(&self, k: usize) -> Result<Vec<Point>> {
        let x = self.x_slice()?;
        Ok((0..self.paths).map(|i| Self::point(x, self.dim, self.steps + 1, i, k)).collect())
    }

    pub fn y_column(&self, k: usize) -> Result<Vec<Point>> {
        let y = self.y_slice()?;
        Ok((0..self.paths).map(|i| Self::point(y, self.dim, self.steps + 1, i, k)).collect())
    }

    /// One coordinate of the X path of path `i` at every grid time.
    pub fn x_path(&self, i: usize, axis: usize) -> Result<Vec<f64>> {
        let x = self.x_slice()?;
        let s = self.steps + 1;
        Ok((0..s).map(|k| x[(i * s + k) * self.dim + axis]).collect())
    }

    /// Per-step mean and variance of the increments along `axis`.
    pub fn increment_moments(&self, k: usize, axis: usize) -> Result<(f64, f64)> {
        let dw = self.dw_slice()?;
        let m = self.paths as f64;
        let vals = (0..self.paths).map(|i| dw[(i * self.steps + k) * self.dim + axis]);
        let mean = vals.clone().sum::<f64>() / m;
        let var = vals.map(|v| (v - mean) * (v - mean)).sum::<f64>() / (m - 1.0).max(1.0);
        Ok((mean, var))
    }

    /// Sanity gate on the increments: every step's mean within
    /// `5 sqrt(h / M)` of 0 and variance within 5 standard errors of `h`.
    pub fn increments_look_brownian(&self) -> Result<bool> {
        let h = self.dt();
        let m = self.paths as f64;
        for k in 0..self.steps {
            for a in 0..self.dim {
                let (mean, var) = self.increment_moments(k, a)?;
                if mean.abs() > 5.0 * (h / m).sqrt() {
                    return Ok(false);
                }
                // variance of the sample variance of N(0, h) is 2 h^2 / (M - 1)
                if (var - h).abs() > 5.0 * h * (2.0 / (m - 1.0).max(1.0)).sqrt() {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }
}

/// Brownian increments of one path, consumed step by step.
struct Noise {
    rng: ChaCha8Rng,
    substeps: usize,
    scale: f64,
    dim: usize,
}

impl Noise {
    fn new(params: &SimParams, dim: usize, horizon: f64, path: usize) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
        rng.set_stream(path as u64);
        let fine = horizon / (params.steps * params.substeps) as f64;
        Self { rng, substeps: params.substeps, scale: fine.sqrt(), dim }
    }

    #[inline]
    fn next(&mut self) -> Point {
        let mut dw = [0.0; MAX_DIM];
        for _ in 0..self.substeps {
            for v in dw.iter_mut().take(self.dim) {
                let z: f64 = StandardNormal.sample(&mut self.rng);
                *v += self.scale * z;
            }
        }
        dw
    }
}

fn near_boundary(grid: &TorusGrid, x: &Point) -> bool {
    let limit = 0.5 * grid.period - 0.1 * grid.period;
    (0..grid.dim).any(|a| x[a].abs() > limit)
}

struct PathOut {
    x: Vec<f64>,
    y: Vec<f64>,
    dw: Vec<f64>,
    near: usize,
}

fn assemble(
    params: &SimParams,
    grid: &TorusGrid,
    run: impl Fn(usize) -> Result<PathOut> + Sync,
) -> Result<PathEnsemble> {
    let st = params.storage;
    let d = grid.dim;
    let per_path = (params.steps + 1) * d;
    let mut x = st.x.then(|| Vec::with_capacity(params.paths * per_path));
    let mut y = st.y.then(|| Vec::with_capacity(params.paths * per_path));
    let mut dw = st.dw.then(|| Vec::with_capacity(params.paths * params.steps * d));
    let mut near = 0usize;
    let mut start = 0;
    while start < params.paths {
        let end = (start + BLOCK).min(params.paths);
        let block: Vec<PathOut> = (start..end).into_par_iter().map(&run).collect::<Result<_>>()?;
        for p in block {
            near += p.near;
            if let Some(v) = x.as_mut() {
                v.extend_from_slice(&p.x);
            }
            if let Some(v) = y.as_mut() {
                v.extend_from_slice(&p.y);
            }
            if let Some(v) = dw.as_mut() {
                v.extend_from_slice(&p.dw);
            }
        }
        start = end;
    }
    Ok(PathEnsemble {
        dim: d,
        paths: params.paths,
        steps: params.steps,
        horizon: grid.horizon,
        seed: params.seed,
        x,
        y,
        dw,
        boundary_fraction: near as f64 / (params.paths * (params.steps + 1)) as f64,
    })
}

/// Euler-Maruyama for the transformed process
/// `dY = lambda u(t, psi(t, Y)) dt + (I + grad u(t, psi(t, Y))^T) dW`, with
/// `Y_0 = phi(0, X_0)`. X is recovered as `psi(t_k, Y_k)` along the way.
pub fn simulate_y(map: &ZvonkinMap, law: &InitialLaw, params: &SimParams) -> Result<PathEnsemble> {
    params.validate()?;
    let grid = *map.grid();
    let d = grid.dim;
    let x0 = sample_initial(law, &grid, params.paths, params.seed)?;
    let h = grid.horizon / params.steps as f64;
    let locs: Vec<(usize, f64)> = (0..=params.steps)
        .map(|k| map.locate((k as f64 * h).min(grid.horizon)))
        .collect::<Result<_>>()?;
    let st = params.storage;
    assemble(params, &grid, |i| {
        let mut noise = Noise::new(params, d, grid.horizon, i);
        let mut out = PathOut { x: Vec::new(), y: Vec::new(), dw: Vec::new(), near: 0 };
        let mut x = x0[i];
        let mut y = map.pushforward_initial(&x);
        for k in 0..=params.steps {
            let t = k as f64 * h;
            if k > 0 {
                x = map
                    .invert_from(locs[k], t, &y, &x)
                    .map_err(|e| Error::invalid(format!("path {i}, step {k}: {e}")))?;
            }
            if st.x {
                out.x.extend_from_slice(&x[..d]);
            }
            if st.y {
                out.y.extend_from_slice(&y[..d]);
            }
            out.near += near_boundary(&grid, &x) as usize;
            if k == params.steps {
                break;
            }
            let (drift, sigma) = map.coefficients_at_preimage(locs[k], &x);
            let dw = noise.next();
            for a in 0..d {
                let mut s = 0.0;
                for b in 0..d {
                    s += sigma[a][b] * dw[b];
                }
                y[a] += drift[a] * h + s;
            }
            if st.dw {
                out.dw.extend_from_slice(&dw[..d]);
            }
        }
        Ok(out)
    })
}

/// Recomputes `X_k = psi(t_k, Y_k)` for an ensemble carrying Y.
pub fn recover_x(ens: &PathEnsemble, map: &ZvonkinMap) -> Result<PathEnsemble> {
    let y = ens.y_slice()?;
    let d = ens.dim;
    let s = ens.steps + 1;
    let h = ens.dt();
    let locs: Vec<(usize, f64)> = (0..s).map(|k| map.locate(ens.time(k))).collect::<Result<_>>()?;
    let x: Vec<Vec<f64>> = (0..ens.paths)
        .into_par_iter()
        .map(|i| {
            let mut out = Vec::with_capacity(s * d);
            for k in 0..s {
                let yk = PathEnsemble::point(y, d, s, i, k);
                let xk = map.invert_at(locs[k], k as f64 * h, &yk)?;
                out.extend_from_slice(&xk[..d]);
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    let mut out = ens.clone();
    out.x = Some(x.concat());
    Ok(out)
}

/// Euler-Maruyama for `dX = b_n(t, X) dt + dW` with the same per-path
/// increments as [`simulate_y`] under equal parameters.
pub fn simulate_x_direct(b: &TimeField, law: &InitialLaw, params: &SimParams) -> Result<PathEnsemble> {
    params.validate()?;
    if b.arity() != Arity::Vector {
        return Err(Error::mismatch("drift must be vector valued"));
    }
    let grid = *b.grid();
    let d = grid.dim;
    let x0 = sample_initial(law, &grid, params.paths, params.seed)?;
    let h = grid.horizon / params.steps as f64;
    let locs: Vec<(usize, f64)> = (0..=params.steps)
        .map(|k| b.locate((k as f64 * h).min(grid.horizon)))
        .collect::<Result<_>>()?;
    let st = params.storage;
    assemble(params, &grid, |i| {
        let mut noise = Noise::new(params, d, grid.horizon, i);
        let mut out = PathOut { x: Vec::new(), y: Vec::new(), dw: Vec::new(), near: 0 };
        let mut x = x0[i];
        for k in 0..=params.steps {
            if st.x {
                out.x.extend_from_slice(&x[..d]);
            }
            out.near += near_boundary(&grid, &x) as usize;
            if k == params.steps {
                break;
            }
            let stencil = Stencil::new(&grid, &x);
            let dw = noise.next();
            for a in 0..d {
                x[a] += b.interp_at(a, locs[k], &stencil) * h + dw[a];
            }
            if st.dw {
                out.dw.extend_from_slice(&dw[..d]);
            }
        }
        Ok(out)
    })
}

/// `A_t = int_0^t l(s, X_s) ds` by the trapezoidal rule, per path, at every
/// grid time. Returned path-major, `paths * (steps + 1)`.
pub fn local_time(l: &TimeField, ens: &PathEnsemble) -> Result<Vec<f64>> {
    if l.arity() != Arity::Scalar {
        return Err(Error::mismatch("integrand must be scalar"));
    }
    let x = ens.x_slice()?;
    let grid = *l.grid();
    if grid.dim != ens.dim {
        return Err(Error::mismatch("field and ensemble dimensions differ"));
    }
    let s = ens.steps + 1;
    let h = ens.dt();
    let locs: Vec<(usize, f64)> = (0..s).map(|k| l.locate(ens.time(k))).collect::<Result<_>>()?;
    let rows: Vec<Vec<f64>> = (0..ens.paths)
        .into_par_iter()
        .map(|i| {
            let mut out = Vec::with_capacity(s);
            let mut acc = 0.0;
            let mut prev = 0.0;
            for k in 0..s {
                let p = PathEnsemble::point(x, ens.dim, s, i, k);
                let v = l.interp_at(0, locs[k], &Stencil::new(&grid, &p));
                if k > 0 {
                    acc += 0.5 * (prev + v) * h;
                }
                out.push(acc);
                prev = v;
            }
            out
        })
        .collect();
    Ok(rows.concat())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::SpectralField;

    fn line() -> TorusGrid {
        TorusGrid::line(32, 16).unwrap()
    }

    #[test]
    fn dirac_samples() {
        let s = sample_initial(&InitialLaw::dirac_origin(1), &line(), 3, 1).unwrap();
        assert!(s.iter().all(|p| p[0] == 0.0));
        assert!(sample_initial(&InitialLaw::dirac_origin(1), &line(), 0, 1).is_err());
    }

    #[test]
    fn rejects_bad_laws() {
        let bad = InitialLaw::Gaussian { mean: vec![0.0], covariance: vec![vec![-1.0]] };
        assert!(bad.validate(1).is_err());
        let bad = InitialLaw::Mixture {
            components: vec![InitialLaw::dirac_origin(1)],
            weights: vec![0.5],
        };
        assert!(bad.validate(1).is_err());
        let bad = InitialLaw::Uniform { low: vec![1.0], high: vec![0.0] };
        assert!(bad.validate(1).is_err());
    }

    #[test]
    fn zero_map_gives_brownian_y() {
        let g = line();
        let map = ZvonkinMap::identity(g, 1.0);
        let mut p = SimParams::new(5, 16, 3);
        p.storage = Storage { x: true, y: true, dw: true };
        let ens = simulate_y(&map, &InitialLaw::dirac_origin(1), &p).unwrap();
        for i in 0..5 {
            let mut w = 0.0;
            for k in 0..16 {
                assert_eq!(ens.y_at(i, k).unwrap()[0], w);
                assert_eq!(ens.x_at(i, k).unwrap()[0], w);
                w += ens.dw_at(i, k).unwrap()[0];
            }
        }
    }

    #[test]
    fn direct_and_transformed_share_increments() {
        let g = line();
        let map = ZvonkinMap::identity(g, 1.0);
        let b = TimeField::constant_in_time(SpectralField::zeros(g, Arity::Vector));
        let p = SimParams::new(7, 16, 11);
        let a = simulate_y(&map, &InitialLaw::dirac_origin(1), &p).unwrap();
        let c = simulate_x_direct(&b, &InitialLaw::dirac_origin(1), &p).unwrap();
        assert_eq!(a.dw, c.dw);
    }

    #[test]
    fn prefixes_agree_across_ensemble_sizes() {
        let g = line();
        let b = TimeField::constant_in_time(SpectralField::zeros(g, Arity::Vector));
        let law = InitialLaw::Gaussian { mean: vec![0.0], covariance: vec![vec![0.1]] };
        let small = simulate_x_direct(&b, &law, &SimParams::new(3, 16, 5)).unwrap();
        let large = simulate_x_direct(&b, &law, &SimParams::new(3000, 16, 5)).unwrap();
        let n = small.x.as_ref().unwrap().len();
        assert_eq!(small.x.as_ref().unwrap()[..], large.x.as_ref().unwrap()[..n]);
    }

    #[test]
    fn substeps_couple_step_refinement() {
        let g = line();
        let b = TimeField::constant_in_time(SpectralField::zeros(g, Arity::Vector));
        let law = InitialLaw::dirac_origin(1);
        let fine = simulate_x_direct(&b, &law, &SimParams::new(4, 32, 9)).unwrap();
        let mut cp = SimParams::new(4, 16, 9);
        cp.substeps = 2;
        let coarse = simulate_x_direct(&b, &law, &cp).unwrap();
        for i in 0..4 {
            for k in 0..=16 {
                let a = coarse.x_at(i, k).unwrap()[0];
                let f = fine.x_at(i, 2 * k).unwrap()[0];
                assert!((a - f).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn local_time_of_unit_is_time() {
        let g = line();
        let b = TimeField::constant_in_time(SpectralField::zeros(g, Arity::Vector));
        let ens = simulate_x_direct(&b, &InitialLaw::dirac_origin(1), &SimParams::new(4, 16, 1)).unwrap();
        let one = TimeField::constant_in_time(SpectralField::constant(g, 1.0));
        let a = local_time(&one, &ens).unwrap();
        for i in 0..4 {
            for k in 0..=16 {
                assert!((a[i * 17 + k] - ens.time(k)).abs() < 1e-14);
            }
        }
        let zero = TimeField::constant_in_time(SpectralField::zeros(g, Arity::Scalar));
        assert!(local_time(&zero, &ens).unwrap().iter().all(|v| *v == 0.0));
    }
}
