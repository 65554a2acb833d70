//! Mild fixed-point solvers for backward parabolic equations with a rough
//! first-order term, the resolvent parameter ladder, and direct application of
//! the generators.
//!
//! The mild integral is advanced backward in time with exact exponential
//! factors per Fourier mode. On each step the forcing is replaced by its
//! quadratic interpolant through three neighbouring time nodes and integrated
//! exactly against the exponential.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fft;
use crate::field::{Arity, Dealiaser, SpectralField, TimeField, TimeInterp};
use crate::grid::{TorusGrid, MAX_DIM};
use crate::zvonkin::{sup_operator_norm, ZvonkinMap, GRADIENT_BOUND};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverParams {
    /// Stop once successive iterates differ by less than this in sup norm.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Contraction ratios at or above this count as a failure to contract.
    pub ratio_alarm: f64,
    /// Give up after this many consecutive alarming ratios (0: only at
    /// `max_iterations`). Lambda selection uses 8 when this is 0.
    pub abort_after: usize,
}

impl Default for SolverParams {
    fn default() -> Self {
        Self { tolerance: 1e-9, max_iterations: 200, ratio_alarm: 0.9, abort_after: 0 }
    }
}

impl SolverParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0) {
            return Err(Error::invalid("solver tolerance must be positive"));
        }
        if self.max_iterations == 0 {
            return Err(Error::invalid("solver needs at least one iteration"));
        }
        Ok(())
    }
}

/// Iteration telemetry of one Picard solve.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SolveStats {
    pub iterations: usize,
    /// Sup distance between successive iterates.
    pub increments: Vec<f64>,
    /// Ratios of successive increments.
    pub ratios: Vec<f64>,
    /// Last ratio observed above the round-off floor (0 if none).
    pub contraction_ratio: f64,
}

#[derive(Clone, Debug)]
pub struct Solution {
    pub field: TimeField,
    pub stats: SolveStats,
}

/// `int_0^1 exp(-z s) s^p ds` for `p = 0, 1, 2`.
fn moments(z: f64) -> [f64; 3] {
    if z < 1.0 {
        let mut out = [0.0; 3];
        for (p, o) in out.iter_mut().enumerate() {
            let mut term = 1.0;
            let mut sum = 0.0;
            for n in 0..40 {
                sum += term / (n + p + 1) as f64;
                term *= -z / (n + 1) as f64;
                if term.abs() < 1e-18 {
                    break;
                }
            }
            *o = sum;
        }
        out
    } else {
        let e = (-z).exp();
        let j0 = (1.0 - e) / z;
        let j1 = (j0 - e) / z;
        let j2 = (2.0 * j1 - e) / z;
        [j0, j1, j2]
    }
}

/// Per-mode step factors for one decay rate `a` and step `h`.
#[derive(Clone, Copy, Debug)]
struct StepWeights {
    decay: f64,
    /// Weights on nodes `k, k+1, k+2`.
    ahead: [f64; 3],
    /// Weights on nodes `k-1, k, k+1` (last step).
    behind: [f64; 3],
}

impl StepWeights {
    fn new(a: f64, h: f64) -> Self {
        let [j0, j1, j2] = moments(a * h);
        Self {
            decay: (-a * h).exp(),
            ahead: [
                h * (j2 - 3.0 * j1 + 2.0 * j0) / 2.0,
                h * (2.0 * j1 - j2),
                h * (j2 - j1) / 2.0,
            ],
            behind: [h * (j2 - j1) / 2.0, h * (j0 - j2), h * (j2 + j1) / 2.0],
        }
    }
}

/// Backward mild integration machinery shared by both equations.
struct MildStepper {
    grid: TorusGrid,
    lambda: f64,
    weights: Vec<StepWeights>,
    dealias: Dealiaser,
    /// Drift samples on the padded grid, `[slice][axis]`.
    drift: Vec<Vec<Vec<f64>>>,
    wavevectors: Vec<[f64; MAX_DIM]>,
    nyquist: Vec<[bool; MAX_DIM]>,
}

impl MildStepper {
    fn new(b: &TimeField, lambda: f64) -> Result<Self> {
        let grid = *b.grid();
        if grid.steps < 2 {
            return Err(Error::invalid("mild solver needs at least two time steps"));
        }
        if b.arity() != Arity::Vector {
            return Err(Error::mismatch("drift must be vector valued"));
        }
        let h = grid.dt();
        let weights = (0..grid.len())
            .map(|m| StepWeights::new(lambda + 0.5 * grid.k_squared(m), h))
            .collect();
        let dealias = Dealiaser::new(grid);
        let drift = b
            .slices()
            .par_iter()
            .map(|s| (0..grid.dim).map(|a| dealias.pad(s.coeffs(a))).collect())
            .collect();
        let wavevectors = (0..grid.len()).map(|m| grid.wavevector(m)).collect();
        let nyquist = (0..grid.len())
            .map(|m| {
                let idx = grid.split(m);
                let mut out = [false; MAX_DIM];
                for a in 0..grid.dim {
                    out[a] = idx[a] == grid.n / 2;
                }
                out
            })
            .collect();
        Ok(Self { grid, lambda, weights, dealias, drift, wavevectors, nyquist })
    }

    /// `grad v . b` at slice `k` for one scalar component.
    fn advection(&self, k: usize, v: &[Complex64]) -> Vec<Complex64> {
        let d = self.grid.dim;
        let mut acc = vec![0.0; self.dealias.padded_len()];
        for a in 0..d {
            let dv: Vec<Complex64> = v
                .iter()
                .enumerate()
                .map(|(m, &c)| {
                    if self.nyquist[m][a] {
                        Complex64::new(0.0, 0.0)
                    } else {
                        c * Complex64::new(0.0, self.wavevectors[m][a])
                    }
                })
                .collect();
            let padded = self.dealias.pad(&dv);
            for ((s, x), y) in acc.iter_mut().zip(&padded).zip(&self.drift[k][a]) {
                *s += x * y;
            }
        }
        self.dealias.truncate(&acc)
    }

    /// One application of the mild map to the component history `v`
    /// (`[slice][mode]`), with source `src` and free evolution `free` of the
    /// terminal datum.
    fn apply(
        &self,
        v: &[Vec<Complex64>],
        src: &[Vec<Complex64>],
        free: &[Vec<Complex64>],
    ) -> Vec<Vec<Complex64>> {
        let kk = self.grid.steps;
        let forcing: Vec<Vec<Complex64>> = (0..=kk)
            .into_par_iter()
            .map(|k| {
                let mut f = self.advection(k, &v[k]);
                for (x, s) in f.iter_mut().zip(&src[k]) {
                    *x += s;
                }
                f
            })
            .collect();
        let mut out = self.integrate(&forcing);
        for (o, f) in out.iter_mut().zip(free) {
            for (x, y) in o.iter_mut().zip(f) {
                *x += y;
            }
        }
        out
    }

    /// `int_{t_k}^T e^{-a(s - t_k)} F(s) ds` per mode.
    fn integrate(&self, forcing: &[Vec<Complex64>]) -> Vec<Vec<Complex64>> {
        let kk = self.grid.steps;
        let len = self.grid.len();
        let mut out = vec![vec![Complex64::new(0.0, 0.0); len]; kk + 1];
        let mut acc = vec![Complex64::new(0.0, 0.0); len];
        for k in (0..kk).rev() {
            for m in 0..len {
                let w = &self.weights[m];
                let local = if k + 2 <= kk {
                    forcing[k][m] * w.ahead[0] + forcing[k + 1][m] * w.ahead[1] + forcing[k + 2][m] * w.ahead[2]
                } else {
                    forcing[k - 1][m] * w.behind[0] + forcing[k][m] * w.behind[1] + forcing[k + 1][m] * w.behind[2]
                };
                acc[m] = acc[m] * w.decay + local;
            }
            out[k].copy_from_slice(&acc);
        }
        out
    }

    /// `e^{-a(T - t_k)} terminal` per mode.
    fn free_evolution(&self, terminal: &[Complex64]) -> Vec<Vec<Complex64>> {
        let horizon = self.grid.horizon;
        (0..=self.grid.steps)
            .map(|k| {
                let tau = horizon - self.grid.time(k);
                terminal
                    .iter()
                    .enumerate()
                    .map(|(m, &c)| {
                        if c == Complex64::new(0.0, 0.0) {
                            c
                        } else {
                            c * (-(self.lambda + 0.5 * self.grid.k_squared(m)) * tau).exp()
                        }
                    })
                    .collect()
            })
            .collect()
    }
}

/// Picard iteration on all components at once.
fn picard(
    stepper: &MildStepper,
    start: Vec<Vec<Vec<Complex64>>>,
    src: &[Vec<Vec<Complex64>>],
    free: &[Vec<Vec<Complex64>>],
    params: &SolverParams,
) -> Result<(Vec<Vec<Vec<Complex64>>>, SolveStats)> {
    params.validate()?;
    let grid = stepper.grid;
    let mut current = start;
    let mut stats = SolveStats::default();
    let mut alarms = 0;
    for it in 1..=params.max_iterations {
        let next: Vec<Vec<Vec<Complex64>>> = current
            .iter()
            .enumerate()
            .map(|(c, v)| stepper.apply(v, &src[c], &free[c]))
            .collect();
        let diff = current
            .par_iter()
            .zip(&next)
            .map(|(a, b)| {
                a.iter()
                    .zip(b)
                    .map(|(x, y)| {
                        let delta: Vec<Complex64> = x.iter().zip(y).map(|(p, q)| p - q).collect();
                        fft::inverse_real(&delta, grid.dim, grid.n)
                            .into_iter()
                            .fold(0.0_f64, |m, v| m.max(v.abs()))
                    })
                    .fold(0.0, f64::max)
            })
            .reduce(|| 0.0, f64::max);
        stats.iterations = it;
        if let Some(&prev) = stats.increments.last() {
            let ratio = if prev > 0.0 { diff / prev } else { 0.0 };
            stats.ratios.push(ratio);
            if prev > 100.0 * params.tolerance {
                stats.contraction_ratio = ratio;
                if ratio >= params.ratio_alarm {
                    alarms += 1;
                } else {
                    alarms = 0;
                }
            }
        }
        stats.increments.push(diff);
        current = next;
        if diff < params.tolerance {
            return Ok((current, stats));
        }
        if !diff.is_finite() || diff > 1e12 || (params.abort_after > 0 && alarms >= params.abort_after) {
            break;
        }
    }
    Err(Error::NonContraction {
        iterations: stats.iterations,
        last_ratio: stats.ratios.last().copied().unwrap_or(f64::NAN),
        ratios: stats.ratios,
    })
}

fn slices_to_coeffs(f: &TimeField, c: usize) -> Vec<Vec<Complex64>> {
    f.slices().iter().map(|s| s.coeffs(c).to_vec()).collect()
}

fn coeffs_to_field(grid: TorusGrid, arity: Arity, comps: Vec<Vec<Vec<Complex64>>>) -> Result<TimeField> {
    let kk = grid.steps;
    let mut per_slice: Vec<Vec<Vec<Complex64>>> = vec![Vec::with_capacity(comps.len()); kk + 1];
    for comp in comps {
        for (k, c) in comp.into_iter().enumerate() {
            per_slice[k].push(c);
        }
    }
    let slices = per_slice
        .into_par_iter()
        .map(|c| SpectralField::from_hermitian_coeffs(grid, arity, c))
        .collect();
    TimeField::new(slices, TimeInterp::Linear)
}

/// Solves `d_t v + (1/2) Delta v + grad v . b = g`, `v(T) = v_T` in mild form.
pub fn solve_terminal(
    b: &TimeField,
    g: &TimeField,
    terminal: &SpectralField,
    params: &SolverParams,
) -> Result<Solution> {
    let grid = *b.grid();
    if *g.grid() != grid || *terminal.grid() != grid {
        return Err(Error::mismatch("drift, source and terminal datum must share a grid"));
    }
    if g.arity() != Arity::Scalar || terminal.arity() != Arity::Scalar {
        return Err(Error::mismatch("source and terminal datum must be scalar"));
    }
    let stepper = MildStepper::new(b, 0.0)?;
    let src: Vec<Vec<Complex64>> = g
        .slices()
        .iter()
        .map(|s| s.coeffs(0).iter().map(|c| -c).collect())
        .collect();
    // start from the free evolution of the terminal datum
    let free = stepper.free_evolution(terminal.coeffs(0));
    let (v, stats) = picard(&stepper, vec![free.clone()], &[src], &[free], params)?;
    Ok(Solution { field: coeffs_to_field(grid, Arity::Scalar, v)?, stats })
}

/// Solution of the resolvent equation together with its gradient bound.
#[derive(Clone, Debug)]
pub struct ResolventSolution {
    pub u: TimeField,
    pub stats: SolveStats,
    /// `sup_t max_x` operator norm of `grad u`.
    pub grad_sup: f64,
}

/// Solves `d_t u + (1/2) Delta u + grad u . b = lambda u - b`, `u(T) = 0`
/// componentwise; `lambda` is absorbed into the semigroup.
pub fn solve_u(b: &TimeField, lambda: f64, params: &SolverParams) -> Result<ResolventSolution> {
    if !(lambda > 0.0) {
        return Err(Error::invalid("resolvent parameter must be positive"));
    }
    let grid = *b.grid();
    let stepper = MildStepper::new(b, lambda)?;
    let d = grid.dim;
    let src: Vec<Vec<Vec<Complex64>>> = (0..d).map(|c| slices_to_coeffs(b, c)).collect();
    let zero = vec![vec![Complex64::new(0.0, 0.0); grid.len()]; grid.steps + 1];
    let free = vec![zero.clone(); d];
    let (u, stats) = picard(&stepper, vec![zero; d], &src, &free, params)?;
    let u = coeffs_to_field(grid, Arity::Vector, u)?;
    let grad = u.map_slices(|s| s.gradient())?;
    let grad_sup = sup_operator_norm(&grad);
    Ok(ResolventSolution { u, stats, grad_sup })
}

/// Outcome of one ladder rung for one family member.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RungOutcome {
    pub lambda: f64,
    pub member: usize,
    pub iterations: usize,
    pub contraction_ratio: f64,
    pub grad_sup: f64,
    pub passed: bool,
}

#[derive(Clone, Debug)]
pub struct LambdaSelection {
    pub lambda: f64,
    /// Solutions for every family member at the selected lambda.
    pub solutions: Vec<ResolventSolution>,
    /// Every rung tried, in order.
    pub history: Vec<RungOutcome>,
}

pub const LAMBDA_LADDER_MAX_EXPONENT: i32 = 20;

/// Smallest `lambda` in `1, 2, 4, ..., 2^20` for which every member's
/// resolvent solve contracts and keeps `sup |grad u| <= 1/2`.
pub fn select_lambda(family: &[TimeField], params: &SolverParams) -> Result<LambdaSelection> {
    if family.is_empty() {
        return Err(Error::invalid("lambda selection needs at least one drift"));
    }
    let mut params = *params;
    if params.abort_after == 0 {
        // a rung that keeps failing to contract is hopeless; skip ahead
        params.abort_after = 8;
    }
    let params = &params;
    let mut history = Vec::new();
    for e in 0..=LAMBDA_LADDER_MAX_EXPONENT {
        let lambda = 2f64.powi(e);
        let mut solutions = Vec::with_capacity(family.len());
        // members in the given order; a rung is abandoned at its first failure
        for (member, b) in family.iter().enumerate() {
            let outcome = match solve_u(b, lambda, params) {
                Ok(s) => {
                    let passed =
                        s.stats.contraction_ratio < params.ratio_alarm && s.grad_sup <= GRADIENT_BOUND;
                    let o = RungOutcome {
                        lambda,
                        member,
                        iterations: s.stats.iterations,
                        contraction_ratio: s.stats.contraction_ratio,
                        grad_sup: s.grad_sup,
                        passed,
                    };
                    solutions.push(s);
                    o
                }
                Err(Error::NonContraction { iterations, last_ratio, .. }) => RungOutcome {
                    lambda,
                    member,
                    iterations,
                    contraction_ratio: last_ratio,
                    grad_sup: f64::NAN,
                    passed: false,
                },
                Err(e) => return Err(e),
            };
            log::debug!(
                "lambda {lambda}: member {member} ratio {:.3} grad {:.4} passed {}",
                outcome.contraction_ratio,
                outcome.grad_sup,
                outcome.passed
            );
            let passed = outcome.passed;
            history.push(outcome);
            if !passed {
                break;
            }
        }
        if solutions.len() == family.len() && history.last().is_some_and(|o| o.passed) {
            return Ok(LambdaSelection { lambda, solutions, history });
        }
    }
    let diagnostics = history
        .iter()
        .filter(|o| !o.passed)
        .map(|o| {
            format!(
                "lambda {} member {}: ratio {:.3}, grad {:.4}",
                o.lambda, o.member, o.contraction_ratio, o.grad_sup
            )
        })
        .collect();
    Err(Error::LambdaExhausted { max: 2f64.powi(LAMBDA_LADDER_MAX_EXPONENT), diagnostics })
}

/// Second-order time derivative of each slice (one-sided at the ends).
fn time_derivative(f: &TimeField) -> Result<Vec<SpectralField>> {
    let kk = f.grid().steps;
    if kk < 2 {
        return Err(Error::invalid("time derivative needs at least two steps"));
    }
    let h = f.grid().dt();
    let s = f.slices();
    (0..=kk)
        .map(|k| {
            let (a, ca, b, cb, c, cc) = if k == 0 {
                (0, -3.0, 1, 4.0, 2, -1.0)
            } else if k == kk {
                (kk, 3.0, kk - 1, -4.0, kk - 2, 1.0)
            } else {
                (k + 1, 1.0, k - 1, -1.0, k, 0.0)
            };
            let first = s[a].linear_combination(ca / (2.0 * h), &s[b], cb / (2.0 * h));
            Ok(first.linear_combination(1.0, &s[c], cc / (2.0 * h)))
        })
        .collect()
}

/// `L f = d_t f + (1/2) Delta f + grad f . b` for scalar `f`.
pub fn apply_l(f: &TimeField, b: &TimeField) -> Result<TimeField> {
    if f.grid() != b.grid() {
        return Err(Error::mismatch("field and drift grids differ"));
    }
    if f.arity() != Arity::Scalar {
        return Err(Error::mismatch("generator applies to scalar fields"));
    }
    let dt = time_derivative(f)?;
    let slices = dt
        .into_par_iter()
        .enumerate()
        .map(|(k, d)| {
            let s = f.slice(k);
            let adv = s.gradient()?.dot(b.slice(k))?;
            Ok(d.add(&s.laplacian().scaled(0.5))?.add(&adv)?)
        })
        .collect::<Result<Vec<_>>>()?;
    TimeField::new(slices, f.interp())
}

/// Generator of the transformed process applied to a scalar field on the
/// grid: `d_t f + lambda grad f . (id - psi) + (1/2) Tr[s^T Hess f s]` with
/// `s = grad phi` at `psi`.
pub fn apply_ltilde(f: &TimeField, map: &ZvonkinMap) -> Result<TimeField> {
    let grid = *f.grid();
    if grid != *map.grid() {
        return Err(Error::mismatch("field and map grids differ"));
    }
    if f.arity() != Arity::Scalar {
        return Err(Error::mismatch("generator applies to scalar fields"));
    }
    let d = grid.dim;
    let dt = time_derivative(f)?;
    let slices = dt
        .into_par_iter()
        .enumerate()
        .map(|(k, dtk)| {
            let s = f.slice(k);
            let grad = s.gradient()?;
            let hess = s.hessian()?;
            let loc = (k, 0.0);
            let t = grid.time(k);
            let mut values = Vec::with_capacity(grid.len());
            for j in 0..grid.len() {
                let y = grid.point(j);
                let x = map.invert_at(loc, t, &y)?;
                let (drift, sigma) = map.coefficients_at_preimage(loc, &x);
                // drift already carries lambda u(t, psi(t, y)) = lambda (y - psi)
                let mut v = dtk.values(0)[j];
                for a in 0..d {
                    v += drift[a] * grad.values(a)[j];
                }
                let mut tr = 0.0;
                for p in 0..d {
                    for q in 0..d {
                        let mut aat = 0.0;
                        for r in 0..d {
                            aat += sigma[p][r] * sigma[q][r];
                        }
                        tr += hess.values(p * d + q)[j] * aat;
                    }
                }
                values.push(v + 0.5 * tr);
            }
            SpectralField::from_values(grid, Arity::Scalar, vec![values])
        })
        .collect::<Result<Vec<_>>>()?;
    TimeField::new(slices, f.interp())
}
