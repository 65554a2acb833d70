//! Ito-formula residuals along simulated paths.
//!
//! For a space-time field `f` with `g = (d_t + L) f` the process
//! `D_t = f(t, X_t) - f(0, X_0) - int_0^t g(s, X_s) ds` is a martingale and
//! should match the discrete stochastic integral `S_t = sum grad f . dW`.

use rayon::prelude::*;

use super::bracket::column_stats;
use super::fp::TestFunctionBank;
use crate::error::{Error, Result};
use crate::field::{Arity, Stencil, TimeField};
use crate::sde::PathEnsemble;
use crate::zvonkin::Point;

/// Path-major `paths * (steps + 1)` arrays of `D` and `S`.
#[derive(Clone, Debug)]
pub struct ItoResidual {
    pub paths: usize,
    pub steps: usize,
    pub times: Vec<f64>,
    pub d: Vec<f64>,
    pub s: Vec<f64>,
}

impl ItoResidual {
    /// `D - S` path by path.
    pub fn remainder(&self) -> Vec<f64> {
        self.d.iter().zip(&self.s).map(|(a, b)| a - b).collect()
    }

    /// Mean and standard error of `D - S` at every time.
    pub fn remainder_stats(&self) -> (Vec<f64>, Vec<f64>) {
        column_stats(&self.remainder(), self.paths, self.steps + 1)
    }

    /// Mean and standard error of `|D - S|` at every time.
    pub fn abs_remainder_stats(&self) -> (Vec<f64>, Vec<f64>) {
        let r: Vec<f64> = self.remainder().into_iter().map(f64::abs).collect();
        column_stats(&r, self.paths, self.steps + 1)
    }

    /// `(sup_t |mean (D - S)|, standard error at the maximizer)`.
    pub fn bias_sup(&self) -> (f64, f64) {
        let (mean, se) = self.remainder_stats();
        let (k, _) = mean
            .iter()
            .enumerate()
            .fold((0, -1.0), |best, (k, m)| if m.abs() > best.1 { (k, m.abs()) } else { best });
        (mean[k].abs(), se[k])
    }

    /// `sup_t mean |D - S|`.
    pub fn abs_sup(&self) -> f64 {
        self.abs_remainder_stats().0.into_iter().fold(0.0, f64::max)
    }
}

/// Builds `D` and `S` for `f`, source `g`, the ensemble's `X` paths and the
/// increments stored with them.
pub fn ito_residual(f: &TimeField, g: &TimeField, ens: &PathEnsemble) -> Result<ItoResidual> {
    if f.arity() != Arity::Scalar || g.arity() != Arity::Scalar {
        return Err(Error::mismatch("f and g must be scalar"));
    }
    let grid = *f.grid();
    if *g.grid() != grid || grid.dim != ens.dim {
        return Err(Error::mismatch("f, g and the ensemble must share a grid"));
    }
    let x = ens.x.as_deref().ok_or_else(|| Error::invalid("ensemble carries no X paths"))?;
    let dw = ens.dw.as_deref().ok_or_else(|| Error::invalid("ensemble carries no increments"))?;
    let grad = f.map_slices(|s| s.gradient())?;
    let d = ens.dim;
    let st = ens.steps + 1;
    let h = ens.dt();
    let times: Vec<f64> = (0..st).map(|k| ens.time(k)).collect();
    let locs_f: Vec<(usize, f64)> = times.iter().map(|&t| f.locate(t)).collect::<Result<_>>()?;
    let locs_g: Vec<(usize, f64)> = times.iter().map(|&t| g.locate(t)).collect::<Result<_>>()?;
    let rows: Vec<(Vec<f64>, Vec<f64>)> = (0..ens.paths)
        .into_par_iter()
        .map(|i| {
            let mut dr = Vec::with_capacity(st);
            let mut sr = Vec::with_capacity(st);
            let (mut f0, mut area, mut prev_g, mut stoch) = (0.0, 0.0, 0.0, 0.0);
            for k in 0..st {
                let base = (i * st + k) * d;
                let mut p: Point = [0.0; 2];
                p[..d].copy_from_slice(&x[base..base + d]);
                let stencil = Stencil::new(&grid, &p);
                let fv = f.interp_at(0, locs_f[k], &stencil);
                let gv = g.interp_at(0, locs_g[k], &stencil);
                if k == 0 {
                    f0 = fv;
                } else {
                    area += 0.5 * (prev_g + gv) * h;
                }
                dr.push(fv - f0 - area);
                sr.push(stoch);
                if k < ens.steps {
                    let wb = (i * ens.steps + k) * d;
                    for a in 0..d {
                        stoch += grad.interp_at(a, locs_f[k], &stencil) * dw[wb + a];
                    }
                }
                prev_g = gv;
            }
            (dr, sr)
        })
        .collect();
    let mut dd = Vec::with_capacity(ens.paths * st);
    let mut ss = Vec::with_capacity(ens.paths * st);
    for (a, b) in rows {
        dd.extend(a);
        ss.extend(b);
    }
    Ok(ItoResidual { paths: ens.paths, steps: ens.steps, times, d: dd, s: ss })
}

/// Sample correlation of a martingale increment with a test function of the
/// past: `E[(D_{k1} - D_{k0}) phi(X_{k0})]`.
#[derive(Clone, Debug, PartialEq)]
pub struct IncrementCorrelation {
    pub label: String,
    pub from: usize,
    pub to: usize,
    pub value: f64,
    pub se: f64,
}

impl IncrementCorrelation {
    pub fn within(&self, k_se: f64) -> bool {
        self.value.abs() <= k_se * self.se
    }
}

/// Correlations over `checkpoints` equal blocks of the time grid, for every
/// non-constant bank member.
pub fn increment_correlations(
    res: &ItoResidual,
    ens: &PathEnsemble,
    bank: &TestFunctionBank,
    checkpoints: usize,
) -> Result<Vec<IncrementCorrelation>> {
    if checkpoints == 0 || checkpoints > res.steps {
        return Err(Error::invalid("checkpoints must lie between 1 and the number of steps"));
    }
    let st = res.steps + 1;
    let marks: Vec<usize> = (0..=checkpoints).map(|j| j * res.steps / checkpoints).collect();
    let m = res.paths as f64;
    let mut out = Vec::new();
    for tf in bank.members().iter().filter(|t| t.modes != [0, 0]) {
        for w in marks.windows(2) {
            let (k0, k1) = (w[0], w[1]);
            let vals: Vec<f64> = (0..res.paths)
                .map(|i| {
                    let p = ens.x_at(i, k0).expect("paths checked");
                    (res.d[i * st + k1] - res.d[i * st + k0]) * tf.phi.interp_component(0, &p)
                })
                .collect();
            let mean = vals.iter().sum::<f64>() / m;
            let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (m - 1.0).max(1.0);
            out.push(IncrementCorrelation {
                label: tf.label.clone(),
                from: k0,
                to: k1,
                value: mean,
                se: (var / m).sqrt(),
            });
        }
    }
    Ok(out)
}

/// Largest relative gap between the forward integral of `grad f` against
/// `d A(b)` and the time integral of `grad f . b`, both by the same left rule.
pub fn forward_integral_gap(f: &TimeField, b: &TimeField, ens: &PathEnsemble) -> Result<f64> {
    let grid = *f.grid();
    if *b.grid() != grid || b.arity() != Arity::Vector {
        return Err(Error::mismatch("drift must be a vector field on the grid of f"));
    }
    let grad = f.map_slices(|s| s.gradient())?;
    let d = ens.dim;
    let st = ens.steps + 1;
    let h = ens.dt();
    let locs_f: Vec<(usize, f64)> = (0..st).map(|k| f.locate(ens.time(k))).collect::<Result<_>>()?;
    let locs_b: Vec<(usize, f64)> = (0..st).map(|k| b.locate(ens.time(k))).collect::<Result<_>>()?;
    let gaps: Vec<f64> = (0..ens.paths)
        .into_par_iter()
        .map(|i| {
            let (mut lhs, mut rhs, mut scale) = (0.0, 0.0, 0.0);
            let mut area = [0.0; 2];
            for k in 0..ens.steps {
                let p = ens.x_at(i, k).expect("paths checked");
                let stencil = Stencil::new(&grid, &p);
                for a in 0..d {
                    let gf = grad.interp_at(a, locs_f[k], &stencil);
                    let bv = b.interp_at(a, locs_b[k], &stencil);
                    // increment of A(b_a) over one step, then the forward sum
                    let next = area[a] + bv * h;
                    lhs += gf * (next - area[a]);
                    area[a] = next;
                    rhs += gf * bv * h;
                    scale += (gf * bv * h).abs();
                }
            }
            if scale > 0.0 {
                (lhs - rhs).abs() / scale
            } else {
                0.0
            }
        })
        .collect();
    Ok(gaps.into_iter().fold(0.0, f64::max))
}
