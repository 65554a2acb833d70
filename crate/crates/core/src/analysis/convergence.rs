//! Laws of mollified-drift solutions against the transformed-process solution.

use super::law::wasserstein1;
use crate::error::{Error, Result};
use crate::field::TimeField;
use crate::sde::{simulate_x_direct, InitialLaw, PathEnsemble, SimParams};

#[derive(Clone, Debug)]
pub struct ConvergenceStudy {
    pub n_list: Vec<u32>,
    /// Grid steps at which laws are compared.
    pub checkpoints: Vec<usize>,
    pub times: Vec<f64>,
    /// `to_reference[n][checkpoint]`
    pub to_reference: Vec<Vec<f64>>,
    /// `consecutive[pair][checkpoint]` between neighbouring ladder members.
    pub consecutive: Vec<Vec<f64>>,
    /// `3 / sqrt(M)`.
    pub noise_floor: f64,
}

impl ConvergenceStudy {
    /// Distance to the reference at the horizon, one entry per ladder member.
    pub fn terminal(&self) -> Vec<f64> {
        self.to_reference.iter().map(|r| *r.last().expect("checkpoints")).collect()
    }

    /// Drop of the terminal distance from the first to the last ladder member.
    pub fn terminal_drop(&self) -> f64 {
        let t = self.terminal();
        t[0] - t[t.len() - 1]
    }

    pub fn decreases_beyond_noise(&self) -> bool {
        self.terminal_drop() > self.noise_floor
    }
}

/// Simulates `dX = b^n dt + dW` for every member of `family` with the noise
/// of `params` and compares with `reference`, which must use the same paths
/// and step count.
pub fn convergence_study(
    family: &[(u32, TimeField)],
    reference: &PathEnsemble,
    law: &InitialLaw,
    params: &SimParams,
    checkpoints: &[usize],
) -> Result<ConvergenceStudy> {
    if family.is_empty() || checkpoints.is_empty() {
        return Err(Error::invalid("need a ladder and at least one checkpoint"));
    }
    if reference.paths != params.paths || reference.steps != params.steps {
        return Err(Error::mismatch("reference ensemble and parameters disagree"));
    }
    if checkpoints.iter().any(|&k| k > params.steps) {
        return Err(Error::invalid("checkpoint beyond the horizon"));
    }
    let d = reference.dim;
    let ref_cols: Vec<_> = checkpoints.iter().map(|&k| reference.x_column(k)).collect::<Result<_>>()?;
    let mut to_reference = Vec::new();
    let mut previous: Option<Vec<Vec<_>>> = None;
    let mut consecutive = Vec::new();
    for (_, b) in family {
        let ens = simulate_x_direct(b, law, params)?;
        let cols: Vec<_> = checkpoints.iter().map(|&k| ens.x_column(k)).collect::<Result<_>>()?;
        to_reference.push(cols.iter().zip(&ref_cols).map(|(a, r)| wasserstein1(a, r, d)).collect::<Result<Vec<_>>>()?);
        if let Some(prev) = &previous {
            consecutive.push(cols.iter().zip(prev).map(|(a, p)| wasserstein1(a, p, d)).collect::<Result<Vec<_>>>()?);
        }
        previous = Some(cols);
    }
    Ok(ConvergenceStudy {
        n_list: family.iter().map(|(n, _)| *n).collect(),
        checkpoints: checkpoints.to_vec(),
        times: checkpoints.iter().map(|&k| reference.time(k)).collect(),
        to_reference,
        consecutive,
        noise_floor: 3.0 / (params.paths as f64).sqrt(),
    })
}
