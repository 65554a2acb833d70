//! Numerical check that the two generators are conjugate under the map:
//! `(Ltilde f~)(t, phi(t, x)) = L (f~ o phi)(t, x)`.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::{Arity, EvalMode, SpectralField, TimeField};
use crate::pde::{apply_l, apply_ltilde};
use crate::zvonkin::ZvonkinMap;

#[derive(Clone, Debug, PartialEq)]
pub struct ConjugationError {
    /// `absolute / scale`.
    pub relative: f64,
    pub absolute: f64,
    /// `sup |L (f~ o phi)|` over the compared slices.
    pub scale: f64,
    /// First and last compared time slice.
    pub slices: (usize, usize),
}

fn eval_mode(dim: usize) -> EvalMode {
    // direct summation is affordable on the line and exact for band-limited data
    if dim == 1 {
        EvalMode::ExactFourier
    } else {
        EvalMode::Interp
    }
}

/// `f~ o phi` on the grid, slice by slice.
pub fn compose_with_map(f_tilde: &TimeField, map: &ZvonkinMap) -> Result<TimeField> {
    let grid = *f_tilde.grid();
    if grid != *map.grid() || f_tilde.arity() != Arity::Scalar {
        return Err(Error::mismatch("composition needs a scalar field on the map grid"));
    }
    let mode = eval_mode(grid.dim);
    let slices = (0..=grid.steps)
        .into_par_iter()
        .map(|k| {
            let u = map.u().slice(k);
            let s = f_tilde.slice(k);
            let values = (0..grid.len())
                .map(|j| {
                    let mut y = grid.point(j);
                    for a in 0..grid.dim {
                        y[a] += u.values(a)[j];
                    }
                    s.evaluate(&y[..grid.dim], mode)[0]
                })
                .collect();
            SpectralField::from_values(grid, Arity::Scalar, vec![values])
        })
        .collect::<Result<Vec<_>>>()?;
    TimeField::new(slices, f_tilde.interp())
}

/// Sup-norm gap between both sides on the interior slices `[K/8, 7K/8]`.
pub fn conjugation_error(f_tilde: &TimeField, map: &ZvonkinMap, b: &TimeField) -> Result<ConjugationError> {
    let grid = *f_tilde.grid();
    if *b.grid() != grid {
        return Err(Error::mismatch("drift and test field grids differ"));
    }
    let lhs = apply_ltilde(f_tilde, map)?;
    let rhs = apply_l(&compose_with_map(f_tilde, map)?, b)?;
    let mode = eval_mode(grid.dim);
    let (k0, k1) = (grid.steps / 8, 7 * grid.steps / 8);
    let per_slice: Vec<(f64, f64)> = (k0..=k1)
        .into_par_iter()
        .map(|k| {
            let u = map.u().slice(k);
            let (l, r) = (lhs.slice(k), rhs.slice(k));
            let mut gap: f64 = 0.0;
            let mut scale: f64 = 0.0;
            for j in 0..grid.len() {
                let mut y = grid.point(j);
                for a in 0..grid.dim {
                    y[a] += u.values(a)[j];
                }
                let left = l.evaluate(&y[..grid.dim], mode)[0];
                let right = r.values(0)[j];
                gap = gap.max((left - right).abs());
                scale = scale.max(right.abs());
            }
            (gap, scale)
        })
        .collect();
    let absolute = per_slice.iter().map(|p| p.0).fold(0.0, f64::max);
    let scale = per_slice.iter().map(|p| p.1).fold(0.0, f64::max);
    if !(scale > 0.0) {
        return Err(Error::invalid("generator vanishes on the compared slices"));
    }
    Ok(ConjugationError { relative: absolute / scale, absolute, scale, slices: (k0, k1) })
}
