//! Grid density estimates from particle positions.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::{Arity, SpectralField};
use crate::grid::TorusGrid;
use crate::zvonkin::Point;

/// Rule-of-thumb bandwidth `std * M^{-1/(d+4)}`, with `std` the mean
/// per-axis sample standard deviation of the wrapped positions.
pub fn silverman_bandwidth(points: &[Point], grid: &TorusGrid) -> Result<f64> {
    let m = points.len();
    if m < 2 {
        return Err(Error::invalid("bandwidth needs at least two samples"));
    }
    let d = grid.dim;
    let mut spread = 0.0;
    for a in 0..d {
        let vals: Vec<f64> = points.iter().map(|p| grid.wrap(p[a])).collect();
        let mean = vals.iter().sum::<f64>() / m as f64;
        let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (m - 1) as f64;
        spread += var.sqrt();
    }
    spread /= d as f64;
    Ok(spread * (m as f64).powf(-1.0 / (d as f64 + 4.0)))
}

/// Cloud-in-cell deposit followed by a heat smoothing of duration `r^2`.
///
/// The mean mode is pinned to `1/L^d`, so the estimate has unit mass exactly.
pub fn kde_density(points: &[Point], grid: &TorusGrid, r: f64) -> Result<SpectralField> {
    if points.is_empty() {
        return Err(Error::invalid("density of an empty sample"));
    }
    if !(r >= 0.0) || !r.is_finite() {
        return Err(Error::invalid("bandwidth must be finite and nonnegative"));
    }
    let n = grid.n;
    let h = grid.spacing();
    let mut mass = vec![0.0; grid.len()];
    let w = 1.0 / (points.len() as f64 * grid.cell_volume());
    for p in points {
        let mut lo = [0usize; 2];
        let mut frac = [0.0; 2];
        for a in 0..grid.dim {
            let s = (grid.wrap(p[a]) - grid.origin()) / h;
            let f = s.floor();
            lo[a] = (f as i64).rem_euclid(n as i64) as usize;
            frac[a] = s - f;
        }
        if grid.dim == 1 {
            mass[lo[0]] += w * (1.0 - frac[0]);
            mass[(lo[0] + 1) % n] += w * frac[0];
        } else {
            for (di, wi) in [(0, 1.0 - frac[0]), (1, frac[0])] {
                for (dj, wj) in [(0, 1.0 - frac[1]), (1, frac[1])] {
                    let idx = grid.flat([(lo[0] + di) % n, (lo[1] + dj) % n]);
                    mass[idx] += w * wi * wj;
                }
            }
        }
    }
    let mut coeffs = crate::fft::forward_real(&mass, grid.dim, n);
    coeffs[0] = Complex64::new(1.0 / grid.volume(), 0.0);
    let raw = SpectralField::from_coeffs(*grid, Arity::Scalar, vec![coeffs])?;
    raw.heat(r * r)
}
