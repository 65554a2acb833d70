//! Regularized covariation of sampled processes.

use rayon::prelude::*;

use crate::error::{Error, Result};

/// Ensemble summary of `[A, B]^eps_t` at every grid time.
#[derive(Clone, Debug, PartialEq)]
pub struct BracketEstimate {
    pub eps: f64,
    pub times: Vec<f64>,
    pub mean: Vec<f64>,
    /// Standard error of the mean.
    pub se: Vec<f64>,
    /// `3 * se`.
    pub radius: Vec<f64>,
}

impl BracketEstimate {
    pub fn terminal(&self) -> (f64, f64) {
        let k = self.mean.len() - 1;
        (self.mean[k], self.se[k])
    }
}

fn check(a: &[f64], b: &[f64], paths: usize, steps: usize, h: f64, lag: usize) -> Result<()> {
    let s = steps + 1;
    if a.len() != paths * s || b.len() != paths * s {
        return Err(Error::mismatch("processes must be paths * (steps + 1), path-major"));
    }
    if lag < 2 || lag > steps {
        return Err(Error::invalid("window must span between 2 and `steps` grid steps"));
    }
    if !(h > 0.0) {
        return Err(Error::invalid("step must be positive"));
    }
    Ok(())
}

/// Per-path `(1/eps) int_0^t (A_{s+eps} - A_s)(B_{s+eps} - B_s) ds` with
/// `eps = lag * h`, left Riemann sums on the grid, and both processes held
/// constant after the horizon. Returned path-major, `paths * (steps + 1)`.
pub fn bracket_paths(a: &[f64], b: &[f64], paths: usize, steps: usize, h: f64, lag: usize) -> Result<Vec<f64>> {
    check(a, b, paths, steps, h, lag)?;
    let s = steps + 1;
    let scale = 1.0 / lag as f64;
    let mut out = vec![0.0; paths * s];
    out.par_chunks_mut(s).enumerate().for_each(|(i, row)| {
        let pa = &a[i * s..(i + 1) * s];
        let pb = &b[i * s..(i + 1) * s];
        let mut acc = 0.0;
        row[0] = 0.0;
        for k in 0..steps {
            let e = (k + lag).min(steps);
            acc += (pa[e] - pa[k]) * (pb[e] - pb[k]) * scale;
            row[k + 1] = acc;
        }
    });
    Ok(out)
}

/// Mean and standard error over paths of [`bracket_paths`].
pub fn bracket(a: &[f64], b: &[f64], paths: usize, steps: usize, h: f64, lag: usize) -> Result<BracketEstimate> {
    let per_path = bracket_paths(a, b, paths, steps, h, lag)?;
    let (mean, se) = column_stats(&per_path, paths, steps + 1);
    Ok(BracketEstimate {
        eps: lag as f64 * h,
        times: (0..=steps).map(|k| k as f64 * h).collect(),
        radius: se.iter().map(|s| 3.0 * s).collect(),
        mean,
        se,
    })
}

/// Column means and standard errors of a path-major `paths * cols` array.
pub fn column_stats(data: &[f64], paths: usize, cols: usize) -> (Vec<f64>, Vec<f64>) {
    let m = paths as f64;
    let mut sum = vec![0.0; cols];
    let mut sq = vec![0.0; cols];
    for row in data.chunks(cols) {
        for (k, v) in row.iter().enumerate() {
            sum[k] += v;
            sq[k] += v * v;
        }
    }
    let mean: Vec<f64> = sum.iter().map(|s| s / m).collect();
    let se = if paths > 1 {
        sq.iter()
            .zip(&mean)
            .map(|(q, mu)| ((q / m - mu * mu).max(0.0) * m / (m - 1.0) / m).sqrt())
            .collect()
    } else {
        vec![f64::INFINITY; cols]
    };
    (mean, se)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_paths_have_small_bracket() {
        // A_t = t has [A, A]^eps_T = int (min(eps, T-s))^2 / eps ds ~ eps
        let steps = 100;
        let h = 0.01;
        let a: Vec<f64> = (0..=steps).map(|k| k as f64 * h).collect();
        let est = bracket(&a, &a, 1, steps, h, 5).unwrap();
        let (v, _) = est.terminal();
        assert!(v > 0.0 && v < 0.05 + 1e-12);
    }

    #[test]
    fn rejects_bad_window() {
        let a = vec![0.0; 11];
        assert!(bracket(&a, &a, 1, 10, 0.1, 1).is_err());
        assert!(bracket(&a, &a, 1, 10, 0.1, 11).is_err());
    }
}
