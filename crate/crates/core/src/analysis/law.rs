//! Distances between empirical laws and moment-growth fits.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::zvonkin::Point;

/// Number of projections used by the sliced distance in the plane.
pub const SLICES: usize = 64;
const SLICE_SEED: u64 = 0x51_1ce5;

/// `int |F_a - F_b| dx` for two samples on the line.
pub fn wasserstein1_line(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::invalid("empirical law of an empty sample"));
    }
    if a.iter().chain(b).any(|v| !v.is_finite()) {
        return Err(Error::invalid("non-finite sample"));
    }
    let mut sa = a.to_vec();
    let mut sb = b.to_vec();
    sa.sort_by(f64::total_cmp);
    sb.sort_by(f64::total_cmp);
    if sa.len() == sb.len() {
        let s: f64 = sa.iter().zip(&sb).map(|(x, y)| (x - y).abs()).sum();
        return Ok(s / sa.len() as f64);
    }
    let (wa, wb) = (1.0 / sa.len() as f64, 1.0 / sb.len() as f64);
    let (mut i, mut j) = (0, 0);
    let (mut fa, mut fb) = (0.0f64, 0.0f64);
    let mut last = sa[0].min(sb[0]);
    let mut total = 0.0;
    while i < sa.len() || j < sb.len() {
        let next = match (sa.get(i), sb.get(j)) {
            (Some(&x), Some(&y)) => x.min(y),
            (Some(&x), None) => x,
            (None, Some(&y)) => y,
            (None, None) => unreachable!(),
        };
        total += (fa - fb).abs() * (next - last);
        while i < sa.len() && sa[i] == next {
            fa += wa;
            i += 1;
        }
        while j < sb.len() && sb[j] == next {
            fb += wb;
            j += 1;
        }
        last = next;
    }
    Ok(total)
}

/// First Wasserstein distance between two empirical laws: exact in
/// dimension one, sliced over [`SLICES`] fixed directions in the plane.
pub fn wasserstein1(a: &[Point], b: &[Point], dim: usize) -> Result<f64> {
    match dim {
        1 => {
            let pa: Vec<f64> = a.iter().map(|p| p[0]).collect();
            let pb: Vec<f64> = b.iter().map(|p| p[0]).collect();
            wasserstein1_line(&pa, &pb)
        }
        2 => {
            let mut rng = ChaCha8Rng::seed_from_u64(SLICE_SEED);
            let mut acc = 0.0;
            for _ in 0..SLICES {
                let th: f64 = rng.gen_range(0.0..std::f64::consts::PI);
                let (c, s) = (th.cos(), th.sin());
                let pa: Vec<f64> = a.iter().map(|p| c * p[0] + s * p[1]).collect();
                let pb: Vec<f64> = b.iter().map(|p| c * p[0] + s * p[1]).collect();
                acc += wasserstein1_line(&pa, &pb)?;
            }
            Ok(acc / SLICES as f64)
        }
        _ => Err(Error::invalid("dimension must be 1 or 2")),
    }
}

/// Kolmogorov-Smirnov statistic of a sample against a continuous CDF.
pub fn ks_statistic(sample: &[f64], cdf: impl Fn(f64) -> f64) -> Result<f64> {
    if sample.is_empty() {
        return Err(Error::invalid("empty sample"));
    }
    let mut s = sample.to_vec();
    s.sort_by(f64::total_cmp);
    let m = s.len() as f64;
    Ok(s.iter().enumerate().fold(0.0, |d: f64, (i, &x)| {
        let f = cdf(x);
        d.max((f - i as f64 / m).abs()).max(((i + 1) as f64 / m - f).abs())
    }))
}

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

/// Fit of `E|Z_{s+l} - Z_s|^4` against the lag `l`.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentFit {
    pub lags: Vec<f64>,
    pub moments: Vec<f64>,
    /// Least-squares slope in log-log coordinates.
    pub slope: f64,
    /// `C` in `moment = C lag^2` with the exponent held at two.
    pub constant: f64,
}

/// Roughly geometric lags (in steps) covering `[lo, hi]` in time.
pub fn geometric_lags(steps: usize, horizon: f64, lo: f64, hi: f64, count: usize) -> Vec<usize> {
    let h = horizon / steps as f64;
    let mut out: Vec<usize> = (0..count)
        .map(|i| {
            let t = lo * (hi / lo).powf(i as f64 / (count.max(2) - 1) as f64);
            ((t / h).round() as usize).clamp(1, steps)
        })
        .collect();
    out.dedup();
    out
}

/// Fourth-moment growth of path-major data `paths * (steps + 1) * dim`,
/// averaging over all start times and paths.
pub fn fourth_moment_fit(data: &[f64], paths: usize, steps: usize, dim: usize, h: f64, lags: &[usize]) -> Result<MomentFit> {
    let s = steps + 1;
    if data.len() != paths * s * dim {
        return Err(Error::mismatch("data must be paths * (steps + 1) * dim"));
    }
    if lags.len() < 2 || lags.iter().any(|&l| l == 0 || l > steps) {
        return Err(Error::invalid("need at least two lags within the horizon"));
    }
    let mut moments = Vec::with_capacity(lags.len());
    for &l in lags {
        let mut acc = 0.0;
        let mut count = 0usize;
        for i in 0..paths {
            for k in 0..s - l {
                let mut r2 = 0.0;
                for a in 0..dim {
                    let dz = data[(i * s + k + l) * dim + a] - data[(i * s + k) * dim + a];
                    r2 += dz * dz;
                }
                acc += r2 * r2;
                count += 1;
            }
        }
        moments.push(acc / count as f64);
    }
    let lag_t: Vec<f64> = lags.iter().map(|&l| l as f64 * h).collect();
    let xs: Vec<f64> = lag_t.iter().map(|t| t.ln()).collect();
    let ys: Vec<f64> = moments.iter().map(|m| m.ln()).collect();
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let slope = sxy / sxx;
    let constant = (ys.iter().zip(&xs).map(|(y, x)| y - 2.0 * x).sum::<f64>() / n).exp();
    Ok(MomentFit { lags: lag_t, moments, slope, constant })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn w1_of_shift_is_shift() {
        let a: Vec<f64> = (0..100).map(|i| i as f64 / 10.0).collect();
        let b: Vec<f64> = a.iter().map(|v| v + 0.25).collect();
        assert!((wasserstein1_line(&a, &b).unwrap() - 0.25).abs() < 1e-12);
        // unequal sizes go through the CDF integral
        let c: Vec<f64> = a.iter().chain(a.iter()).map(|v| v + 0.25).collect();
        assert!((wasserstein1_line(&a, &c).unwrap() - 0.25).abs() < 1e-12);
    }

    #[test]
    fn normal_cdf_values() {
        assert!((normal_cdf(0.0) - 0.5).abs() < 1e-15);
        assert!((normal_cdf(1.959_964) - 0.975).abs() < 1e-6);
        assert!((normal_cdf(-1.0) - 0.158_655_25).abs() < 1e-6);
    }

    #[test]
    fn linear_growth_has_slope_four() {
        let steps = 100;
        let data: Vec<f64> = (0..=steps).map(|k| k as f64 * 0.01).collect();
        let fit = fourth_moment_fit(&data, 1, steps, 1, 0.01, &[2, 5, 10]).unwrap();
        assert!((fit.slope - 4.0).abs() < 1e-9);
    }

    #[test]
    fn lags_cover_window() {
        let l = geometric_lags(512, 1.0, 0.01, 0.1, 6);
        assert_eq!(l.first(), Some(&5));
        assert_eq!(l.last(), Some(&51));
    }
}
