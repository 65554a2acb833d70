//! Reproducible rough random drifts and their mollified families.
//!
//! Every Fourier mode draws from its own counter-based stream keyed by the
//! component and the signed mode numbers, so a drift synthesized on a finer
//! grid extends the coarse one instead of replacing it.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::besov::DyadicPartition;
use crate::error::{Error, Result};
use crate::field::{Arity, SpectralField, TimeField, TimeInterp};
use crate::grid::TorusGrid;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum TimeMode {
    #[default]
    Static,
    /// Multiplies the static profile by `1 + sin(omega t) / 2`.
    Modulated { omega: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DriftSpec {
    pub beta: f64,
    /// Regularity margin used for the `gamma+` / `gamma-` index choices.
    pub eps: f64,
    pub sigma: f64,
    pub seed: u64,
    pub time_mode: TimeMode,
    pub window: bool,
}

impl Default for DriftSpec {
    fn default() -> Self {
        Self {
            beta: 0.25,
            eps: 0.05,
            sigma: 1.0,
            seed: 1,
            time_mode: TimeMode::Static,
            window: false,
        }
    }
}

impl DriftSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.beta > 0.0 && self.beta < 0.5) {
            return Err(Error::invalid(format!(
                "drift roughness beta must satisfy 0 < beta < 1/2, got {}",
                self.beta
            )));
        }
        if !(self.eps > 0.0 && self.eps < 0.5) {
            return Err(Error::invalid(format!("regularity margin must lie in (0, 1/2), got {}", self.eps)));
        }
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return Err(Error::invalid(format!("amplitude must be nonnegative, got {}", self.sigma)));
        }
        if let TimeMode::Modulated { omega } = self.time_mode {
            if !omega.is_finite() {
                return Err(Error::invalid("modulation frequency must be finite"));
            }
        }
        Ok(())
    }

    /// Decay exponent of the coefficient standard deviations.
    pub fn exponent(&self, dim: usize) -> f64 {
        dim as f64 / 2.0 - self.beta + self.eps
    }

    pub fn modulation(&self, t: f64) -> f64 {
        match self.time_mode {
            TimeMode::Static => 1.0,
            TimeMode::Modulated { omega } => 1.0 + 0.5 * (omega * t).sin(),
        }
    }
}

const MODE_BITS: u32 = 21;
const MODE_OFFSET: i64 = 1 << (MODE_BITS - 1);

fn stream_key(stream: u64, modes: [i64; 2]) -> u64 {
    let a = (modes[0] + MODE_OFFSET) as u64;
    let b = (modes[1] + MODE_OFFSET) as u64;
    (stream << (2 * MODE_BITS)) | (a << MODE_BITS) | b
}

/// Representative of the pair `{m, -m}`: first nonzero entry positive.
fn canonical(modes: [i64; 2]) -> ([i64; 2], bool) {
    let first = if modes[0] != 0 { modes[0] } else { modes[1] };
    if first >= 0 {
        (modes, false)
    } else {
        ([-modes[0], -modes[1]], true)
    }
}

/// Real Gaussian Fourier series with coefficient standard deviation
/// `sigma (1 + |k|)^{-s}`. `stream` separates independent fields drawn from
/// one seed. Nyquist modes are left at zero.
pub fn gaussian_series(grid: TorusGrid, seed: u64, stream: u64, s: f64, sigma: f64) -> SpectralField {
    let coeffs: Vec<Complex64> = (0..grid.len())
        .map(|m| {
            if grid.is_nyquist(m) || sigma == 0.0 {
                return Complex64::new(0.0, 0.0);
            }
            let modes = grid.modes(m);
            let (rep, flipped) = canonical(modes);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(stream_key(stream, rep));
            let a: f64 = StandardNormal.sample(&mut rng);
            let b: f64 = StandardNormal.sample(&mut rng);
            let sd = sigma * (1.0 + grid.k_squared(m).sqrt()).powf(-s);
            if modes == [0, 0] {
                Complex64::new(sd * a, 0.0)
            } else {
                let c = Complex64::new(a, b) * (sd / std::f64::consts::SQRT_2);
                if flipped {
                    c.conj()
                } else {
                    c
                }
            }
        })
        .collect();
    SpectralField::from_coeffs(grid, Arity::Scalar, vec![coeffs]).expect("shape is consistent")
}

/// Smooth bump equal to 1 on the middle 60% of each axis and vanishing
/// outside the middle 80%.
pub fn window_profile(grid: &TorusGrid, x: &[f64]) -> f64 {
    fn smooth_step(s: f64) -> f64 {
        if s <= 0.0 {
            return 0.0;
        }
        if s >= 1.0 {
            return 1.0;
        }
        let a = (-1.0 / s).exp();
        let b = (-1.0 / (1.0 - s)).exp();
        a / (a + b)
    }
    let inner = 0.3 * grid.period;
    let outer = 0.4 * grid.period;
    (0..grid.dim)
        .map(|a| {
            let r = grid.wrap(x[a]).abs();
            smooth_step((outer - r) / (outer - inner))
        })
        .product()
}

/// Static spatial profile of the drift (one slice).
pub fn synthesize_profile(spec: &DriftSpec, grid: TorusGrid) -> Result<SpectralField> {
    spec.validate()?;
    let s = spec.exponent(grid.dim);
    let mut parts: Vec<SpectralField> = (0..grid.dim)
        .map(|c| gaussian_series(grid, spec.seed, c as u64, s, spec.sigma))
        .collect();
    if spec.window {
        let w: Vec<f64> = (0..grid.len())
            .map(|j| window_profile(&grid, &grid.point(j)[..grid.dim]))
            .collect();
        parts = parts
            .into_iter()
            .map(|p| {
                let v: Vec<f64> = p.values(0).iter().zip(&w).map(|(a, b)| a * b).collect();
                SpectralField::from_values(grid, Arity::Scalar, vec![v])
            })
            .collect::<Result<_>>()?;
    }
    SpectralField::from_components(parts, Arity::Vector)
}

/// Vector drift on the grid's time samples.
pub fn synthesize_drift(spec: &DriftSpec, grid: TorusGrid) -> Result<TimeField> {
    let profile = synthesize_profile(spec, grid)?;
    if spec.time_mode == TimeMode::Static {
        return Ok(TimeField::constant_in_time(profile));
    }
    let slices = (0..=grid.steps)
        .map(|k| profile.scaled(spec.modulation(grid.time(k))))
        .collect();
    TimeField::new(slices, TimeInterp::Linear)
}

/// Mollifies every slice of `b` with each index of the strictly increasing
/// `n_list`.
pub fn smoothing_family(b: &TimeField, n_list: &[u32]) -> Result<Vec<TimeField>> {
    if n_list.is_empty() {
        return Err(Error::invalid("mollification ladder is empty"));
    }
    if n_list.windows(2).any(|w| w[0] >= w[1]) || n_list[0] == 0 {
        return Err(Error::invalid("mollification indices must be positive and strictly increasing"));
    }
    n_list
        .iter()
        .map(|&n| b.map_slices(|s| s.mollify(n)))
        .collect()
}

/// Norm growth of a drift profile under grid refinement.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegularityCertificate {
    pub sizes: Vec<usize>,
    /// Index below the nominal regularity, expected to stay bounded.
    pub low_index: f64,
    pub low_norms: Vec<f64>,
    /// Index above the nominal regularity, expected to grow.
    pub high_index: f64,
    pub high_norms: Vec<f64>,
    pub passed: bool,
}

/// Synthesizes the profile at `N/4`, `N/2`, `N` and compares the norms at
/// `-beta - eps` (bounded within 20%) and `-beta + 2 eps` (strictly growing).
pub fn regularity_certificate(spec: &DriftSpec, grid: TorusGrid) -> Result<RegularityCertificate> {
    spec.validate()?;
    let sizes: Vec<usize> = [grid.n / 4, grid.n / 2, grid.n]
        .into_iter()
        .filter(|&n| n >= 16)
        .collect();
    let low_index = -spec.beta - spec.eps;
    let high_index = -spec.beta + 2.0 * spec.eps;
    let mut low_norms = Vec::new();
    let mut high_norms = Vec::new();
    for &n in &sizes {
        let g = grid.refined(n, grid.steps)?;
        let profile = synthesize_profile(spec, g)?;
        let p = DyadicPartition::new(g);
        low_norms.push(p.norm(&profile, low_index)?);
        high_norms.push(p.norm(&profile, high_index)?);
    }
    let passed = if spec.sigma == 0.0 {
        true
    } else {
        let lo = low_norms.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = low_norms.iter().cloned().fold(0.0, f64::max);
        let bounded = hi <= 1.2 * lo;
        let growing = high_norms.windows(2).all(|w| w[1] > w[0]);
        bounded && growing
    };
    Ok(RegularityCertificate { sizes, low_index, low_norms, high_index, high_norms, passed })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec() -> DriftSpec {
        DriftSpec { seed: 7, ..DriftSpec::default() }
    }

    #[test]
    fn zero_amplitude_gives_zero_drift() {
        let g = TorusGrid::line(64, 4).unwrap();
        let b = synthesize_drift(&DriftSpec { sigma: 0.0, ..spec() }, g).unwrap();
        assert_eq!(b.sup_norm(), 0.0);
    }

    #[test]
    fn rejects_out_of_range_beta() {
        let g = TorusGrid::line(64, 4).unwrap();
        for beta in [0.0, 0.5, 0.6, -0.1] {
            assert!(synthesize_drift(&DriftSpec { beta, ..spec() }, g).is_err());
        }
    }

    #[test]
    fn coarse_grid_is_truncation_of_fine() {
        let coarse = TorusGrid::line(64, 4).unwrap();
        let fine = TorusGrid::line(256, 4).unwrap();
        let a = synthesize_profile(&spec(), coarse).unwrap();
        let b = synthesize_profile(&spec(), fine).unwrap();
        for i in 1..32 {
            let ca = a.coeffs(0)[coarse.index_of_mode(-(i as i64))];
            let cb = b.coeffs(0)[fine.index_of_mode(-(i as i64))];
            assert!((ca - cb).norm() < 1e-12);
        }
    }

    #[test]
    fn modulated_drift_is_periodic_in_time() {
        let g = TorusGrid::new(1, 32, 2.0 * std::f64::consts::PI, 2.0, 8).unwrap();
        let s = DriftSpec {
            time_mode: TimeMode::Modulated { omega: 2.0 * std::f64::consts::PI },
            ..spec()
        };
        let b = synthesize_drift(&s, g).unwrap();
        // slices at t = 0.5 and 1.5
        assert!(b.slice(2).sup_distance(b.slice(6)) < 1e-12);
    }

    #[test]
    fn window_kills_outer_band() {
        let g = TorusGrid::line(256, 4).unwrap();
        let b = synthesize_profile(&DriftSpec { window: true, ..spec() }, g).unwrap();
        for j in 0..g.len() {
            let x = g.point(j)[0];
            if x.abs() > 0.45 * g.period {
                let v = b.fourier_component(0, &[x]);
                assert!(v.abs() < 1e-8, "x {x} value {v}");
            }
        }
    }

    #[test]
    fn family_rejects_unsorted_ladder() {
        let g = TorusGrid::line(32, 4).unwrap();
        let b = synthesize_drift(&spec(), g).unwrap();
        assert!(smoothing_family(&b, &[4, 2]).is_err());
        assert_eq!(smoothing_family(&b, &[2, 4]).unwrap().len(), 2);
    }
}
