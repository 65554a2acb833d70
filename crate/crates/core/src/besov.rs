//! Littlewood-Paley blocks, Hölder-Zygmund norms and paraproducts.
//!
//! The low-frequency profile is `chi(xi) = 1 - S(s)` with `S` the quintic
//! smoothstep and `s` the position of `|xi|^2` between `(3/4)^2` and
//! `(4/3)^2`. Annulus profiles are `rho(xi) = chi(xi / 2) - chi(xi)`. The last
//! block collects every frequency above the previous ones so the blocks
//! reconstruct the field exactly on the grid.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fft;
use crate::field::{Dealiaser, SpectralField};
use crate::grid::TorusGrid;

const INNER: f64 = 0.75;
const OUTER: f64 = 4.0 / 3.0;

/// Largest supported `|gamma|`.
pub const MAX_INDEX: f64 = 4.0;

fn smoothstep(s: f64) -> f64 {
    let s = s.clamp(0.0, 1.0);
    s * s * s * (10.0 + s * (-15.0 + 6.0 * s))
}

/// Low-frequency cutoff profile as a function of `|xi|^2`.
pub fn cutoff(xi_sq: f64) -> f64 {
    let a = INNER * INNER;
    let b = OUTER * OUTER;
    1.0 - smoothstep((xi_sq - a) / (b - a))
}

/// Annulus profile as a function of `|xi|^2`.
pub fn annulus(xi_sq: f64) -> f64 {
    cutoff(xi_sq / 4.0) - cutoff(xi_sq)
}

/// Block multipliers for one grid, blocks ordered `j = -1, 0, ..., j_max`.
#[derive(Clone, Debug)]
pub struct DyadicPartition {
    grid: TorusGrid,
    j_max: i32,
    weights: Vec<Vec<f64>>,
}

impl DyadicPartition {
    pub fn new(grid: TorusGrid) -> Self {
        let j_max = (grid.n / 2).trailing_zeros() as i32 - 1;
        let mut weights = Vec::with_capacity(j_max as usize + 2);
        for j in -1..=j_max {
            let w = (0..grid.len())
                .map(|m| {
                    let k2 = grid.k_squared(m);
                    if j == -1 {
                        cutoff(k2)
                    } else if j == j_max {
                        1.0 - cutoff(k2 / 4f64.powi(j))
                    } else {
                        annulus(k2 / 4f64.powi(j))
                    }
                })
                .collect();
            weights.push(w);
        }
        Self { grid, j_max, weights }
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    pub fn j_max(&self) -> i32 {
        self.j_max
    }

    pub fn num_blocks(&self) -> usize {
        self.weights.len()
    }

    /// Multiplier of block `j` (`j >= -1`) at flat frequency index `m`.
    pub fn weight(&self, j: i32, m: usize) -> f64 {
        self.weights[(j + 1) as usize][m]
    }

    fn check(&self, f: &SpectralField) -> Result<()> {
        if *f.grid() != self.grid {
            return Err(Error::mismatch("field grid differs from partition grid"));
        }
        Ok(())
    }

    /// `Delta_{-1} f, ..., Delta_{j_max} f`.
    pub fn blocks(&self, f: &SpectralField) -> Result<Vec<SpectralField>> {
        self.check(f)?;
        Ok(self
            .weights
            .iter()
            .map(|w| f.map_modes(|m, c| c * w[m]))
            .collect())
    }

    /// Sup-norm of every block (maximum over components).
    pub fn block_sups(&self, f: &SpectralField) -> Result<Vec<f64>> {
        self.check(f)?;
        let g = &self.grid;
        Ok(self
            .weights
            .iter()
            .map(|w| {
                (0..f.num_components())
                    .map(|c| {
                        let coeffs: Vec<Complex64> =
                            f.coeffs(c).iter().zip(w).map(|(&a, &b)| a * b).collect();
                        fft::inverse_real(&coeffs, g.dim, g.n)
                            .into_iter()
                            .fold(0.0_f64, |m, v| m.max(v.abs()))
                    })
                    .fold(0.0, f64::max)
            })
            .collect())
    }

    /// `sup_j 2^{j gamma} sup |Delta_j f|`.
    pub fn norm(&self, f: &SpectralField, gamma: f64) -> Result<f64> {
        if !(gamma.abs() <= MAX_INDEX) {
            return Err(Error::invalid(format!(
                "regularity index {gamma} outside [-{MAX_INDEX}, {MAX_INDEX}]"
            )));
        }
        let sups = self.block_sups(f)?;
        Ok(sups
            .iter()
            .enumerate()
            .map(|(i, s)| 2f64.powf((i as f64 - 1.0) * gamma) * s)
            .fold(0.0, f64::max))
    }

    /// Bony decomposition `(T_f g, T_g f, R(f, g))` of two scalar fields.
    pub fn paraproducts(
        &self,
        f: &SpectralField,
        g: &SpectralField,
    ) -> Result<(SpectralField, SpectralField, SpectralField)> {
        self.check(f)?;
        self.check(g)?;
        if f.num_components() != 1 || g.num_components() != 1 {
            return Err(Error::mismatch("paraproducts need scalar fields"));
        }
        let dealias = Dealiaser::new(self.grid);
        let padded_blocks = |h: &SpectralField| -> Vec<Vec<f64>> {
            self.weights
                .iter()
                .map(|w| {
                    let c: Vec<Complex64> =
                        h.coeffs(0).iter().zip(w).map(|(&a, &b)| a * b).collect();
                    dealias.pad(&c)
                })
                .collect()
        };
        let fb = padded_blocks(f);
        let gb = padded_blocks(g);
        let len = dealias.padded_len();
        let nb = fb.len();
        let mut low_high = vec![0.0; len];
        let mut high_low = vec![0.0; len];
        let mut resonant = vec![0.0; len];
        // running partial sums S_{j-1} = sum_{i <= j-2} Delta_i
        let mut f_low = vec![0.0; len];
        let mut g_low = vec![0.0; len];
        for j in 0..nb {
            if j >= 2 {
                for p in 0..len {
                    f_low[p] += fb[j - 2][p];
                    g_low[p] += gb[j - 2][p];
                }
            }
            for p in 0..len {
                low_high[p] += f_low[p] * gb[j][p];
                high_low[p] += g_low[p] * fb[j][p];
            }
            for i in j.saturating_sub(1)..(j + 2).min(nb) {
                for p in 0..len {
                    resonant[p] += fb[i][p] * gb[j][p];
                }
            }
        }
        Ok((
            dealias.truncate_field(&low_high),
            dealias.truncate_field(&high_low),
            dealias.truncate_field(&resonant),
        ))
    }

    /// `||f g||_{-beta} / (||f||_alpha ||g||_{-beta})`.
    pub fn product_ratio(
        &self,
        f: &SpectralField,
        g: &SpectralField,
        alpha: f64,
        beta: f64,
    ) -> Result<f64> {
        let fg = f.product(g)?;
        let num = self.norm(&fg, -beta)?;
        let den = self.norm(f, alpha)? * self.norm(g, -beta)?;
        if den == 0.0 {
            return Ok(0.0);
        }
        Ok(num / den)
    }
}

/// Pointwise product of two scalar fields (dealiased).
pub fn bony_product(f: &SpectralField, g: &SpectralField) -> Result<SpectralField> {
    f.product(g)
}

/// Convenience wrapper building a partition for the field's grid.
pub fn besov_norm(f: &SpectralField, gamma: f64) -> Result<f64> {
    DyadicPartition::new(*f.grid()).norm(f, gamma)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Arity;

    fn grid(n: usize) -> TorusGrid {
        TorusGrid::line(n, 4).unwrap()
    }

    #[test]
    fn profiles_have_stated_supports() {
        for i in 0..=400 {
            let r = i as f64 * 0.01;
            let r2 = r * r;
            if r <= 0.75 {
                assert_eq!(cutoff(r2), 1.0);
            }
            if r >= 4.0 / 3.0 {
                assert_eq!(cutoff(r2), 0.0);
            }
            if r < 0.75 || r > 8.0 / 3.0 {
                assert_eq!(annulus(r2), 0.0);
            }
        }
    }

    #[test]
    fn constant_lives_in_low_block() {
        let g = grid(64);
        let p = DyadicPartition::new(g);
        let c = SpectralField::constant(g, 2.0);
        let blocks = p.blocks(&c).unwrap();
        assert!((blocks[0].sup_distance(&c)) < 1e-15);
        for b in &blocks[1..] {
            assert!(b.sup_norm() < 1e-15);
        }
        let v = p.norm(&c, 0.3).unwrap();
        assert!((v - 2f64.powf(-0.3) * 2.0).abs() < 1e-14);
        assert_eq!(p.norm(&SpectralField::zeros(g, Arity::Scalar), 1.0).unwrap(), 0.0);
        assert!(p.norm(&c, 4.5).is_err());
    }

    #[test]
    fn mode_eight_confined_to_adjacent_blocks() {
        let g = grid(64);
        let p = DyadicPartition::new(g);
        let f = SpectralField::from_fn(g, |x| (8.0 * x[0]).cos());
        let sups = p.block_sups(&f).unwrap();
        for (i, s) in sups.iter().enumerate() {
            let j = i as i32 - 1;
            if !(2..=4).contains(&j) {
                assert!(*s < 1e-14, "block {j} has {s}");
            }
        }
    }

    #[test]
    fn mode_eight_norm_against_direct_weights() {
        // explicit oracle: block sup of cos(8x) is the block weight at |k| = 8
        let g = grid(64);
        let p = DyadicPartition::new(g);
        let f = SpectralField::from_fn(g, |x| (8.0 * x[0]).cos());
        let step = |s: f64| {
            let s = s.clamp(0.0, 1.0);
            6.0 * s.powi(5) - 15.0 * s.powi(4) + 10.0 * s.powi(3)
        };
        let chi = |r: f64| 1.0 - step((r * r - 0.5625) / (16.0 / 9.0 - 0.5625));
        let gamma = -0.25;
        let mut expected: f64 = 0.0;
        for j in 0..4 {
            let scale = 2f64.powi(j);
            let w = chi(8.0 / (2.0 * scale)) - chi(8.0 / scale);
            expected = expected.max(2f64.powf(j as f64 * gamma) * w);
        }
        let got = p.norm(&f, gamma).unwrap();
        assert!((got - expected).abs() < 1e-12, "{got} vs {expected}");
        let target = 8f64.powf(-0.25);
        assert!((got - target).abs() < 0.2 * target, "{got} vs {target}");
    }

    #[test]
    fn blocks_reconstruct_field() {
        let g = grid(128);
        let p = DyadicPartition::new(g);
        let f = SpectralField::from_fn(g, |x| {
            (x[0]).sin() + 0.2 * (17.0 * x[0]).cos() + 0.05 * (60.0 * x[0] + 0.3).sin()
        });
        let blocks = p.blocks(&f).unwrap();
        let mut sum = SpectralField::zeros(g, Arity::Scalar);
        for b in &blocks {
            sum = sum.add(b).unwrap();
        }
        assert!(sum.sup_distance(&f) < 1e-12);
    }

    #[test]
    fn paraproducts_sum_to_product() {
        let g = grid(64);
        let p = DyadicPartition::new(g);
        let f = SpectralField::from_fn(g, |x| (x[0]).cos() + 0.3 * (9.0 * x[0]).sin());
        let h = SpectralField::from_fn(g, |x| (3.0 * x[0]).sin() + 0.5 * (20.0 * x[0]).cos());
        let (a, b, r) = p.paraproducts(&f, &h).unwrap();
        let sum = a.add(&b).unwrap().add(&r).unwrap();
        let prod = bony_product(&f, &h).unwrap();
        assert!(sum.sup_distance(&prod) < 1e-10);
        let one = SpectralField::constant(g, 1.0);
        assert!(bony_product(&one, &h).unwrap().sup_distance(&h) < 1e-14);
    }
}
