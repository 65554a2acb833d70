//! Weak-form residual of the forward equation `d_t v = (1/2) lap v - div(v b)`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::field::{Arity, SpectralField, TimeField};
use crate::grid::TorusGrid;
use num_complex::Complex64;

/// One test function with its derivatives precomputed.
#[derive(Clone, Debug)]
pub struct TestFunction {
    pub label: String,
    pub modes: [i64; 2],
    pub phi: SpectralField,
    half_laplacian: SpectralField,
    gradient: Vec<SpectralField>,
}

/// Real trigonometric monomials `cos(2 pi k.x / L)` and `sin(2 pi k.x / L)`
/// with `max_a |k_a| <= m_max`, one member per pair `{k, -k}` plus the
/// constant: `(2 m_max + 1)^d` functions in all.
#[derive(Clone, Debug)]
pub struct TestFunctionBank {
    grid: TorusGrid,
    m_max: i64,
    members: Vec<TestFunction>,
}

impl TestFunctionBank {
    pub fn new(grid: TorusGrid, m_max: usize) -> Result<Self> {
        let m = m_max as i64;
        if 2 * m >= grid.n as i64 {
            return Err(Error::invalid("test-function modes exceed the grid band"));
        }
        let d = grid.dim;
        let omega = 2.0 * PI / grid.period;
        let mut members = Vec::new();
        let range: Vec<i64> = (-m..=m).collect();
        let second: Vec<i64> = if d == 2 { range.clone() } else { vec![0] };
        for &k0 in &range {
            for &k1 in &second {
                let k = [k0, k1];
                // keep one representative of each pair {k, -k}
                let canonical = k0 > 0 || (k0 == 0 && k1 > 0);
                if k == [0, 0] {
                    members.push(Self::member(grid, "1".into(), k, |_| 1.0)?);
                } else if canonical {
                    let phase = move |x: &[f64]| omega * (k0 as f64 * x[0] + if d == 2 { k1 as f64 * x[1] } else { 0.0 });
                    let tag = if d == 2 { format!("{k0},{k1}") } else { format!("{k0}") };
                    members.push(Self::member(grid, format!("cos({tag})"), k, move |x| phase(x).cos())?);
                    members.push(Self::member(grid, format!("sin({tag})"), k, move |x| phase(x).sin())?);
                }
            }
        }
        Ok(Self { grid, m_max: m, members })
    }

    fn member(grid: TorusGrid, label: String, modes: [i64; 2], f: impl Fn(&[f64]) -> f64) -> Result<TestFunction> {
        // keep only the modes +-k so that round-off does not leak into other
        // modes; the constant then has an exactly vanishing generator
        let sampled = SpectralField::from_fn(grid, f);
        let keep = |m: [i64; 2]| grid.flat([grid.index_of_mode(m[0]), grid.index_of_mode(m[1])]);
        let mut coeffs = vec![Complex64::new(0.0, 0.0); grid.len()];
        for m in [modes, [-modes[0], -modes[1]]] {
            let i = keep(m);
            coeffs[i] = sampled.coeffs(0)[i];
        }
        let phi = SpectralField::from_coeffs(grid, Arity::Scalar, vec![coeffs])?;
        let half_laplacian = phi.laplacian().scaled(0.5);
        let gradient = phi.gradient()?.components();
        Ok(TestFunction { label, modes, phi, half_laplacian, gradient })
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    pub fn m_max(&self) -> usize {
        self.m_max as usize
    }

    pub fn members(&self) -> &[TestFunction] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

/// `R_phi(t)` for every bank member at every density time.
#[derive(Clone, Debug)]
pub struct FpResidual {
    pub times: Vec<f64>,
    pub labels: Vec<String>,
    /// `residuals[member][time]`
    pub residuals: Vec<Vec<f64>>,
}

impl FpResidual {
    /// `max_phi |R_phi(t_last)|`.
    pub fn terminal_max(&self) -> f64 {
        self.residuals.iter().map(|r| r.last().copied().unwrap_or(0.0).abs()).fold(0.0, f64::max)
    }

    /// `max_{phi, t} |R_phi(t)|`.
    pub fn sup(&self) -> f64 {
        self.residuals.iter().flatten().fold(0.0, |m: f64, v| m.max(v.abs()))
    }
}

/// Residual `<phi, v_t> - <phi, v_0> - int_0^t <(1/2) lap phi + b . grad phi, v_s> ds`
/// of density slices `densities[k]` at `times[k]`, time integral by trapezoids.
pub fn fp_residual(
    densities: &[SpectralField],
    times: &[f64],
    b: &TimeField,
    bank: &TestFunctionBank,
) -> Result<FpResidual> {
    if densities.len() != times.len() || densities.is_empty() {
        return Err(Error::mismatch("need one time per density slice"));
    }
    if b.arity() != Arity::Vector {
        return Err(Error::mismatch("drift must be vector-valued"));
    }
    let grid = *bank.grid();
    if *b.grid() != grid || densities.iter().any(|v| *v.grid() != grid || v.arity() != Arity::Scalar) {
        return Err(Error::mismatch("densities, drift and bank must share a scalar grid"));
    }
    let nm = bank.len();
    // generator pairing and state pairing per member, per time
    let mut state = vec![vec![0.0; times.len()]; nm];
    let mut generator = vec![vec![0.0; times.len()]; nm];
    for (k, (v, &t)) in densities.iter().zip(times).enumerate() {
        let bt = b.at_time(t)?;
        let flux: Vec<SpectralField> =
            (0..grid.dim).map(|a| v.product(&bt.component(a))).collect::<Result<_>>()?;
        for (i, tf) in bank.members().iter().enumerate() {
            state[i][k] = tf.phi.pairing(v);
            let mut g = tf.half_laplacian.pairing(v);
            for (a, fl) in flux.iter().enumerate() {
                g += tf.gradient[a].pairing(fl);
            }
            generator[i][k] = g;
        }
    }
    let residuals = (0..nm)
        .map(|i| {
            let mut acc = 0.0;
            let mut out = Vec::with_capacity(times.len());
            for k in 0..times.len() {
                if k > 0 {
                    acc += 0.5 * (generator[i][k - 1] + generator[i][k]) * (times[k] - times[k - 1]);
                }
                out.push(state[i][k] - state[i][0] - acc);
            }
            out
        })
        .collect();
    Ok(FpResidual {
        times: times.to_vec(),
        labels: bank.members().iter().map(|m| m.label.clone()).collect(),
        residuals,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bank_size() {
        let g1 = TorusGrid::line(32, 4).unwrap();
        assert_eq!(TestFunctionBank::new(g1, 4).unwrap().len(), 9);
        let g2 = TorusGrid::new(2, 32, 2.0 * PI, 1.0, 4).unwrap();
        assert_eq!(TestFunctionBank::new(g2, 2).unwrap().len(), 25);
    }

    #[test]
    fn heat_flow_has_small_residual() {
        // v_t = periodized Gaussian of variance 0.3 + t, no drift
        let g = TorusGrid::line(128, 8).unwrap();
        let bank = TestFunctionBank::new(g, 3).unwrap();
        let b = TimeField::constant_in_time(SpectralField::zeros(g, Arity::Vector));
        let base = kde_like(g);
        let times: Vec<f64> = (0..=400).map(|k| k as f64 / 400.0).collect();
        let dens: Vec<SpectralField> = times.iter().map(|&t| base.heat(t).unwrap()).collect();
        let res = fp_residual(&dens, &times, &b, &bank).unwrap();
        assert!(res.sup() < 1e-5, "{}", res.sup());
    }

    fn kde_like(g: TorusGrid) -> SpectralField {
        let mut f = SpectralField::from_fn(g, |x| (-x[0] * x[0] / 0.6).exp());
        let mass = f.coeffs(0)[0].re * g.volume();
        f = f.scaled(1.0 / mass);
        f
    }
}
