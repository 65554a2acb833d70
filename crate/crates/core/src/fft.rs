//! Thin wrapper over `rustfft` for 1-D and 2-D periodic transforms.
//!
//! Coefficients follow the Fourier-series convention: `forward` divides by the
//! number of samples, `inverse` is the plain sum.

use std::cell::RefCell;

use num_complex::Complex64;
use rustfft::FftPlanner;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

fn columns(data: &mut [Complex64], rows: usize, cols: usize, inverse: bool) {
    let plan = PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if inverse {
            p.plan_fft_inverse(rows)
        } else {
            p.plan_fft_forward(rows)
        }
    });
    let mut column = vec![ZERO; rows];
    for c in 0..cols {
        for r in 0..rows {
            column[r] = data[r * cols + c];
        }
        plan.process(&mut column);
        for r in 0..rows {
            data[r * cols + c] = column[r];
        }
    }
}

fn run(data: &mut [Complex64], dim: usize, n: usize, inverse: bool) {
    debug_assert_eq!(data.len(), n.pow(dim as u32));
    let plan = PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if inverse {
            p.plan_fft_inverse(n)
        } else {
            p.plan_fft_forward(n)
        }
    });
    // rows (also the whole transform when dim == 1)
    plan.process(data);
    if dim == 2 {
        columns(data, n, n, inverse);
    }
}

/// Samples to Fourier-series coefficients.
pub fn forward(data: &mut [Complex64], dim: usize, n: usize) {
    run(data, dim, n, false);
    let scale = 1.0 / data.len() as f64;
    for v in data.iter_mut() {
        *v *= scale;
    }
}

/// Fourier-series coefficients to samples.
pub fn inverse(data: &mut [Complex64], dim: usize, n: usize) {
    run(data, dim, n, true);
}

/// Real samples to coefficients.
pub fn forward_real(values: &[f64], dim: usize, n: usize) -> Vec<Complex64> {
    let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    forward(&mut buf, dim, n);
    buf
}

/// Coefficients of a real field to samples (imaginary round-off dropped).
pub fn inverse_real(coeffs: &[Complex64], dim: usize, n: usize) -> Vec<f64> {
    let mut buf = coeffs.to_vec();
    inverse(&mut buf, dim, n);
    buf.into_iter().map(|c| c.re).collect()
}
