//! Independent finite-difference reference for one-dimensional backward
//! equations `v_t + v_xx / 2 + b v_x = g`, `v(T) = v_T` on a periodic grid.
//!
//! Crank-Nicolson in time with fourth-order centred stencils in space, and
//! Richardson extrapolation over the time steps `dt` and `dt / 2`.

#![allow(dead_code)]

/// Dense LU factorization with partial pivoting.
pub struct Lu {
    n: usize,
    a: Vec<f64>,
    piv: Vec<usize>,
}

impl Lu {
    pub fn new(mut a: Vec<f64>, n: usize) -> Self {
        let mut piv: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let mut p = k;
            for i in k + 1..n {
                if a[i * n + k].abs() > a[p * n + k].abs() {
                    p = i;
                }
            }
            if p != k {
                for j in 0..n {
                    a.swap(k * n + j, p * n + j);
                }
                piv.swap(k, p);
            }
            let d = a[k * n + k];
            for i in k + 1..n {
                let f = a[i * n + k] / d;
                a[i * n + k] = f;
                if f != 0.0 {
                    for j in k + 1..n {
                        a[i * n + j] -= f * a[k * n + j];
                    }
                }
            }
        }
        Self { n, a, piv }
    }

    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut x: Vec<f64> = self.piv.iter().map(|&p| rhs[p]).collect();
        for i in 0..n {
            for j in 0..i {
                x[i] -= self.a[i * n + j] * x[j];
            }
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                x[i] -= self.a[i * n + j] * x[j];
            }
            x[i] /= self.a[i * n + i];
        }
        x
    }
}

/// Spatial operator `w -> w_xx / 2 + b w_x` as a dense matrix.
fn operator(b: &[f64], h: f64) -> Vec<f64> {
    let n = b.len();
    let mut m = vec![0.0; n * n];
    let d1 = [1.0, -8.0, 0.0, 8.0, -1.0];
    let d2 = [-1.0, 16.0, -30.0, 16.0, -1.0];
    for j in 0..n {
        for (o, off) in (-2i64..=2).enumerate() {
            let c = (j as i64 + off).rem_euclid(n as i64) as usize;
            m[j * n + c] += 0.5 * d2[o] / (12.0 * h * h) + b[j] * d1[o] / (12.0 * h);
        }
    }
    m
}

fn crank_nicolson(
    b: &[f64],
    h: f64,
    horizon: f64,
    steps: usize,
    g: &dyn Fn(f64, usize) -> f64,
    terminal: &[f64],
) -> Vec<Vec<f64>> {
    let n = b.len();
    let dt = horizon / steps as f64;
    let a = operator(b, h);
    let mut lhs = vec![0.0; n * n];
    let mut rhs_m = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            let id = if i == j { 1.0 } else { 0.0 };
            lhs[i * n + j] = id - 0.5 * dt * a[i * n + j];
            rhs_m[i * n + j] = id + 0.5 * dt * a[i * n + j];
        }
    }
    let lu = Lu::new(lhs, n);
    // out[k] holds the solution at t_k = k dt; march backward from T
    let mut out = vec![vec![0.0; n]; steps + 1];
    out[steps] = terminal.to_vec();
    for k in (0..steps).rev() {
        let t_hi = (k + 1) as f64 * dt;
        let t_lo = k as f64 * dt;
        let w = &out[k + 1];
        let rhs: Vec<f64> = (0..n)
            .map(|i| {
                let mut s = 0.0;
                for j in 0..n {
                    s += rhs_m[i * n + j] * w[j];
                }
                s - 0.5 * dt * (g(t_hi, i) + g(t_lo, i))
            })
            .collect();
        out[k] = lu.solve(&rhs);
    }
    out
}

/// Reference solution at the `steps + 1` grid times.
pub fn reference_solution(
    b: &[f64],
    period: f64,
    horizon: f64,
    steps: usize,
    g: &dyn Fn(f64, usize) -> f64,
    terminal: &[f64],
) -> Vec<Vec<f64>> {
    let h = period / b.len() as f64;
    let coarse = crank_nicolson(b, h, horizon, steps, g, terminal);
    let fine = crank_nicolson(b, h, horizon, 2 * steps, g, terminal);
    coarse
        .iter()
        .enumerate()
        .map(|(k, c)| {
            c.iter()
                .zip(&fine[2 * k])
                .map(|(a, f)| (4.0 * f - a) / 3.0)
                .collect()
        })
        .collect()
}
