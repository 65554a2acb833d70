use std::f64::consts::PI;

use zvonkin_core::analysis::{
    bracket, convergence_study, fp_residual, increment_correlations, ito_residual, kde_density,
    silverman_bandwidth, wasserstein1, TestFunctionBank,
};
use zvonkin_core::drift::{smoothing_family, synthesize_drift, window_profile, DriftSpec};
use zvonkin_core::field::{Arity, SpectralField, TimeField};
use zvonkin_core::pde::{apply_l, solve_terminal, SolverParams};
use zvonkin_core::sde::{local_time, sample_initial, simulate_x_direct, InitialLaw, PathEnsemble, SimParams, Storage};
use zvonkin_core::{Point, TorusGrid};

fn zero_drift(g: TorusGrid) -> TimeField {
    TimeField::constant_in_time(SpectralField::zeros(g, Arity::Vector))
}

fn gaussian(var: f64) -> InitialLaw {
    InitialLaw::Gaussian { mean: vec![0.0], covariance: vec![vec![var]] }
}

fn run(b: &TimeField, law: &InitialLaw, paths: usize, seed: u64, storage: Storage) -> PathEnsemble {
    let mut p = SimParams::new(paths, b.grid().steps, seed);
    p.storage = storage;
    simulate_x_direct(b, law, &p).unwrap()
}

fn x_and_dw() -> Storage {
    Storage { x: true, y: false, dw: true }
}

/// Centred Gaussian density wrapped onto the cell.
fn periodized_gaussian(g: TorusGrid, var: f64) -> SpectralField {
    SpectralField::from_fn(g, move |x| {
        (-6..=6)
            .map(|j| {
                let y = x[0] + j as f64 * g.period;
                (-y * y / (2.0 * var)).exp()
            })
            .sum::<f64>()
            / (2.0 * PI * var).sqrt()
    })
}

fn l1_distance(a: &SpectralField, b: &SpectralField) -> f64 {
    let dx = a.grid().cell_volume();
    a.values(0).iter().zip(b.values(0)).map(|(p, q)| (p - q).abs()).sum::<f64>() * dx
}

fn column(ens: &PathEnsemble, k: usize) -> Vec<Point> {
    ens.x_column(k).unwrap()
}

#[test]
fn kde_of_coincident_samples_peaks_at_their_cell() {
    let g = TorusGrid::line(64, 4).unwrap();
    let j = 40;
    let x = g.point(j)[0] + 0.1 * g.spacing();
    let pts = vec![[x, 0.0]; 500];
    let v = kde_density(&pts, &g, 0.01).unwrap();
    let mass = v.values(0).iter().sum::<f64>() * g.cell_volume();
    assert!((mass - 1.0).abs() < 1e-12, "{mass}");
    let top = v.values(0).iter().enumerate().fold((0, f64::MIN), |b, (i, &w)| if w > b.1 { (i, w) } else { b });
    assert_eq!(top.0, j);
}

#[test]
fn kde_of_brownian_marginal_matches_gaussian() {
    let g = TorusGrid::line(128, 16).unwrap();
    let ens = run(&zero_drift(g), &InitialLaw::dirac_origin(1), 100_000, 1, Storage { x: true, y: false, dw: false });
    let pts = column(&ens, 16);
    let r = silverman_bandwidth(&pts, &g).unwrap();
    let v = kde_density(&pts, &g, r).unwrap();
    let err = l1_distance(&v, &periodized_gaussian(g, 1.0 + r * r));
    assert!(err <= 0.05, "{err}");
}

#[test]
fn kde_of_uniform_law_is_flat() {
    let g = TorusGrid::line(64, 4).unwrap();
    let half = g.period / 2.0;
    let law = InitialLaw::Uniform { low: vec![-half], high: vec![half] };
    let m = 100_000;
    let pts = sample_initial(&law, &g, m, 3).unwrap();
    let r = silverman_bandwidth(&pts, &g).unwrap();
    let v = kde_density(&pts, &g, r).unwrap();
    let flat = SpectralField::constant(g, 1.0 / g.volume());
    let err = l1_distance(&v, &flat);
    assert!(err <= 3.0 / (m as f64).sqrt() + r * r, "{err} (r = {r})");
}

#[test]
fn fp_residual_vanishes_on_exact_heat_flow() {
    let g = TorusGrid::line(128, 512).unwrap();
    let bank = TestFunctionBank::new(g, 4).unwrap();
    let times: Vec<f64> = (0..=g.steps).map(|k| g.time(k)).collect();
    let dens: Vec<SpectralField> = times.iter().map(|t| periodized_gaussian(g, 0.25 + t)).collect();
    let res = fp_residual(&dens, &times, &zero_drift(g), &bank).unwrap();
    assert!(res.sup() <= 1e-4, "{}", res.sup());
    // the sampled Gaussians carry unit mass only up to round-off
    assert!(res.residuals[0].iter().all(|r| r.abs() < 1e-12));
}

#[test]
fn bracket_with_deterministic_process_is_negligible() {
    let g = TorusGrid::line(64, 256).unwrap();
    let ens = run(&zero_drift(g), &gaussian(1.0), 5000, 2, Storage { x: true, y: false, dw: false });
    let s = g.steps + 1;
    let det: Vec<f64> = (0..ens.paths).flat_map(|_| (0..s).map(|k| (3.0 * g.time(k)).sin())).collect();
    let x: Vec<f64> = ens.x.clone().unwrap();
    let est = bracket(&det, &x, ens.paths, g.steps, g.dt(), 10).unwrap();
    for (m, r) in est.mean.iter().zip(&est.radius) {
        assert!(m.abs() <= r.max(1e-12), "{m} vs {r}");
    }
}

#[test]
fn bracket_of_bump_matches_time_integral_of_squared_gradient() {
    let g = TorusGrid::line(256, 256).unwrap();
    let b = smoothing_family(&synthesize_drift(&DriftSpec::default(), g).unwrap(), &[4]).unwrap().remove(0);
    let ens = run(&b, &gaussian(1.0), 10_000, 1, Storage { x: true, y: false, dw: false });
    let bump = SpectralField::from_fn(g, |x| (-x[0] * x[0] / 2.0).exp());
    let grad = bump.derivative(0).unwrap();
    let sq = TimeField::constant_in_time(grad.product(&grad).unwrap());
    let s = g.steps + 1;
    let fx: Vec<f64> = (0..ens.paths)
        .flat_map(|i| (0..s).map(move |k| (i, k)))
        .map(|(i, k)| bump.interp_component(0, &ens.x_at(i, k).unwrap()))
        .collect();
    let est = bracket(&fx, &fx, ens.paths, g.steps, g.dt(), 10).unwrap();
    let a = local_time(&sq, &ens).unwrap();
    let target = (0..ens.paths).map(|i| a[i * s + g.steps]).sum::<f64>() / ens.paths as f64;
    let (value, _) = est.terminal();
    assert!((value - target).abs() <= 0.05 * target, "{value} vs {target}");
}

#[test]
fn spatially_constant_f_has_no_residual() {
    let g = TorusGrid::line(32, 64).unwrap();
    let ens = run(&zero_drift(g), &gaussian(1.0), 200, 3, x_and_dw());
    let f = TimeField::from_fn(g, |t, _| t * t);
    let src = TimeField::from_fn(g, |t, _| 2.0 * t);
    let res = ito_residual(&f, &src, &ens).unwrap();
    assert!(res.d.iter().all(|v| v.abs() < 1e-13));
    assert!(res.s.iter().all(|v| *v == 0.0));
}

fn heat_residual(steps: usize) -> (f64, f64, f64) {
    let g = TorusGrid::line(128, steps).unwrap();
    let bump = SpectralField::from_fn(g, |x| (-x[0] * x[0]).exp());
    let slices: Vec<SpectralField> =
        (0..=steps).map(|k| bump.heat(g.horizon - g.time(k)).unwrap()).collect();
    let f = TimeField::new(slices, Default::default()).unwrap();
    let src = TimeField::constant_in_time(SpectralField::zeros(g, Arity::Scalar));
    let ens = run(&zero_drift(g), &gaussian(1.0), 10_000, 4, x_and_dw());
    let res = ito_residual(&f, &src, &ens).unwrap();
    let (bias, se) = res.bias_sup();
    (bias, se, res.abs_sup())
}

#[test]
fn ito_residual_of_heat_extension() {
    let (bias, se, coarse) = heat_residual(64);
    assert!(bias <= 3.0 * se, "{bias} vs {se}");
    let (bias, se, fine) = heat_residual(256);
    assert!(bias <= 3.0 * se, "{bias} vs {se}");
    assert!(fine < coarse, "{coarse} -> {fine}");
}

#[test]
fn martingale_increments_are_uncorrelated_with_the_past() {
    let g = TorusGrid::line(256, 256).unwrap();
    let b = smoothing_family(&synthesize_drift(&DriftSpec::default(), g).unwrap(), &[16]).unwrap().remove(0);
    let src = TimeField::constant_in_time(SpectralField::zeros(g, Arity::Scalar));
    let terminal = SpectralField::from_fn(g, |x| (-x[0] * x[0] / 2.0).exp());
    let f = solve_terminal(&b, &src, &terminal, &SolverParams::default()).unwrap().field;
    let ens = run(&b, &gaussian(1.0), 10_000, 5, x_and_dw());
    let res = ito_residual(&f, &src, &ens).unwrap();
    let bank = TestFunctionBank::new(g, 1).unwrap();
    let corr = increment_correlations(&res, &ens, &bank, 4).unwrap();
    assert_eq!(corr.len(), 8);
    for c in &corr {
        assert!(c.within(3.0), "{c:?}");
    }
}

#[test]
fn coordinate_surrogate_recovers_the_integral_equation() {
    // f = x w(x) is the identity where the window equals one
    let g = TorusGrid::line(512, 256).unwrap();
    let b = smoothing_family(&synthesize_drift(&DriftSpec::default(), g).unwrap(), &[16]).unwrap().remove(0);
    let f = TimeField::from_fn(g, move |_, x| x[0] * window_profile(&g, x));
    let lf = apply_l(&f, &b).unwrap();
    let ens = run(&b, &gaussian(0.1), 2000, 6, x_and_dw());
    let res = ito_residual(&f, &lf, &ens).unwrap();
    let rem = res.remainder();
    let s = g.steps + 1;
    let h = g.dt();
    let b_sup = b.sup_norm();
    let inner = 0.25 * g.period;
    let mut confined = 0;
    for i in 0..ens.paths {
        if (0..s).any(|k| ens.x_at(i, k).unwrap()[0].abs() >= inner) {
            continue;
        }
        confined += 1;
        // Euler's left rule against trapezoids telescopes to h (b_0 - b_t) / 2
        for k in 0..s {
            assert!(rem[i * s + k].abs() <= h * b_sup + 1e-4, "path {i} step {k}: {}", rem[i * s + k]);
        }
    }
    assert!(confined > ens.paths / 2, "{confined}");
}

#[test]
fn wasserstein_examples() {
    let line = |v: &[f64]| v.iter().map(|&x| [x, 0.0]).collect::<Vec<Point>>();
    let a = line(&[0.3, -1.0, 2.0]);
    assert_eq!(wasserstein1(&a, &a, 1).unwrap(), 0.0);
    assert_eq!(wasserstein1(&line(&[0.0; 4]), &line(&[1.0; 4]), 1).unwrap(), 1.0);

    let g = TorusGrid::line(32, 4).unwrap();
    let m = 100_000;
    let p = sample_initial(&gaussian(1.0), &g, m, 8).unwrap();
    let shifted = InitialLaw::Gaussian { mean: vec![0.3], covariance: vec![vec![1.0]] };
    let q = sample_initial(&shifted, &g, m, 9).unwrap();
    let w = wasserstein1(&p, &q, 1).unwrap();
    assert!((w - 0.3).abs() <= 0.02, "{w}");
}

#[test]
fn zero_drift_ladder_stays_within_noise() {
    let g = TorusGrid::line(64, 64).unwrap();
    let zero = zero_drift(g);
    let family: Vec<(u32, TimeField)> = [4, 16, 64].iter().map(|&n| (n, zero.clone())).collect();
    let law = gaussian(1.0);
    let mut p = SimParams::new(10_000, 64, 10);
    p.storage = Storage { x: true, y: false, dw: false };
    let reference = simulate_x_direct(&zero, &law, &p).unwrap();
    let study = convergence_study(&family, &reference, &law, &p, &[16, 32, 64]).unwrap();
    for row in study.to_reference.iter().chain(&study.consecutive) {
        assert!(row.iter().all(|&w| w <= study.noise_floor), "{row:?}");
    }
}
