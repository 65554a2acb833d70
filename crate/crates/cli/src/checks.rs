//! Verification routines behind `verify` and `converge`. Each returns a
//! report whose check ids name what was tested.

use anyhow::{Context, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use zvonkin_core::analysis::{
    bracket_paths, conjugation_error, convergence_study, fourth_moment_fit, forward_integral_gap,
    fp_residual, geometric_lags, increment_correlations, ito_residual, kde_density, ks_statistic, normal_cdf,
    silverman_bandwidth, TestFunctionBank,
};
use zvonkin_core::analysis::bracket::column_stats;
use zvonkin_core::besov::DyadicPartition;
use zvonkin_core::drift::{gaussian_series, synthesize_drift};
use zvonkin_core::pde::{select_lambda, solve_terminal, solve_u};
use zvonkin_core::sde::{
    local_time, simulate_x_direct, simulate_y, InitialLaw, PathEnsemble, SimParams, Storage,
};
use zvonkin_core::{Arity, Check, Series, SpectralField, TimeField, TorusGrid, VerificationReport, ZvonkinMap};

use crate::config::RunConfig;
use crate::lab::{Lab, Member};

/// Bank size for the martingale increment test; a handful of correlations
/// keeps the family-wise false-alarm rate low.
const CORRELATION_M_MAX: usize = 1;

pub const KOLMOGOROV_LAGS: (f64, f64) = (0.01, 0.1);

fn seeds(cfg: &RunConfig) -> [u64; 2] {
    [cfg.drift.seed, cfg.sde.seed]
}

/// `exp(-|x|^2 / 2)` on the grid.
pub fn bump(grid: TorusGrid) -> SpectralField {
    let d = grid.dim;
    SpectralField::from_fn(grid, move |x| (-0.5 * x[..d].iter().map(|v| v * v).sum::<f64>()).exp())
}

fn zero_scalar(grid: TorusGrid) -> TimeField {
    TimeField::constant_in_time(SpectralField::zeros(grid, Arity::Scalar))
}

fn x_only() -> Storage {
    Storage { x: true, y: false, dw: false }
}

fn x_and_dw() -> Storage {
    Storage { x: true, y: false, dw: true }
}

/// Component `a` of X as a path-major `paths * (steps + 1)` array.
fn axis_process(ens: &PathEnsemble, a: usize) -> Result<Vec<f64>> {
    let x = ens.x.as_deref().context("ensemble carries no X paths")?;
    Ok(x.iter().skip(a).step_by(ens.dim).copied().collect())
}

/// `f(t_k, X_k)` for a time-independent scalar field.
fn compose_paths(f: &SpectralField, ens: &PathEnsemble) -> Result<Vec<f64>> {
    let x = ens.x.as_deref().context("ensemble carries no X paths")?;
    let d = ens.dim;
    Ok(x.chunks(d)
        .map(|p| {
            let mut q = [0.0; 2];
            q[..d].copy_from_slice(p);
            f.interp_component(0, &q)
        })
        .collect())
}

/// Corpus-wide constant of the product estimate `||fg||_{-beta} <= c ||f||_alpha ||g||_{-beta}`
/// at three resolutions.
pub fn bony_constant(cfg: &RunConfig) -> Result<VerificationReport> {
    let base = cfg.grid();
    let d = base.dim as f64;
    let sizes = [base.n / 2, base.n, 2 * base.n];
    let pairs = cfg.analysis.corpus_pairs;
    let mut series = Series::new("bony", &["n", "pair", "alpha", "beta", "ratio"]);
    let mut constants = Vec::new();
    for &n in &sizes {
        let grid = base.refined(n, 1)?;
        let part = DyadicPartition::new(grid);
        let mut c: f64 = 0.0;
        for p in 0..pairs {
            let beta = 0.1 + 0.1 * (p % 4) as f64;
            let alpha = beta + 0.2 + 0.15 * ((p / 4) % 5) as f64;
            // a small margin keeps both norms finite uniformly in the resolution
            let f = gaussian_series(grid, 1000 * cfg.drift.seed + p as u64, 0, d / 2.0 + alpha + 0.05, 1.0);
            let g = gaussian_series(grid, 1000 * cfg.drift.seed + p as u64, 1, d / 2.0 - beta + 0.05, 1.0);
            let r = part.product_ratio(&f, &g, alpha, beta)?;
            series.push(vec![n as f64, p as f64, alpha, beta, r])?;
            c = c.max(r);
        }
        constants.push(c);
    }
    let lo = constants.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = constants.iter().cloned().fold(0.0, f64::max);
    let spread = hi / lo - 1.0;
    let mut check = Check::at_most("bony-constant", spread, 0.15).seeds(&[cfg.drift.seed]);
    for (n, c) in sizes.iter().zip(&constants) {
        check = check.detail(format!("c_n{n}"), *c);
    }
    let mut r = VerificationReport::new();
    r.push(check);
    r.push_series(series);
    Ok(r)
}

/// `sup |grad u| <= 1/2` for the drift and every ladder member at the selected lambda.
pub fn gradient_bound(lab: &mut Lab) -> Result<VerificationReport> {
    let s = seeds(&lab.cfg);
    let tel = lab.telemetry()?;
    let lambda = lab.selection()?.lambda;
    let worst = tel.iter().map(|t| t.grad_sup).fold(0.0, f64::max);
    let mut check = Check::at_most("gradient-bound", worst, 0.5).seeds(&s).detail("lambda", lambda);
    for t in &tel {
        check = check.detail(format!("grad_sup_{}", t.member), t.grad_sup);
    }
    let mut r = VerificationReport::new();
    r.push(check);
    Ok(r)
}

/// Round trip `phi(t, psi(t, y)) = y` on random probes.
pub fn inversion(lab: &mut Lab) -> Result<VerificationReport> {
    let map = lab.map(Member::Full)?;
    let grid = lab.grid();
    let mut rng = ChaCha8Rng::seed_from_u64(lab.cfg.sde.seed);
    let mut worst: f64 = 0.0;
    for _ in 0..lab.cfg.analysis.probes {
        let t = rng.gen_range(0.0..=grid.horizon);
        let mut y = [0.0; 2];
        for v in y.iter_mut().take(grid.dim) {
            *v = rng.gen_range(-0.6..0.6) * grid.period;
        }
        let x = map.invert(t, &y)?;
        let back = map.forward(t, &x)?;
        for a in 0..grid.dim {
            worst = worst.max((back[a] - y[a]).abs());
        }
    }
    let mut r = VerificationReport::new();
    r.push(Check::at_most("inversion", worst, 1e-9).seeds(&seeds(&lab.cfg)));
    Ok(r)
}

fn conjugation_test_field(grid: TorusGrid) -> TimeField {
    let last = grid.dim - 1;
    TimeField::from_fn(grid, move |t, x| (0.8 * x[0].cos() + 0.3 * (2.0 * x[last]).sin()).exp() * (1.0 + 0.5 * t * t))
}

fn conjugation_at(cfg: &RunConfig, grid: TorusGrid) -> Result<(f64, f64)> {
    let b = synthesize_drift(&cfg.drift, grid)?.map_slices(|s| s.mollify(cfg.analysis.conjugation_n))?;
    let (u, lambda) = match cfg.pde.lambda {
        Some(l) => (solve_u(&b, l, &cfg.pde.solver)?.u, l),
        None => {
            let sel = select_lambda(std::slice::from_ref(&b), &cfg.pde.solver)?;
            (sel.solutions.into_iter().next().expect("one member").u, sel.lambda)
        }
    };
    let map = ZvonkinMap::build(u, lambda)?;
    let err = conjugation_error(&conjugation_test_field(grid), &map, &b)?;
    Ok((err.relative, lambda))
}

/// Conjugation of the two generators under the map for a smooth drift, at
/// the configured resolution and with space and time refined together.
pub fn lemma_ll(cfg: &RunConfig) -> Result<VerificationReport> {
    let grid = cfg.grid();
    let fine = grid.refined(2 * grid.n, 2 * grid.steps)?;
    let (coarse_err, lambda) = conjugation_at(cfg, grid)?;
    let (fine_err, _) = conjugation_at(cfg, fine)?;
    let s = seeds(cfg);
    let mut r = VerificationReport::new();
    r.push(Check::at_most("lemma-ll", coarse_err, 1e-2).seeds(&s).detail("lambda", lambda));
    r.push(
        Check::new("lemma-ll-refinement", fine_err, coarse_err, fine_err < coarse_err)
            .seeds(&s)
            .note(format!("relative error at N = {} and N = {}", grid.n, fine.n)),
    );
    Ok(r)
}

/// With no drift and a point mass at the origin, X_T is Gaussian with variance T.
pub fn zero_drift_law(cfg: &RunConfig) -> Result<VerificationReport> {
    let grid = cfg.grid();
    let b = TimeField::constant_in_time(SpectralField::zeros(grid, Arity::Vector));
    let mut p = SimParams::new(cfg.sde.paths, grid.steps, cfg.sde.seed);
    p.storage = x_only();
    let ens = simulate_x_direct(&b, &InitialLaw::dirac_origin(grid.dim), &p)?;
    let col = ens.x_column(grid.steps)?;
    let sd = grid.horizon.sqrt();
    let mut worst: f64 = 0.0;
    for a in 0..grid.dim {
        let v: Vec<f64> = col.iter().map(|q| q[a]).collect();
        worst = worst.max(ks_statistic(&v, |x| normal_cdf(x / sd))?);
    }
    let mut r = VerificationReport::new();
    r.push(Check::at_most("zero-drift-law", worst, 3.0 / (cfg.sde.paths as f64).sqrt()).seeds(&[cfg.sde.seed]));
    Ok(r)
}

/// Bracket of the coordinates of X with a mollified drift: the identity matrix times t.
pub fn brownian_bracket(lab: &mut Lab) -> Result<VerificationReport> {
    let b = lab.member(Member::Mollified(lab.cfg.analysis.bracket_n))?;
    let grid = lab.grid();
    let ens = simulate_x_direct(&b, &lab.law(), &lab.sim_params(x_only()))?;
    let lag = lab.cfg.bracket_lag();
    let (m, k, h) = (ens.paths, ens.steps, ens.dt());
    let axes: Vec<Vec<f64>> = (0..grid.dim).map(|a| axis_process(&ens, a)).collect::<Result<_>>()?;
    let s = seeds(&lab.cfg);
    let mut r = VerificationReport::new();
    let mut series = Series::new("bracket", &["t", "axis_i", "axis_j", "mean", "se"]);
    let mut diag: f64 = 0.0;
    let mut cross: f64 = 0.0;
    for i in 0..grid.dim {
        for j in i..grid.dim {
            let per_path = bracket_paths(&axes[i], &axes[j], m, k, h, lag)?;
            let (mean, se) = column_stats(&per_path, m, k + 1);
            for (q, (mu, e)) in mean.iter().zip(&se).enumerate().step_by((k / 64).max(1)) {
                series.push(vec![ens.time(q), i as f64, j as f64, *mu, *e])?;
            }
            let target = if i == j { grid.horizon } else { 0.0 };
            let gap = (mean[k] - target).abs();
            if i == j {
                diag = diag.max(gap);
            } else {
                cross = cross.max(gap);
            }
        }
    }
    r.push(Check::at_most("bracket-brownian", diag, 0.05).seeds(&s).detail("eps", lag as f64 * h));
    if grid.dim > 1 {
        r.push(Check::at_most("bracket-cross", cross, 0.05).seeds(&s));
    }
    r.push_series(series);
    Ok(r)
}

/// Bracket of `f(X)` for a bump `f` against the time integral of `|grad f|^2` along X.
pub fn covariation(lab: &mut Lab) -> Result<VerificationReport> {
    let b = lab.member(Member::Mollified(lab.cfg.analysis.smooth_n))?;
    let grid = lab.grid();
    let ens = simulate_x_direct(&b, &lab.law(), &lab.sim_params(x_only()))?;
    let f = bump(grid);
    let grad = f.gradient()?;
    let sq = TimeField::constant_in_time(grad.dot(&grad)?);
    let fx = compose_paths(&f, &ens)?;
    let (m, k) = (ens.paths, ens.steps);
    let per_path = bracket_paths(&fx, &fx, m, k, ens.dt(), lab.cfg.bracket_lag())?;
    let (mean, se) = column_stats(&per_path, m, k + 1);
    let a = local_time(&sq, &ens)?;
    let target = (0..m).map(|i| a[i * (k + 1) + k]).sum::<f64>() / m as f64;
    let rel = (mean[k] - target).abs() / target;
    let mut r = VerificationReport::new();
    r.push(
        Check::at_most("covariation", rel, 0.05)
            .seeds(&seeds(&lab.cfg))
            .detail("bracket", mean[k])
            .detail("bracket_se", se[k])
            .detail("time_integral", target),
    );
    Ok(r)
}

/// Fourth moments of the transformed process along the ladder, plus the
/// boundary diagnostic of the recovered X.
pub fn kolmogorov(lab: &mut Lab) -> Result<VerificationReport> {
    let grid = lab.grid();
    let law = lab.law();
    let params = lab.sim_params(Storage { x: false, y: true, dw: false });
    let lags = geometric_lags(grid.steps, grid.horizon, KOLMOGOROV_LAGS.0, KOLMOGOROV_LAGS.1, 8);
    let mut series = Series::new("kolmogorov", &["n", "lag", "moment"]);
    let mut slopes = Vec::new();
    let mut constants = Vec::new();
    let mut boundary: f64 = 0.0;
    for n in lab.cfg.analysis.n_list.clone() {
        let map = lab.map(Member::Mollified(n))?;
        let ens = simulate_y(&map, &law, &params)?;
        let y = ens.y.as_deref().context("Y paths")?;
        let fit = fourth_moment_fit(y, ens.paths, ens.steps, ens.dim, ens.dt(), &lags)?;
        for (l, mo) in fit.lags.iter().zip(&fit.moments) {
            series.push(vec![n as f64, *l, *mo])?;
        }
        slopes.push((n, fit.slope));
        constants.push((n, fit.constant));
        boundary = boundary.max(ens.boundary_fraction);
    }
    let s = seeds(&lab.cfg);
    let min_slope = slopes.iter().map(|x| x.1).fold(f64::INFINITY, f64::min);
    let cmin = constants.iter().map(|x| x.1).fold(f64::INFINITY, f64::min);
    let cmax = constants.iter().map(|x| x.1).fold(0.0, f64::max);
    let mut slope_check = Check::at_least("kolmogorov-slope", min_slope, 1.9).seeds(&s);
    let mut const_check = Check::at_most("kolmogorov-constant", cmax / cmin - 1.0, 0.5).seeds(&s);
    for ((n, sl), (_, c)) in slopes.iter().zip(&constants) {
        slope_check = slope_check.detail(format!("slope_n{n}"), *sl);
        const_check = const_check.detail(format!("constant_n{n}"), *c);
    }
    let mut r = VerificationReport::new();
    r.push(slope_check);
    r.push(const_check);
    r.push(Check::at_most("boundary", boundary, 0.01).seeds(&s));
    r.push_series(series);
    Ok(r)
}

/// Weak Fokker-Planck residual of KDE densities, at `M / 4` and `M` paths.
pub fn fokker_planck(lab: &mut Lab) -> Result<VerificationReport> {
    let b = lab.member(Member::Mollified(lab.cfg.analysis.smooth_n))?;
    let grid = lab.grid();
    let ens = simulate_x_direct(&b, &lab.law(), &lab.sim_params(x_only()))?;
    let bank = TestFunctionBank::new(grid, lab.cfg.analysis.m_max)?;
    let constant = bank.members().iter().position(|t| t.modes == [0, 0]).context("bank lacks the constant")?;
    let times: Vec<f64> = (0..=grid.steps).map(|k| ens.time(k)).collect();
    let columns: Vec<_> = (0..=grid.steps).map(|k| ens.x_column(k)).collect::<zvonkin_core::Result<_>>()?;
    let full = ens.paths;
    let sizes = [full / 4, full];
    let mut terminal = Vec::new();
    let mut mass: f64 = 0.0;
    let mut series = Series::new("fp_residual", &["paths", "t", "max_residual"]);
    for &m in &sizes {
        let r = match lab.cfg.analysis.bandwidth {
            Some(r) => r,
            None => silverman_bandwidth(&columns[grid.steps][..m], &grid)?,
        };
        let dens: Vec<SpectralField> =
            columns.iter().map(|c| kde_density(&c[..m], &grid, r)).collect::<zvonkin_core::Result<_>>()?;
        let res = fp_residual(&dens, &times, &b, &bank)?;
        for (k, t) in times.iter().enumerate().step_by((grid.steps / 64).max(1)) {
            let worst = res.residuals.iter().map(|row| row[k].abs()).fold(0.0, f64::max);
            series.push(vec![m as f64, *t, worst])?;
        }
        mass = mass.max(res.residuals[constant].iter().fold(0.0, |a: f64, v| a.max(v.abs())));
        terminal.push((m, r, res.terminal_max()));
    }
    let ratio = terminal[0].2 / terminal[1].2;
    let s = seeds(&lab.cfg);
    let mut r = VerificationReport::new();
    let mut check = Check::at_least("fp-scaling", ratio, 1.5).seeds(&s);
    for (m, bw, v) in &terminal {
        check = check.detail(format!("terminal_m{m}"), *v).detail(format!("bandwidth_m{m}"), *bw);
    }
    r.push(check);
    r.push(Check::new("fp-mass", mass, 0.0, mass == 0.0).seeds(&s));
    r.push_series(series);
    Ok(r)
}

/// Marginal Wasserstein distances between mollified-drift solutions and the
/// transformed-process solution for the unmollified drift.
pub fn convergence(lab: &mut Lab) -> Result<VerificationReport> {
    let grid = lab.grid();
    let law = lab.law();
    let params = lab.sim_params(x_only());
    let map = lab.map(Member::Full)?;
    let reference = simulate_y(&map, &law, &params)?;
    let family: Vec<(u32, TimeField)> =
        lab.cfg.analysis.n_list.clone().into_iter().zip(lab.ladder()?.iter().cloned()).collect();
    let k = grid.steps;
    let study = convergence_study(&family, &reference, &law, &params, &[k / 4, k / 2, k])?;
    let mut series = Series::new("convergence", &["n", "t", "w1_to_reference", "w1_to_previous"]);
    for (i, n) in study.n_list.iter().enumerate() {
        for (c, t) in study.times.iter().enumerate() {
            let prev = if i == 0 { f64::NAN } else { study.consecutive[i - 1][c] };
            series.push(vec![*n as f64, *t, study.to_reference[i][c], prev])?;
        }
    }
    let drop = study.terminal_drop();
    let mut check = Check::new("convergence", drop, study.noise_floor, study.decreases_beyond_noise())
        .seeds(&seeds(&lab.cfg))
        .note("drop of the terminal distance across the ladder against the noise floor");
    for (n, w) in study.n_list.iter().zip(study.terminal()) {
        check = check.detail(format!("w1_n{n}"), w);
    }
    check = check.detail("boundary_fraction", reference.boundary_fraction);
    let mut r = VerificationReport::new();
    r.push(check);
    r.push_series(series);
    Ok(r)
}

/// Chain-rule remainder along the ladder, on ensembles from the map of each member.
pub fn chain_rule(lab: &mut Lab) -> Result<VerificationReport> {
    let grid = lab.grid();
    let law = lab.law();
    let params = lab.sim_params(x_and_dw());
    let zero = zero_scalar(grid);
    let terminal = bump(grid);
    let mut rows = Vec::new();
    let mut gap: f64 = 0.0;
    let mut series = Series::new("chain_rule", &["n", "t", "mean", "se"]);
    for n in lab.cfg.analysis.n_list.clone() {
        let b = lab.member(Member::Mollified(n))?;
        let map = lab.map(Member::Mollified(n))?;
        let ens = simulate_y(&map, &law, &params)?;
        let f = solve_terminal(&b, &zero, &terminal, &lab.cfg.pde.solver)?.field;
        let res = ito_residual(&f, &zero, &ens)?;
        let (mean, se) = res.remainder_stats();
        for (k, t) in res.times.iter().enumerate().step_by((grid.steps / 64).max(1)) {
            series.push(vec![n as f64, *t, mean[k], se[k]])?;
        }
        let (bias, bse) = res.bias_sup();
        rows.push((n, bias, bse));
        gap = gap.max(forward_integral_gap(&f, &b, &ens)?);
    }
    let s = seeds(&lab.cfg);
    let (n_last, bias, se) = *rows.last().expect("nonempty ladder");
    let excess = rows.windows(2).map(|w| w[1].1 - w[0].1 - 3.0 * w[1].2).fold(f64::NEG_INFINITY, f64::max);
    let mut ladder = Check::at_most("chain-rule-ladder", excess, 0.0)
        .seeds(&s)
        .note("largest increase of the bias beyond three standard errors");
    for (n, b, e) in &rows {
        ladder = ladder.detail(format!("bias_n{n}"), *b).detail(format!("se_n{n}"), *e);
    }
    let mut r = VerificationReport::new();
    r.push(
        Check::new("chain-rule-bias", bias, 3.0 * se, bias <= 3.0 * se)
            .seeds(&s)
            .note(format!("at n = {n_last}")),
    );
    r.push(ladder);
    r.push(Check::at_most("forward-integral", gap, 1e-12).seeds(&s));
    r.push_series(series);
    Ok(r)
}

fn heat_extension(grid: TorusGrid) -> Result<TimeField> {
    let f = bump(grid);
    let slices = (0..=grid.steps).map(|k| f.heat(grid.horizon - grid.time(k))).collect::<zvonkin_core::Result<_>>()?;
    Ok(TimeField::new(slices, Default::default())?)
}

/// Ito remainder for the heat extension of a bump without drift at `K` and
/// `2K` steps on shared noise, and increment correlations for a mollified drift.
pub fn martingale(lab: &mut Lab) -> Result<VerificationReport> {
    let grid = lab.grid();
    let law = lab.law();
    let fine = grid.refined(grid.n, 2 * grid.steps)?;
    let mut results = Vec::new();
    for (g, substeps) in [(grid, 2), (fine, 1)] {
        let b = TimeField::constant_in_time(SpectralField::zeros(g, Arity::Vector));
        let mut p = SimParams::new(lab.cfg.sde.paths, g.steps, lab.cfg.sde.seed);
        p.substeps = substeps;
        p.storage = x_and_dw();
        let ens = simulate_x_direct(&b, &law, &p)?;
        let res = ito_residual(&heat_extension(g)?, &zero_scalar(g), &ens)?;
        let (bias, se) = res.bias_sup();
        results.push((g.steps, bias, se, res.abs_sup()));
    }
    let s = seeds(&lab.cfg);
    let (k0, bias, se, coarse) = results[0];
    let (k1, _, _, finer) = results[1];
    let mut r = VerificationReport::new();
    r.push(Check::new("mf-bias", bias, 3.0 * se, bias <= 3.0 * se).seeds(&s).note(format!("K = {k0}")));
    r.push(
        Check::at_least("mf-halving", coarse / finer, 2.0)
            .seeds(&s)
            .detail(format!("abs_sup_k{k0}"), coarse)
            .detail(format!("abs_sup_k{k1}"), finer),
    );

    let b = lab.member(Member::Mollified(lab.cfg.analysis.smooth_n))?;
    let zero = zero_scalar(grid);
    let f = solve_terminal(&b, &zero, &bump(grid), &lab.cfg.pde.solver)?.field;
    let ens = simulate_x_direct(&b, &law, &lab.sim_params(x_and_dw()))?;
    let res = ito_residual(&f, &zero, &ens)?;
    let bank = TestFunctionBank::new(grid, CORRELATION_M_MAX)?;
    let corr = increment_correlations(&res, &ens, &bank, lab.cfg.analysis.checkpoints.min(grid.steps))?;
    let worst = corr.iter().map(|c| c.value.abs() / c.se.max(f64::MIN_POSITIVE)).fold(0.0, f64::max);
    let outside = corr.iter().filter(|c| !c.within(3.0)).count();
    r.push(
        Check::at_most("mf-correlations", worst, 3.0)
            .seeds(&s)
            .detail("tested", corr.len() as f64)
            .detail("outside", outside as f64),
    );
    Ok(r)
}
