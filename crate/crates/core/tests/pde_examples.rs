use zvonkin_core::besov::besov_norm;
use zvonkin_core::drift::{smoothing_family, synthesize_drift, window_profile, DriftSpec};
use zvonkin_core::field::{Arity, SpectralField, TimeField};
use zvonkin_core::pde::{apply_l, select_lambda, solve_terminal, solve_u, SolverParams};
use zvonkin_core::zvonkin::GRADIENT_BOUND;
use zvonkin_core::TorusGrid;

fn vector(f: SpectralField) -> SpectralField {
    SpectralField::from_components(vec![f], Arity::Vector).unwrap()
}

fn smooth_drift(grid: TorusGrid) -> TimeField {
    TimeField::constant_in_time(vector(SpectralField::from_fn(grid, |x| 0.5 * x[0].sin())))
}

#[test]
fn zero_drift_gives_zero_u() {
    let g = TorusGrid::line(64, 32).unwrap();
    let b = TimeField::constant_in_time(SpectralField::zeros(g, Arity::Vector));
    let s = solve_u(&b, 1.0, &SolverParams::default()).unwrap();
    assert_eq!(s.u.sup_norm(), 0.0);
    assert_eq!(s.grad_sup, 0.0);
}

#[test]
fn coordinate_surrogate_recovers_drift_on_interior() {
    // x w(x) with w = 1 on the middle 60% of the cell
    let g = TorusGrid::line(512, 8).unwrap();
    let id = TimeField::from_fn(g, move |_, x| x[0] * window_profile(&g, x));
    let spec = DriftSpec { seed: 4, ..Default::default() };
    let b = smoothing_family(&synthesize_drift(&spec, g).unwrap(), &[16]).unwrap().remove(0);
    let lid = apply_l(&id, &b).unwrap();
    let mut worst: f64 = 0.0;
    for k in 0..=g.steps {
        for j in 0..g.len() {
            if g.point(j)[0].abs() < 0.25 * g.period {
                worst = worst.max((lid.slice(k).values(0)[j] - b.slice(k).values(0)[j]).abs());
            }
        }
    }
    assert!(worst < 1e-5, "{worst}");
}

fn terminal_residual(n: usize) -> f64 {
    let g = TorusGrid::line(n, n).unwrap();
    let b = smooth_drift(g);
    let src = TimeField::from_fn(g, |t, x| x[0].cos() * (1.0 + t));
    let v = solve_terminal(&b, &src, &SpectralField::zeros(g, Arity::Scalar), &SolverParams::default()).unwrap();
    let lv = apply_l(&v.field, &b).unwrap();
    (n / 8..=7 * n / 8).map(|k| lv.slice(k).sup_distance(src.slice(k))).fold(0.0, f64::max)
}

#[test]
fn terminal_solution_satisfies_equation_with_refining_residual() {
    let coarse = terminal_residual(64);
    let fine = terminal_residual(128);
    assert!(coarse < 1e-2, "{coarse}");
    assert!(fine <= coarse / 2.0, "{coarse} -> {fine}");
}

#[test]
fn lambda_selection_is_reproducible_and_bounds_gradients() {
    let g = TorusGrid::line(128, 128).unwrap();
    let spec = DriftSpec { seed: 2, ..Default::default() };
    let b = synthesize_drift(&spec, g).unwrap();
    let mut family = vec![b.clone()];
    family.extend(smoothing_family(&b, &[2, 8, 32]).unwrap());
    let first = select_lambda(&family, &SolverParams::default()).unwrap();
    let again = select_lambda(&family, &SolverParams::default()).unwrap();
    assert_eq!(first.lambda, again.lambda);
    assert!(first.solutions.iter().all(|s| s.grad_sup <= GRADIENT_BOUND));
    assert_eq!(first.solutions.len(), family.len());
}

#[test]
fn solutions_settle_along_mollification_ladder() {
    let g = TorusGrid::line(256, 128).unwrap();
    let spec = DriftSpec::default();
    let b = synthesize_drift(&spec, g).unwrap();
    let fam = smoothing_family(&b, &[2, 8, 32, 64]).unwrap();
    let src = TimeField::from_fn(g, |_, x| (-2.0 * x[0] * x[0]).exp());
    let zero = SpectralField::zeros(g, Arity::Scalar);
    let sols: Vec<TimeField> = fam
        .iter()
        .map(|bn| solve_terminal(bn, &src, &zero, &SolverParams::default()).unwrap().field)
        .collect();
    let gamma = 1.0 + spec.beta - spec.eps;
    let gaps: Vec<f64> = sols
        .windows(2)
        .map(|w| {
            (0..=g.steps)
                .step_by(16)
                .map(|k| besov_norm(&w[1].slice(k).sub(w[0].slice(k)).unwrap(), gamma).unwrap())
                .fold(0.0, f64::max)
        })
        .collect();
    assert!(gaps.windows(2).all(|w| w[1] < w[0]), "{gaps:?}");
}
