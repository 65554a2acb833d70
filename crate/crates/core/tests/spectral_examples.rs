use zvonkin_core::besov::{besov_norm, DyadicPartition};
use zvonkin_core::drift::{regularity_certificate, smoothing_family, synthesize_drift, DriftSpec};
use zvonkin_core::field::{Arity, SpectralField};
use zvonkin_core::TorusGrid;

fn line(n: usize) -> TorusGrid {
    TorusGrid::line(n, 4).unwrap()
}

#[test]
fn norm_of_constant_sits_in_low_block() {
    let g = line(64);
    let c = SpectralField::constant(g, -1.7);
    let want = 2f64.powf(-0.3) * 1.7;
    assert!((besov_norm(&c, 0.3).unwrap() - want).abs() < 1e-12);
    assert_eq!(besov_norm(&SpectralField::zeros(g, Arity::Scalar), 0.3).unwrap(), 0.0);
}

#[test]
fn norm_rejects_extreme_index() {
    let g = line(64);
    assert!(besov_norm(&SpectralField::constant(g, 1.0), 4.5).is_err());
}

#[test]
fn product_with_one_is_identity() {
    let g = line(64);
    let f = SpectralField::from_fn(g, |x| (3.0 * x[0]).sin() + 0.2);
    let one = SpectralField::constant(g, 1.0);
    assert!(one.product(&f).unwrap().sup_distance(&f) < 1e-13);
}

#[test]
fn mollified_band_limited_drift_barely_moves() {
    let g = line(128);
    let b = SpectralField::from_fn(g, |x| x[0].sin() + 0.5 * x[0].cos());
    let m = b.mollify(1 << 12).unwrap();
    assert!(m.sup_distance(&b) < 1e-3 * b.sup_norm());
}

#[test]
fn mollifying_mode_eight_at_index_32() {
    let g = line(128);
    let b = SpectralField::from_fn(g, |x| (8.0 * x[0]).cos());
    let m = b.mollify(32).unwrap();
    let ratio = m.coeffs(0)[8].norm() / b.coeffs(0)[8].norm();
    assert!((ratio - (-2.0f64).exp()).abs() < 1e-12);
}

#[test]
fn mollification_distance_decays_along_ladder() {
    let g = TorusGrid::line(512, 4).unwrap();
    let spec = DriftSpec::default();
    let b = synthesize_drift(&spec, g).unwrap();
    let ladder = [2, 4, 8, 16, 32];
    let fam = smoothing_family(&b, &ladder).unwrap();
    let gamma = -spec.beta - spec.eps;
    let p = DyadicPartition::new(g);
    let dist: Vec<f64> = fam
        .iter()
        .map(|bn| p.norm(&b.slice(0).sub(bn.slice(0)).unwrap().component(0), gamma).unwrap())
        .collect();
    // the top blocks barely feel mollification, so the decay is slow but monotone
    assert!(dist.windows(2).all(|w| w[1] <= w[0]), "{dist:?}");
    assert!(dist[4] < dist[0]);
}

#[test]
fn synthesis_is_deterministic() {
    let g = TorusGrid::line(256, 4).unwrap();
    let spec = DriftSpec { seed: 9, ..Default::default() };
    let a = synthesize_drift(&spec, g).unwrap();
    let b = synthesize_drift(&spec, g).unwrap();
    assert_eq!(a, b);
}

#[test]
fn default_drift_is_certified_distributional() {
    let g = TorusGrid::line(1024, 4).unwrap();
    let cert = regularity_certificate(&DriftSpec::default(), g).unwrap();
    assert!(cert.passed, "{cert:?}");
    assert_eq!(cert.sizes, vec![256, 512, 1024]);
}

#[test]
fn windowed_drift_vanishes_near_faces() {
    let g = TorusGrid::line(512, 4).unwrap();
    let spec = DriftSpec { window: true, ..Default::default() };
    let b = synthesize_drift(&spec, g).unwrap();
    let s = b.slice(0);
    for j in 0..g.len() {
        let x = g.point(j)[0];
        if x.abs() > 0.45 * g.period {
            assert!(s.values(0)[j].abs() < 1e-8 * spec.sigma);
        }
    }
}
