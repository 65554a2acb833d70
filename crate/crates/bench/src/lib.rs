//! Fixtures shared by the kernel benchmarks.

use zvonkin_core::drift::{smoothing_family, synthesize_drift, DriftSpec};
use zvonkin_core::{SpectralField, TimeField, TorusGrid};

pub fn line(n: usize, steps: usize) -> TorusGrid {
    TorusGrid::line(n, steps).expect("valid grid")
}

/// Default rough drift at `n` points and `steps` time steps.
pub fn rough_drift(n: usize, steps: usize) -> TimeField {
    synthesize_drift(&DriftSpec::default(), line(n, steps)).expect("default spec")
}

/// The rough drift mollified at level `level`.
pub fn smooth_drift(n: usize, steps: usize, level: u32) -> TimeField {
    smoothing_family(&rough_drift(n, steps), &[level]).expect("mollification").remove(0)
}

pub fn wave(n: usize) -> SpectralField {
    SpectralField::from_fn(line(n, 1), |x| (x[0].sin() + 0.3 * (3.0 * x[0]).cos()).exp())
}
