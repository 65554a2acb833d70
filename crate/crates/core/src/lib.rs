//! Spectral numerics for SDEs with distributional drift via the Zvonkin
//! change of variables.

pub mod analysis;
pub mod besov;
pub mod error;
pub mod fft;
pub mod field;
pub mod grid;
pub mod io;
pub mod drift;
pub mod pde;
pub mod report;
pub mod sde;
pub mod zvonkin;

pub use error::{Error, Result};
pub use field::{Arity, EvalMode, SpectralField, Stencil, TimeField, TimeInterp};
pub use grid::TorusGrid;
pub use report::{Check, Series, Verdict, VerificationReport};
pub use zvonkin::{Point, ZvonkinMap};

/// Crate version, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
