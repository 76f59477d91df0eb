//! Numerical geometric quantization over complex projective space.
//!
//! The crate models CP^n through its standard affine charts and builds the
//! objects that geometric quantization attaches to it:
//!
//! - [`atlas`]: homogeneous/affine coordinates, chart transitions, Jacobians,
//!   and Fubini–Study-uniform sampling.
//! - [`fubini_study`]: Kähler potential `log(1 + |z|^2)`, its metric, and
//!   normalized volume integration.
//! - [`picard`]: the line bundles `O(l)`, their transition functions,
//!   Hermitian metric, Chern connection, curvature and Chern numbers.
//! - [`sections`]: holomorphic sections as homogeneous polynomials.
//! - [`qh_bundle`]: the bundle `T(CP^n) ⊕ O(l)`, its block transitions and
//!   parallel transport.
//! - [`oscillator`]: linear and projective oscillator spectra.
//! - [`bergman`]: Bergman kernels, metrics and projective embeddings.
//!
//! Chart indices are zero-based throughout the library API.

pub mod atlas;
pub mod bergman;
pub mod error;
pub mod fubini_study;
pub mod numeric;
pub mod oscillator;
pub mod picard;
pub mod qh_bundle;
pub mod rng;
pub mod sections;

pub use atlas::{ChartPoint, HomogeneousPoint, JacobianMatrix};
pub use error::{Error, Result};
pub use fubini_study::{MetricValue, VolumeEstimate};
pub use num_complex::Complex64;
pub use picard::{ConnectionForm, PicardClass};
pub use qh_bundle::{HolonomyResult, Loop, Segment, TransitionBlock};
pub use sections::{MultiIndex, PolynomialSection};

/// Dense complex matrix used for metrics, Jacobians and holonomies.
pub type CMatrix = nalgebra::DMatrix<Complex64>;
/// Dense complex column vector.
pub type CVector = nalgebra::DVector<Complex64>;

/// Whether Monte Carlo loops may fan out over threads.
///
/// Both modes produce bit-identical results: per-sample values are computed
/// independently and always reduced serially in index order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Parallelism {
    #[default]
    Threads,
    Serial,
}
