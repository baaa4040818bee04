//! Skew Brownian motion with two-valued drift: analytic transition-density
//! kernels, the canonical scale function and recurrence classifier, a
//! seeded lattice-walk Monte Carlo oracle, and verification suites that
//! cross-check the two against each other.
//!
//! The model is a Brownian-like diffusion whose drift takes the value `m1`
//! on `[0, inf)` and `m2` on `(-inf, 0)`, and whose excursions from 0 are
//! signed positive with probability `p`. The crate provides:
//!
//! - [`model`]: the parameter triple, drift and excursion-weight lookups,
//!   the symmetrizing-measure density, the scale function, exit
//!   probabilities, and the recurrence classifier;
//! - [`numerics`]: Gaussian special functions and adaptive Gauss-Kronrod
//!   quadrature (finite, semi-infinite, and simplex-iterated);
//! - [`kernels`]: the killed density, the hitting-time law, the joint
//!   density of position and local time from the origin with its marginal,
//!   two-sided density bounds, and the exact density assembled from the
//!   first-passage convolution;
//! - [`simulate`]: a reproducible, parallel lattice random walk producing
//!   endpoint histograms, occupation-band local-time estimates,
//!   first-passage samples, and killed runs;
//! - [`verify`]: runnable suites binding kernels to oracles (bound
//!   sandwich, classical reductions, symmetry and Chapman-Kolmogorov
//!   consistency, Monte Carlo agreement);
//! - [`cli`]: the `sbmkit` binary surface with JSON/CSV output.

pub mod cli;
pub mod error;
pub mod kernels;
pub mod model;
pub mod numerics;
pub mod simulate;
pub mod verify;

pub use error::{Result, SbmError};
pub use kernels::{DensityBounds, SpaceTimePoint};
pub use model::{Classification, DriftParams};
pub use numerics::{Estimate, QuadratureSpec};
pub use simulate::{EmpiricalDensity, PathSummary, WalkConfig};
