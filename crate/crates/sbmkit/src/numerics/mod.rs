//! Special functions and adaptive quadrature shared by every kernel.

mod quad;
mod special;

pub use quad::{
    integrate_1d, integrate_1d_with_breaks, integrate_2d_simplex, integrate_2d_simplex_with_breaks,
    integrate_semi_infinite, integrate_semi_infinite_with_breaks,
};
pub use special::{erfcx, gauss_pdf, gauss_sf, laplace_gaussian_integral, SQRT_2PI};

pub(crate) use special::second_moment_laplace_gaussian;

use crate::error::{invalid, Result};

/// Tolerances and subdivision limits governing a numerical integral.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    /// Absolute error target, in (0, 1).
    pub abs_tol: f64,
    /// Relative error target, in (0, 1).
    pub rel_tol: f64,
    /// Maximum number of subintervals before giving up.
    pub max_subdivisions: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            rel_tol: 1e-8,
            max_subdivisions: 2000,
        }
    }
}

impl QuadratureSpec {
    pub fn new(abs_tol: f64, rel_tol: f64, max_subdivisions: usize) -> Result<Self> {
        let spec = Self {
            abs_tol,
            rel_tol,
            max_subdivisions,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0 && self.abs_tol < 1.0) {
            return Err(invalid(format!("abs_tol must be in (0,1), got {}", self.abs_tol)));
        }
        if !(self.rel_tol > 0.0 && self.rel_tol < 1.0) {
            return Err(invalid(format!("rel_tol must be in (0,1), got {}", self.rel_tol)));
        }
        if self.max_subdivisions == 0 {
            return Err(invalid("max_subdivisions must be positive"));
        }
        Ok(())
    }

    /// Error target for a value of the given magnitude.
    pub fn target(&self, value: f64) -> f64 {
        self.abs_tol.max(self.rel_tol * value.abs())
    }
}

/// A numerical result together with its error estimate.
///
/// `converged` is false when the subdivision budget was exhausted before
/// the requested tolerance was met; `value` then still holds the best
/// available estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
    pub converged: bool,
}

impl Estimate {
    pub fn exact(value: f64) -> Self {
        Self {
            value,
            error: 0.0,
            converged: true,
        }
    }

    pub(crate) fn scaled(self, factor: f64) -> Self {
        Self {
            value: self.value * factor,
            error: self.error * factor.abs(),
            converged: self.converged,
        }
    }
}
