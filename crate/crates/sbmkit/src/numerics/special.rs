//! Gaussian density and tail functions, the scaled complementary error
//! function, and the closed-form Laplace-Gaussian integrals that appear in
//! the transition-density bounds.

use crate::error::{invalid, Result};

/// sqrt(2*pi)
pub const SQRT_2PI: f64 = 2.506_628_274_631_000_5;

const FRAC_1_SQRT_PI: f64 = 0.564_189_583_547_756_3;

/// Standard normal density exp(-z^2/2)/sqrt(2 pi).
pub fn gauss_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / SQRT_2PI
}

/// Standard normal survival function P[N(0,1) > z].
///
/// Evaluated through the complementary error function so the relative
/// accuracy holds far into the tail (z up to ~37, below which erfc
/// underflows).
pub fn gauss_sf(z: f64) -> f64 {
    0.5 * libm::erfc(z * std::f64::consts::FRAC_1_SQRT_2)
}

/// Scaled complementary error function exp(x^2) * erfc(x).
///
/// For x < 26 the direct product is exactly representable (erfc has not yet
/// underflowed and exp(x^2) has not overflowed); beyond that the asymptotic
/// expansion takes over.
pub fn erfcx(x: f64) -> f64 {
    if x < 26.0 {
        (x * x).exp() * libm::erfc(x)
    } else {
        // erfcx(x) ~ 1/(x sqrt(pi)) * sum_k (-1)^k (2k-1)!! / (2x^2)^k
        let q = 0.5 / (x * x);
        let mut term = 1.0;
        let mut sum = 1.0;
        for k in 1..=6u32 {
            term *= -(2.0 * f64::from(k) - 1.0) * q;
            sum += term;
        }
        FRAC_1_SQRT_PI / x * sum
    }
}

/// The integral I(c, beta, t) = ∫_0^∞ (l + c) exp(-beta*l - (l+c)^2/(2t)) dl
/// in closed form.
///
/// Completing the square gives
///   I = t e^{-c^2/(2t)} - beta t sqrt(2 pi t) e^{beta c + beta^2 t/2} SF(z),
/// z = (c + beta t)/sqrt(t). For beta > 0 the two terms nearly cancel, so
/// that branch is evaluated through erfcx, which keeps every factor bounded:
///   I = t e^{-c^2/(2t)} [1 - beta sqrt(2 pi t) erfcx(z/sqrt(2)) / 2].
/// For beta <= 0 both terms are positive and the direct form is stable.
pub fn laplace_gaussian_integral(c: f64, beta: f64, t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(invalid(format!("laplace_gaussian_integral requires t > 0, got {t}")));
    }
    if !(c >= 0.0) {
        return Err(invalid(format!("laplace_gaussian_integral requires c >= 0, got {c}")));
    }
    let sqrt_t = t.sqrt();
    let z = (c + beta * t) / sqrt_t;
    let gauss_part = t * (-c * c / (2.0 * t)).exp();
    let value = if beta > 0.0 {
        gauss_part * (1.0 - 0.5 * beta * SQRT_2PI * sqrt_t * erfcx(z * std::f64::consts::FRAC_1_SQRT_2))
    } else {
        gauss_part
            - beta * t * SQRT_2PI * sqrt_t * (beta * c + 0.5 * beta * beta * t).exp() * gauss_sf(z)
    };
    Ok(value.max(0.0))
}

/// ∫_0^∞ l^2 exp(-a l^2/2 - b l) dl in closed form, for a > 0.
///
/// Used to integrate out the local-time variable of the joint density.
/// T = -b/a^2 + sqrt(2 pi) (a + b^2) / (2 a^{5/2}) * erfcx(b / sqrt(2a)).
pub(crate) fn second_moment_laplace_gaussian(a: f64, b: f64) -> f64 {
    debug_assert!(a > 0.0);
    let t = crate::numerics::SQRT_2PI * (a + b * b) / (2.0 * a * a * a.sqrt())
        * erfcx(b / (2.0 * a).sqrt());
    (t - b / (a * a)).max(0.0)
}
