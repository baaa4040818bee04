//! Transition-density kernels: the killed density, the hitting-time law,
//! the joint density of position and local time from the origin, its
//! marginal, the two-sided density bounds, and the exact density assembled
//! from the first-passage convolution.

use std::cell::Cell;

use crate::error::{invalid, Result, SbmError};
use crate::model::DriftParams;
use crate::numerics::{
    self, gauss_pdf, integrate_1d_with_breaks, integrate_2d_simplex_with_breaks,
    integrate_semi_infinite_with_breaks, laplace_gaussian_integral, Estimate, QuadratureSpec,
    SQRT_2PI,
};

const FRAC_1_SQRT_PI: f64 = 0.564_189_583_547_756_3;

/// A (time, start, end) evaluation point with t > 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpaceTimePoint {
    pub t: f64,
    pub x: f64,
    pub y: f64,
}

impl SpaceTimePoint {
    pub fn new(t: f64, x: f64, y: f64) -> Result<Self> {
        if !(t > 0.0) || !t.is_finite() {
            return Err(invalid(format!("time must be positive and finite, got {t}")));
        }
        if !x.is_finite() || !y.is_finite() {
            return Err(invalid(format!("coordinates must be finite, got x={x}, y={y}")));
        }
        Ok(Self { t, x, y })
    }

    /// The point seen by the sign-flipped process: (t, -x, -y).
    pub fn reflected(&self) -> Self {
        Self {
            t: self.t,
            x: -self.x,
            y: -self.y,
        }
    }
}

/// Two-sided envelope for the transition density; the sides coincide
/// exactly when |m1| = |m2|.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityBounds {
    pub lower: f64,
    pub upper: f64,
}

/// Which exponent the killed density carries on its drift-rate factor.
///
/// `TimeScaled` uses exp(-m^2 t / 2), the convention consistent with a
/// killing rate m^2/2 acting over time t; it is the one that passes the
/// constant-drift and Monte Carlo checks. `Literal` uses exp(-m^2/2) with
/// no time factor and is kept only for side-by-side comparison (see the
/// `literal-exponent` cargo feature).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExponentConvention {
    TimeScaled,
    Literal,
}

impl ExponentConvention {
    fn default_build() -> Self {
        if cfg!(feature = "literal-exponent") {
            ExponentConvention::Literal
        } else {
            ExponentConvention::TimeScaled
        }
    }
}

/// Density at y of the process started at x > 0 and killed on hitting 0.
///
/// q(t,x,y) = exp(-m1^2 t/2 - m1 x + m1 y)/sqrt(2 pi t)
///            * (exp(-(x-y)^2/(2t)) - exp(-(x+y)^2/(2t))),
/// nonnegative, zero at y = 0.
pub fn killed_density(params: &DriftParams, t: f64, x: f64, y: f64) -> Result<f64> {
    killed_density_with_convention(params, t, x, y, ExponentConvention::default_build())
}

/// [`killed_density`] with an explicit choice of exponent convention.
pub fn killed_density_with_convention(
    params: &DriftParams,
    t: f64,
    x: f64,
    y: f64,
    convention: ExponentConvention,
) -> Result<f64> {
    if !(t > 0.0) {
        return Err(invalid(format!("killed_density requires t > 0, got {t}")));
    }
    if !(x > 0.0) {
        return Err(invalid(format!("killed_density requires x > 0, got {x}")));
    }
    if y < 0.0 {
        return Err(invalid(format!("killed_density requires y >= 0, got {y}")));
    }
    let m1 = params.m1();
    let time_factor = match convention {
        ExponentConvention::TimeScaled => t,
        ExponentConvention::Literal => 1.0,
    };
    let drift_part = (-0.5 * m1 * m1 * time_factor - m1 * x + m1 * y).exp();
    let reflect_part =
        (-(x - y) * (x - y) / (2.0 * t)).exp() - (-(x + y) * (x + y) / (2.0 * t)).exp();
    Ok((drift_part * reflect_part.max(0.0)) / (SQRT_2PI * t.sqrt()))
}

/// Density at s of the first time the process started at x != 0 hits 0:
/// |x|/sqrt(2 pi s^3) * exp(-(m s + x)^2/(2s)), m the drift on the side
/// of x. The two signs of x are related by the reflection map.
pub fn hitting_density(params: &DriftParams, x: f64, s: f64) -> Result<f64> {
    if x == 0.0 {
        return Err(invalid("hitting_density undefined at x = 0: the hitting time is 0"));
    }
    if !(s > 0.0) {
        return Err(invalid(format!("hitting_density requires s > 0, got {s}")));
    }
    let m = params.drift_at(x);
    let z = m * s + x;
    Ok(x.abs() / (SQRT_2PI * s * s.sqrt()) * (-z * z / (2.0 * s)).exp())
}

/// Total mass of the hitting-time law: 1 when the drift on the side of x
/// points toward 0, exp(-2 m |x|) when it points away.
pub fn hitting_total_mass(params: &DriftParams, x: f64) -> Result<f64> {
    if x == 0.0 {
        return Err(invalid("hitting_total_mass undefined at x = 0"));
    }
    let m = params.drift_at(x);
    let toward_zero = if x > 0.0 { m <= 0.0 } else { m >= 0.0 };
    if toward_zero {
        Ok(1.0)
    } else {
        Ok((-2.0 * m * x).exp())
    }
}

/// Joint density of (position, local time at 0) for the driftless skew
/// process started at x != 0, evaluated at (y, l) with l > 0.
pub fn driftless_joint_density(p: f64, t: f64, x: f64, y: f64, l: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(invalid(format!("skewness must satisfy 0 < p < 1, got {p}")));
    }
    if !(t > 0.0) {
        return Err(invalid(format!("driftless_joint_density requires t > 0, got {t}")));
    }
    if !(l > 0.0) {
        return Err(invalid(format!("driftless_joint_density requires l > 0, got {l}")));
    }
    if x == 0.0 {
        return Err(invalid("driftless_joint_density requires x != 0; start the joint density from zero instead"));
    }
    if x < 0.0 {
        return driftless_joint_density(1.0 - p, t, -x, -y, l);
    }
    let norm = SQRT_2PI * t * t.sqrt();
    if y > 0.0 {
        let c = l + y + x;
        Ok(2.0 * p * c * (-c * c / (2.0 * t)).exp() / norm)
    } else {
        let c = l - y + x;
        Ok(2.0 * (1.0 - p) * c * (-c * c / (2.0 * t)).exp() / norm)
    }
}

/// Shared structure of the double integral over 0 < v < u < t behind the
/// joint density from zero: the constant prefactor and the (v, u) integrand
/// with the local-time variable either fixed (at l) or integrated out.
struct SimplexKernel {
    m1_sq: f64,
    m2_sq: f64,
    p: f64,
    beta: f64,
}

impl SimplexKernel {
    fn new(params: &DriftParams) -> Self {
        Self {
            m1_sq: params.m1() * params.m1(),
            m2_sq: params.m2() * params.m2(),
            p: params.p(),
            beta: params.beta(),
        }
    }

    /// exp(-(m1^2 v + m2^2 (t - v))/2 - x^2/(2(t-u))) / (v (u-v) (t-u))^{3/2}
    fn base(&self, v: f64, u: f64, t: f64, x: f64) -> f64 {
        let prod = v * (u - v) * (t - u);
        if prod <= 0.0 {
            return 0.0;
        }
        let expo = -0.5 * (self.m1_sq * v + self.m2_sq * (t - v)) - x * x / (2.0 * (t - u));
        let e = expo.exp();
        if e == 0.0 {
            return 0.0;
        }
        e / (prod * prod.sqrt())
    }

    /// Local-time factor at fixed l: l^2 exp(-l^2 A/2), A = p^2/v + (1-p)^2/(u-v).
    /// (The exp(-l beta) part is constant and folded into the prefactor.)
    fn fixed_l(&self, v: f64, u: f64, l: f64) -> f64 {
        let a = self.p * self.p / v + (1.0 - self.p) * (1.0 - self.p) / (u - v);
        l * l * (-0.5 * l * l * a).exp()
    }

    /// Local-time factor integrated out: ∫_0^∞ l^2 exp(-l^2 A/2 - l beta) dl.
    fn integrated_l(&self, v: f64, u: f64) -> f64 {
        let a = self.p * self.p / v + (1.0 - self.p) * (1.0 - self.p) / (u - v);
        numerics::second_moment_laplace_gaussian(a, self.beta)
    }
}

fn joint_prefactor(params: &DriftParams, x: f64) -> f64 {
    let p = params.p();
    params.skew_weight_at(x) * p * (1.0 - p) * x.abs()
        / (std::f64::consts::SQRT_2 * std::f64::consts::PI * std::f64::consts::PI.sqrt())
}

/// Joint density of (position, local time at 0) at (x, l) for the process
/// started at 0, as the double integral over the simplex 0 < v < u < t.
///
/// Rejects l <= 0 and x = 0, where the boundary singularities of the
/// integrand lose their exponential damping.
pub fn joint_density_from_zero(
    params: &DriftParams,
    t: f64,
    x: f64,
    l: f64,
    spec: &QuadratureSpec,
) -> Result<Estimate> {
    if !(t > 0.0) {
        return Err(invalid(format!("joint_density_from_zero requires t > 0, got {t}")));
    }
    if !(l > 0.0) {
        return Err(SbmError::UndampedSingularity(format!(
            "joint_density_from_zero requires l > 0, got {l}"
        )));
    }
    if x == 0.0 {
        return Err(SbmError::UndampedSingularity(
            "joint_density_from_zero requires x != 0".into(),
        ));
    }
    let kernel = SimplexKernel::new(params);
    let p = params.p();
    // boundary-layer scales of the two inverse-Gaussian factors in v
    let s_lo = (l * p) * (l * p);
    let s_hi = (l * (1.0 - p)) * (l * (1.0 - p));
    let x_layer = x * x;
    let outer_breaks = [
        0.25 * s_lo,
        s_lo,
        4.0 * (s_lo + s_hi),
        0.5 * t,
        t - 4.0 * x_layer,
        t - x_layer,
        t - 0.25 * x_layer,
    ];
    let quad = integrate_2d_simplex_with_breaks(
        |v, u| kernel.base(v, u, t, x) * kernel.fixed_l(v, u, l),
        t,
        spec,
        &outer_breaks,
        |u, breaks| {
            breaks.extend_from_slice(&[
                0.25 * s_lo,
                s_lo,
                4.0 * s_lo,
                u - 4.0 * s_hi,
                u - s_hi,
                u - 0.25 * s_hi,
            ]);
        },
    )?;
    let constant = joint_prefactor(params, x)
        * (-l * params.beta() + x * params.drift_at(x)).exp();
    Ok(quad.scaled(constant))
}

/// The marginal in l of [`joint_density_from_zero`] with the local-time
/// integral carried out in closed form, leaving a single double integral.
/// Used internally where the marginal sits inside another quadrature.
pub(crate) fn marginal_from_zero_closed_l(
    params: &DriftParams,
    t: f64,
    x: f64,
    spec: &QuadratureSpec,
) -> Result<Estimate> {
    if !(t > 0.0) {
        return Err(invalid(format!("marginal requires t > 0, got {t}")));
    }
    if x == 0.0 {
        return Err(SbmError::UndampedSingularity("marginal requires x != 0".into()));
    }
    let kernel = SimplexKernel::new(params);
    let x_layer = x * x;
    let outer_breaks = [
        t * 0.0009765625, // 2^-10
        t * 0.015625,     // 2^-6
        t * 0.125,
        t * 0.5,
        t - 4.0 * x_layer,
        t - x_layer,
        t - 0.25 * x_layer,
    ];
    let quad = integrate_2d_simplex_with_breaks(
        |v, u| kernel.base(v, u, t, x) * kernel.integrated_l(v, u),
        t,
        spec,
        &outer_breaks,
        |u, breaks| breaks.push(0.5 * u),
    )?;
    let constant = joint_prefactor(params, x) * (x * params.drift_at(x)).exp();
    Ok(quad.scaled(constant))
}

/// Density at x != 0 of the process at time t started from 0, by
/// semi-infinite quadrature of the joint density over the local time.
pub fn marginal_density_from_zero(
    params: &DriftParams,
    t: f64,
    x: f64,
    spec: &QuadratureSpec,
) -> Result<Estimate> {
    if !(t > 0.0) {
        return Err(invalid(format!("marginal_density_from_zero requires t > 0, got {t}")));
    }
    if x == 0.0 {
        return Err(SbmError::UndampedSingularity(
            "marginal_density_from_zero requires x != 0".into(),
        ));
    }
    let inner_ok = Cell::new(true);
    let sigma = t.sqrt() + (-params.beta()).max(0.0) * t;
    let l_breaks = [0.125 * sigma, 0.25 * sigma, 0.5 * sigma, sigma, 2.0 * sigma, 4.0 * sigma];
    let quad = integrate_semi_infinite_with_breaks(
        |l| match joint_density_from_zero(params, t, x, l, spec) {
            Ok(est) => {
                if !est.converged {
                    inner_ok.set(false);
                }
                est.value
            }
            Err(_) => 0.0,
        },
        0.0,
        &l_breaks,
        spec,
    )?;
    // each joint evaluation meets the abs/rel target of `spec` up to the
    // factor its own two-level budget adds, so the integrated inner error
    // is bounded by a small multiple of the same budget in l
    let l_span = 8.0 * t.sqrt() + (-params.beta()).max(0.0) * t + 1.0;
    let error = quad.error + 3.0 * (spec.abs_tol * l_span + spec.rel_tol * quad.value.abs());
    Ok(Estimate {
        value: quad.value,
        error,
        converged: quad.converged && inner_ok.get(),
    })
}

/// Two-sided bounds for the transition density p(t, x, y), x != 0.
///
/// The four sign cases share the Laplace-Gaussian integral I(c, beta, t);
/// the side starting below 0 is handled by the reflection map. The lower
/// bound carries exp(-(m^sup)^2 t/2), the upper exp(-(m_star)^2 t/2), and
/// the killed term (present when x and y sit on the same side) is common
/// to both.
pub fn density_bounds(params: &DriftParams, pt: &SpaceTimePoint) -> Result<DensityBounds> {
    if !(pt.t > 0.0) {
        return Err(invalid(format!("density_bounds requires t > 0, got {}", pt.t)));
    }
    if pt.x == 0.0 {
        return Err(invalid(
            "density_bounds requires x != 0; use the density from zero for the x = 0 row",
        ));
    }
    let (t, x, y) = (pt.t, pt.x, pt.y);
    let beta = params.beta();
    let p = params.p();
    let (m1, m2) = (params.m1(), params.m2());
    let norm = SQRT_2PI * t * t.sqrt();

    let (pref, c, killed) = if x > 0.0 {
        if y > 0.0 {
            (
                2.0 * p * (m1 * (y - x)).exp() / norm,
                x + y,
                killed_density(params, t, x, y)?,
            )
        } else {
            (2.0 * (1.0 - p) * (-m1 * x + m2 * y).exp() / norm, x - y, 0.0)
        }
    } else if y >= 0.0 {
        (2.0 * p * (-m2 * x + m1 * y).exp() / norm, y - x, 0.0)
    } else {
        (
            2.0 * (1.0 - p) * (m2 * (y - x)).exp() / norm,
            -x - y,
            killed_density(&params.reflected(), t, -x, -y)?,
        )
    };

    let integral = pref * laplace_gaussian_integral(c, beta, t)?;
    let m_star_sq = params.m_star() * params.m_star();
    let m_sup_sq = params.m_sup() * params.m_sup();
    Ok(DensityBounds {
        lower: integral * (-0.5 * m_sup_sq * t).exp() + killed,
        upper: integral * (-0.5 * m_star_sq * t).exp() + killed,
    })
}

/// The transition density in the matched-magnitude regime |m1| = |m2|,
/// where the two bounds coincide and are exact.
pub fn matched_drift_density(params: &DriftParams, pt: &SpaceTimePoint) -> Result<f64> {
    if (params.m1().abs() - params.m2().abs()).abs() > 1e-12 * params.m_sup().max(1.0) {
        return Err(invalid(format!(
            "matched_drift_density requires |m1| = |m2|, got m1={}, m2={}",
            params.m1(),
            params.m2()
        )));
    }
    let b = density_bounds(params, pt)?;
    Ok(0.5 * (b.lower + b.upper))
}

/// Exact transition density p(t, x, y), y != 0, assembled from the killed
/// density plus the convolution of the hitting-time law at x with the
/// density from zero:
///   p(t,x,y) = q(t,x,y) 1{same side} + ∫_0^t p(t-s, 0, y) P^x[sigma_0 ∈ ds].
///
/// The s-integral is split at t/2; on (0, t/2] the substitution
/// s = x^2/(2w) absorbs the s^{-3/2} first-passage factor into
/// w^{-1/2} e^{-w}, taming the s → 0 endpoint.
pub fn exact_density(params: &DriftParams, pt: &SpaceTimePoint, spec: &QuadratureSpec) -> Result<Estimate> {
    if !(pt.t > 0.0) {
        return Err(invalid(format!("exact_density requires t > 0, got {}", pt.t)));
    }
    if pt.y == 0.0 {
        return Err(invalid("exact_density requires y != 0 (a Lebesgue-null column)"));
    }
    if pt.x == 0.0 {
        return marginal_density_from_zero(params, pt.t, pt.y, spec);
    }
    if pt.x < 0.0 {
        return exact_density(&params.reflected(), &pt.reflected(), spec);
    }

    let (t, x, y) = (pt.t, pt.x, pt.y);
    let m1 = params.m1();
    let killed = if y > 0.0 {
        killed_density(params, t, x, y)?
    } else {
        0.0
    };

    let marginal_ok = Cell::new(true);
    let marginal_at = |tau: f64| -> f64 {
        if tau <= 0.0 {
            return 0.0;
        }
        match marginal_from_zero_closed_l(params, tau, y, spec) {
            Ok(est) => {
                if !est.converged {
                    marginal_ok.set(false);
                }
                est.value
            }
            Err(_) => 0.0,
        }
    };

    // s in (0, t/2] via w = x^2/(2s):
    // hitting(x, s) ds = e^{-m1 x} e^{-m1^2 s / 2} (1/sqrt(pi)) w^{-1/2} e^{-w} dw
    let w_lo = x * x / t;
    let left = integrate_semi_infinite_with_breaks(
        |w| {
            let s = x * x / (2.0 * w);
            let decay = (-w - 0.5 * m1 * m1 * s).exp();
            if decay == 0.0 {
                return 0.0;
            }
            marginal_at(t - s) * decay / w.sqrt()
        },
        w_lo,
        &[w_lo + 0.5, w_lo + 1.0, w_lo + 2.0, w_lo + 4.0],
        spec,
    )?
    .scaled(FRAC_1_SQRT_PI * (-m1 * x).exp());

    // s in [t/2, t): the marginal vanishes as s -> t for y != 0
    let y_layer = y * y;
    let right = integrate_1d_with_breaks(
        |s| {
            let h = x.abs() / (SQRT_2PI * s * s.sqrt())
                * (-(m1 * s + x) * (m1 * s + x) / (2.0 * s)).exp();
            marginal_at(t - s) * h
        },
        0.5 * t,
        t,
        &[t - 4.0 * y_layer, t - y_layer, t - 0.25 * y_layer],
        spec,
    )?;

    let value = killed + left.value + right.value;
    // the hitting mass over [0, t] is at most 1, so inner marginal errors
    // (each within a small multiple of the abs/rel budget) integrate to at
    // most the same multiple of that budget
    let conv_value = left.value + right.value;
    let error =
        left.error + right.error + 3.0 * (spec.abs_tol + spec.rel_tol * conv_value.abs());
    Ok(Estimate {
        value,
        error,
        converged: left.converged && right.converged && marginal_ok.get(),
    })
}

/// Classical skew kernel at zero drift: phi_t(x-y) + sign(y)(2p-1) phi_t(|x|+|y|).
/// Reference oracle for the zero-drift reductions.
pub fn zero_drift_skew_kernel(p: f64, t: f64, x: f64, y: f64) -> f64 {
    let sqrt_t = t.sqrt();
    let direct = gauss_pdf((x - y) / sqrt_t) / sqrt_t;
    let image = gauss_pdf((x.abs() + y.abs()) / sqrt_t) / sqrt_t;
    if y > 0.0 {
        direct + (2.0 * p - 1.0) * image
    } else if y < 0.0 {
        direct - (2.0 * p - 1.0) * image
    } else {
        direct + (2.0 * p - 1.0) * image * if x >= 0.0 { 1.0 } else { -1.0 }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::integrate_semi_infinite;

    fn params(m1: f64, m2: f64, p: f64) -> DriftParams {
        DriftParams::new(m1, m2, p).unwrap()
    }

    fn pt(t: f64, x: f64, y: f64) -> SpaceTimePoint {
        SpaceTimePoint::new(t, x, y).unwrap()
    }

    fn spec() -> QuadratureSpec {
        QuadratureSpec::default()
    }

    #[test]
    fn killed_density_reflection_principle() {
        let v = killed_density(&params(0.0, 0.0, 0.5), 1.0, 1.0, 1.0).unwrap();
        assert!((v - 0.344_951_313_888_244_7).abs() < 1e-14);
        assert_eq!(killed_density(&params(1.0, -2.0, 0.3), 1.0, 1.0, 0.0).unwrap(), 0.0);
        let v = killed_density(&params(0.5, 0.0, 0.5), 1.0, 1.0, 2.0).unwrap();
        assert!((v - 0.345_617_025_374_040_4).abs() < 1e-14);
    }

    #[test]
    fn killed_density_conventions_differ_by_drift_rate_factor() {
        let pr = params(0.5, 0.0, 0.5);
        let t = 4.0;
        let scaled = killed_density_with_convention(&pr, t, 1.0, 2.0, ExponentConvention::TimeScaled).unwrap();
        let literal = killed_density_with_convention(&pr, t, 1.0, 2.0, ExponentConvention::Literal).unwrap();
        let want = (0.5 * 0.25 * (t - 1.0)).exp();
        assert!((literal / scaled - want).abs() < 1e-12);
        // conventions agree at t = 1
        let a = killed_density_with_convention(&pr, 1.0, 1.0, 2.0, ExponentConvention::TimeScaled).unwrap();
        let b = killed_density_with_convention(&pr, 1.0, 1.0, 2.0, ExponentConvention::Literal).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn killed_density_rejects_bad_domain() {
        let pr = params(0.0, 0.0, 0.5);
        assert!(killed_density(&pr, 0.0, 1.0, 1.0).is_err());
        assert!(killed_density(&pr, 1.0, -1.0, 1.0).is_err());
        assert!(killed_density(&pr, 1.0, 1.0, -0.1).is_err());
    }

    #[test]
    fn hitting_density_values_and_reflection() {
        let v = hitting_density(&params(0.0, 0.0, 0.5), 1.0, 1.0).unwrap();
        assert!((v - 0.241_970_724_519_143_37).abs() < 1e-14);
        let v = hitting_density(&params(1.0, 0.0, 0.5), 1.0, 1.0).unwrap();
        assert!((v - 0.053_990_966_513_188_06).abs() < 1e-14);
        let w = hitting_density(&params(0.0, -1.0, 0.5), -1.0, 1.0).unwrap();
        assert!((w - v).abs() < 1e-15);
        assert!(hitting_density(&params(0.0, 0.0, 0.5), 0.0, 1.0).is_err());
        assert!(hitting_density(&params(0.0, 0.0, 0.5), 1.0, 0.0).is_err());
    }

    #[test]
    fn hitting_mass_matches_quadrature() {
        for (pr, x, want) in [
            (params(0.0, 0.0, 0.5), 2.0, 1.0),
            (params(1.0, 0.0, 0.5), 1.0, (-2.0f64).exp()),
            (params(-3.0, 0.0, 0.5), 5.0, 1.0),
            (params(0.0, -1.0, 0.5), -1.0, (-2.0f64).exp()),
        ] {
            assert!((hitting_total_mass(&pr, x).unwrap() - want).abs() < 1e-15);
            let quad = integrate_semi_infinite(
                |s| hitting_density(&pr, x, s).unwrap(),
                0.0,
                &QuadratureSpec::new(1e-9, 1e-8, 4000).unwrap(),
            )
            .unwrap();
            assert!(
                (quad.value - want).abs() < 1e-6,
                "x={x}: quad={} want={want}",
                quad.value
            );
        }
    }

    #[test]
    fn driftless_joint_examples() {
        let v = driftless_joint_density(0.5, 1.0, 1.0, -1.0, 1.0).unwrap();
        assert!((v - 0.013_295_545_235_814_022).abs() < 1e-14);
        // continuity as l -> 0 toward the direct-substitution limit
        let lim = 1.4 * 2.0 * (-2.0f64).exp() / SQRT_2PI;
        let v = driftless_joint_density(0.7, 1.0, 1.0, 1.0, 1e-12).unwrap();
        assert!((v - lim).abs() < 1e-9);
        // reflection branch
        let a = driftless_joint_density(0.3, 1.0, -1.0, 1.0, 0.5).unwrap();
        let b = driftless_joint_density(0.7, 1.0, 1.0, -1.0, 0.5).unwrap();
        assert!((a - b).abs() < 1e-15);
    }

    #[test]
    fn driftless_joint_total_mass_with_killed_part() {
        // starting from x > 0 at zero drift, the crossing mass (joint density
        // integrated over l and y) plus the killed mass is 1
        let p = 0.5;
        let x = 1.0;
        let t = 1.0;
        let sp = QuadratureSpec::new(1e-9, 1e-8, 4000).unwrap();
        let crossing = |y: f64| {
            integrate_semi_infinite(
                |l| driftless_joint_density(p, t, x, y, l).unwrap(),
                0.0,
                &sp,
            )
            .unwrap()
            .value
        };
        let driftless = params(0.0, 0.0, p);
        let plus = integrate_1d_with_breaks(
            |y| crossing(y) + killed_density(&driftless, t, x, y).unwrap(),
            1e-9,
            10.0,
            &[0.5, 1.0, 2.0],
            &sp,
        )
        .unwrap();
        let minus = integrate_1d_with_breaks(|y| crossing(y), -10.0, -1e-9, &[-2.0, -1.0], &sp).unwrap();
        let total = plus.value + minus.value;
        assert!((total - 1.0).abs() < 1e-5, "total={total}");
    }

    #[test]
    fn joint_from_zero_reduces_to_classical_at_zero_drift() {
        let est = joint_density_from_zero(&params(0.0, 0.0, 0.5), 1.0, 0.5, 0.5, &spec()).unwrap();
        assert!(est.converged);
        assert!(
            (est.value - 0.241_970_724_519_143_37).abs() < 1e-7,
            "got {} err {}",
            est.value,
            est.error
        );
    }

    #[test]
    fn joint_from_zero_frozen_values() {
        let cases = [
            (1.0, 0.5, 0.5, params(1.0, -1.0, 0.5), 0.146_762_663_173_739_87),
            (1.0, 1.0, 0.5, params(1.0, -2.0, 0.3), 0.021_882_215_971_949_646),
            (2.0, -1.0, 1.0, params(1.0, -2.0, 0.3), 0.006_794_307_932_477_09),
        ];
        for (t, x, l, pr, want) in cases {
            let est = joint_density_from_zero(&pr, t, x, l, &spec()).unwrap();
            assert!(est.converged);
            assert!(
                (est.value - want).abs() / want < 1e-6,
                "t={t} x={x} l={l}: got {} want {want}",
                est.value
            );
        }
    }

    #[test]
    fn joint_from_zero_sandwiched_by_driftless_envelope() {
        // exp(-(m^sup)^2 t/2 + common) p0 <= joint <= exp(-(m_star)^2 t/2 + common) p0
        let pr = params(1.0, -2.0, 0.3);
        let (t, x, l) = (1.0, 1.0, 0.5);
        let est = joint_density_from_zero(&pr, t, x, l, &spec()).unwrap();
        let a = pr.skew_weight_at(x);
        let p0 = 2.0 * a * (l + x.abs()) * (-(l + x.abs()) * (l + x.abs()) / (2.0 * t)).exp()
            / (SQRT_2PI * t * t.sqrt());
        let common = (-l * pr.beta() + x * pr.drift_at(x)).exp();
        let lo = (-0.5 * pr.m_sup() * pr.m_sup() * t).exp() * common * p0;
        let hi = (-0.5 * pr.m_star() * pr.m_star() * t).exp() * common * p0;
        assert!(lo - 1e-12 <= est.value && est.value <= hi + 1e-12, "{lo} {} {hi}", est.value);
    }

    #[test]
    fn joint_from_zero_decays_in_l() {
        let pr = params(1.0, -1.0, 0.5);
        let mut prev = f64::INFINITY;
        for &l in &[3.0, 4.0, 5.0, 6.0] {
            let v = joint_density_from_zero(&pr, 1.0, 0.5, l, &spec()).unwrap().value;
            assert!(v < prev);
            prev = v;
        }
    }

    #[test]
    fn joint_from_zero_stable_under_tolerance_refinement() {
        let pr = params(1.0, -1.0, 0.5);
        let coarse = joint_density_from_zero(&pr, 1.0, 0.5, 0.5, &QuadratureSpec::new(1e-6, 1e-6, 2000).unwrap()).unwrap();
        let fine = joint_density_from_zero(&pr, 1.0, 0.5, 0.5, &QuadratureSpec::new(1e-10, 1e-9, 4000).unwrap()).unwrap();
        assert!((coarse.value - fine.value).abs() < 1e-6);
    }

    #[test]
    fn joint_from_zero_rejects_undamped_points() {
        let pr = params(0.0, 0.0, 0.5);
        assert!(matches!(
            joint_density_from_zero(&pr, 1.0, 0.5, 0.0, &spec()),
            Err(SbmError::UndampedSingularity(_))
        ));
        assert!(matches!(
            joint_density_from_zero(&pr, 1.0, 0.0, 0.5, &spec()),
            Err(SbmError::UndampedSingularity(_))
        ));
    }

    #[test]
    fn marginal_reduces_to_skew_kernel_at_zero_drift() {
        let est = marginal_density_from_zero(&params(0.0, 0.0, 0.7), 1.0, 1.0, &spec()).unwrap();
        assert!((est.value - 0.338_759_014_326_800_67).abs() < 1e-7, "got {}", est.value);
        let est = marginal_density_from_zero(&params(0.0, 0.0, 0.7), 1.0, -1.0, &spec()).unwrap();
        assert!((est.value - 0.145_182_434_711_486).abs() < 1e-7, "got {}", est.value);
    }

    #[test]
    fn marginal_frozen_values() {
        let cases = [
            (1.0, 0.5, params(1.0, -1.0, 0.5), 0.170_464_525_353_132_7),
            (1.0, -0.5, params(1.0, -1.0, 0.5), 0.170_464_525_353_132_7),
            (1.0, 1.0, params(1.0, -1.0, 0.5), 0.230_840_278_743_674_16),
            (0.5, -1.5, params(1.0, -2.0, 0.3), 0.419_642_933_970_244_44),
        ];
        for (t, x, pr, want) in cases {
            let est = marginal_density_from_zero(&pr, t, x, &spec()).unwrap();
            assert!(
                (est.value - want).abs() / want < 1e-6,
                "t={t} x={x}: got {} want {want}",
                est.value
            );
        }
    }

    #[test]
    fn closed_l_marginal_agrees_with_quadrature_route() {
        for (t, x, pr) in [
            (1.0, 0.5, params(1.0, -1.0, 0.5)),
            (1.0, 1.0, params(1.0, -2.0, 0.3)),
            (0.5, -1.5, params(1.0, -2.0, 0.3)),
            (2.0, -0.5, params(-1.0, 0.5, 0.7)),
            (1.0, 1.0, params(0.0, 0.0, 0.7)),
        ] {
            let a = marginal_density_from_zero(&pr, t, x, &spec()).unwrap();
            let b = marginal_from_zero_closed_l(&pr, t, x, &spec()).unwrap();
            assert!(
                (a.value - b.value).abs() / b.value < 1e-6,
                "t={t} x={x}: quadrature {} closed {}",
                a.value,
                b.value
            );
            assert!(b.converged);
        }
    }

    #[test]
    fn marginal_normalizes_to_one() {
        let pr = params(1.0, -1.0, 0.5);
        let sp = QuadratureSpec::new(1e-8, 1e-7, 4000).unwrap();
        let f = |x: f64| marginal_from_zero_closed_l(&pr, 1.0, x, &sp).unwrap().value;
        let lim = 11.0;
        let plus = integrate_1d_with_breaks(|x| f(x), 1e-7, lim, &[0.5, 1.0, 2.0, 4.0], &sp).unwrap();
        let minus = integrate_1d_with_breaks(|x| f(x), -lim, -1e-7, &[-4.0, -2.0, -1.0, -0.5], &sp).unwrap();
        let total = plus.value + minus.value;
        assert!((total - 1.0).abs() < 1e-4, "total mass {total}");
    }

    #[test]
    fn bounds_zero_drift_collapse_to_skew_kernel() {
        let pr = params(0.0, 0.0, 0.7);
        let b = density_bounds(&pr, &pt(1.0, 1.0, 1.0)).unwrap();
        assert!((b.lower - b.upper).abs() < 1e-15);
        assert!((b.upper - 0.420_538_667_006_707_9).abs() < 1e-9);
        assert!((b.upper - zero_drift_skew_kernel(0.7, 1.0, 1.0, 1.0)).abs() < 1e-12);
        let b = density_bounds(&pr, &pt(1.0, 1.0, -1.0)).unwrap();
        assert!((b.upper - 0.032_394_579_907_912_835).abs() < 1e-9);
        assert!((b.upper - zero_drift_skew_kernel(0.7, 1.0, 1.0, -1.0)).abs() < 1e-12);
    }

    #[test]
    fn bounds_constant_drift_collapse_to_gaussian() {
        let pr = params(1.0, 1.0, 0.5);
        let b = density_bounds(&pr, &pt(1.0, 1.0, 2.0)).unwrap();
        assert!((b.lower - b.upper).abs() < 1e-15);
        assert!((b.upper - 0.398_942_280_401_432_7).abs() < 1e-9);
    }

    #[test]
    fn bounds_frozen_general_case_and_forced_ratio() {
        let pr = params(1.0, -2.0, 0.5);
        let b = density_bounds(&pr, &pt(1.0, 1.0, -1.0)).unwrap();
        assert!((b.lower - 0.011_920_246_437_349_25).abs() < 1e-12);
        assert!((b.upper - 0.053_422_838_174_004_38).abs() < 1e-12);
        let ratio = b.upper / b.lower;
        let want = (1.5f64).exp();
        assert!((ratio - want).abs() < 1e-12);
        let b = density_bounds(&params(1.0, -2.0, 0.7), &pt(2.0, -1.5, 0.5)).unwrap();
        assert!((b.lower - 1.043_105_434_933_551_2e-4).abs() < 1e-15);
        assert!((b.upper - 2.095_133_272_813_557_2e-3).abs() < 1e-14);
        assert!((b.upper / b.lower - (3.0f64).exp()).abs() < 1e-11);
    }

    #[test]
    fn bounds_reflection_consistency() {
        for (pr, t, x, y) in [
            (params(1.0, -2.0, 0.3), 1.0, -0.5, 1.5),
            (params(1.0, -2.0, 0.3), 0.5, -1.0, -0.5),
            (params(-1.0, 0.5, 0.7), 2.0, 1.5, 0.5),
            (params(2.0, 2.0, 0.4), 1.0, 0.5, -1.5),
        ] {
            let b = density_bounds(&pr, &pt(t, x, y)).unwrap();
            let br = density_bounds(&pr.reflected(), &pt(t, x, y).reflected()).unwrap();
            assert!((b.lower - br.lower).abs() / b.lower < 1e-12);
            assert!((b.upper - br.upper).abs() / b.upper < 1e-12);
        }
    }

    #[test]
    fn bounds_reject_x_zero() {
        assert!(density_bounds(&params(0.0, 0.0, 0.5), &pt(1.0, 0.0, 1.0)).is_err());
    }

    #[test]
    fn matched_drift_density_requires_matched_magnitudes() {
        assert!(matched_drift_density(&params(1.0, -2.0, 0.5), &pt(1.0, 1.0, 1.0)).is_err());
        let v = matched_drift_density(&params(1.0, -1.0, 0.3), &pt(0.5, 1.0, -0.5)).unwrap();
        assert!((v - 0.030_424_302_117_810_754).abs() < 1e-12);
    }

    #[test]
    fn exact_density_zero_drift_reduction() {
        let est = exact_density(&params(0.0, 0.0, 0.7), &pt(1.0, 1.0, 1.0), &spec()).unwrap();
        assert!(est.converged);
        assert!(
            (est.value - 0.420_538_667_006_707_9).abs() < 2e-4,
            "got {} err {}",
            est.value,
            est.error
        );
    }

    #[test]
    fn exact_density_constant_drift_reduction() {
        let est = exact_density(&params(1.0, 1.0, 0.5), &pt(1.0, 1.0, 0.5), &spec()).unwrap();
        assert!(
            (est.value - 0.129_517_595_665_891_74).abs() < 2e-4,
            "got {} err {}",
            est.value,
            est.error
        );
    }

    #[test]
    fn exact_density_frozen_general_case_inside_bounds() {
        let pr = params(1.0, -2.0, 0.5);
        let point = pt(1.0, 1.0, -1.0);
        let est = exact_density(&pr, &point, &spec()).unwrap();
        assert!(
            (est.value - 0.026_194_350_794_465_637).abs() < 1e-5,
            "got {}",
            est.value
        );
        let b = density_bounds(&pr, &point).unwrap();
        let eps = 10.0 * est.error;
        assert!(b.lower - eps <= est.value && est.value <= b.upper + eps);
    }

    #[test]
    fn exact_density_delegates_x_zero_to_marginal() {
        let pr = params(1.0, -1.0, 0.5);
        let a = exact_density(&pr, &pt(1.0, 0.0, 0.5), &spec()).unwrap();
        let b = marginal_density_from_zero(&pr, 1.0, 0.5, &spec()).unwrap();
        assert_eq!(a.value, b.value);
    }

    #[test]
    fn exact_density_rejects_y_zero_and_bad_t() {
        let pr = params(0.0, 0.0, 0.5);
        assert!(exact_density(&pr, &SpaceTimePoint { t: 1.0, x: 1.0, y: 0.0 }, &spec()).is_err());
        assert!(exact_density(&pr, &SpaceTimePoint { t: -1.0, x: 1.0, y: 1.0 }, &spec()).is_err());
    }

    #[test]
    fn space_time_point_validation_and_reflection() {
        assert!(SpaceTimePoint::new(0.0, 1.0, 1.0).is_err());
        assert!(SpaceTimePoint::new(1.0, f64::NAN, 1.0).is_err());
        let q = pt(1.0, 0.5, -0.25);
        let r = q.reflected().reflected();
        assert_eq!(q, r);
    }
}
