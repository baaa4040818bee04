//! Adaptive Gauss-Kronrod quadrature: finite intervals, semi-infinite
//! intervals via a rational substitution, and iterated integration over the
//! triangle 0 < v < u < t.

use std::cell::Cell;
use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{invalid, Result};
use crate::numerics::{Estimate, QuadratureSpec};

// 15-point Kronrod abscissae on [-1, 1] (positive half) and weights, with
// the embedded 7-point Gauss weights. Values from the QUADPACK QK15 rule.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_17,
    0.207_784_955_007_898_47,
    0.000_000_000_000_000_0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_93,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_94,
    0.417_959_183_673_469_4,
];

/// QUADPACK-style error rescaling: sharpens the raw |K15 - G7| difference
/// using the variation of the integrand over the interval.
fn rescale_error(err: f64, res_abs: f64, res_asc: f64) -> f64 {
    let mut scaled = err.abs();
    if res_asc != 0.0 && scaled != 0.0 {
        let scale = (200.0 * scaled / res_asc).powf(1.5);
        scaled = if scale < 1.0 { res_asc * scale } else { res_asc };
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        scaled = scaled.max(50.0 * f64::EPSILON * res_abs);
    }
    scaled
}

/// One 15-point Kronrod evaluation on [a, b]; returns (value, error estimate).
///
/// Non-finite integrand values (an abscissa rounding onto a singular
/// endpoint after deep subdivision) are treated as zero; the surrounding
/// segments keep the error estimate honest.
fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let f = |x: f64| {
        let v = f(x);
        if v.is_finite() {
            v
        } else {
            0.0
        }
    };
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let f_center = f(center);

    let mut res_kronrod = f_center * WGK[7];
    let mut res_gauss = 0.0;
    let mut res_abs = res_kronrod.abs();
    let mut fv = [0.0f64; 15];
    fv[7] = f_center;

    for j in 0..7 {
        let offset = half * XGK[j];
        let f1 = f(center - offset);
        let f2 = f(center + offset);
        fv[j] = f1;
        fv[14 - j] = f2;
        res_kronrod += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_gauss += WG[j / 2] * (f1 + f2);
        }
    }
    res_gauss += WG[3] * f_center;

    let mean = res_kronrod * 0.5;
    let mut res_asc = WGK[7] * (f_center - mean).abs();
    for j in 0..7 {
        res_asc += WGK[j] * ((fv[j] - mean).abs() + (fv[14 - j] - mean).abs());
    }

    let err = (res_kronrod - res_gauss) * half;
    (
        res_kronrod * half,
        rescale_error(err, res_abs * half.abs(), res_asc * half.abs()),
    )
}

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Adaptive subdivision driven by the worst-interval error until the
/// combined estimate meets `spec`, starting from the given breakpoints.
fn adapt<F: Fn(f64) -> f64>(f: &F, edges: &[f64], spec: &QuadratureSpec) -> Estimate {
    let mut heap = BinaryHeap::new();
    let mut total_value = 0.0;
    let mut total_error = 0.0;
    let mut frozen_value = 0.0;
    let mut frozen_error = 0.0;
    let mut segments = edges.len() - 1;

    for w in edges.windows(2) {
        let (v, e) = gk15(f, w[0], w[1]);
        total_value += v;
        total_error += e;
        heap.push(Segment {
            a: w[0],
            b: w[1],
            value: v,
            error: e,
        });
    }

    while total_error + frozen_error > spec.target(total_value + frozen_value)
        && segments < spec.max_subdivisions
    {
        let Some(worst) = heap.pop() else { break };
        let mid = 0.5 * (worst.a + worst.b);
        // refuse to split below floating-point resolution
        if mid <= worst.a || mid >= worst.b {
            frozen_value += worst.value;
            frozen_error += worst.error;
            total_value -= worst.value;
            total_error -= worst.error;
            continue;
        }
        total_value -= worst.value;
        total_error -= worst.error;
        let (v1, e1) = gk15(f, worst.a, mid);
        let (v2, e2) = gk15(f, mid, worst.b);
        total_value += v1 + v2;
        total_error += e1 + e2;
        heap.push(Segment {
            a: worst.a,
            b: mid,
            value: v1,
            error: e1,
        });
        heap.push(Segment {
            a: mid,
            b: worst.b,
            value: v2,
            error: e2,
        });
        segments += 1;
    }

    let value = total_value + frozen_value;
    let error = total_error + frozen_error;
    Estimate {
        value,
        error,
        converged: error <= spec.target(value) && value.is_finite(),
    }
}

fn build_edges(lo: f64, hi: f64, breaks: &[f64]) -> Vec<f64> {
    let mut edges = Vec::with_capacity(breaks.len() + 2);
    edges.push(lo);
    let mut sorted: Vec<f64> = breaks.iter().copied().filter(|&b| b > lo && b < hi).collect();
    sorted.sort_by(f64::total_cmp);
    let min_gap = (hi - lo) * 1e-12;
    for b in sorted {
        if b - edges.last().unwrap() > min_gap && hi - b > min_gap {
            edges.push(b);
        }
    }
    edges.push(hi);
    edges
}

/// Adaptive estimate of ∫_lo^hi f, with error reported against `spec`.
///
/// Integrable endpoint singularities are handled by subdivision; interior
/// structure known to the caller can be marked with
/// [`integrate_1d_with_breaks`].
pub fn integrate_1d<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, spec: &QuadratureSpec) -> Result<Estimate> {
    integrate_1d_with_breaks(f, lo, hi, &[], spec)
}

/// As [`integrate_1d`], seeding the subdivision with the given interior
/// breakpoints (points outside (lo, hi) are ignored).
pub fn integrate_1d_with_breaks<F: Fn(f64) -> f64>(
    f: F,
    lo: f64,
    hi: f64,
    breaks: &[f64],
    spec: &QuadratureSpec,
) -> Result<Estimate> {
    if !(lo < hi) {
        return Err(invalid(format!("integration bounds must satisfy lo < hi, got [{lo}, {hi}]")));
    }
    spec.validate()?;
    Ok(adapt(&f, &build_edges(lo, hi, breaks), spec))
}

/// ∫_lo^∞ f via the substitution l = lo + u/(1-u), u in (0,1).
///
/// Requires f to decay at least exponentially; values past the point where
/// f underflows to zero contribute nothing.
pub fn integrate_semi_infinite<F: Fn(f64) -> f64>(f: F, lo: f64, spec: &QuadratureSpec) -> Result<Estimate> {
    integrate_semi_infinite_with_breaks(f, lo, &[], spec)
}

/// As [`integrate_semi_infinite`]; `breaks` are in the original variable.
pub fn integrate_semi_infinite_with_breaks<F: Fn(f64) -> f64>(
    f: F,
    lo: f64,
    breaks: &[f64],
    spec: &QuadratureSpec,
) -> Result<Estimate> {
    spec.validate()?;
    let g = |u: f64| {
        let w = 1.0 - u;
        if w <= 1e-300 {
            return 0.0;
        }
        let fx = f(lo + u / w);
        if fx == 0.0 {
            0.0
        } else {
            fx / (w * w)
        }
    };
    let mut u_breaks: Vec<f64> = breaks
        .iter()
        .filter(|&&b| b > lo)
        .map(|&b| {
            let d = b - lo;
            d / (1.0 + d)
        })
        .collect();
    // keep the tail from being written off by a single coarse panel
    u_breaks.extend_from_slice(&[0.5, 0.9, 0.99]);
    Ok(adapt(&g, &build_edges(0.0, 1.0, &u_breaks), spec))
}

/// Iterated adaptive quadrature of f(v, u) over the simplex 0 < v < u < t.
///
/// The inner integral runs over v in (0, u) for each outer node u, with its
/// absolute tolerance scaled by 1/t so the accumulated inner error stays
/// within the caller's budget. Each inner run meets its own abs/rel target,
/// so for a sign-constant integrand the integrated inner error is bounded
/// by abs_tol + rel_tol * |result|; the reported error adds that budget to
/// the outer estimate, and convergence means every level met its target.
pub fn integrate_2d_simplex<F: Fn(f64, f64) -> f64>(f: F, t: f64, spec: &QuadratureSpec) -> Result<Estimate> {
    let fractions = [
        0.00390625, 0.0625, 0.25, 0.5, 0.75, 0.9375, 0.99609375,
    ];
    let outer: Vec<f64> = fractions.iter().map(|&c| c * t).collect();
    integrate_2d_simplex_with_breaks(f, t, spec, &outer, |u, out| {
        out.extend(fractions.iter().map(|&c| c * u));
    })
}

/// As [`integrate_2d_simplex`] with caller-supplied subdivision seeds:
/// `outer_breaks` in u, and `inner_breaks(u, &mut v_breaks)` for each
/// inner integral.
pub fn integrate_2d_simplex_with_breaks<F, G>(
    f: F,
    t: f64,
    spec: &QuadratureSpec,
    outer_breaks: &[f64],
    inner_breaks: G,
) -> Result<Estimate>
where
    F: Fn(f64, f64) -> f64,
    G: Fn(f64, &mut Vec<f64>),
{
    if !(t > 0.0) {
        return Err(invalid(format!("simplex integration requires t > 0, got {t}")));
    }
    spec.validate()?;
    let inner_spec = QuadratureSpec {
        abs_tol: (spec.abs_tol / t).min(0.5),
        rel_tol: spec.rel_tol,
        max_subdivisions: spec.max_subdivisions,
    };
    let inner_ok = Cell::new(true);
    let outer_fn = |u: f64| {
        let mut breaks = Vec::new();
        inner_breaks(u, &mut breaks);
        let est = adapt(&|v| f(v, u), &build_edges(0.0, u, &breaks), &inner_spec);
        if !est.converged {
            inner_ok.set(false);
        }
        est.value
    };
    let outer = adapt(&outer_fn, &build_edges(0.0, t, outer_breaks), spec);
    let inner_budget = spec.abs_tol + spec.rel_tol * outer.value.abs();
    Ok(Estimate {
        value: outer.value,
        error: outer.error + inner_budget,
        converged: outer.converged && inner_ok.get(),
    })
}
