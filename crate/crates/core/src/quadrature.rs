//! Adaptive Gauss–Kronrod quadrature.
//!
//! The workhorse is a global adaptive bisection over a set of user supplied
//! breakpoints, driven by the 7-point Gauss / 15-point Kronrod pair. Narrow
//! features (a Lorentzian of width 1e-4 sitting on a unit interval, say) are
//! only found reliably if a breakpoint brackets them, so callers are expected
//! to pass their peak locations in.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

// Gauss weights for the Kronrod nodes XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Tolerances and panel budget for one adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub rel: f64,
    pub abs: f64,
    pub max_panels: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self {
            rel: 1e-8,
            abs: 1e-12,
            max_panels: 200_000,
        }
    }
}

impl Tolerance {
    fn target(&self, value: f64) -> f64 {
        self.abs.max(self.rel * value.abs())
    }
}

/// Value and error bound of a quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
    pub panels: usize,
}

/// One 15-point Gauss–Kronrod rule on `[a, b]`, returning `(value, error estimate)`.
///
/// The error estimate follows the QUADPACK heuristic.
pub fn gauss_kronrod<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    let mut abs_sum = kronrod.abs();
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        kronrod += WGK[j] * (f1 + f2);
        abs_sum += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * kronrod;
    let mut asc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let value = kronrod * half;
    let asc = asc * half.abs();
    let abs_sum = abs_sum * half.abs();
    let mut err = ((kronrod - gauss) * half).abs();
    if asc != 0.0 && err != 0.0 {
        err = asc * (200.0 * err / asc).powf(1.5).min(1.0);
    }
    if abs_sum > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * abs_sum);
    }
    (value, err)
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.a.total_cmp(&self.a))
    }
}

/// Globally adaptive integration over `[points[0], points[last]]`.
///
/// `points` must be strictly increasing; each consecutive pair becomes an
/// initial panel, and the panel with the largest error estimate is bisected
/// until the summed error meets the tolerance.
pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, points: &[f64], tol: &Tolerance) -> Result<Integral> {
    if points.len() < 2 {
        return Err(Error::domain("quadrature needs at least two breakpoints"));
    }
    if points.windows(2).any(|w| !(w[1] > w[0])) || points.iter().any(|p| !p.is_finite()) {
        return Err(Error::domain("quadrature breakpoints must be finite and strictly increasing"));
    }

    let mut heap = BinaryHeap::with_capacity(points.len() * 4);
    // panels too narrow to bisect further
    let mut settled: Vec<Panel> = Vec::new();
    let mut total = 0.0;
    let mut total_err = 0.0;
    for w in points.windows(2) {
        let (value, error) = gauss_kronrod(&mut f, w[0], w[1]);
        total += value;
        total_err += error;
        heap.push(Panel { a: w[0], b: w[1], value, error });
    }

    loop {
        if total_err <= tol.target(total) {
            break;
        }
        let Some(worst) = heap.pop() else { break };
        let mid = 0.5 * (worst.a + worst.b);
        if !(mid > worst.a && mid < worst.b) || (worst.b - worst.a) < 1e-14 * mid.abs().max(1e-300) {
            settled.push(worst);
            continue;
        }
        if heap.len() + settled.len() + 2 > tol.max_panels {
            heap.push(worst);
            let (value, error) = summarize(&heap, &settled);
            return Err(Error::Quadrature {
                estimate: value,
                error_bound: error,
                panels: tol.max_panels,
            });
        }
        let (v1, e1) = gauss_kronrod(&mut f, worst.a, mid);
        let (v2, e2) = gauss_kronrod(&mut f, mid, worst.b);
        total += v1 + v2 - worst.value;
        total_err += e1 + e2 - worst.error;
        heap.push(Panel { a: worst.a, b: mid, value: v1, error: e1 });
        heap.push(Panel { a: mid, b: worst.b, value: v2, error: e2 });
    }

    let (value, error) = summarize(&heap, &settled);
    let panels = heap.len() + settled.len();
    if error > tol.target(value) && !settled.is_empty() && heap.is_empty() {
        return Err(Error::Quadrature { estimate: value, error_bound: error, panels });
    }
    Ok(Integral { value, error, panels })
}

// Fixed left-to-right summation so the result does not depend on heap order.
fn summarize(heap: &BinaryHeap<Panel>, settled: &[Panel]) -> (f64, f64) {
    let mut all: Vec<Panel> = heap.iter().chain(settled.iter()).copied().collect();
    all.sort_by(|p, q| p.a.total_cmp(&q.a));
    all.iter().fold((0.0, 0.0), |(v, e), p| (v + p.value, e + p.error))
}

/// Integrates `f` over `[a, inf)` for `a > 0` through the substitution `x = a / u`.
///
/// Suitable for integrands decaying at least as fast as `1/x^2`. Extra
/// breakpoints (all `> a`) are mapped into the unit interval.
pub fn integrate_to_infinity<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    extra_points: &[f64],
    tol: &Tolerance,
) -> Result<Integral> {
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::domain("semi-infinite quadrature needs a finite lower limit > 0"));
    }
    let mut upts: Vec<f64> = extra_points
        .iter()
        .filter(|&&p| p > a && p.is_finite())
        .map(|&p| a / p)
        .collect();
    upts.push(0.0);
    upts.push(1.0);
    upts.sort_by(f64::total_cmp);
    upts.dedup();
    integrate(
        |u| {
            if u <= 0.0 {
                0.0
            } else {
                let x = a / u;
                f(x) * a / (u * u)
            }
        },
        &upts,
        tol,
    )
}

/// Sums an oscillatory integral over `[a, inf)` panel by panel.
///
/// Each panel has width `panel`, normally half a period of the oscillating
/// factor, so consecutive contributions alternate in sign. Summation stops
/// once three consecutive panels fall below the tolerance; the size of the
/// last panel is folded into the reported error.
pub fn integrate_oscillatory_tail<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    panel: f64,
    tol: &Tolerance,
) -> Result<Integral> {
    if !(panel > 0.0 && panel.is_finite()) {
        return Err(Error::domain("oscillatory panel width must be > 0"));
    }
    let mut value = 0.0;
    let mut error = 0.0;
    let mut quiet = 0;
    let mut panels = 0;
    let mut k = 0usize;
    let local = Tolerance {
        rel: tol.rel,
        abs: tol.abs * 0.01,
        max_panels: tol.max_panels,
    };
    while panels < tol.max_panels {
        let lo = a + k as f64 * panel;
        let hi = lo + panel;
        k += 1;
        let part = integrate(&mut f, &[lo, hi], &local)?;
        panels += part.panels;
        value += part.value;
        error += part.error;
        if part.value.abs() < 0.1 * tol.target(value) {
            quiet += 1;
            if quiet >= 3 {
                error += part.value.abs();
                return Ok(Integral { value, error, panels });
            }
        } else {
            quiet = 0;
        }
    }
    Err(Error::Quadrature {
        estimate: value,
        error_bound: error,
        panels,
    })
}
