//! Adaptive Gauss–Kronrod (10/21 point) quadrature on finite intervals.
//!
//! Works for real and complex integrands through the [`QuadValue`] trait. The
//! driver keeps a list of subintervals and always bisects the one with the
//! largest local error estimate until the summed estimate meets the tolerance.

#![allow(clippy::excessive_precision)]

use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Result, RuinError};

/// Abscissae of the 21-point Kronrod rule (positive half, descending).
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689,
    0.973_906_528_517_171_720_077_964_012_084,
    0.930_157_491_355_708_226_001_207_180_059,
    0.865_063_366_688_984_510_732_096_688_423,
    0.780_817_726_586_416_897_063_717_578_345,
    0.679_409_568_299_024_406_234_327_365_114,
    0.562_757_134_668_604_683_339_000_099_272,
    0.433_395_394_129_247_190_799_265_943_165,
    0.294_392_862_701_460_198_131_126_603_103,
    0.148_874_338_981_631_210_884_826_001_129,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062,
    0.032_558_162_307_964_727_478_818_972_459,
    0.054_755_896_574_351_996_031_381_300_244,
    0.075_039_674_810_919_952_767_043_140_916,
    0.093_125_454_583_697_605_535_065_465_083,
    0.109_387_158_802_297_641_899_210_590_325,
    0.123_491_976_262_065_851_077_208_306_618,
    0.134_709_217_311_473_325_928_054_001_771,
    0.142_775_938_577_060_080_797_094_273_138,
    0.147_739_104_901_338_491_374_841_515_972,
    0.149_445_554_002_916_905_664_936_468_389,
];

/// Weights of the embedded 10-point Gauss rule (nodes are XGK[1], XGK[3], ...).
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893,
    0.149_451_349_150_580_593_145_776_339_657,
    0.219_086_362_515_982_043_995_534_934_228,
    0.269_266_719_309_996_355_091_226_921_569,
    0.295_524_224_714_752_870_173_892_994_651,
];

/// Values that can be integrated: a vector space over `f64` with a norm.
pub trait QuadValue: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> {
    fn zero() -> Self;
    fn magnitude(&self) -> f64;
}

impl QuadValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn magnitude(&self) -> f64 {
        self.abs()
    }
}

impl QuadValue for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_segments: usize,
}

impl Tolerance {
    pub fn new(abs: f64, rel: f64) -> Self {
        Self {
            abs,
            rel,
            max_segments: 4000,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct QuadResult<T> {
    pub value: T,
    pub error: f64,
    pub segments: usize,
}

#[derive(Clone, Copy)]
struct Segment<T> {
    a: f64,
    b: f64,
    value: T,
    error: f64,
}

fn kronrod21<T: QuadValue, F: FnMut(f64) -> T>(f: &mut F, a: f64, b: f64) -> (T, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[10];
    let mut gauss = T::zero();
    for j in 0..10 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        let pair = f1 + f2;
        kronrod = kronrod + pair * WGK[j];
        if j % 2 == 1 {
            gauss = gauss + pair * WG[j / 2];
        }
    }
    let value = kronrod * half;
    let error = ((kronrod - gauss) * half).magnitude();
    (value, error)
}

/// Integrates `f` over `[a, b]`, splitting first at the given interior
/// breakpoints (which must be sorted and lie inside the interval).
pub fn integrate_with_breaks<T, F>(
    mut f: F,
    a: f64,
    b: f64,
    breaks: &[f64],
    tol: Tolerance,
) -> Result<QuadResult<T>>
where
    T: QuadValue,
    F: FnMut(f64) -> T,
{
    if !(a.is_finite() && b.is_finite()) {
        return Err(RuinError::Domain(format!(
            "quadrature needs a finite interval, got [{a}, {b}]"
        )));
    }
    if a == b {
        return Ok(QuadResult {
            value: T::zero(),
            error: 0.0,
            segments: 0,
        });
    }

    let mut points = Vec::with_capacity(breaks.len() + 2);
    points.push(a);
    points.extend(breaks.iter().copied().filter(|&p| p > a && p < b));
    points.push(b);

    let mut segments: Vec<Segment<T>> = points
        .windows(2)
        .map(|w| {
            let (value, error) = kronrod21(&mut f, w[0], w[1]);
            Segment {
                a: w[0],
                b: w[1],
                value,
                error,
            }
        })
        .collect();

    loop {
        let total = segments.iter().fold(T::zero(), |acc, s| acc + s.value);
        let err: f64 = segments.iter().map(|s| s.error).sum();
        let target = tol.abs.max(tol.rel * total.magnitude());
        if err <= target {
            return Ok(QuadResult {
                value: total,
                error: err,
                segments: segments.len(),
            });
        }

        let (worst, _) = segments
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |(bi, be), (i, s)| {
                if s.error > be {
                    (i, s.error)
                } else {
                    (bi, be)
                }
            });
        let seg = segments[worst];
        let mid = 0.5 * (seg.a + seg.b);
        // interval can no longer be resolved in double precision
        if segments.len() >= tol.max_segments || mid <= seg.a || mid >= seg.b {
            if err <= 100.0 * target {
                return Ok(QuadResult {
                    value: total,
                    error: err,
                    segments: segments.len(),
                });
            }
            return Err(RuinError::Numeric {
                what: "adaptive quadrature",
                residual: err,
            });
        }
        let (lv, le) = kronrod21(&mut f, seg.a, mid);
        let (rv, re) = kronrod21(&mut f, mid, seg.b);
        segments[worst] = Segment {
            a: seg.a,
            b: mid,
            value: lv,
            error: le,
        };
        segments.push(Segment {
            a: mid,
            b: seg.b,
            value: rv,
            error: re,
        });
    }
}

pub fn integrate<T, F>(f: F, a: f64, b: f64, tol: Tolerance) -> Result<QuadResult<T>>
where
    T: QuadValue,
    F: FnMut(f64) -> T,
{
    integrate_with_breaks(f, a, b, &[], tol)
}

/// Geometric breakpoints `scale, 4*scale, 16*scale, ...` below `end`.
pub(crate) fn geometric_breaks(scale: f64, end: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut p = scale;
    while p < end {
        out.push(p);
        p *= 4.0;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_is_exact() {
        let r = integrate(
            |x: f64| x.powi(5) - 3.0 * x * x,
            0.0,
            2.0,
            Tolerance::new(1e-14, 0.0),
        )
        .unwrap();
        assert!((r.value - (64.0 / 6.0 - 8.0)).abs() < 1e-13);
    }

    #[test]
    fn peaked_integrand_refines() {
        // ∫_0^1 1/(1e-4 + x^2) dx = atan(1/0.01)/0.01
        let exact = (100.0f64).atan() / 0.01;
        let r = integrate(
            |x: f64| 1.0 / (1e-4 + x * x),
            0.0,
            1.0,
            Tolerance::new(1e-10, 1e-14),
        )
        .unwrap();
        assert!((r.value - exact).abs() < 1e-9, "{} vs {}", r.value, exact);
        assert!(r.segments > 1);
    }

    #[test]
    fn complex_oscillatory() {
        // ∫_0^{2π} e^{i 5 x} dx = 0
        let r = integrate(
            |x: f64| Complex64::new(0.0, 5.0 * x).exp(),
            0.0,
            2.0 * std::f64::consts::PI,
            Tolerance::new(1e-13, 0.0),
        )
        .unwrap();
        assert!(r.value.norm() < 1e-12);
    }

    #[test]
    fn empty_interval() {
        let r = integrate(|x: f64| x, 1.0, 1.0, Tolerance::new(1e-12, 0.0)).unwrap();
        assert_eq!(r.value, 0.0);
    }
}
