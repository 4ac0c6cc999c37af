//! Globally adaptive Gauss–Kronrod (7/15) quadrature on finite intervals.
//!
//! The error estimate follows QUADPACK's `qk15`: the raw Kronrod–Gauss
//! difference is rescaled by the integrand's mean absolute deviation, and a
//! round-off floor of `50 ε |∫|f||` is applied. The interval with the largest
//! estimated error is bisected until the summed error drops below
//! `max(abs_tol, rel_tol · |I|)`.
//!
//! Integrands are fallible (`FnMut(f64) -> Result<f64>`) so that nested
//! integrals propagate inner convergence failures with `?`.

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
    0.000_000_000_000_000_000_000_000_000_000_000,
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

const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Tolerances for [`Quadrature`].
#[derive(Debug, Clone, Copy)]
pub struct Quadrature {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for Quadrature {
    fn default() -> Self {
        Quadrature {
            abs_tol: 1e-12,
            rel_tol: 1e-12,
            max_intervals: 4000,
        }
    }
}

#[derive(Debug, Clone, Copy)]
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

/// One 15-point Kronrod application. Returns `(value, error, roundoff_floor)`.
fn kronrod15<F>(f: &mut F, a: f64, b: f64) -> Result<(f64, f64, f64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center)?;
    let mut res_k = fc * WGK[7];
    let mut res_g = fc * WG[3];
    let mut res_abs = res_k.abs();
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx)?;
        let f2 = f(center + dx)?;
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = res_k * 0.5;
    let mut res_asc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let value = res_k * half;
    res_abs *= half.abs();
    res_asc *= half.abs();
    let mut err = ((res_k - res_g) * half).abs();
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * (200.0 * err / res_asc).powf(1.5).min(1.0);
    }
    let floor = 50.0 * f64::EPSILON * res_abs;
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(floor);
    }
    Ok((value, err, floor))
}

impl Quadrature {
    pub fn with_tol(abs_tol: f64) -> Self {
        Quadrature {
            abs_tol,
            rel_tol: abs_tol,
            ..Default::default()
        }
    }

    /// ∫ₐᵇ f for an infallible integrand.
    pub fn integrate<F>(&self, mut f: F, a: f64, b: f64) -> Result<f64>
    where
        F: FnMut(f64) -> f64,
    {
        self.try_integrate(|x| Ok(f(x)), a, b, &[])
    }

    /// ∫ₐᵇ f with the interval pre-split at `breaks` (points outside `(a, b)`
    /// are ignored). Use for integrands with kinks or jumps at known places.
    pub fn try_integrate<F>(&self, mut f: F, a: f64, b: f64, breaks: &[f64]) -> Result<f64>
    where
        F: FnMut(f64) -> Result<f64>,
    {
        if a == b {
            return Ok(0.0);
        }
        let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
        let mut cuts: Vec<f64> = Vec::with_capacity(breaks.len() + 2);
        cuts.push(lo);
        cuts.extend(breaks.iter().copied().filter(|&p| p > lo && p < hi));
        cuts.push(hi);
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();

        let mut heap = BinaryHeap::new();
        let mut total = 0.0;
        let mut total_err = 0.0;
        let mut total_floor = 0.0;
        for w in cuts.windows(2) {
            let (v, e, fl) = kronrod15(&mut f, w[0], w[1])?;
            total += v;
            total_err += e;
            total_floor += fl;
            heap.push(Segment {
                a: w[0],
                b: w[1],
                value: v,
                error: e,
            });
        }

        let target = |total: f64| self.abs_tol.max(self.rel_tol * total.abs());
        while total_err > target(total) {
            if heap.len() >= self.max_intervals {
                break;
            }
            let worst = heap.pop().expect("heap is never empty");
            let mid = 0.5 * (worst.a + worst.b);
            if mid <= worst.a || mid >= worst.b {
                // interval cannot be split further in floating point
                heap.push(worst);
                break;
            }
            let (v1, e1, f1) = kronrod15(&mut f, worst.a, mid)?;
            let (v2, e2, f2) = kronrod15(&mut f, mid, worst.b)?;
            total += v1 + v2 - worst.value;
            total_err += e1 + e2 - worst.error;
            total_floor += f1 + f2;
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
        }

        // re-sum to shed accumulated cancellation in the running totals
        let (total, total_err) = heap
            .iter()
            .fold((0.0, 0.0), |(v, e), s| (v + s.value, e + s.error));
        let failed = !(total.is_finite() && total_err.is_finite())
            || (total_err > target(total) && total_err > 10.0 * total_floor);
        if failed {
            return Err(Error::Quadrature {
                estimate: sign * total,
                error: total_err,
            });
        }
        Ok(sign * total)
    }
}

/// ∫ₐᵇ f with the default tolerances (absolute and relative 1e-12).
pub fn integrate<F>(f: F, a: f64, b: f64) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    Quadrature::default().integrate(f, a, b)
}
