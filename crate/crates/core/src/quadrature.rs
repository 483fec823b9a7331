//! Adaptive Gauss–Kronrod quadrature on finite intervals, plus semi-infinite
//! integration with an analytic power-law tail remainder.
//!
//! Semi-infinite integrals are split into a finite head and geometrically
//! growing panels `[R, 2R]`. After each panel the remainder beyond `R` is
//! bounded by the decay model of the integrand: for `f(r) ~ K r^-p` the
//! remainder is `f(R) R / (p - 1)`. Integration stops once that estimate is
//! below [`TAIL_REL_TOL`] of the accumulated value, and the estimate is added.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

/// Relative size of the analytic tail remainder at which panels stop.
pub const TAIL_REL_TOL: f64 = 1e-14;

const MAX_PANELS: usize = 600;
const MAX_SUBDIVISIONS: usize = 800;

// 21-point Kronrod abscissae, descending; odd indices are the 10-point Gauss nodes.
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_208_980_242_358,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

/// Convergence target: an interval is accepted once `err <= max(abs, rel * |value|)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
}

impl Tolerance {
    pub const fn new(abs: f64, rel: f64) -> Self {
        Self { abs, rel }
    }

    fn accepts(&self, value: f64, err: f64) -> bool {
        err <= self.abs.max(self.rel * value.abs())
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Self::new(0.0, 1e-12)
    }
}

/// How the integrand decays at +∞.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Decay {
    /// `|f(r)| <= K r^-p` with `p > 1`.
    Power(f64),
    /// Faster than any power (Gaussian-type).
    Rapid,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
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

/// One 21-point Gauss–Kronrod rule with the QUADPACK error heuristic.
fn gk21<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let f_center = f(center);

    let mut res_k = f_center * WGK[10];
    let mut res_g = 0.0;
    let mut res_abs = res_k.abs();
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];

    for j in 0..10 {
        let x = half * XGK[j];
        let f1 = f(center - x);
        let f2 = f(center + x);
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }

    let mean = 0.5 * res_k;
    let mut res_asc = WGK[10] * (f_center - mean).abs();
    for j in 0..10 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }

    let value = res_k * half;
    let res_abs = res_abs * half.abs();
    let res_asc = res_asc * half.abs();
    let mut err = ((res_k - res_g) * half).abs();
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * (200.0 * err / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    (value, err)
}

/// Adaptive bisection of the worst segment until the total error meets `tol`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: Tolerance) -> Result<Estimate> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::QuadratureFailure(format!("non-finite bounds [{a}, {b}]")));
    }
    if a == b {
        return Ok(Estimate { value: 0.0, error: 0.0 });
    }
    let (value, error) = gk21(&f, a, b);
    if !value.is_finite() {
        return Err(Error::QuadratureFailure(format!("non-finite integrand on [{a}, {b}]")));
    }
    let mut heap = BinaryHeap::new();
    heap.push(Segment { a, b, value, error });
    let mut total = value;
    let mut total_err = error;

    for _ in 0..MAX_SUBDIVISIONS {
        if tol.accepts(total, total_err) {
            break;
        }
        let worst = heap.pop().expect("heap holds at least one segment");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // interval exhausted at machine resolution
            heap.push(worst);
            break;
        }
        let (v1, e1) = gk21(&f, worst.a, mid);
        let (v2, e2) = gk21(&f, mid, worst.b);
        if !(v1.is_finite() && v2.is_finite()) {
            return Err(Error::QuadratureFailure(format!("non-finite integrand near [{}, {}]", worst.a, worst.b)));
        }
        total += v1 + v2 - worst.value;
        total_err += e1 + e2 - worst.error;
        heap.push(Segment { a: worst.a, b: mid, value: v1, error: e1 });
        heap.push(Segment { a: mid, b: worst.b, value: v2, error: e2 });
    }

    // resum to shed the drift of the running totals
    let (value, error) = heap.iter().fold((0.0, 0.0), |(v, e), s| (v + s.value, e + s.error));
    if !tol.accepts(value, error) && !Tolerance::new(0.0, 1e-8).accepts(value, error) {
        return Err(Error::QuadratureFailure(format!("error {error:e} on [{a}, {b}] with value {value:e}")));
    }
    Ok(Estimate { value, error })
}

/// `∫_a^∞ f`, using `decay` to bound the remainder beyond the last panel.
pub fn integrate_to_infinity<F: Fn(f64) -> f64>(f: F, a: f64, decay: Decay, tol: Tolerance) -> Result<Estimate> {
    if let Decay::Power(p) = decay {
        if !(p > 1.0) {
            return Err(Error::QuadratureFailure(format!("integrand decaying like r^-{p} is not integrable")));
        }
    }
    if !a.is_finite() {
        return Err(Error::QuadratureFailure(format!("non-finite lower bound {a}")));
    }

    let mut right = a.max(0.0) + 1.0;
    let head = integrate(&f, a, right, tol)?;
    let mut value = head.value;
    let mut error = head.error;

    for _ in 0..MAX_PANELS {
        let f_right = f(right).abs();
        match decay {
            Decay::Power(p) => {
                let remainder = f_right * right / (p - 1.0);
                if remainder <= TAIL_REL_TOL * value.abs() {
                    return Ok(Estimate { value: value + remainder, error: error + remainder });
                }
            }
            Decay::Rapid => {
                if f_right * right <= 1e-3 * TAIL_REL_TOL * value.abs() || f_right == 0.0 {
                    return Ok(Estimate { value, error: error + f_right * right });
                }
            }
        }
        let next = 2.0 * right;
        let panel = integrate(&f, right, next, tol)?;
        value += panel.value;
        error += panel.error;
        right = next;
    }
    Err(Error::QuadratureFailure(format!("tail remainder did not fall below tolerance by r = {right:e}")))
}

/// `∫_{-∞}^b f`, by reflection.
pub fn integrate_from_neg_infinity<F: Fn(f64) -> f64>(f: F, b: f64, decay: Decay, tol: Tolerance) -> Result<Estimate> {
    integrate_to_infinity(|x| f(-x), -b, decay, tol)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_is_exact() {
        let est = integrate(|x| x * x * x - 2.0 * x + 1.0, -1.0, 2.0, Tolerance::default()).unwrap();
        // [x^4/4 - x^2 + x] from -1 to 2 = 2 - (-1.75)
        assert!((est.value - 3.75).abs() < 1e-14);
    }

    #[test]
    fn gaussian_tail_matches_erfc() {
        let est = integrate_to_infinity(|x| (-0.5 * x * x).exp(), 1.5, Decay::Rapid, Tolerance::default()).unwrap();
        let expected = (std::f64::consts::PI / 2.0).sqrt() * libm::erfc(1.5 / 2f64.sqrt());
        assert!((est.value / expected - 1.0).abs() < 1e-13, "{} vs {expected}", est.value);
    }

    #[test]
    fn power_tail_remainder_is_added() {
        // ∫_0^∞ (1+x)^-3 dx = 1/2
        let est = integrate_to_infinity(|x| (1.0 + x).powi(-3), 0.0, Decay::Power(3.0), Tolerance::default()).unwrap();
        assert!((est.value - 0.5).abs() < 1e-13, "{}", est.value);
    }

    #[test]
    fn slow_power_tail() {
        // ∫_1^∞ x^-1.25 dx = 4
        let est = integrate_to_infinity(|x| x.powf(-1.25), 1.0, Decay::Power(1.25), Tolerance::default()).unwrap();
        assert!((est.value - 4.0).abs() < 1e-11, "{}", est.value);
    }

    #[test]
    fn reflection_from_negative_infinity() {
        // ∫_{-∞}^0 e^x dx = 1
        let est = integrate_from_neg_infinity(f64::exp, 0.0, Decay::Rapid, Tolerance::default()).unwrap();
        assert!((est.value - 1.0).abs() < 1e-14);
    }

    #[test]
    fn non_integrable_power_is_rejected() {
        let err = integrate_to_infinity(|x| 1.0 / (1.0 + x), 0.0, Decay::Power(1.0), Tolerance::default());
        assert!(matches!(err, Err(Error::QuadratureFailure(_))));
    }
}
