//! Standard normal CDF and quantile.
//!
//! The quantile is Wichura's AS241 (`PPND16`), accurate to about 1e-16
//! relative error over the whole open unit interval, including the far tails
//! that the truncated sampler walks into when a truncation bound sits many
//! standard deviations from the mean.

// coefficients are kept exactly as published
#![allow(clippy::excessive_precision)]

use libm::erfc;

const SQRT_2: f64 = std::f64::consts::SQRT_2;

/// Standard normal CDF, `0.5 * erfc(-x / sqrt 2)`.
///
/// Computed through `erfc` so the lower tail keeps full relative precision.
pub fn normal_cdf(x: f64) -> f64 {
    if x == f64::NEG_INFINITY {
        return 0.0;
    }
    if x == f64::INFINITY {
        return 1.0;
    }
    0.5 * erfc(-x / SQRT_2)
}

/// Standard normal density.
pub fn normal_pdf(x: f64) -> f64 {
    const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;
    INV_SQRT_2PI * (-0.5 * x * x).exp()
}

const SPLIT1: f64 = 0.425;
const SPLIT2: f64 = 5.0;
const CONST1: f64 = 0.180_625;
const CONST2: f64 = 1.6;

// Central region, |p - 0.5| <= 0.425.
const A: [f64; 8] = [
    3.387_132_872_796_366_608,
    1.331_416_678_917_843_774_5e2,
    1.971_590_950_306_551_442_7e3,
    1.373_169_376_550_946_112_5e4,
    4.592_195_393_154_987_145_7e4,
    6.726_577_092_700_870_085_3e4,
    3.343_057_558_358_812_810_5e4,
    2.509_080_928_730_122_672_7e3,
];
const B: [f64; 8] = [
    1.0,
    4.231_333_070_160_091_125_2e1,
    6.871_870_074_920_579_083e2,
    5.394_196_021_424_751_107_7e3,
    2.121_379_430_158_659_586_7e4,
    3.930_789_580_009_271_061e4,
    2.872_908_573_572_194_267_4e4,
    5.226_495_278_852_854_561e3,
];
// Intermediate tail, r <= 5.
const C: [f64; 8] = [
    1.423_437_110_749_683_577_34,
    4.630_337_846_156_545_295_9,
    5.769_497_221_460_691_405_5,
    3.647_848_324_763_204_605_04,
    1.270_458_252_452_368_382_58,
    2.417_807_251_774_506_117_7e-1,
    2.272_384_498_926_918_458_33e-2,
    7.745_450_142_783_414_076_4e-4,
];
const D: [f64; 8] = [
    1.0,
    2.053_191_626_637_758_821_87,
    1.676_384_830_183_803_849_4,
    6.897_673_349_851_000_045_5e-1,
    1.481_039_764_274_800_745_9e-1,
    1.519_866_656_361_645_719_66e-2,
    5.475_938_084_995_344_946e-4,
    1.050_750_071_644_416_843_24e-9,
];
// Far tail, r > 5.
const E: [f64; 8] = [
    6.657_904_643_501_103_777_2,
    5.463_784_911_164_114_369_9,
    1.784_826_539_917_291_335_8,
    2.965_605_718_285_048_912_3e-1,
    2.653_218_952_657_612_309_3e-2,
    1.242_660_947_388_078_438_6e-3,
    2.711_555_568_743_487_578_15e-5,
    2.010_334_399_292_288_132_65e-7,
];
const F: [f64; 8] = [
    1.0,
    5.998_322_065_558_879_376_9e-1,
    1.369_298_809_227_358_053_1e-1,
    1.487_536_129_085_061_485_25e-2,
    7.868_691_311_456_132_591e-4,
    1.846_318_317_510_054_681_8e-5,
    1.421_511_758_316_445_888_7e-7,
    2.044_263_103_389_939_785_64e-15,
];

#[inline]
fn poly(coef: &[f64; 8], x: f64) -> f64 {
    coef.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

/// Standard normal quantile.
///
/// Returns `-inf` for `p <= 0`, `+inf` for `p >= 1` and NaN for NaN input.
pub fn normal_quantile(p: f64) -> f64 {
    if p.is_nan() {
        return f64::NAN;
    }
    if p <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if p >= 1.0 {
        return f64::INFINITY;
    }
    let q = p - 0.5;
    if q.abs() <= SPLIT1 {
        let r = CONST1 - q * q;
        return q * poly(&A, r) / poly(&B, r);
    }
    let tail = if q < 0.0 { p } else { 1.0 - p };
    let r = (-tail.ln()).sqrt();
    let magnitude = if r <= SPLIT2 {
        let r = r - CONST2;
        poly(&C, r) / poly(&D, r)
    } else {
        let r = r - SPLIT2;
        poly(&E, r) / poly(&F, r)
    };
    if q < 0.0 {
        -magnitude
    } else {
        magnitude
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use statrs::distribution::{ContinuousCDF, Normal};

    fn rel_err(a: f64, b: f64) -> f64 {
        if b == 0.0 {
            a.abs()
        } else {
            ((a - b) / b).abs()
        }
    }

    #[test]
    fn known_quantiles() {
        assert_eq!(normal_quantile(0.5), 0.0);
        assert!(rel_err(normal_quantile(0.975), 1.959_963_984_540_054) < 1e-14);
        assert!(rel_err(normal_quantile(0.025), -1.959_963_984_540_054) < 1e-14);
        assert!(rel_err(normal_quantile(1e-10), -6.361_340_902_404_056) < 1e-13);
        assert!(rel_err(normal_quantile(0.8413447460685429), 1.0) < 1e-12);
    }

    #[test]
    fn edge_inputs() {
        assert_eq!(normal_quantile(0.0), f64::NEG_INFINITY);
        assert_eq!(normal_quantile(1.0), f64::INFINITY);
        assert!(normal_quantile(f64::NAN).is_nan());
        assert_eq!(normal_cdf(f64::NEG_INFINITY), 0.0);
        assert_eq!(normal_cdf(f64::INFINITY), 1.0);
    }

    #[test]
    fn agrees_with_reference_quantile_on_open_interval() {
        let reference = Normal::new(0.0, 1.0).unwrap();
        let mut worst = 0.0f64;
        // log-spaced probabilities from 1e-15 to 0.5 and their mirrors
        for k in 0..=2000 {
            let lp = -15.0 + 15.0 * (k as f64) / 2000.0 * (1.0 - std::f64::consts::LOG10_2 / 15.0);
            let p = 10f64.powf(lp);
            for &pp in &[p, 1.0 - p] {
                if pp <= 1e-15 || pp >= 1.0 - 1e-15 {
                    continue;
                }
                let ours = normal_quantile(pp);
                let theirs = reference.inverse_cdf(pp);
                worst = worst.max(rel_err(ours, theirs));
            }
        }
        assert!(worst < 1e-10, "worst relative error {worst:e}");
    }

    #[test]
    fn cdf_roundtrip_in_deep_lower_tail() {
        // the quantile must stay accurate where the sampler uses it; above
        // zero, 1 - p itself runs out of digits
        let mut x = -37.0;
        while x < 3.0 {
            let p = normal_cdf(x);
            let back = normal_quantile(p);
            assert!(
                (back - x).abs() <= 1e-10 * x.abs().max(1.0),
                "x={x} p={p:e} back={back}"
            );
            x += 0.173;
        }
    }

    #[test]
    fn pdf_integrates_to_cdf_difference() {
        // Simpson over [-1, 2]
        let (a, b, n) = (-1.0f64, 2.0f64, 2000);
        let h = (b - a) / n as f64;
        let mut s = normal_pdf(a) + normal_pdf(b);
        for k in 1..n {
            let w = if k % 2 == 1 { 4.0 } else { 2.0 };
            s += w * normal_pdf(a + k as f64 * h);
        }
        let integral = s * h / 3.0;
        assert!((integral - (normal_cdf(b) - normal_cdf(a))).abs() < 1e-12);
    }
}
