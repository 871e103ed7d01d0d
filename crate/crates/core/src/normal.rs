//! Standard normal distribution functions with accurate tails.
//!
//! The cdf is built on `erfc`, the log-cdf switches to an asymptotic series in
//! the far left tail, and the quantile is Wichura's AS241 (PPND16) with a
//! variant that accepts the probability on the log scale.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

pub const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;
pub const LN_2PI: f64 = 1.837_877_066_409_345_5;

pub fn pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

pub fn ln_pdf(x: f64) -> f64 {
    -0.5 * x * x - LN_SQRT_2PI
}

pub fn cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x * FRAC_1_SQRT_2)
}

/// `ln Phi(x)`, finite for every finite `x`.
pub fn ln_cdf(x: f64) -> f64 {
    if x < -30.0 {
        // Phi(x) = phi(x)/(-x) * (1 - 1/x^2 + 3/x^4 - 15/x^6 + 105/x^8 - ...)
        let z = 1.0 / (x * x);
        let series = 1.0 - z * (1.0 - z * (3.0 - z * (15.0 - z * 105.0)));
        ln_pdf(x) - (-x).ln() + series.ln()
    } else if x > 5.0 {
        (-0.5 * libm::erfc(x * FRAC_1_SQRT_2)).ln_1p()
    } else {
        cdf(x).ln()
    }
}

/// Inverse Mills ratio `phi(x) / Phi(x)`.
pub fn mills(x: f64) -> f64 {
    (ln_pdf(x) - ln_cdf(x)).exp()
}

const A: [f64; 8] = [
    3.387_132_872_796_366_608,
    133.141_667_891_784_377_45,
    1_971.590_950_306_551_442_7,
    13_731.693_765_509_461_125,
    45_921.953_931_549_871_457,
    67_265.770_927_008_700_853,
    33_430.575_583_588_128_105,
    2_509.080_928_730_122_672_7,
];
const B: [f64; 8] = [
    1.0,
    42.313_330_701_600_911_252,
    687.187_007_492_057_908_3,
    5_394.196_021_424_751_107_7,
    21_213.794_301_586_595_867,
    39_307.895_800_092_710_61,
    28_729.085_735_721_942_674,
    5_226.495_278_852_545_925,
];
const C: [f64; 8] = [
    1.423_437_110_749_683_577_34,
    4.630_337_846_156_545_295_9,
    5.769_497_221_460_691_405_5,
    3.647_848_324_763_204_605_04,
    1.270_458_252_452_368_382_58,
    0.241_780_725_177_450_611_77,
    0.022_723_844_989_269_184_583_3,
    7.745_450_142_783_414_076_4e-4,
];
const D: [f64; 8] = [
    1.0,
    2.053_191_626_637_758_821_87,
    1.676_384_830_183_803_849_4,
    0.689_767_334_985_100_004_55,
    0.148_103_976_427_480_074_59,
    0.015_198_666_563_616_457_196_6,
    5.475_938_084_995_344_946e-4,
    1.050_750_071_644_416_843_24e-9,
];
const E: [f64; 8] = [
    6.657_904_643_501_103_777_2,
    5.463_784_911_164_114_369_9,
    1.784_826_539_917_291_335_8,
    0.296_560_571_828_504_891_23,
    0.026_532_189_526_576_123_093,
    0.001_242_660_947_388_078_438_6,
    2.711_555_568_743_487_578_15e-5,
    2.010_334_399_292_288_132_65e-7,
];
const F: [f64; 8] = [
    1.0,
    0.599_832_206_555_887_937_69,
    0.136_929_880_922_735_805_31,
    0.014_875_361_290_850_614_852_5,
    7.868_691_311_456_132_591e-4,
    1.846_318_317_510_054_681_8e-5,
    1.421_511_758_316_445_888_7e-7,
    2.044_263_103_389_939_785_64e-15,
];

fn ratio(num: &[f64; 8], den: &[f64; 8], r: f64) -> f64 {
    let p = num.iter().rev().fold(0.0, |acc, c| acc * r + c);
    let q = den.iter().rev().fold(0.0, |acc, c| acc * r + c);
    p / q
}

/// Tail branch of AS241 given `r = sqrt(-ln(min(p, 1-p)))`, returns the
/// (negative) lower-tail quantile.
fn tail(r: f64) -> f64 {
    if r <= 5.0 {
        -ratio(&C, &D, r - 1.6)
    } else {
        -ratio(&E, &F, r - 5.0)
    }
}

/// Quantile function `Phi^{-1}(p)`. Returns `-inf`/`inf` at 0/1 and NaN
/// outside `[0, 1]`.
pub fn quantile(p: f64) -> f64 {
    if !(0.0..=1.0).contains(&p) || p.is_nan() {
        return f64::NAN;
    }
    if p == 0.0 {
        return f64::NEG_INFINITY;
    }
    if p == 1.0 {
        return f64::INFINITY;
    }
    let q = p - 0.5;
    if q.abs() <= 0.425 {
        let r = 0.180_625 - q * q;
        return q * ratio(&A, &B, r);
    }
    let lower = if q < 0.0 { p } else { 1.0 - p };
    let x = tail((-lower.ln()).sqrt());
    if q < 0.0 {
        x
    } else {
        -x
    }
}

/// `Phi^{-1}(exp(ln_p))` without forming `exp(ln_p)` in the lower tail.
/// Below `p = 1e-300` the rational approximation is polished by Newton steps
/// on `ln Phi`, so any finite `ln_p` maps to a finite quantile.
pub fn quantile_ln(ln_p: f64) -> f64 {
    if ln_p > -2.590_267_165_445_826_6 {
        // p > 0.075: the central branch or the upper tail is accurate directly
        return quantile(ln_p.exp());
    }
    if ln_p.is_nan() {
        return f64::NAN;
    }
    if ln_p == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    let mut z = tail((-ln_p).sqrt());
    if ln_p < -690.0 {
        // Asymptotically z ~ -sqrt(-2 ln p); start there if the rational
        // branch has left its fitted range.
        if !z.is_finite() || z > -37.0 {
            z = -(-2.0 * ln_p).sqrt();
        }
        for _ in 0..50 {
            let step = (ln_cdf(z) - ln_p) / mills(z);
            z -= step;
            if step.abs() <= 1e-15 * z.abs() {
                break;
            }
        }
    }
    z
}
