//! Globally adaptive 21-point Gauss–Kronrod quadrature.
//!
//! Integrals over `(0, ∞)` are mapped to `(0, 1)` with `t = u / (1 − u)`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

pub const DEFAULT_TOLERANCE: f64 = 1e-10;
pub const DEFAULT_MAX_SUBDIVISIONS: usize = 100_000;

#[allow(clippy::excessive_precision)]
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

#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureOptions {
    /// Absolute error target for the whole integral.
    pub tol: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        QuadratureOptions {
            tol: DEFAULT_TOLERANCE,
            max_subdivisions: DEFAULT_MAX_SUBDIVISIONS,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    /// Estimated absolute error.
    pub error: f64,
    pub subdivisions: usize,
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
        self.cmp(other) == Ordering::Equal
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
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.a.total_cmp(&self.a))
    }
}

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

fn kronrod21<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Segment {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let f_center = f(center);
    let mut res_kronrod = f_center * WGK[10];
    let mut res_gauss = 0.0;
    let mut res_abs = res_kronrod.abs();
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];
    for k in 0..10 {
        let x = half * XGK[k];
        let y1 = f(center - x);
        let y2 = f(center + x);
        fv1[k] = y1;
        fv2[k] = y2;
        res_kronrod += WGK[k] * (y1 + y2);
        res_abs += WGK[k] * (y1.abs() + y2.abs());
        if k % 2 == 1 {
            res_gauss += WG[k / 2] * (y1 + y2);
        }
    }
    let mean = 0.5 * res_kronrod;
    let mut res_asc = WGK[10] * (f_center - mean).abs();
    for k in 0..10 {
        res_asc += WGK[k] * ((fv1[k] - mean).abs() + (fv2[k] - mean).abs());
    }
    let err = (res_kronrod - res_gauss) * half;
    let abs_half = half.abs();
    Segment {
        a,
        b,
        value: res_kronrod * half,
        error: rescale_error(err, res_abs * abs_half, res_asc * abs_half),
    }
}

/// Integrates `f` over `[a, b]` to absolute accuracy `opts.tol`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, opts: QuadratureOptions) -> Result<Integral> {
    let first = kronrod21(&f, a, b);
    let mut heap = BinaryHeap::new();
    let mut total_error = first.error;
    heap.push(first);
    let mut settled_error = 0.0;
    let mut settled_value = 0.0;
    let mut subdivisions = 0;

    while total_error + settled_error > opts.tol {
        let Some(worst) = heap.pop() else { break };
        let mid = 0.5 * (worst.a + worst.b);
        if !(mid > worst.a && mid < worst.b) {
            // no room left to bisect
            settled_error += worst.error;
            settled_value += worst.value;
            total_error -= worst.error;
            continue;
        }
        if subdivisions >= opts.max_subdivisions {
            heap.push(worst);
            break;
        }
        subdivisions += 1;
        let left = kronrod21(&f, worst.a, mid);
        let right = kronrod21(&f, mid, worst.b);
        total_error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        // re-sum occasionally to limit drift in the running error
        if subdivisions % 256 == 0 {
            total_error = heap.iter().map(|s| s.error).sum();
        }
    }

    let value = heap.iter().map(|s| s.value).sum::<f64>() + settled_value;
    let error = heap.iter().map(|s| s.error).sum::<f64>() + settled_error;
    if !value.is_finite() || error > opts.tol {
        return Err(Error::QuadratureFailure {
            achieved: error,
            requested: opts.tol,
        });
    }
    Ok(Integral {
        value,
        error,
        subdivisions,
    })
}

/// Integrates `f` over `(0, ∞)` through `t = u / (1 − u)`.
pub fn integrate_half_line<F: Fn(f64) -> f64>(f: F, opts: QuadratureOptions) -> Result<Integral> {
    integrate(
        |u: f64| {
            let w = 1.0 - u;
            let t = u / w;
            if !t.is_finite() {
                return 0.0;
            }
            let y = f(t);
            if y == 0.0 {
                0.0
            } else {
                y / (w * w)
            }
        },
        0.0,
        1.0,
        opts,
    )
}
