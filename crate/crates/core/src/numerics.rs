//! Numerical engine: adaptive Gauss-Kronrod quadrature on `[0, 1]` with
//! declared breakpoints, bracketed root finding, and generalized inversion of
//! nondecreasing functions.
//!
//! Everything here is pure; no state is shared between calls.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

/// Tolerance and breakpoint configuration for [`integrate`].
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureSpec {
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Maximum number of bisections applied to any single panel.
    pub max_depth: u32,
    split_points: Vec<f64>,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            abs_tol: 1e-12,
            rel_tol: 1e-10,
            max_depth: 60,
            split_points: Vec::new(),
        }
    }
}

impl QuadratureSpec {
    pub fn new(abs_tol: f64, rel_tol: f64, max_depth: u32) -> Result<Self> {
        if !(abs_tol > 0.0 && abs_tol.is_finite()) {
            return Err(Error::ParamOutOfRange {
                name: "abs_tol",
                value: abs_tol,
                expected: "> 0",
            });
        }
        if !(rel_tol > 0.0 && rel_tol.is_finite()) {
            return Err(Error::ParamOutOfRange {
                name: "rel_tol",
                value: rel_tol,
                expected: "> 0",
            });
        }
        Ok(Self {
            abs_tol,
            rel_tol,
            max_depth,
            split_points: Vec::new(),
        })
    }

    /// Declares breakpoints where the integrand may be non-smooth. Points must
    /// lie strictly inside `(0, 1)` and be strictly increasing.
    pub fn with_split_points(mut self, points: Vec<f64>) -> Result<Self> {
        for (i, &p) in points.iter().enumerate() {
            if !(p > 0.0 && p < 1.0) {
                return Err(Error::ParamOutOfRange {
                    name: "split_point",
                    value: p,
                    expected: "strictly inside (0, 1)",
                });
            }
            if i > 0 && p <= points[i - 1] {
                return Err(Error::ParamOutOfRange {
                    name: "split_point",
                    value: p,
                    expected: "strictly increasing",
                });
            }
        }
        self.split_points = points;
        Ok(self)
    }

    pub fn split_points(&self) -> &[f64] {
        &self.split_points
    }
}

// 15-point Kronrod abscissae and weights with the embedded 7-point Gauss rule.
#[allow(clippy::excessive_precision)]
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
#[allow(clippy::excessive_precision)]
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
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    depth: u32,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
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
        self.error.total_cmp(&other.error)
    }
}

fn gauss_kronrod_15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, depth: u32) -> Result<Panel> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let eval = |t: f64| -> Result<f64> {
        let y = f(t);
        if y.is_finite() {
            Ok(y)
        } else {
            Err(Error::NonFinite { at: t })
        }
    };

    let f_center = eval(center)?;
    let mut gauss = f_center * WG[3];
    let mut kronrod = f_center * WGK[7];
    let mut res_abs = kronrod.abs();
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];

    for j in 0..7 {
        let x = half * XGK[j];
        let f1 = eval(center - x)?;
        let f2 = eval(center + x)?;
        fv1[j] = f1;
        fv2[j] = f2;
        kronrod += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }

    let mean = kronrod * 0.5;
    let mut res_asc = WGK[7] * (f_center - mean).abs();
    for j in 0..7 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }

    let value = kronrod * half;
    res_abs *= half.abs();
    res_asc *= half.abs();
    let error = rescale_error((kronrod - gauss) * half, res_abs, res_asc);
    Ok(Panel {
        a,
        b,
        value,
        error,
        depth,
    })
}

fn rescale_error(err: f64, res_abs: f64, res_asc: f64) -> f64 {
    let mut scaled = err.abs();
    if res_asc != 0.0 && scaled != 0.0 {
        let scale = (200.0 * scaled / res_asc).powf(1.5);
        scaled = if scale < 1.0 {
            res_asc * scale
        } else {
            res_asc
        };
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        scaled = scaled.max(50.0 * f64::EPSILON * res_abs);
    }
    scaled
}

const MAX_PANELS: usize = 20_000;

/// Integrates `f` over `[0, 1]`.
///
/// Each panel between consecutive split points is seeded separately, then the
/// panel with the largest error estimate is bisected until the summed error
/// estimate satisfies `abs_tol` or `rel_tol * |I|`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, spec: &QuadratureSpec) -> Result<f64> {
    let mut edges = Vec::with_capacity(spec.split_points.len() + 2);
    edges.push(0.0);
    edges.extend_from_slice(&spec.split_points);
    edges.push(1.0);

    let mut heap = BinaryHeap::new();
    for w in edges.windows(2) {
        heap.push(gauss_kronrod_15(&f, w[0], w[1], 0)?);
    }

    loop {
        let total: f64 = heap.iter().map(|p| p.value).sum();
        let err: f64 = heap.iter().map(|p| p.error).sum();
        if err <= spec.abs_tol.max(spec.rel_tol * total.abs()) {
            return Ok(total);
        }
        let worst = heap.pop().expect("at least one panel");
        if worst.depth >= spec.max_depth || heap.len() + 2 > MAX_PANELS {
            return Err(Error::NonConvergent {
                estimate: total,
                error_bound: err,
            });
        }
        let mid = 0.5 * (worst.a + worst.b);
        heap.push(gauss_kronrod_15(&f, worst.a, mid, worst.depth + 1)?);
        heap.push(gauss_kronrod_15(&f, mid, worst.b, worst.depth + 1)?);
    }
}

/// Bracket and stopping configuration for [`find_root`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootSpec {
    pub lo: f64,
    pub hi: f64,
    pub tol: f64,
    pub max_iter: u32,
}

impl RootSpec {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::ParamOutOfRange {
                name: "bracket",
                value: hi - lo,
                expected: "finite lo < hi",
            });
        }
        Ok(Self {
            lo,
            hi,
            tol: 1e-13,
            max_iter: 200,
        })
    }

    pub fn with_tol(mut self, tol: f64) -> Result<Self> {
        if !(tol > 0.0) {
            return Err(Error::ParamOutOfRange {
                name: "tol",
                value: tol,
                expected: "> 0",
            });
        }
        self.tol = tol;
        Ok(self)
    }
}

/// Finds a zero of `g` inside the bracket using false-position steps, falling
/// back to bisection whenever a step fails to halve the bracket.
pub fn find_root<G: Fn(f64) -> f64>(g: G, spec: &RootSpec) -> Result<f64> {
    let (mut a, mut b) = (spec.lo, spec.hi);
    let (mut ga, mut gb) = (g(a), g(b));
    if !ga.is_finite() {
        return Err(Error::NonFinite { at: a });
    }
    if !gb.is_finite() {
        return Err(Error::NonFinite { at: b });
    }
    if ga == 0.0 {
        return Ok(a);
    }
    if gb == 0.0 {
        return Ok(b);
    }
    if ga.signum() == gb.signum() {
        return Err(Error::BadBracket {
            lo: a,
            hi: b,
            g_lo: ga,
            g_hi: gb,
        });
    }

    let mut bisect = false;
    for _ in 0..spec.max_iter {
        let mid = 0.5 * (a + b);
        let mut x = if bisect {
            mid
        } else {
            b - gb * (b - a) / (gb - ga)
        };
        if !(x > a && x < b) {
            x = mid;
        }
        let gx = g(x);
        if !gx.is_finite() {
            return Err(Error::NonFinite { at: x });
        }
        if gx.abs() <= spec.tol {
            return Ok(x);
        }
        let width = b - a;
        if gx.signum() == ga.signum() {
            a = x;
            ga = gx;
        } else {
            b = x;
            gb = gx;
        }
        if b - a <= spec.tol {
            break;
        }
        bisect = b - a > 0.5 * width;
    }
    Ok(if ga.abs() <= gb.abs() { a } else { b })
}

/// Resolution of [`invert_monotone_cdf`] on the argument axis.
pub const INVERSION_TOL: f64 = 1e-12;

/// Right-continuous generalized inverse `inf { v in [lo, hi] : h(v) >= p }` of
/// a nondecreasing `h`, located by bisection to [`INVERSION_TOL`].
///
/// When `h` jumps across `p` the jump location is returned.
pub fn invert_monotone_cdf<H: Fn(f64) -> f64>(h: H, p: f64, domain: (f64, f64)) -> Result<f64> {
    let (mut lo, mut hi) = domain;
    let (h_lo, h_hi) = (h(lo), h(hi));
    let slack = 1e-12;
    if !(p >= h_lo - slack && p <= h_hi + slack) {
        return Err(Error::OutOfRange { p, h_lo, h_hi });
    }
    if p <= h_lo {
        return Ok(lo);
    }
    if p > h_hi {
        return Ok(hi);
    }
    // Invariant: h(lo) < p <= h(hi).
    while hi - lo > INVERSION_TOL {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if h(mid) >= p {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}
