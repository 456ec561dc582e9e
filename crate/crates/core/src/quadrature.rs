//! Adaptive Gauss-Kronrod integration on finite intervals and on the line.
//!
//! This is the brute-force oracle the series results are validated
//! against, and the numeric fallback for Fourier data of expression-defined
//! functions. One rule is used throughout: the 15-point Kronrod extension
//! of the 7-point Gauss rule, with `|K15 - G7|` as the local error estimate.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use thiserror::Error;

use crate::functions::DecayBound;

/// Interval budget shared by every adaptive run.
pub const MAX_SUBDIVISIONS: usize = 10_000;

/// Sample points closer than this to a split point are moved off it.
const NUDGE_RADIUS: f64 = 1e-14;
const NUDGE_SHIFT: f64 = 1e-13;

/// Abscissae of the 15-point Kronrod rule on [-1, 1]; odd indices are the
/// 7-point Gauss nodes.
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

const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuadratureError {
    #[error("invalid interval [{lo}, {hi}]")]
    InvalidInterval { lo: f64, hi: f64 },
    #[error("tolerance must be positive, got {0}")]
    InvalidTolerance(f64),
    #[error("split point {0} lies outside the integration interval")]
    SplitOutOfRange(f64),
    #[error("integrand returned {value} at x = {x}")]
    NonFinite { x: f64, value: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureResult {
    pub value: f64,
    pub error_estimate: f64,
    pub evaluations: usize,
    pub converged: bool,
    pub subdivisions: usize,
}

impl QuadratureResult {
    fn empty() -> Self {
        QuadratureResult {
            value: 0.0,
            error_estimate: 0.0,
            evaluations: 0,
            converged: true,
            subdivisions: 0,
        }
    }

    fn absorb(&mut self, other: &QuadratureResult) {
        self.value += other.value;
        self.error_estimate += other.error_estimate;
        self.evaluations += other.evaluations;
        self.subdivisions += other.subdivisions;
        self.converged &= other.converged;
    }
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    lo: f64,
    hi: f64,
    lo_split: bool,
    hi_split: bool,
    value: f64,
    error: f64,
    refinable: bool,
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

// Max-heap on error; ties broken by position so the schedule is deterministic.
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.lo.total_cmp(&self.lo))
    }
}

fn nudge(x: f64, seg_lo: f64, seg_hi: f64, lo_split: bool, hi_split: bool) -> f64 {
    let mid = 0.5 * (seg_lo + seg_hi);
    if lo_split && (x - seg_lo).abs() < NUDGE_RADIUS {
        (seg_lo + NUDGE_SHIFT).min(mid)
    } else if hi_split && (x - seg_hi).abs() < NUDGE_RADIUS {
        (seg_hi - NUDGE_SHIFT).max(mid)
    } else {
        x
    }
}

fn gauss_kronrod<F: Fn(f64) -> f64 + ?Sized>(
    f: &F,
    lo: f64,
    hi: f64,
    lo_split: bool,
    hi_split: bool,
) -> Result<Segment, QuadratureError> {
    let center = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let sample = |x: f64| -> Result<f64, QuadratureError> {
        let x = nudge(x, lo, hi, lo_split, hi_split);
        let value = f(x);
        if value.is_finite() {
            Ok(value)
        } else {
            Err(QuadratureError::NonFinite { x, value })
        }
    };

    let fc = sample(center)?;
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    let mut abs_sum = WGK[7] * fc.abs();
    for j in 0..7 {
        let dx = half * XGK[j];
        let (f1, f2) = (sample(center - dx)?, sample(center + dx)?);
        kronrod += WGK[j] * (f1 + f2);
        abs_sum += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    let value = kronrod * half;
    let error = ((kronrod - gauss) * half).abs();
    let abs_value = abs_sum * half.abs();
    // Once the rule disagreement sits at rounding level, bisecting cannot help.
    let refinable = error > 4.0 * f64::EPSILON * abs_value;
    Ok(Segment {
        lo,
        hi,
        lo_split,
        hi_split,
        value,
        error,
        refinable,
    })
}

const EVALS_PER_SEGMENT: usize = 15;

/// Adaptive integrator configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integrator {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
}

impl Integrator {
    pub fn new(abs_tol: f64) -> Self {
        Integrator {
            abs_tol,
            rel_tol: 0.0,
            max_subdivisions: MAX_SUBDIVISIONS,
        }
    }

    pub fn with_rel_tol(mut self, rel_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self
    }

    pub fn with_max_subdivisions(mut self, max: usize) -> Self {
        self.max_subdivisions = max;
        self
    }

    fn target(&self, value: f64) -> f64 {
        self.abs_tol.max(self.rel_tol * value.abs())
    }

    /// Integrates `f` over `[lo, hi]`, pre-splitting at `split_points`.
    pub fn finite<F>(
        &self,
        f: &F,
        lo: f64,
        hi: f64,
        split_points: &[f64],
    ) -> Result<QuadratureResult, QuadratureError>
    where
        F: Fn(f64) -> f64 + ?Sized,
    {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(QuadratureError::InvalidInterval { lo, hi });
        }
        if !(self.abs_tol > 0.0) {
            return Err(QuadratureError::InvalidTolerance(self.abs_tol));
        }
        let mut cuts: Vec<f64> = Vec::with_capacity(split_points.len());
        for &s in split_points {
            if !(s > lo && s < hi) {
                return Err(QuadratureError::SplitOutOfRange(s));
            }
            cuts.push(s);
        }
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();

        let mut edges = Vec::with_capacity(cuts.len() + 2);
        edges.push((lo, false));
        edges.extend(cuts.iter().map(|&c| (c, true)));
        edges.push((hi, false));

        let mut heap = BinaryHeap::new();
        let mut frozen = Vec::new();
        let mut evaluations = 0;
        let (mut total, mut total_err) = (0.0, 0.0);
        for w in edges.windows(2) {
            let seg = gauss_kronrod(f, w[0].0, w[1].0, w[0].1, w[1].1)?;
            evaluations += EVALS_PER_SEGMENT;
            total += seg.value;
            total_err += seg.error;
            if seg.refinable {
                heap.push(seg);
            } else {
                frozen.push(seg);
            }
        }

        let mut subdivisions = 0;
        while total_err > self.target(total) && subdivisions < self.max_subdivisions {
            let Some(worst) = heap.pop() else { break };
            let mid = 0.5 * (worst.lo + worst.hi);
            if !(mid > worst.lo && mid < worst.hi)
                || (worst.hi - worst.lo) <= 64.0 * f64::EPSILON * worst.lo.abs().max(worst.hi.abs())
            {
                frozen.push(Segment {
                    refinable: false,
                    ..worst
                });
                continue;
            }
            let left = gauss_kronrod(f, worst.lo, mid, worst.lo_split, false)?;
            let right = gauss_kronrod(f, mid, worst.hi, false, worst.hi_split)?;
            evaluations += 2 * EVALS_PER_SEGMENT;
            subdivisions += 1;
            total += left.value + right.value - worst.value;
            total_err += left.error + right.error - worst.error;
            for seg in [left, right] {
                if seg.refinable {
                    heap.push(seg);
                } else {
                    frozen.push(seg);
                }
            }
        }

        // Deterministic reduction in ascending interval order.
        let mut segments: Vec<Segment> = heap.into_vec();
        segments.extend(frozen);
        segments.sort_by(|a, b| a.lo.total_cmp(&b.lo));
        let value: f64 = segments.iter().map(|s| s.value).sum();
        let error_estimate: f64 = segments.iter().map(|s| s.error).sum();
        Ok(QuadratureResult {
            value,
            error_estimate,
            evaluations,
            converged: error_estimate <= self.target(value),
            subdivisions,
        })
    }

    /// Integrates over the whole line, truncated to `[-L, L]`.
    pub fn line<F>(&self, f: &F, options: &LineOptions<'_>) -> Result<LineResult, QuadratureError>
    where
        F: Fn(f64) -> f64 + ?Sized,
    {
        match &options.tail {
            Some(tail) => {
                let budget = self.abs_tol / 10.0;
                let half_width = smallest_window(tail, budget).max(options.min_half_width);
                let inner = Integrator {
                    abs_tol: self.abs_tol - tail(half_width),
                    ..*self
                };
                let splits = options.splits.within(-half_width, half_width);
                let quad = inner.finite(f, -half_width, half_width, &splits)?;
                Ok(LineResult {
                    quad: QuadratureResult {
                        error_estimate: quad.error_estimate + tail(half_width),
                        ..quad
                    },
                    half_width,
                })
            }
            None => self.line_by_doubling(f, &options.splits),
        }
    }

    fn line_by_doubling<F>(&self, f: &F, splits: &Splits) -> Result<LineResult, QuadratureError>
    where
        F: Fn(f64) -> f64 + ?Sized,
    {
        const START: f64 = 8.0;
        const MAX_DOUBLINGS: usize = 12;
        let piece = |a: f64, b: f64| -> Result<QuadratureResult, QuadratureError> {
            let inner = Integrator {
                abs_tol: self.abs_tol / 8.0,
                ..*self
            };
            inner.finite(f, a, b, &splits.within(a, b))
        };
        let mut acc = piece(-START, START)?;
        let mut half_width = START;
        for _ in 0..MAX_DOUBLINGS {
            let next = 2.0 * half_width;
            let left = piece(-next, -half_width)?;
            let right = piece(half_width, next)?;
            let drift = left.value + right.value;
            // Sum the shells outermost-last so the total is order-stable.
            let mut grown = QuadratureResult::empty();
            grown.absorb(&left);
            grown.absorb(&acc);
            grown.absorb(&right);
            half_width = next;
            acc = grown;
            if drift.abs() < self.abs_tol / 2.0 {
                acc.error_estimate += drift.abs();
                acc.converged &= acc.error_estimate <= self.abs_tol;
                return Ok(LineResult {
                    quad: acc,
                    half_width,
                });
            }
        }
        acc.converged = false;
        Ok(LineResult {
            quad: acc,
            half_width,
        })
    }
}

fn smallest_window(tail: impl Fn(f64) -> f64, budget: f64) -> f64 {
    let mut hi = 1.0;
    while tail(hi) >= budget && hi < 1e7 {
        hi *= 2.0;
    }
    let mut lo = if hi > 1.0 { hi / 2.0 } else { 0.0 };
    for _ in 0..64 {
        let mid = 0.5 * (lo + hi);
        if tail(mid) >= budget {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

/// Points where the line integrand must be split.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Splits {
    pub fixed: Vec<f64>,
    /// Offsets within one period, replicated across the whole window.
    pub periodic: Option<(Vec<f64>, f64)>,
}

impl Splits {
    pub fn within(&self, lo: f64, hi: f64) -> Vec<f64> {
        let inside = |s: f64| s > lo && s < hi;
        let mut out: Vec<f64> = self.fixed.iter().copied().filter(|&s| inside(s)).collect();
        if let Some((offsets, period)) = &self.periodic {
            for &off in offsets {
                let first = ((lo - off) / period).floor() as i64;
                let last = ((hi - off) / period).ceil() as i64;
                out.extend(
                    (first..=last)
                        .map(|k| off + k as f64 * period)
                        .filter(|&s| inside(s)),
                );
            }
        }
        out
    }
}

/// Truncation and splitting for [`Integrator::line`].
#[derive(Default)]
pub struct LineOptions<'a> {
    /// Upper bound on the integrand's mass outside `[-L, L]`, as a function
    /// of `L`. Absent, the window is found by doubling.
    pub tail: Option<Box<dyn Fn(f64) -> f64 + 'a>>,
    /// Lower bound on `L`, e.g. where an envelope starts to hold.
    pub min_half_width: f64,
    pub splits: Splits,
}

impl<'a> LineOptions<'a> {
    pub fn from_decay(bound: DecayBound, factor: f64) -> Self {
        LineOptions {
            tail: Some(Box::new(move |l| factor * bound.envelope.two_sided_tail(l))),
            min_half_width: bound.from,
            splits: Splits::default(),
        }
    }

    pub fn with_splits(mut self, splits: Splits) -> Self {
        self.splits = splits;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineResult {
    pub quad: QuadratureResult,
    pub half_width: f64,
}

pub fn integrate_finite<F>(
    f: F,
    lo: f64,
    hi: f64,
    tol: f64,
    split_points: &[f64],
) -> Result<QuadratureResult, QuadratureError>
where
    F: Fn(f64) -> f64,
{
    Integrator::new(tol).finite(&f, lo, hi, split_points)
}

pub fn integrate_line<F>(
    f: F,
    tol: f64,
    envelope: Option<DecayBound>,
) -> Result<QuadratureResult, QuadratureError>
where
    F: Fn(f64) -> f64,
{
    if !(tol > 0.0) {
        return Err(QuadratureError::InvalidTolerance(tol));
    }
    let options = match envelope {
        Some(bound) => LineOptions::from_decay(bound, 1.0),
        None => LineOptions::default(),
    };
    Integrator::new(tol).line(&f, &options).map(|r| r.quad)
}
