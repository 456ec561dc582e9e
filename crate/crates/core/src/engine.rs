//! Evaluation of `∫ f(x)·conj(g(x)) dx` through the bilateral series
//! `Σ_n f̂(2πn/T)·conj(C_n(g))`, the summability check on `f` that makes the
//! identity valid, and the periodization used as an independent test route.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use thiserror::Error;

use crate::fourier::{self, CoefficientTable, ComplexValue, FourierError};
use crate::functions::{DecayingFunction, Magnitude, PeriodicFamily, PeriodicFunction, RealMap};
use crate::quadrature::{Integrator, LineOptions, QuadratureError, Splits};

pub const DEFAULT_START_N: usize = 16;
pub const MAX_N: usize = 4096;
/// Geometric fits at or above this ratio are not trusted.
pub const RATIO_GATE: f64 = 0.99;
const FIT_WINDOW: usize = 8;
/// Share of the tolerance given to each individual Fourier datum.
const TERM_TOL_FRACTION: f64 = 1e-2;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EngineError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Fourier(#[from] FourierError),
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
    #[error("quadrature did not converge on block {block} (error estimate {estimate:e})")]
    BlockQuadrature { block: i64, estimate: f64 },
    #[error("series did not converge: {reason}")]
    NotConverged {
        reason: String,
        partial: Box<MixedResult>,
    },
}

/// Verdict on the summability hypothesis `Σ_k ‖χ_[kT,(k+1)T] f‖₂ < ∞`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    FiniteEvidence,
    Inconclusive,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::FiniteEvidence => "finite_evidence",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HypothesisReport {
    pub period: f64,
    pub blocks: i64,
    /// `k → ‖χ_[kT,(k+1)T] f‖₂` for `k ∈ [-K, K]`.
    pub block_norms: BTreeMap<i64, f64>,
    pub partial_m: f64,
    /// Larger of the two one-sided fitted ratios.
    pub decay_ratio: f64,
    pub ratio_right: f64,
    pub ratio_left: f64,
    pub verdict: Verdict,
    /// Geometric extrapolation of the omitted blocks; `None` unless both
    /// sides decay.
    pub tail_bound: Option<f64>,
}

/// Fitted ratio of `values` (ordered outward) by least squares on logs.
/// Exact zeros count as complete decay.
fn fit_ratio(values: &[f64]) -> f64 {
    // A trailing zero means the sequence died out faster than any fit.
    if values.last() == Some(&0.0) {
        return 0.0;
    }
    let points: Vec<(f64, f64)> = values
        .iter()
        .enumerate()
        .filter(|(_, v)| **v > 0.0)
        .map(|(i, v)| (i as f64, v.ln()))
        .collect();
    if points.len() < 2 {
        return 0.0;
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    (sxy / sxx).exp()
}

pub fn check_hypothesis(
    f: &DecayingFunction,
    period: f64,
    blocks: usize,
    tol: f64,
) -> Result<HypothesisReport, EngineError> {
    if !(period > 0.0 && period.is_finite()) {
        return Err(EngineError::InvalidArgument(format!(
            "period must be positive, got {period}"
        )));
    }
    if blocks < 4 {
        return Err(EngineError::InvalidArgument(format!(
            "at least 4 blocks per side are required, got {blocks}"
        )));
    }
    if !(tol > 0.0) {
        return Err(EngineError::InvalidArgument(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    let k_max = blocks as i64;
    let integrator = Integrator::new(tol).with_rel_tol(1e-10);
    let squared = |x: f64| {
        let v = f.eval(x);
        v * v
    };
    let mut block_norms = BTreeMap::new();
    for k in -k_max..=k_max {
        let (lo, hi) = (k as f64 * period, (k + 1) as f64 * period);
        let splits: Vec<f64> = f
            .kinks()
            .iter()
            .copied()
            .filter(|&s| s > lo && s < hi)
            .collect();
        let r = integrator.finite(&squared, lo, hi, &splits)?;
        if !r.converged {
            return Err(EngineError::BlockQuadrature {
                block: k,
                estimate: r.error_estimate,
            });
        }
        block_norms.insert(k, r.value.max(0.0).sqrt());
    }
    let partial_m = block_norms.values().sum();

    let right: Vec<f64> = (k_max - 3..=k_max).map(|k| block_norms[&k]).collect();
    let left: Vec<f64> = (-k_max..=-k_max + 3)
        .rev()
        .map(|k| block_norms[&k])
        .collect();
    let (ratio_right, ratio_left) = (fit_ratio(&right), fit_ratio(&left));
    let decay_ratio = ratio_right.max(ratio_left);
    let verdict = if ratio_right < 0.95 && ratio_left < 0.95 {
        Verdict::FiniteEvidence
    } else {
        Verdict::Inconclusive
    };
    let tail_bound = (decay_ratio < 1.0).then(|| {
        right[3] * ratio_right / (1.0 - ratio_right) + left[3] * ratio_left / (1.0 - ratio_left)
    });
    Ok(HypothesisReport {
        period,
        blocks: k_max,
        block_norms,
        partial_m,
        decay_ratio,
        ratio_right,
        ratio_left,
        verdict,
        tail_bound,
    })
}

/// `Σ_{k=-K}^{K} f(x + kT)`, a truncation of the periodization of `f`.
pub fn periodize_sample(f: &DecayingFunction, period: f64, x: f64, blocks: usize) -> f64 {
    let k = blocks as i64;
    (-k..=k).map(|j| f.eval(x + j as f64 * period)).sum()
}

/// Both sides of the classical Parseval identity applied to the
/// periodization `F` of `f`:
///
/// `(1/T) ∫_0^T F·conj(g)` and `Σ_{|n|≤N} C_n(F)·conj(C_n(g))`, with
/// `C_n(F) = f̂(2πn/T)/T`.
pub fn classical_parseval_sides(
    f: &DecayingFunction,
    g: &PeriodicFunction,
    blocks: usize,
    n_terms: usize,
    tol: f64,
) -> Result<(ComplexValue, ComplexValue), EngineError> {
    if blocks < 1 {
        return Err(EngineError::InvalidArgument("K must be at least 1".into()));
    }
    let period = g.period();
    let integrand = |x: f64| periodize_sample(f, period, x, blocks) * g.eval(x);
    let r = Integrator::new(tol).finite(&integrand, 0.0, period, g.singular_points())?;
    let lhs = Complex64::new(r.value / period, 0.0);

    let table = fourier::coefficient_table(g, n_terms, tol)?;
    let mut rhs = Complex64::new(0.0, 0.0);
    for n in symmetric_order(n_terms) {
        let fhat = fourier::transform(f, 2.0 * PI * n as f64 / period, tol)?;
        rhs += fhat / period * table.get(n).expect("in range").conj();
    }
    Ok((lhs, rhs))
}

/// `0, 1, -1, 2, -2, …, N, -N`.
fn symmetric_order(n_max: usize) -> impl Iterator<Item = i64> {
    std::iter::once(0).chain((1..=n_max as i64).flat_map(|n| [n, -n]))
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalOptions {
    pub tol: f64,
    pub with_oracle: bool,
    /// Oracle quadrature tolerance; defaults to `tol`.
    pub oracle_tol: Option<f64>,
    pub start_n: usize,
    pub max_n: usize,
    pub log_terms: bool,
}

impl EvalOptions {
    pub fn new(tol: f64) -> Self {
        EvalOptions {
            tol,
            with_oracle: false,
            oracle_tol: None,
            start_n: DEFAULT_START_N,
            max_n: MAX_N,
            log_terms: false,
        }
    }

    pub fn with_oracle(mut self, on: bool) -> Self {
        self.with_oracle = on;
        self
    }

    pub fn oracle_tol(mut self, tol: f64) -> Self {
        self.oracle_tol = Some(tol);
        self
    }

    pub fn log_terms(mut self, on: bool) -> Self {
        self.log_terms = on;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TermRecord {
    pub n: i64,
    pub transform: ComplexValue,
    pub coefficient: ComplexValue,
    pub product: ComplexValue,
}

/// How the series tail was bounded.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TailRule {
    Geometric {
        ratio: f64,
    },
    Alternating,
    Negligible,
    /// No rule applied; the bound is the last window's magnitude sum.
    Unbounded,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleReport {
    pub value: f64,
    pub error_estimate: f64,
    pub evaluations: usize,
    pub half_width: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MixedResult {
    pub value: ComplexValue,
    /// Series truncated at `|n| ≤ n_used`.
    pub n_used: usize,
    /// Bound on the omitted tail plus the propagated error of every
    /// included term.
    pub tail_bound: f64,
    pub series_tail: f64,
    pub term_error: f64,
    pub rule: TailRule,
    pub converged: bool,
    pub term_log: Option<Vec<TermRecord>>,
    pub oracle: Option<OracleReport>,
    pub oracle_gap: Option<f64>,
    pub warnings: Vec<String>,
}

struct Term {
    product: ComplexValue,
    error: f64,
    record: TermRecord,
}

/// Source of `C_n(g)`, analytic or a numeric table regrown as `N` doubles.
struct Coefficients<'a> {
    g: &'a PeriodicFunction,
    tol: f64,
    table: Option<CoefficientTable>,
}

impl<'a> Coefficients<'a> {
    fn ensure(&mut self, n_max: usize) -> Result<(), EngineError> {
        if fourier::analytic_coefficient(self.g, 0).is_some() {
            return Ok(());
        }
        if self.table.as_ref().is_some_and(|t| t.n_max >= n_max) {
            return Ok(());
        }
        self.table = Some(fourier::numeric_coefficient_table(self.g, n_max, self.tol)?);
        Ok(())
    }

    fn get(&self, n: i64) -> (ComplexValue, f64) {
        if let Some(c) = fourier::analytic_coefficient(self.g, n) {
            return (c, 4.0 * f64::EPSILON * c.norm());
        }
        let table = self.table.as_ref().expect("ensure() called first");
        (table.get(n).expect("index in table"), table.error_estimate)
    }

    fn converged(&self) -> bool {
        self.table.as_ref().is_none_or(|t| t.converged)
    }
}

/// Series value `Σ f̂(2πn/T)·conj(C_n(g))` with a tail bound, and optionally
/// the quadrature oracle for `∫ f·conj(g)`.
pub fn evaluate_mixed(
    f: &DecayingFunction,
    g: &PeriodicFunction,
    options: &EvalOptions,
) -> Result<MixedResult, EngineError> {
    let tol = options.tol;
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(EngineError::InvalidArgument(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    let period = g.period();
    let term_tol = tol * TERM_TOL_FRACTION;
    let mut warnings = Vec::new();
    if let Some(PeriodicFamily::CoshPlusCos { a } | PeriodicFamily::CoshMinusCos { a }) = g.family()
    {
        if a < 0.05 {
            warnings.push(format!(
                "a = {a} < 0.05: coefficients decay like e^(-{a}|n|), N may reach the {MAX_N} cap"
            ));
        }
    }
    if g.unverified_period() {
        warnings.push(format!("g(x + {period}) = g(x) failed a spot check"));
    }

    let mut coefficients = Coefficients {
        g,
        tol: term_tol,
        table: None,
    };
    let term = |n: i64, coefficients: &Coefficients<'_>| -> Result<Term, EngineError> {
        let (c, c_err) = coefficients.get(n);
        let omega = 2.0 * PI * n as f64 / period;
        if c == Complex64::new(0.0, 0.0) && c_err == 0.0 {
            // Exactly vanishing coefficient; f̂ is not needed.
            return Ok(Term {
                product: c,
                error: 0.0,
                record: TermRecord {
                    n,
                    transform: Complex64::new(f64::NAN, f64::NAN),
                    coefficient: c,
                    product: c,
                },
            });
        }
        let fhat = fourier::transform_detailed(f, omega, term_tol)?;
        let product = fhat.value * c.conj();
        Ok(Term {
            product,
            error: fhat.error * c.norm() + fhat.value.norm() * c_err,
            record: TermRecord {
                n,
                transform: fhat.value,
                coefficient: c,
                product,
            },
        })
    };

    // pairs[n] = (t_n, t_{-n}); pairs[0].1 is unused.
    let mut pairs: Vec<(Term, Option<Term>)> = Vec::new();
    let mut sum = Complex64::new(0.0, 0.0);
    let mut term_error = 0.0;
    let mut log = options.log_terms.then(Vec::new);

    let mut n_target = options.start_n.max(FIT_WINDOW).min(options.max_n);
    loop {
        coefficients.ensure(n_target)?;
        let first = pairs.len();
        for n in first..=n_target {
            let plus = term(n as i64, &coefficients)?;
            sum += plus.product;
            term_error += plus.error;
            let minus = if n == 0 {
                None
            } else {
                let t = term(-(n as i64), &coefficients)?;
                sum += t.product;
                term_error += t.error;
                Some(t)
            };
            if let Some(log) = log.as_mut() {
                log.push(plus.record);
                if let Some(m) = &minus {
                    log.push(m.record);
                }
            }
            pairs.push((plus, minus));
        }

        let (series_tail, rule) = tail_estimate(&pairs, sum);
        let bound = series_tail + term_error;
        let tail_ok = !matches!(rule, TailRule::Unbounded) && bound <= tol;
        // Neither failure below is cured by a larger N.
        let data_ok = coefficients.converged() && !g.unverified_period();
        if tail_ok || !data_ok || n_target >= options.max_n {
            let converged = tail_ok && data_ok;
            let mut result = MixedResult {
                value: sum,
                n_used: n_target,
                tail_bound: bound,
                series_tail,
                term_error,
                rule,
                converged,
                term_log: log,
                oracle: None,
                oracle_gap: None,
                warnings,
            };
            if options.with_oracle {
                match oracle(f, g, options.oracle_tol.unwrap_or(tol)) {
                    Ok(oracle) => {
                        result.oracle_gap = Some((result.value.re - oracle.value).abs());
                        result.oracle = Some(oracle);
                    }
                    Err(e) if converged => return Err(e),
                    Err(e) => result.warnings.push(format!("oracle failed: {e}")),
                }
            }
            if !converged {
                let reason = if g.unverified_period() {
                    format!("g does not repeat with the declared period {period}")
                } else if !coefficients.converged() {
                    "numeric Fourier coefficients of g did not settle on the finest grid"
                        .to_string()
                } else {
                    format!(
                        "tail bound {bound:e} above tolerance {tol:e} at N = {n_target} ({rule:?})"
                    )
                };
                return Err(EngineError::NotConverged {
                    reason,
                    partial: Box::new(result),
                });
            }
            return Ok(result);
        }
        n_target = (2 * n_target).min(options.max_n);
    }
}

/// Bounds the omitted tail from the outermost pairs, smallest valid rule wins.
fn tail_estimate(pairs: &[(Term, Option<Term>)], sum: ComplexValue) -> (f64, TailRule) {
    let n_max = pairs.len() - 1;
    let floor = 4.0 * f64::EPSILON * sum.norm();
    let pair_stats = |n: usize| {
        let (plus, minus) = &pairs[n];
        let (m_product, m_err) = minus
            .as_ref()
            .map_or((Complex64::new(0.0, 0.0), 0.0), |t| (t.product, t.error));
        let magnitude = plus.product.norm() + m_product.norm();
        let error = plus.error + m_err;
        (plus.product + m_product, magnitude, error)
    };

    // Significant pairs, outermost last.
    let significant: Vec<(usize, ComplexValue, f64)> = (1..=n_max)
        .map(|n| {
            let (p, m, e) = pair_stats(n);
            (n, p, m, e)
        })
        .filter(|&(_, _, m, e)| m > e + floor)
        .map(|(n, p, m, _)| (n, p, m))
        .collect();

    let mut best: Option<(f64, TailRule)> = None;
    let mut offer = |bound: f64, rule: TailRule| {
        if best.is_none_or(|(b, _)| bound < b) {
            best = Some((bound, rule));
        }
    };

    // Everything in the upper half is at noise level.
    if significant.last().is_none_or(|&(n, _, _)| n <= n_max / 2) {
        let noise: f64 = (n_max / 2 + 1..=n_max).map(|n| pair_stats(n).1).sum();
        offer(noise, TailRule::Negligible);
    }

    let window = &significant[significant.len().saturating_sub(FIT_WINDOW)..];
    if window.len() >= 4 {
        let points: Vec<(f64, f64)> = window.iter().map(|&(n, _, m)| (n as f64, m.ln())).collect();
        let k = points.len() as f64;
        let mx = points.iter().map(|p| p.0).sum::<f64>() / k;
        let my = points.iter().map(|p| p.1).sum::<f64>() / k;
        let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = points.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
        let ratio = (sxy / sxx).exp();
        if ratio < RATIO_GATE {
            let &(last_n, _, last_m) = window.last().expect("non-empty");
            let steps = (n_max + 1 - last_n) as i32;
            offer(
                last_m * ratio.powi(steps) / (1.0 - ratio),
                TailRule::Geometric { ratio },
            );
        }
    }

    if window.len() >= 3 {
        let real = window
            .iter()
            .all(|&(_, p, _)| p.im.abs() <= 1e-3 * p.re.abs());
        let alternating = window
            .windows(2)
            .all(|w| w[0].1.re * w[1].1.re < 0.0 && w[1].1.re.abs() < w[0].1.re.abs());
        if real && alternating {
            let &(_, last, _) = window.last().expect("non-empty");
            offer(last.norm(), TailRule::Alternating);
        }
    }

    best.unwrap_or_else(|| {
        let fallback: f64 = window.iter().map(|&(_, _, m)| m).sum();
        (fallback, TailRule::Unbounded)
    })
}

/// Adaptive quadrature of `f·conj(g)` over a window sized from `f`'s
/// envelope and what is known about `|g|`; singular points of `g` are
/// replicated across the window.
pub fn oracle(
    f: &DecayingFunction,
    g: &PeriodicFunction,
    tol: f64,
) -> Result<OracleReport, EngineError> {
    let period = g.period();
    let integrand = |x: f64| f.eval(x) * g.eval(x);
    let splits = Splits {
        fixed: f.kinks().to_vec(),
        periodic: (!g.singular_points().is_empty()).then(|| (g.singular_points().to_vec(), period)),
    };
    let options = match (f.decay_bound(), g.magnitude()) {
        (Some(bound), Some(Magnitude::Bounded(sup))) => LineOptions::from_decay(bound, sup),
        (Some(bound), Some(Magnitude::MeanAbs(mean))) => {
            let envelope = bound.envelope;
            // On each period block past L, f is at most its envelope at the
            // block's inner edge and ∫|g| over the block is T·mean.
            let tail = move |l: f64| {
                let mut total = 0.0;
                for j in 0..100_000 {
                    let term = 2.0 * period * mean * envelope.at(l + j as f64 * period);
                    total += term;
                    if term <= 1e-3 * total.max(f64::MIN_POSITIVE) {
                        // Remaining terms decay at least geometrically from here.
                        total += term * 1e-3;
                        break;
                    }
                }
                total
            };
            LineOptions {
                tail: Some(Box::new(tail)),
                min_half_width: bound.from,
                splits: Splits::default(),
            }
        }
        _ => LineOptions::default(),
    }
    .with_splits(splits);
    let r = Integrator::new(tol).line(&integrand, &options)?;
    Ok(OracleReport {
        value: r.quad.value,
        error_estimate: r.quad.error_estimate,
        evaluations: r.quad.evaluations,
        half_width: r.half_width,
        converged: r.quad.converged,
    })
}
