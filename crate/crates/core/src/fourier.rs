//! Fourier transforms `f̂(ω) = ∫ f(t) e^{-iωt} dt` (no normalisation
//! prefactor) and exponential coefficients
//! `C_n(g) = (1/T) ∫_0^T g(t) e^{-2πint/T} dt`.
//!
//! Built-in families use closed forms; expression-defined functions fall
//! back to line quadrature (transforms) or equispaced trapezoid sums over one
//! period (coefficients).

use std::f64::consts::{LN_2, PI};

use num_complex::Complex64;
use thiserror::Error;

use crate::functions::{DecayFamily, DecayingFunction, PeriodicFamily, PeriodicFunction, RealMap};
use crate::quadrature::{Integrator, LineOptions, QuadratureError, Splits};

pub type ComplexValue = Complex64;

/// Term budget for the logistic-tail alternating series.
pub const LOGISTIC_TERM_BUDGET: usize = 1_000_000;

/// Smallest and largest trapezoid grids, as powers of two.
const MIN_GRID_EXP: u32 = 8;
const MAX_GRID_EXP: u32 = 20;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FourierError {
    #[error("tolerance must be positive, got {0}")]
    InvalidTolerance(f64),
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
    #[error(
        "numeric transform at ω = {omega} did not reach tolerance (error estimate {estimate:e})"
    )]
    TransformNotConverged { omega: f64, estimate: f64 },
    #[error("numeric coefficients are unsupported for g with singular points; use a closed form")]
    SingularNumericCoefficients,
    #[error("periodic function returned {value} at x = {x}")]
    NonFiniteSample { x: f64, value: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Source {
    Analytic,
    Numeric,
}

/// A transform value with an absolute error bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralValue {
    pub value: ComplexValue,
    pub error: f64,
    pub source: Source,
}

fn check_tol(tol: f64) -> Result<(), FourierError> {
    if tol > 0.0 && tol.is_finite() {
        Ok(())
    } else {
        Err(FourierError::InvalidTolerance(tol))
    }
}

pub fn transform(f: &DecayingFunction, omega: f64, tol: f64) -> Result<ComplexValue, FourierError> {
    transform_detailed(f, omega, tol).map(|s| s.value)
}

/// Closed form when one exists, numeric quadrature otherwise.
pub fn transform_detailed(
    f: &DecayingFunction,
    omega: f64,
    tol: f64,
) -> Result<SpectralValue, FourierError> {
    check_tol(tol)?;
    match transform_analytic(f, omega, tol) {
        Some(v) => Ok(v),
        None => transform_numeric(f, omega, tol),
    }
}

/// `None` for expression-defined `f`, and for the logistic tail when the
/// series exceeds its term budget.
pub fn transform_analytic(f: &DecayingFunction, omega: f64, tol: f64) -> Option<SpectralValue> {
    let exact = |re: f64| SpectralValue {
        value: Complex64::new(re, 0.0),
        error: 4.0 * f64::EPSILON * re.abs(),
        source: Source::Analytic,
    };
    match f.family()? {
        DecayFamily::Sech { b } => Some(exact(PI / b / (PI * omega / (2.0 * b)).cosh())),
        DecayFamily::Gaussian { b } => {
            Some(exact(2.0 * (PI * b).sqrt() * (-b * omega * omega).exp()))
        }
        DecayFamily::LogisticTail => {
            let s = logistic_tail_series(omega, tol)?;
            Some(SpectralValue {
                value: Complex64::new(s.value, 0.0),
                error: s.error,
                source: Source::Analytic,
            })
        }
    }
}

/// `∫ f(t) cos(ωt) dt - i ∫ f(t) sin(ωt) dt` by line quadrature.
pub fn transform_numeric(
    f: &DecayingFunction,
    omega: f64,
    tol: f64,
) -> Result<SpectralValue, FourierError> {
    check_tol(tol)?;
    let options = || {
        let splits = Splits {
            fixed: f.kinks().to_vec(),
            periodic: None,
        };
        match f.decay_bound() {
            Some(bound) => LineOptions::from_decay(bound, 1.0).with_splits(splits),
            None => LineOptions::default().with_splits(splits),
        }
    };
    let integrator = Integrator::new(tol / 2.0);
    let re = integrator.line(&|t: f64| f.eval(t) * (omega * t).cos(), &options())?;
    let im = if omega == 0.0 {
        None
    } else {
        Some(integrator.line(&|t: f64| -f.eval(t) * (omega * t).sin(), &options())?)
    };
    let (im_value, im_err, im_ok) = im.map_or((0.0, 0.0, true), |r| {
        (r.quad.value, r.quad.error_estimate, r.quad.converged)
    });
    let error = re.quad.error_estimate + im_err;
    if !(re.quad.converged && im_ok) {
        return Err(FourierError::TransformNotConverged {
            omega,
            estimate: error,
        });
    }
    Ok(SpectralValue {
        value: Complex64::new(re.quad.value, im_value),
        error,
        source: Source::Numeric,
    })
}

/// Result of summing the logistic-tail transform series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlternatingSum {
    pub value: f64,
    pub error: f64,
    pub terms: usize,
}

/// Euler-transform depth applied to the tail of the logistic series.
const EULER_DEPTH: usize = 6;

/// `Σ_{k≥1} (-1)^{k-1} 4k / (4k² + ω²)`, the transform of `1/(1+e^{2|x|})`.
///
/// The terms are `φ(k)` with `φ(t) = Re 1/(t + iy)`, `y = |ω|/2`. Leading
/// terms up to `K - 1` are added directly. The tail from `K` is replaced by
/// `EULER_DEPTH` steps of the Euler transform; its remainder is itself an
/// alternating series with decreasing terms as long as the first
/// `EULER_DEPTH + 2` derivatives of `φ` alternate in sign on `[K, ∞)`,
/// which holds once `(EULER_DEPTH + 2)·atan(y/K) ≤ π/2`. The remainder is
/// then bounded by its first term, which is what `error` reports.
///
/// Returns `None` if `K` would exceed [`LOGISTIC_TERM_BUDGET`].
pub fn logistic_tail_series(omega: f64, tol: f64) -> Option<AlternatingSum> {
    let y = 0.5 * omega.abs();
    let term = |k: usize| {
        let k = k as f64;
        k / (k * k + y * y)
    };
    let angle = PI / (2.0 * (EULER_DEPTH + 2) as f64);
    let mut start = ((y / angle.tan()).ceil() as usize).max(2);

    let mut direct = 0.0;
    let mut next_direct = 1;
    loop {
        if start > LOGISTIC_TERM_BUDGET {
            return None;
        }
        while next_direct < start {
            let sign = if next_direct % 2 == 1 { 1.0 } else { -1.0 };
            direct += sign * term(next_direct);
            next_direct += 1;
        }

        // Forward differences of b_j = φ(start + j), j = 0..=EULER_DEPTH.
        let mut diffs: Vec<f64> = (0..=EULER_DEPTH).map(|j| term(start + j)).collect();
        let mut euler = 0.0;
        let mut scale = 0.5;
        for p in 0..EULER_DEPTH {
            // diffs[0] holds (-Δ)^p b_0
            euler += scale * diffs[0];
            for j in 0..EULER_DEPTH - p {
                diffs[j] -= diffs[j + 1];
            }
            scale *= 0.5;
        }
        let remainder = scale * diffs[0];
        // The remainder lies in [0, 2·remainder]; report the midpoint.
        let tail_sign = if start % 2 == 1 { 1.0 } else { -1.0 };
        let value = direct + tail_sign * (euler + remainder);
        let largest_term = if y > 1.0 { 0.5 / y } else { 1.0 };
        // Partial sums never exceed the largest term in magnitude.
        let rounding = 2.0 * f64::EPSILON * (start as f64) * largest_term;
        let error = remainder.abs() + rounding;
        if error < tol / 2.0 {
            return Some(AlternatingSum {
                value,
                error,
                terms: start + EULER_DEPTH,
            });
        }
        start += start / 2 + 1;
    }
}

/// Closed-form `C_n(g)` for built-in families, honouring a declared period
/// that is a multiple of the family's own.
pub fn analytic_coefficient(g: &PeriodicFunction, n: i64) -> Option<ComplexValue> {
    let family = g.family()?;
    let multiple = i64::from(g.period_multiple());
    if n % multiple != 0 {
        return Some(Complex64::new(0.0, 0.0));
    }
    let n = n / multiple;
    let re = match family {
        PeriodicFamily::CoshPlusCos { a } => {
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            sign * (-(n.unsigned_abs() as f64) * a).exp() / a.sinh()
        }
        PeriodicFamily::CoshMinusCos { a } => (-(n.unsigned_abs() as f64) * a).exp() / a.sinh(),
        PeriodicFamily::LogCosSquared => {
            if n % 2 != 0 {
                0.0
            } else if n == 0 {
                -2.0 * LN_2
            } else {
                let half = n / 2;
                let sign = if (half - 1).rem_euclid(2) == 0 {
                    1.0
                } else {
                    -1.0
                };
                sign / half.unsigned_abs() as f64
            }
        }
    };
    Some(Complex64::new(re, 0.0))
}

pub fn coefficient(g: &PeriodicFunction, n: i64, tol: f64) -> Result<ComplexValue, FourierError> {
    check_tol(tol)?;
    if let Some(c) = analytic_coefficient(g, n) {
        return Ok(c);
    }
    let table = numeric_coefficient_table(g, n.unsigned_abs() as usize, tol)?;
    Ok(table.get(n).expect("index within table"))
}

/// Coefficients `C_n(g)` for `n ∈ [-n_max, n_max]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientTable {
    pub n_max: usize,
    values: Vec<ComplexValue>,
    pub source: Source,
    /// Trapezoid grid size, numeric tables only.
    pub grid_size: Option<usize>,
    /// Largest change between the last two grids (numeric) or rounding
    /// level (analytic).
    pub error_estimate: f64,
    pub converged: bool,
}

impl CoefficientTable {
    pub fn get(&self, n: i64) -> Option<ComplexValue> {
        let idx = n + self.n_max as i64;
        if idx < 0 {
            return None;
        }
        self.values.get(idx as usize).copied()
    }

    /// `(n, C_n)` in ascending `n`.
    pub fn iter(&self) -> impl Iterator<Item = (i64, ComplexValue)> + '_ {
        let base = -(self.n_max as i64);
        self.values
            .iter()
            .enumerate()
            .map(move |(i, c)| (base + i as i64, *c))
    }
}

pub fn coefficient_table(
    g: &PeriodicFunction,
    n_max: usize,
    tol: f64,
) -> Result<CoefficientTable, FourierError> {
    check_tol(tol)?;
    if g.family().is_some() {
        let values: Vec<ComplexValue> = (-(n_max as i64)..=n_max as i64)
            .map(|n| analytic_coefficient(g, n).expect("built-in"))
            .collect();
        let scale = values.iter().map(|c| c.norm()).fold(0.0, f64::max);
        return Ok(CoefficientTable {
            n_max,
            values,
            source: Source::Analytic,
            grid_size: None,
            error_estimate: 4.0 * f64::EPSILON * scale,
            converged: true,
        });
    }
    numeric_coefficient_table(g, n_max, tol)
}

/// Trapezoid sums over one period on `2^m` points, `m` grown from 8 until
/// every coefficient moves by less than `tol`. The grid is always at least
/// four times `n_max` so no requested index aliases onto another.
pub fn numeric_coefficient_table(
    g: &PeriodicFunction,
    n_max: usize,
    tol: f64,
) -> Result<CoefficientTable, FourierError> {
    check_tol(tol)?;
    if !g.singular_points().is_empty() {
        return Err(FourierError::SingularNumericCoefficients);
    }
    let needed = (4 * (n_max + 1)).next_power_of_two().trailing_zeros();
    let mut exp = MIN_GRID_EXP.max(needed);
    let mut previous = trapezoid_coefficients(g, n_max, 1 << exp)?;
    loop {
        exp += 1;
        let current = trapezoid_coefficients(g, n_max, 1 << exp)?;
        let change = current
            .iter()
            .zip(&previous)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        let converged = change < tol;
        if converged || exp >= MAX_GRID_EXP.max(needed + 1) {
            return Ok(CoefficientTable {
                n_max,
                values: current,
                source: Source::Numeric,
                grid_size: Some(1 << exp),
                error_estimate: change,
                converged,
            });
        }
        previous = current;
    }
}

fn trapezoid_coefficients(
    g: &PeriodicFunction,
    n_max: usize,
    grid: usize,
) -> Result<Vec<ComplexValue>, FourierError> {
    let period = g.period();
    let samples: Vec<f64> = (0..grid)
        .map(|j| {
            let x = period * j as f64 / grid as f64;
            let value = g.eval(x);
            if value.is_finite() {
                Ok(value)
            } else {
                Err(FourierError::NonFiniteSample { x, value })
            }
        })
        .collect::<Result<_, _>>()?;

    // Twiddles e^{-2πik/M}, conjugate-symmetric by construction.
    let mut twiddle = vec![Complex64::new(1.0, 0.0); grid];
    for k in 1..=grid / 2 {
        let angle = 2.0 * PI * k as f64 / grid as f64;
        let w = Complex64::new(angle.cos(), -angle.sin());
        twiddle[k] = w;
        twiddle[grid - k] = w.conj();
    }

    let scale = 1.0 / grid as f64;
    Ok((-(n_max as i64)..=n_max as i64)
        .map(|n| {
            let step = n.rem_euclid(grid as i64) as usize;
            let mut idx = 0usize;
            let mut acc = Complex64::new(0.0, 0.0);
            for &s in &samples {
                acc += twiddle[idx] * s;
                idx += step;
                if idx >= grid {
                    idx -= grid;
                }
            }
            acc * scale
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    fn sech1() -> DecayingFunction {
        DecayingFunction::sech(1.0).unwrap()
    }

    /// Plain partial sums with pairwise averaging, used only as a check.
    fn logistic_bruteforce(omega: f64, terms: usize) -> f64 {
        let y = 0.5 * omega;
        let mut s = 0.0;
        let mut prev = 0.0;
        for k in 1..=terms {
            let kf = k as f64;
            prev = s;
            s += if k % 2 == 1 { 1.0 } else { -1.0 } * kf / (kf * kf + y * y);
        }
        0.5 * (s + prev)
    }

    #[test]
    fn closed_forms_at_zero() {
        assert!((transform(&sech1(), 0.0, 1e-12).unwrap().re - PI).abs() < 1e-15);
        let g = transform(&DecayingFunction::gaussian(1.0).unwrap(), 0.0, 1e-12).unwrap();
        assert!((g.re - 2.0 * PI.sqrt()).abs() < 1e-15);
        assert!((g.re - 3.544_907_7).abs() < 1e-7);
        let l = transform(&DecayingFunction::logistic_tail(), 0.0, 1e-12).unwrap();
        assert!((l.re - LN_2).abs() < 1e-12, "{l}");
    }

    #[test]
    fn sech_closed_form_matches_quadrature() {
        let analytic = transform(&sech1(), 1.0, 1e-12).unwrap();
        assert!((analytic.re - PI / (PI / 2.0).cosh()).abs() < 1e-15);
        let numeric = transform_numeric(&sech1(), 1.0, 1e-11).unwrap();
        assert!((numeric.value - analytic).norm() < 1e-9);
        assert_eq!(numeric.source, Source::Numeric);
    }

    #[test]
    fn logistic_series_against_brute_force() {
        for omega in [0.0, 0.5, 2.0, 7.0, 40.0] {
            let s = logistic_tail_series(omega, 1e-12).unwrap();
            // Averaged partial sums err by about a_k'/2 ~ 1/(2k²).
            let brute = logistic_bruteforce(omega, 4_000_000);
            assert!(
                (s.value - brute).abs() < 1e-12,
                "ω={omega}: {} vs {brute}",
                s.value
            );
            assert!(s.error < 5e-13);
        }
    }

    #[test]
    fn logistic_series_bound_is_honest() {
        for omega in [1.0, 300.0] {
            let reference = logistic_bruteforce(omega, 4_000_000);
            for tol in [1e-4, 1e-7, 1e-10] {
                let s = logistic_tail_series(omega, tol).unwrap();
                assert!((s.value - reference).abs() <= s.error + 2e-13);
                assert!(s.error < tol / 2.0);
            }
        }
    }

    #[test]
    fn logistic_series_budget_fallback() {
        assert!(logistic_tail_series(1e8, 1e-10).is_none());
        assert!(logistic_tail_series(1e5, 1e-10).is_some());
    }

    #[test]
    fn builtin_coefficients() {
        let k = PeriodicFunction::cosh_plus_cos(1.0).unwrap();
        let c0 = coefficient(&k, 0, 1e-12).unwrap();
        assert!((c0.re - 1.0 / 1f64.sinh()).abs() < 1e-15);
        assert!((c0.re - 0.850_918_128_2).abs() < 1e-10);

        let l = PeriodicFunction::log_cos_squared();
        let c0 = coefficient(&l, 0, 1e-12).unwrap();
        assert!((c0.re + 1.386_294_361_1).abs() < 1e-10);
        assert_eq!(coefficient(&l, 3, 1e-12).unwrap().re, 0.0);
        assert_eq!(coefficient(&l, 2, 1e-12).unwrap().re, 1.0);
        assert_eq!(coefficient(&l, -4, 1e-12).unwrap().re, -0.5);
        assert!((coefficient(&l, 6, 1e-12).unwrap().re - 1.0 / 3.0).abs() < 1e-16);

        let m = PeriodicFunction::cosh_minus_cos(2.0).unwrap();
        let c = coefficient(&m, -3, 1e-12).unwrap();
        assert!((c.re - (-6f64).exp() / 2f64.sinh()).abs() < 1e-17);
    }

    #[test]
    fn log_cos_squared_coefficients_by_quadrature() {
        let l = PeriodicFunction::log_cos_squared();
        for n in [0i64, 1, 2, 4, 6] {
            let f = |x: f64| (x.cos() * x.cos()).ln() * (n as f64 * x).cos();
            let r =
                crate::quadrature::integrate_finite(f, 0.0, 2.0 * PI, 1e-11, &[0.5 * PI, 1.5 * PI])
                    .unwrap();
            let c = analytic_coefficient(&l, n).unwrap();
            assert!((r.value / (2.0 * PI) - c.re).abs() < 1e-9, "n={n}");
        }
    }

    #[test]
    fn constant_g_table() {
        let one = PeriodicFunction::from_expr(parse("1").unwrap(), 2.0 * PI).unwrap();
        let t = coefficient_table(&one, 2, 1e-12).unwrap();
        assert_eq!(t.source, Source::Numeric);
        for (n, c) in t.iter() {
            let expect = if n == 0 { 1.0 } else { 0.0 };
            assert!(
                (c - Complex64::new(expect, 0.0)).norm() < 1e-12,
                "n={n}: {c}"
            );
        }
    }

    #[test]
    fn kernel_table_ratio_and_sign() {
        let k = PeriodicFunction::cosh_plus_cos(1.0).unwrap();
        let t = coefficient_table(&k, 4, 1e-12).unwrap();
        for n in 0..4 {
            let (a, b) = (t.get(n).unwrap().re, t.get(n + 1).unwrap().re);
            assert!(a * b < 0.0);
            assert!((b / a + (-1f64).exp()).abs() < 1e-14);
        }
    }

    #[test]
    fn numeric_and_analytic_tables_agree() {
        for family in [
            PeriodicFamily::CoshPlusCos { a: 1.0 },
            PeriodicFamily::CoshMinusCos { a: 1.0 },
        ] {
            let g = PeriodicFunction::from_family(family).unwrap();
            let numeric = numeric_coefficient_table(&g, 16, 1e-13).unwrap();
            assert!(numeric.converged);
            for (n, c) in numeric.iter() {
                let exact = analytic_coefficient(&g, n).unwrap();
                assert!((c - exact).norm() < 1e-12, "n={n}");
                assert_eq!(c, numeric.get(-n).unwrap().conj());
            }
        }
    }

    #[test]
    fn singular_g_refuses_numeric_path() {
        let l = PeriodicFunction::log_cos_squared();
        assert_eq!(
            numeric_coefficient_table(&l, 4, 1e-10),
            Err(FourierError::SingularNumericCoefficients)
        );
    }

    #[test]
    fn period_multiple_interleaves_zeros() {
        let k = PeriodicFunction::cosh_plus_cos(1.0).unwrap();
        let k2 = k.with_period_multiple(2);
        for n in -6i64..=6 {
            let c = analytic_coefficient(&k2, n).unwrap();
            if n % 2 != 0 {
                assert_eq!(c.re, 0.0);
            } else {
                assert_eq!(c, analytic_coefficient(&k, n / 2).unwrap());
            }
        }
        // Numeric on the 4π grid reproduces the mapping.
        let expr =
            PeriodicFunction::from_expr(parse("1/(cosh(1)+cos(x))").unwrap(), 4.0 * PI).unwrap();
        let t = numeric_coefficient_table(&expr, 6, 1e-13).unwrap();
        for n in -6i64..=6 {
            assert!((t.get(n).unwrap() - analytic_coefficient(&k2, n).unwrap()).norm() < 1e-12);
        }
    }

    #[test]
    fn transforms_are_conjugate_symmetric_and_real() {
        let fs = [
            sech1(),
            DecayingFunction::gaussian(1.0).unwrap(),
            DecayingFunction::logistic_tail(),
        ];
        for f in &fs {
            for omega in [0.5, 1.0, 2.0, 5.0] {
                let plus = transform_numeric(f, omega, 1e-10).unwrap().value;
                let minus = transform_numeric(f, -omega, 1e-10).unwrap().value;
                assert!((plus - minus.conj()).norm() <= 1e-12);
                assert!(plus.im.abs() <= 1e-10 * (1.0 + plus.re.abs()));
            }
        }
    }

    #[test]
    fn sech_transform_decreases() {
        let mut prev = f64::INFINITY;
        for j in 0..40 {
            let v = transform(&sech1(), 0.25 * j as f64, 1e-12).unwrap().norm();
            assert!(v < prev);
            prev = v;
        }
    }

    #[test]
    fn invalid_tolerance() {
        assert_eq!(
            transform(&sech1(), 1.0, 0.0),
            Err(FourierError::InvalidTolerance(0.0))
        );
        let k = PeriodicFunction::cosh_plus_cos(1.0).unwrap();
        assert!(coefficient(&k, 1, -1.0).is_err());
    }
}
