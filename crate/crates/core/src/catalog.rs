//! Closed forms for three integrals of a decaying function against a
//! periodic kernel, and the special functions they need.
//!
//! * `∫ dx / ((cosh a + cos x)·cosh(bx))`, a rapidly convergent series;
//! * `∫ log(cos² x) / (1 + e^{2|x|}) dx = −log² 2`, with the double series
//!   `J` that appears on the way;
//! * `∫ e^{−x²/4b} / (cosh a − cos x) dx`, a theta-type series.

use std::f64::consts::{LN_2, PI};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CatalogError {
    #[error("{name} must be positive and finite, got {value}")]
    InvalidParameter { name: &'static str, value: f64 },
    #[error("nome q must lie in (0, 1), got {0}")]
    NomeOutOfRange(f64),
    #[error("q_max must be at least 8, got {0}")]
    TooFewTerms(usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesValue {
    pub value: f64,
    pub terms_used: usize,
    pub tail_bound: f64,
}

fn positive(name: &'static str, value: f64) -> Result<(), CatalogError> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(CatalogError::InvalidParameter { name, value })
    }
}

/// `∫ dx / ((cosh a + cos x)·cosh(bx))`
/// `= π/(b sinh a) · (1 + 2 Σ_{n≥1} (−1)^n e^{−na} / cosh(πn/2b))`.
///
/// The summand is alternating with decreasing magnitude, so the tail is
/// bounded by the first omitted term.
pub fn example1_series(a: f64, b: f64, tol: f64) -> Result<SeriesValue, CatalogError> {
    positive("a", a)?;
    positive("b", b)?;
    positive("tol", tol)?;
    let prefactor = PI / (b * a.sinh());
    let c = PI / (2.0 * b);
    // e^{−na}/cosh(cn) = 2e^{−n(a+c)}/(1 + e^{−2cn}), without overflow.
    let term = |n: usize| {
        let even = n.is_multiple_of(2);
        let n = n as f64;
        let magnitude = 2.0 * prefactor * 2.0 * (-n * (a + c)).exp() / (1.0 + (-2.0 * c * n).exp());
        if even {
            magnitude
        } else {
            -magnitude
        }
    };
    let mut sum = 0.0;
    let mut n = 1;
    loop {
        let t = term(n);
        if t.abs() < tol || t == 0.0 {
            return Ok(SeriesValue {
                value: prefactor + sum,
                terms_used: n,
                tail_bound: t.abs(),
            });
        }
        sum += t;
        n += 1;
    }
}

/// `−(log 2)²`.
pub fn example2_reference() -> f64 {
    -LN_2 * LN_2
}

/// `J = Σ_n Σ_k (−1)^{k+n} k / ((k² + n²) n)`, taken as the average of the
/// two orders of summation over the square `[1, q_max]²`. Averaging turns the
/// summand into `(−1)^{k+n} / (2nk)`, so the square factorizes into
/// `½ (Σ_{k ≤ q_max} (−1)^k / k)²`.
pub fn example2_double_sum_j(q_max: usize) -> Result<SeriesValue, CatalogError> {
    if q_max < 8 {
        return Err(CatalogError::TooFewTerms(q_max));
    }
    // Smallest terms first.
    let partial: f64 = (1..=q_max)
        .rev()
        .map(|k| {
            if k % 2 == 0 {
                1.0 / k as f64
            } else {
                -1.0 / k as f64
            }
        })
        .sum();
    // The alternating harmonic remainder ρ obeys |ρ| ≤ 1/(q_max+1), and
    // ½(S+ρ)² − ½S² = ρ(S + ρ/2).
    let r = 1.0 / (q_max as f64 + 1.0);
    Ok(SeriesValue {
        value: 0.5 * partial * partial,
        terms_used: q_max,
        tail_bound: r * (partial.abs() + r / 2.0),
    })
}

/// `θ₂(0, q) = 2 Σ_{n≥0} q^{(n+½)²}`, summed until the next term drops
/// below `tol`.
pub fn theta2(q: f64, tol: f64) -> Result<f64, CatalogError> {
    if !(q > 0.0 && q < 1.0) {
        return Err(CatalogError::NomeOutOfRange(q));
    }
    positive("tol", tol)?;
    let ln_q = q.ln();
    let mut sum = 0.0;
    for n in 0.. {
        let e = n as f64 + 0.5;
        let term = 2.0 * (ln_q * e * e).exp();
        if term < tol && n > 0 {
            break;
        }
        sum += term;
    }
    Ok(sum)
}

/// `∫ e^{−x²/4b} / (cosh a − cos x) dx = 2√(πb)/sinh a · (1 + 2 Σ_{n≥1} e^{−an−bn²})`.
pub fn example3_theta(a: f64, b: f64, tol: f64) -> Result<SeriesValue, CatalogError> {
    positive("a", a)?;
    positive("b", b)?;
    positive("tol", tol)?;
    let prefactor = 2.0 * (PI * b).sqrt() / a.sinh();
    let term = |n: f64| 2.0 * prefactor * (-a * n - b * n * n).exp();
    let mut sum = 0.0;
    let mut n = 1;
    loop {
        let nf = n as f64;
        let t = term(nf);
        // Ratio of consecutive terms from n on is at most e^{−a−b(2n+1)}.
        let ratio = (-a - b * (2.0 * nf + 1.0)).exp();
        let bound = t / (1.0 - ratio);
        if bound < tol {
            return Ok(SeriesValue {
                value: prefactor + sum,
                terms_used: n,
                tail_bound: bound,
            });
        }
        sum += t;
        n += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fourier;
    use crate::functions::DecayingFunction;
    use crate::quadrature::integrate_line;

    #[test]
    fn example1_against_quadrature() {
        let s = example1_series(1.0, 1.0, 1e-14).unwrap();
        let c = 1f64.cosh();
        let integrand = |x: f64| 1.0 / ((c + x.cos()) * x.cosh());
        let q = integrate_line(integrand, 1e-12, None).unwrap();
        assert!(
            (s.value - q.value).abs() <= 1e-9,
            "{} vs {}",
            s.value,
            q.value
        );
        assert!(s.tail_bound < 1e-14);
    }

    #[test]
    fn example1_large_a_is_leading_term() {
        let s = example1_series(20.0, 1.0, 1e-300).unwrap();
        let lead = PI / 20f64.sinh();
        assert!(((s.value - lead) / lead).abs() < 2.0 * (-20f64).exp() * 2.0);
        assert!(s.value < lead);
    }

    #[test]
    fn example1_first_correction_is_negative() {
        let lead = PI / 1f64.sinh();
        let full = example1_series(1.0, 1.0, 1e-14).unwrap();
        assert!(full.value < lead);
        let expected_first = -2.0 * lead * (-1f64).exp() / (PI / 2.0).cosh();
        // The first correction dominates the remainder.
        assert!((full.value - lead - expected_first).abs() < expected_first.abs() / 10.0);
    }

    #[test]
    fn example2_reference_value() {
        let v = example2_reference();
        assert_eq!(v, -0.480_453_013_918_201_4);
        let l = fourier::transform(&DecayingFunction::logistic_tail(), 0.0, 1e-13).unwrap();
        assert!((v + l.re * l.re).abs() < 1e-12);
        assert!(v < 0.0);
    }

    #[test]
    fn double_sum_j_limit() {
        let j = example2_double_sum_j(1_000_000).unwrap();
        assert!((j.value - LN_2 * LN_2 / 2.0).abs() <= 2e-6);
        assert!((j.value - LN_2 * LN_2 / 2.0).abs() <= j.tail_bound);
        assert!((-2.0 * LN_2 * LN_2 + 2.0 * j.value - example2_reference()).abs() <= 5e-6);
        let j8 = example2_double_sum_j(8).unwrap();
        assert!((j8.value - LN_2 * LN_2 / 2.0).abs() < 0.07);
        assert!(example2_double_sum_j(7).is_err());
    }

    #[test]
    fn double_sum_j_matches_symmetrized_square() {
        let q = 40;
        let mut direct = 0.0;
        for n in 1..=q {
            for k in 1..=q {
                let (nf, kf) = (n as f64, k as f64);
                let sign = if (n + k) % 2 == 0 { 1.0 } else { -1.0 };
                direct += 0.5 * sign * (kf / nf + nf / kf) / (kf * kf + nf * nf);
            }
        }
        let j = example2_double_sum_j(q).unwrap();
        assert!((j.value - direct).abs() < 1e-13);
    }

    #[test]
    fn double_sum_j_differences_shrink() {
        let d: Vec<f64> = [1_000usize, 10_000, 100_000]
            .iter()
            .map(|&q| {
                let a = example2_double_sum_j(q).unwrap().value;
                let b = example2_double_sum_j(4 * q).unwrap().value;
                (b - a).abs()
            })
            .collect();
        assert!(d[1] < d[0] && d[2] < d[1], "{d:?}");
    }

    #[test]
    fn theta2_identity_and_limit() {
        let a = 1.0f64;
        let lhs = (a / 4.0).exp() * theta2((-a).exp(), 1e-17).unwrap() - 1.0;
        let rhs = 1.0
            + 2.0
                * (1..20)
                    .map(|n| (-a * (n * (n + 1)) as f64).exp())
                    .sum::<f64>();
        assert!((lhs - rhs).abs() < 1e-12);

        let q = 1e-8f64;
        let ratio = theta2(q, 1e-300).unwrap() / (2.0 * q.powf(0.25));
        assert!((ratio - 1.0).abs() < 1e-12);

        let direct =
            2.0 * (-0.25f64).exp() * (1.0 + (-2f64).exp() + (-6f64).exp() + (-12f64).exp());
        assert!((theta2((-1f64).exp(), 1e-16).unwrap() - direct).abs() < 1e-7);

        for q in [0.0, 1.0, -0.5, f64::NAN] {
            assert!(matches!(
                theta2(q, 1e-10),
                Err(CatalogError::NomeOutOfRange(_))
            ));
        }
    }

    #[test]
    fn example3_theta_form() {
        for a in [0.5f64, 1.0, 2.0] {
            let s = example3_theta(a, a, 1e-15).unwrap();
            let via_theta = 2.0 * (PI * a).sqrt() / a.sinh()
                * ((a / 4.0).exp() * theta2((-a).exp(), 1e-17).unwrap() - 1.0);
            assert!((s.value - via_theta).abs() < 1e-12, "a={a}");
        }
        let big = example3_theta(40.0, 1.0, 1e-300).unwrap();
        let lead = 2.0 * PI.sqrt() / 40f64.sinh();
        assert!(((big.value - lead) / lead).abs() < 1e-17);
    }

    #[test]
    fn parameters_validated() {
        assert!(example1_series(0.0, 1.0, 1e-10).is_err());
        assert!(example1_series(1.0, -1.0, 1e-10).is_err());
        assert!(example3_theta(1.0, 1.0, 0.0).is_err());
    }
}
