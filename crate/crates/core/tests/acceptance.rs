//! End-to-end acceptance checks, run without the libtest harness so every
//! criterion's PASS/FAIL line is always printed. Exits non-zero if any fails.

use std::f64::consts::{LN_2, PI};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use parseval::catalog;
use parseval::engine::{self, EvalOptions, Verdict};
use parseval::expr::parse;
use parseval::fourier;
use parseval::functions::{DecayBound, DecayingFunction, Envelope, PeriodicFunction};
use parseval::quadrature::integrate_line;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let start = Instant::now();
    let out = f();
    (out, start.elapsed())
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn pairwise(label: &str, values: &[(&str, f64)], tol: f64) -> Result<(), String> {
    for (i, (na, va)) in values.iter().enumerate() {
        for (nb, vb) in &values[i + 1..] {
            ensure((va - vb).abs() <= tol, || {
                format!(
                    "{label}: {na}={va:.15} vs {nb}={vb:.15} (gap {:e} > {tol:e})",
                    (va - vb).abs()
                )
            })?;
        }
    }
    Ok(())
}

fn criterion_1() -> Outcome {
    let f = DecayingFunction::logistic_tail();
    let g = PeriodicFunction::log_cos_squared();
    let (r, elapsed) =
        timed(|| engine::evaluate_mixed(&f, &g, &EvalOptions::new(1e-10).with_oracle(true)));
    let r = r.map_err(err)?;
    let reference = -0.480_453_013_918_201_4;
    let gap = (r.value.re - reference).abs();
    ensure(gap <= 1e-9, || {
        format!("value {} off by {gap:e}", r.value.re)
    })?;
    let oracle_gap = r.oracle_gap.expect("oracle requested");
    ensure(oracle_gap <= 1e-8, || format!("oracle gap {oracle_gap:e}"))?;
    ensure(elapsed < Duration::from_secs(1), || {
        format!("took {elapsed:?}")
    })?;
    Ok(format!(
        "value {:.13}, |err| {gap:.1e}, oracle gap {oracle_gap:.1e}, N={}, {elapsed:.0?}",
        r.value.re, r.n_used
    ))
}

fn criterion_2() -> Outcome {
    let mut notes = Vec::new();
    for (a, b) in [(0.5, 1.0), (1.0, 1.0), (2.0, 0.5)] {
        let (values, elapsed) = timed(|| -> Result<_, String> {
            let f = DecayingFunction::sech(b).map_err(err)?;
            let g = PeriodicFunction::cosh_plus_cos(a).map_err(err)?;
            let engine = engine::evaluate_mixed(&f, &g, &EvalOptions::new(1e-10)).map_err(err)?;
            let series = catalog::example1_series(a, b, 1e-14).map_err(err)?;
            let ca = f64::cosh(a);
            let quad = integrate_line(
                |x: f64| 1.0 / ((ca + x.cos()) * (b * x).cosh()),
                1e-11,
                None,
            )
            .map_err(err)?;
            Ok((engine.value.re, series.value, quad.value))
        });
        let (e, s, q) = values?;
        pairwise(
            &format!("(a,b)=({a},{b})"),
            &[("engine", e), ("series", s), ("quadrature", q)],
            1e-8,
        )?;
        ensure(elapsed < Duration::from_secs(1), || {
            format!("(a,b)=({a},{b}) took {elapsed:?}")
        })?;
        notes.push(format!("({a},{b})→{e:.10} {elapsed:.0?}"));
    }
    Ok(notes.join(", "))
}

fn theta_closed_form(a: f64) -> Result<f64, String> {
    let theta = catalog::theta2((-a).exp(), 1e-17).map_err(err)?;
    Ok(2.0 * (PI * a).sqrt() / a.sinh() * ((a / 4.0).exp() * theta - 1.0))
}

fn criterion_3() -> Outcome {
    let mut notes = Vec::new();
    for a in [0.5, 1.0, 2.0] {
        let f = DecayingFunction::gaussian(a).map_err(err)?;
        let g = PeriodicFunction::cosh_minus_cos(a).map_err(err)?;
        let e = engine::evaluate_mixed(&f, &g, &EvalOptions::new(1e-10))
            .map_err(err)?
            .value
            .re;
        let s = catalog::example3_theta(a, a, 1e-15).map_err(err)?.value;
        let t = theta_closed_form(a)?;
        pairwise(
            &format!("a={a}"),
            &[("engine", e), ("series", s), ("theta", t)],
            1e-9,
        )?;
        notes.push(format!("a={a}→{e:.10}"));
    }
    Ok(notes.join(", "))
}

fn criterion_4() -> Outcome {
    let f = DecayingFunction::sech(1.0).map_err(err)?;
    let r = engine::check_hypothesis(&f, 2.0 * PI, 6, 1e-12).map_err(err)?;
    let expected = (-2.0 * PI).exp();
    let rel = (r.decay_ratio - expected).abs() / expected;
    ensure(rel <= 0.1, || {
        format!("decay ratio {:e} vs {expected:e}", r.decay_ratio)
    })?;
    ensure(r.verdict == Verdict::FiniteEvidence, || {
        format!("verdict {:?}", r.verdict)
    })?;
    Ok(format!(
        "ratio {:.4e} (rel {rel:.1e}), {}",
        r.decay_ratio,
        r.verdict.as_str()
    ))
}

fn criterion_5() -> Outcome {
    let f = DecayingFunction::sech(1.0).map_err(err)?;
    let g = PeriodicFunction::cosh_plus_cos(1.0).map_err(err)?;
    let (lhs, rhs) = engine::classical_parseval_sides(&f, &g, 8, 64, 1e-12).map_err(err)?;
    let gap = (lhs - rhs).norm();
    ensure(gap <= 1e-6, || format!("{lhs} vs {rhs}"))?;
    Ok(format!(
        "sides {:.12} / {:.12}, gap {gap:.1e}",
        lhs.re, rhs.re
    ))
}

fn criterion_6() -> Outcome {
    let mut worst_c: f64 = 0.0;
    for g in [
        PeriodicFunction::cosh_plus_cos(1.0).map_err(err)?,
        PeriodicFunction::cosh_minus_cos(1.0).map_err(err)?,
    ] {
        let table = fourier::numeric_coefficient_table(&g, 16, 1e-14).map_err(err)?;
        for n in -16..=16i64 {
            let exact = fourier::analytic_coefficient(&g, n).expect("built-in");
            let gap = (table.get(n).expect("in table") - exact).norm();
            worst_c = worst_c.max(gap);
            ensure(gap <= 1e-12, || {
                format!("{} C_{n}: gap {gap:e}", g.describe())
            })?;
        }
    }
    let mut worst_t: f64 = 0.0;
    for f in [
        DecayingFunction::sech(1.0).map_err(err)?,
        DecayingFunction::gaussian(1.0).map_err(err)?,
    ] {
        for omega in [0.0, 1.0, -1.0, 2.0, -2.0, 5.0, -5.0] {
            let exact = fourier::transform_analytic(&f, omega, 1e-14)
                .expect("closed form")
                .value;
            let numeric = fourier::transform_numeric(&f, omega, 1e-11)
                .map_err(err)?
                .value;
            let gap = (numeric - exact).norm();
            worst_t = worst_t.max(gap);
            ensure(gap <= 1e-9, || {
                format!("{} at ω={omega}: gap {gap:e}", f.describe())
            })?;
        }
    }
    Ok(format!(
        "max coefficient gap {worst_c:.1e}, max transform gap {worst_t:.1e}"
    ))
}

fn criterion_7() -> Outcome {
    let j = catalog::example2_double_sum_j(1_000_000).map_err(err)?;
    let target = LN_2 * LN_2 / 2.0;
    let gap = (j.value - target).abs();
    ensure(gap <= 2e-6, || format!("J = {} off by {gap:e}", j.value))?;
    let chain = -2.0 * LN_2 * LN_2 + 2.0 * j.value;
    let f = DecayingFunction::logistic_tail();
    let g = PeriodicFunction::log_cos_squared();
    let c1 = engine::evaluate_mixed(&f, &g, &EvalOptions::new(1e-10))
        .map_err(err)?
        .value
        .re;
    let chain_gap = (chain - c1).abs();
    ensure(chain_gap <= 5e-6, || format!("chain {chain} vs {c1}"))?;
    Ok(format!(
        "J {:.10} (gap {gap:.1e}), chain gap {chain_gap:.1e}",
        j.value
    ))
}

fn criterion_8() -> Outcome {
    let tol = 1e-8;
    let opts = EvalOptions::new(tol);
    let value = |f: &DecayingFunction, g: &PeriodicFunction| {
        engine::evaluate_mixed(f, g, &opts)
            .map(|r| r.value)
            .map_err(err)
    };
    let sech = DecayingFunction::sech(1.0).map_err(err)?;
    let gauss = DecayingFunction::gaussian(1.0).map_err(err)?;
    let g1 = PeriodicFunction::cosh_plus_cos(1.0).map_err(err)?;
    let g2 = PeriodicFunction::cosh_minus_cos(1.0).map_err(err)?;

    // Linearity in g, through an expression for the combination.
    let combo = PeriodicFunction::from_expr(
        parse("2/(cosh(1) + cos(x)) - 3/(cosh(1) - cos(x))").map_err(err)?,
        2.0 * PI,
    )
    .map_err(err)?;
    for f in [&sech, &gauss] {
        let lhs = value(f, &combo)?;
        let rhs = 2.0 * value(f, &g1)? - 3.0 * value(f, &g2)?;
        ensure((lhs - rhs).norm() <= 10.0 * tol, || {
            format!("linearity: {lhs} vs {rhs}")
        })?;
    }

    // Conjugate symmetry for real f and g.
    let wobble =
        PeriodicFunction::from_expr(parse("exp(sin(x)) + cos(2*x)/3").map_err(err)?, 2.0 * PI)
            .map_err(err)?;
    let table = fourier::coefficient_table(&wobble, 12, tol).map_err(err)?;
    for n in 1..=12 {
        let (p, m) = (table.get(n).unwrap(), table.get(-n).unwrap());
        ensure((p - m.conj()).norm() <= tol, || {
            format!("C_{n} vs conj C_-{n}")
        })?;
    }
    let shifted = DecayingFunction::from_expr(
        parse("sech(x - 1/2)").map_err(err)?,
        Some(DecayBound {
            envelope: Envelope::Exponential {
                scale: 2.0 * 0.5f64.exp(),
                rate: 1.0,
            },
            from: 0.0,
        }),
    );
    for omega in [0.5, 1.0, 3.0] {
        let p = fourier::transform(&shifted, omega, tol).map_err(err)?;
        let m = fourier::transform(&shifted, -omega, tol).map_err(err)?;
        ensure((p - m.conj()).norm() <= tol, || {
            format!("f̂({omega}) vs conj f̂(-{omega})")
        })?;
        ensure(p.im.abs() > 1e-3, || {
            "shifted sech should have a nonzero imaginary part".into()
        })?;
    }

    // g ≡ 1 collapses the series to f̂(0).
    let one = PeriodicFunction::from_expr(parse("1").map_err(err)?, 2.0 * PI).map_err(err)?;
    for f in [&sech, &gauss, &DecayingFunction::logistic_tail()] {
        let v = value(f, &one)?;
        let fhat0 = fourier::transform(f, 0.0, tol / 10.0).map_err(err)?;
        ensure((v - fhat0).norm() <= tol, || format!("g≡1: {v} vs {fhat0}"))?;
    }

    // Declaring a 2π-periodic g as 4π-periodic changes nothing.
    for (f, g) in [
        (&sech, &g1),
        (&gauss, &g2),
        (
            &DecayingFunction::logistic_tail(),
            &PeriodicFunction::log_cos_squared(),
        ),
    ] {
        let base = value(f, g)?;
        let refined = value(f, &g.with_period_multiple(2))?;
        ensure((base - refined).norm() <= tol, || {
            format!("period refinement: {base} vs {refined}")
        })?;
    }
    Ok("linearity, conjugate symmetry, g≡1, period refinement".into())
}

fn criterion_9() -> Outcome {
    let mut notes = Vec::new();
    for (a, b) in [(0.5, 1.0), (1.0, 1.0), (2.0, 0.5)] {
        let f = DecayingFunction::from_expr(parse(&format!("sech({b}*x)")).map_err(err)?, None);
        let g = PeriodicFunction::from_expr(
            parse(&format!("1/(cosh({a}) + cos(x))")).map_err(err)?,
            2.0 * PI,
        )
        .map_err(err)?;
        ensure(f.family().is_none() && g.family().is_none(), || {
            "expected expression-defined inputs".into()
        })?;
        let numeric = engine::evaluate_mixed(&f, &g, &EvalOptions::new(1e-10)).map_err(err)?;
        let builtin = engine::evaluate_mixed(
            &DecayingFunction::sech(b).map_err(err)?,
            &PeriodicFunction::cosh_plus_cos(a).map_err(err)?,
            &EvalOptions::new(1e-10),
        )
        .map_err(err)?;
        let series = catalog::example1_series(a, b, 1e-14).map_err(err)?.value;
        let gap = (numeric.value - builtin.value)
            .norm()
            .max((numeric.value.re - series).abs());
        ensure(gap <= 1e-8, || {
            format!("(a,b)=({a},{b}): numeric {} vs {}", numeric.value, series)
        })?;
        ensure(numeric.value.im.abs() <= 1e-8, || {
            format!("imaginary residue {}", numeric.value.im)
        })?;
        notes.push(format!("({a},{b}) gap {gap:.1e}"));
    }
    Ok(notes.join(", "))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("1 logistic tail × log cos² equals -log²2", criterion_1),
        ("2 sech × cosh-plus-cos, three routes agree", criterion_2),
        ("3 gaussian × cosh-minus-cos theta identity", criterion_3),
        ("4 hypothesis decay ratio for sech", criterion_4),
        ("5 classical Parseval on the periodization", criterion_5),
        ("6 numeric vs closed-form Fourier data", criterion_6),
        ("7 symmetrized double sum J", criterion_7),
        ("8 property suite", criterion_8),
        ("9 expression inputs through the numeric path", criterion_9),
    ];
    let mut failures = 0;
    for (name, check) in criteria {
        match check() {
            Ok(detail) => println!("PASS criterion {name}: {detail}"),
            Err(why) => {
                failures += 1;
                println!("FAIL criterion {name}: {why}");
            }
        }
    }
    println!("acceptance: {} passed, {failures} failed", 9 - failures);
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
