//! Command-line front end for the `parseval` library.
//!
//! Exit status: 0 when every requested quantity converged, 2 when a series
//! or quadrature did not converge (a partial report is still printed), 1 on
//! bad input.

use std::f64::consts::PI;
use std::io::Write;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use parseval::catalog::{self, CatalogError};
use parseval::engine::{self, EngineError, EvalOptions, HypothesisReport, MixedResult};
use parseval::expr::{self, ExprError};
use parseval::fourier::{self, FourierError, Source};
use parseval::functions::{
    DecayBound, DecayFamily, DecayingFunction, Envelope, FunctionError, PeriodicFamily,
    PeriodicFunction,
};
use parseval::quadrature::{integrate_line, QuadratureError};
use serde::{Deserialize, Serialize};

#[derive(Parser, Debug)]
#[command(
    name = "parseval",
    version,
    about = "Integrals of decaying × periodic functions via Fourier series"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate ∫ f(x)·conj(g(x)) dx by the series Σ f̂(2πn/T)·conj(C_n(g)).
    Evaluate(EvaluateArgs),
    /// Fourier transform f̂(ω) = ∫ f(t) e^{-iωt} dt.
    Transform(TransformArgs),
    /// Fourier coefficients C_n(g), |n| ≤ n_max.
    Coeffs(CoeffsArgs),
    /// Block-norm summability check for f at a given period.
    CheckHypothesis(HypothesisArgs),
    /// Reproduce one of the three catalogued integrals.
    PaperExample(ExampleArgs),
}

#[derive(Args, Debug)]
struct FArgs {
    /// Built-in decaying function: sech, gaussian, logistic-tail.
    #[arg(
        long = "f",
        conflicts_with = "f_expr",
        required_unless_present = "f_expr"
    )]
    f_family: Option<String>,
    /// Expression in x for the decaying function.
    #[arg(long)]
    f_expr: Option<String>,
    /// Family parameter, e.g. b=1. Repeatable.
    #[arg(long = "f-param", value_name = "K=V", value_parser = parse_param)]
    f_params: Vec<(String, f64)>,
    /// Envelope of an expression f, `exp:C:R` for C·e^{-R|x|} or
    /// `gauss:C:R` for C·e^{-R x²}; sizes the integration window.
    #[arg(long, value_name = "KIND:C:R", value_parser = parse_envelope, requires = "f_expr")]
    f_decay: Option<Envelope>,
    /// Envelope holds for |x| ≥ this value.
    #[arg(long, default_value_t = 0.0, requires = "f_decay")]
    f_decay_from: f64,
}

#[derive(Args, Debug)]
struct GArgs {
    /// Built-in periodic function: cosh-plus-cos, cosh-minus-cos, log-cos-squared.
    #[arg(
        long = "g",
        conflicts_with = "g_expr",
        required_unless_present = "g_expr"
    )]
    g_family: Option<String>,
    /// Expression in x for the periodic function; needs --period.
    #[arg(long, requires = "period")]
    g_expr: Option<String>,
    /// Period of g. Built-ins are 2π-periodic; a multiple of 2π is accepted.
    #[arg(long)]
    period: Option<f64>,
    /// Family parameter, e.g. a=1. Repeatable.
    #[arg(long = "g-param", value_name = "K=V", value_parser = parse_param)]
    g_params: Vec<(String, f64)>,
}

#[derive(Args, Debug)]
struct EvaluateArgs {
    #[command(flatten)]
    f: FArgs,
    #[command(flatten)]
    g: GArgs,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    /// Also integrate f·g directly by adaptive quadrature.
    #[arg(long)]
    compare_oracle: bool,
    /// Tolerance for the quadrature comparison; defaults to --tol.
    #[arg(long, requires = "compare_oracle")]
    oracle_tol: Option<f64>,
    /// Also run the summability check at the period of g.
    #[arg(long)]
    check_hypothesis: bool,
    /// Blocks per side for --check-hypothesis.
    #[arg(long, default_value_t = 6)]
    blocks: usize,
    /// Largest N for the symmetric partial sums.
    #[arg(long, default_value_t = engine::MAX_N)]
    max_n: usize,
    #[arg(long)]
    json: bool,
}

#[derive(Args, Debug)]
struct TransformArgs {
    #[command(flatten)]
    f: FArgs,
    #[arg(long, allow_hyphen_values = true)]
    omega: f64,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    #[arg(long)]
    json: bool,
}

#[derive(Args, Debug)]
struct CoeffsArgs {
    #[command(flatten)]
    g: GArgs,
    #[arg(long)]
    n_max: usize,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
}

#[derive(Args, Debug)]
struct HypothesisArgs {
    #[command(flatten)]
    f: FArgs,
    #[arg(long)]
    period: f64,
    #[arg(long, default_value_t = 6)]
    blocks: usize,
    #[arg(long, default_value_t = 1e-12)]
    tol: f64,
}

#[derive(Args, Debug)]
struct ExampleArgs {
    #[arg(value_parser = clap::value_parser!(u8).range(1..=3))]
    which: u8,
    #[arg(long, default_value_t = 1.0)]
    a: f64,
    #[arg(long, default_value_t = 1.0)]
    b: f64,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    #[arg(long)]
    json: bool,
}

fn parse_param(s: &str) -> Result<(String, f64), String> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| format!("expected K=V, got `{s}`"))?;
    let v: f64 = v
        .trim()
        .parse()
        .map_err(|e| format!("bad value for {k}: {e}"))?;
    Ok((k.trim().to_string(), v))
}

fn parse_envelope(s: &str) -> Result<Envelope, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let [kind, scale, rate] = parts[..] else {
        return Err(format!("expected KIND:C:R, got `{s}`"));
    };
    let scale: f64 = scale.parse().map_err(|e| format!("bad scale: {e}"))?;
    let rate: f64 = rate.parse().map_err(|e| format!("bad rate: {e}"))?;
    if !(scale > 0.0 && rate > 0.0) {
        return Err("envelope scale and rate must be positive".into());
    }
    match kind {
        "exp" => Ok(Envelope::Exponential { scale, rate }),
        "gauss" => Ok(Envelope::Gaussian { scale, rate }),
        other => Err(format!("unknown envelope kind `{other}` (exp, gauss)")),
    }
}

/// Structured result of `evaluate`, `transform` and `paper-example`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub method: String,
    pub value_re: f64,
    pub value_im: f64,
    pub tail_bound: f64,
    pub n_used: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle_value: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle_gap: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hypothesis_verdict: Option<String>,
    pub timing_ms: f64,
}

#[derive(Debug)]
enum Failure {
    /// Bad flags, names, parameters or expressions.
    Input(String),
    /// A computation that could not reach its tolerance.
    Numeric(String),
}

impl From<ExprError> for Failure {
    fn from(e: ExprError) -> Self {
        Failure::Input(format!("expression error: {e}"))
    }
}

impl From<FunctionError> for Failure {
    fn from(e: FunctionError) -> Self {
        Failure::Input(e.to_string())
    }
}

impl From<CatalogError> for Failure {
    fn from(e: CatalogError) -> Self {
        Failure::Input(e.to_string())
    }
}

impl From<FourierError> for Failure {
    fn from(e: FourierError) -> Self {
        match e {
            FourierError::InvalidTolerance(_) | FourierError::SingularNumericCoefficients => {
                Failure::Input(e.to_string())
            }
            _ => Failure::Numeric(e.to_string()),
        }
    }
}

impl From<QuadratureError> for Failure {
    fn from(e: QuadratureError) -> Self {
        Failure::Numeric(e.to_string())
    }
}

impl From<EngineError> for Failure {
    fn from(e: EngineError) -> Self {
        match e {
            EngineError::InvalidArgument(_) => Failure::Input(e.to_string()),
            EngineError::Fourier(inner) => inner.into(),
            _ => Failure::Numeric(e.to_string()),
        }
    }
}

/// Parses `args` (program name first) and runs the command, writing the
/// report to `out` and diagnostics to `err`. Returns the exit status.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let rendered = e.render().to_string();
            let _ = if code == 0 {
                write!(out, "{rendered}")
            } else {
                write!(err, "{rendered}")
            };
            return code;
        }
    };
    let outcome = match cli.command {
        Command::Evaluate(a) => evaluate(a, out, err),
        Command::Transform(a) => transform(a, out),
        Command::Coeffs(a) => coeffs(a, out),
        Command::CheckHypothesis(a) => hypothesis(a, out),
        Command::PaperExample(a) => paper_example(a, out, err),
    };
    match outcome {
        Ok(code) => code,
        Err(Failure::Input(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            1
        }
        Err(Failure::Numeric(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            2
        }
    }
}

fn build_f(a: &FArgs) -> Result<DecayingFunction, Failure> {
    if let Some(name) = &a.f_family {
        let family = DecayFamily::from_name(name, &a.f_params)?;
        return Ok(DecayingFunction::from_family(family)?);
    }
    if !a.f_params.is_empty() {
        return Err(Failure::Input(
            "--f-param applies to built-in families only".into(),
        ));
    }
    let text = a.f_expr.as_deref().expect("clap enforces --f or --f-expr");
    let bound = a.f_decay.map(|envelope| DecayBound {
        envelope,
        from: a.f_decay_from,
    });
    Ok(DecayingFunction::from_expr(expr::parse(text)?, bound))
}

fn build_g(a: &GArgs) -> Result<PeriodicFunction, Failure> {
    if let Some(name) = &a.g_family {
        let family = PeriodicFamily::from_name(name, &a.g_params)?;
        let g = PeriodicFunction::from_family(family)?;
        return match a.period {
            None => Ok(g),
            Some(t) => {
                let multiple = (t / (2.0 * PI)).round();
                if multiple >= 1.0 && (t - multiple * 2.0 * PI).abs() <= 1e-12 * t {
                    Ok(g.with_period_multiple(multiple as u32))
                } else {
                    Err(Failure::Input(format!(
                        "built-in g has period 2π; --period {t} is not a multiple of it"
                    )))
                }
            }
        };
    }
    if !a.g_params.is_empty() {
        return Err(Failure::Input(
            "--g-param applies to built-in families only".into(),
        ));
    }
    let text = a.g_expr.as_deref().expect("clap enforces --g or --g-expr");
    let period = a.period.expect("clap enforces --period with --g-expr");
    Ok(PeriodicFunction::from_expr(expr::parse(text)?, period)?)
}

fn elapsed_ms(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}

fn emit(out: &mut dyn Write, report: &Report, json: bool, extra: &[String]) {
    if json {
        let line = serde_json::to_string(report).expect("report fields are finite");
        let _ = writeln!(out, "{line}");
        return;
    }
    let _ = writeln!(out, "method        {}", report.method);
    let _ = writeln!(
        out,
        "value         {:.16e} {:+.3e}i",
        report.value_re, report.value_im
    );
    let _ = writeln!(out, "tail_bound    {:.3e}", report.tail_bound);
    let _ = writeln!(out, "n_used        {}", report.n_used);
    if let Some(v) = report.oracle_value {
        let _ = writeln!(out, "oracle        {v:.16e}");
    }
    if let Some(v) = report.oracle_gap {
        let _ = writeln!(out, "oracle_gap    {v:.3e}");
    }
    if let Some(v) = &report.hypothesis_verdict {
        let _ = writeln!(out, "hypothesis    {v}");
    }
    for line in extra {
        let _ = writeln!(out, "{line}");
    }
    let _ = writeln!(out, "timing_ms     {:.3}", report.timing_ms);
}

fn mixed_report(r: &MixedResult, method: &str, start: Instant) -> Report {
    Report {
        method: method.to_string(),
        value_re: r.value.re,
        value_im: r.value.im,
        tail_bound: r.tail_bound,
        n_used: r.n_used,
        oracle_value: r.oracle.map(|o| o.value),
        oracle_gap: r.oracle_gap,
        hypothesis_verdict: None,
        timing_ms: elapsed_ms(start),
    }
}

/// Runs the series; `Ok((result, converged))`, with the partial result on
/// non-convergence.
fn run_series(
    f: &DecayingFunction,
    g: &PeriodicFunction,
    options: &EvalOptions,
    err: &mut dyn Write,
) -> Result<(MixedResult, bool), Failure> {
    match engine::evaluate_mixed(f, g, options) {
        Ok(r) => {
            for w in &r.warnings {
                let _ = writeln!(err, "warning: {w}");
            }
            Ok((r, true))
        }
        Err(EngineError::NotConverged { reason, partial }) => {
            for w in &partial.warnings {
                let _ = writeln!(err, "warning: {w}");
            }
            let _ = writeln!(err, "not converged: {reason}");
            Ok((*partial, false))
        }
        Err(e) => Err(e.into()),
    }
}

fn evaluate(a: EvaluateArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, Failure> {
    let start = Instant::now();
    let f = build_f(&a.f)?;
    let g = build_g(&a.g)?;
    let mut options = EvalOptions::new(a.tol).with_oracle(a.compare_oracle);
    options.oracle_tol = a.oracle_tol;
    options.max_n = a.max_n.max(1);
    let hypothesis: Option<HypothesisReport> = if a.check_hypothesis {
        Some(engine::check_hypothesis(
            &f,
            g.period(),
            a.blocks,
            a.tol.min(1e-10),
        )?)
    } else {
        None
    };
    let (result, mut converged) = run_series(&f, &g, &options, err)?;
    if let Some(o) = result.oracle {
        if !o.converged {
            let _ = writeln!(
                err,
                "warning: oracle quadrature did not reach its tolerance"
            );
            converged = false;
        }
    }
    let mut report = mixed_report(&result, "mixed-parseval-series", start);
    let mut extra = vec![
        format!("f             {}", f.describe()),
        format!("g             {}", g.describe()),
    ];
    if let Some(h) = &hypothesis {
        report.hypothesis_verdict = Some(h.verdict.as_str().to_string());
        extra.push(format!(
            "decay_ratio   {:.4e} over {} blocks per side",
            h.decay_ratio, h.blocks
        ));
    }
    report.timing_ms = elapsed_ms(start);
    emit(out, &report, a.json, &extra);
    Ok(if converged { 0 } else { 2 })
}

fn transform(a: TransformArgs, out: &mut dyn Write) -> Result<i32, Failure> {
    let start = Instant::now();
    let f = build_f(&a.f)?;
    let v = fourier::transform_detailed(&f, a.omega, a.tol)?;
    let method = match v.source {
        Source::Analytic => "transform-analytic",
        Source::Numeric => "transform-numeric",
    };
    let report = Report {
        method: method.into(),
        value_re: v.value.re,
        value_im: v.value.im,
        tail_bound: v.error,
        n_used: 0,
        oracle_value: None,
        oracle_gap: None,
        hypothesis_verdict: None,
        timing_ms: elapsed_ms(start),
    };
    emit(
        out,
        &report,
        a.json,
        &[format!("omega         {}", a.omega)],
    );
    Ok(0)
}

fn coeffs(a: CoeffsArgs, out: &mut dyn Write) -> Result<i32, Failure> {
    let g = build_g(&a.g)?;
    let table = fourier::coefficient_table(&g, a.n_max, a.tol)?;
    let source = match table.source {
        Source::Analytic => "analytic".to_string(),
        Source::Numeric => format!(
            "trapezoid, {} points",
            table.grid_size.expect("numeric tables record their grid")
        ),
    };
    let _ = writeln!(
        out,
        "# {} ({source}, error ≤ {:.1e})",
        g.describe(),
        table.error_estimate
    );
    for (n, c) in table.iter() {
        let _ = writeln!(out, "{n:>6} {:+.16e} {:+.16e}", c.re, c.im);
    }
    Ok(if table.converged { 0 } else { 2 })
}

fn hypothesis(a: HypothesisArgs, out: &mut dyn Write) -> Result<i32, Failure> {
    let f = build_f(&a.f)?;
    let r = engine::check_hypothesis(&f, a.period, a.blocks, a.tol)?;
    let _ = writeln!(
        out,
        "# block L² norms of {} at period {}",
        f.describe(),
        r.period
    );
    for (k, v) in &r.block_norms {
        let _ = writeln!(out, "{k:>6} {v:.6e}");
    }
    let _ = writeln!(out, "partial_sum   {:.10e}", r.partial_m);
    let _ = writeln!(out, "ratio_left    {:.4e}", r.ratio_left);
    let _ = writeln!(out, "ratio_right   {:.4e}", r.ratio_right);
    let _ = writeln!(out, "decay_ratio   {:.4e}", r.decay_ratio);
    match r.tail_bound {
        Some(t) => {
            let _ = writeln!(out, "tail_bound    {t:.3e}");
        }
        None => {
            let _ = writeln!(out, "tail_bound    none");
        }
    }
    let _ = writeln!(out, "verdict       {}", r.verdict.as_str());
    Ok(0)
}

fn paper_example(a: ExampleArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, Failure> {
    let start = Instant::now();
    let options = EvalOptions::new(a.tol);
    let mut extra = Vec::new();
    let (result, mut converged) = match a.which {
        1 => {
            let f = DecayingFunction::sech(a.b)?;
            let g = PeriodicFunction::cosh_plus_cos(a.a)?;
            let series = catalog::example1_series(a.a, a.b, a.tol * 1e-2)?;
            let ca = a.a.cosh();
            let b = a.b;
            let quad = integrate_line(
                move |x: f64| 1.0 / ((ca + x.cos()) * (b * x).cosh()),
                a.tol,
                None,
            )?;
            extra.push(format!(
                "closed_form   {:.16e} ({} terms)",
                series.value, series.terms_used
            ));
            extra.push(format!(
                "quadrature    {:.16e} (error ≤ {:.1e})",
                quad.value, quad.error_estimate
            ));
            let (r, ok) = run_series(&f, &g, &options, err)?;
            extra.push(format!(
                "series_gap    {:.3e}",
                (r.value.re - series.value).abs()
            ));
            extra.push(format!(
                "quad_gap      {:.3e}",
                (r.value.re - quad.value).abs()
            ));
            (r, ok && quad.converged)
        }
        2 => {
            let f = DecayingFunction::logistic_tail();
            let g = PeriodicFunction::log_cos_squared();
            let reference = catalog::example2_reference();
            let j = catalog::example2_double_sum_j(1_000_000)?;
            extra.push(format!("closed_form   {reference:.16e} (−log² 2)"));
            extra.push(format!(
                "double_sum_J  {:.10e} (±{:.1e}), −2log²2 + 2J = {:.10e}",
                j.value,
                j.tail_bound,
                -2.0 * std::f64::consts::LN_2.powi(2) + 2.0 * j.value
            ));
            let (r, ok) = run_series(&f, &g, &options, err)?;
            extra.push(format!(
                "closed_gap    {:.3e}",
                (r.value.re - reference).abs()
            ));
            (r, ok)
        }
        _ => {
            let f = DecayingFunction::gaussian(a.b)?;
            let g = PeriodicFunction::cosh_minus_cos(a.a)?;
            let series = catalog::example3_theta(a.a, a.b, a.tol * 1e-2)?;
            extra.push(format!(
                "closed_form   {:.16e} ({} terms)",
                series.value, series.terms_used
            ));
            if a.a == a.b {
                let theta = catalog::theta2((-a.a).exp(), 1e-17)?;
                let via_theta =
                    2.0 * (PI * a.a).sqrt() / a.a.sinh() * ((a.a / 4.0).exp() * theta - 1.0);
                extra.push(format!("theta_form    {via_theta:.16e}"));
            }
            let (r, ok) = run_series(&f, &g, &options, err)?;
            extra.push(format!(
                "closed_gap    {:.3e}",
                (r.value.re - series.value).abs()
            ));
            (r, ok)
        }
    };
    if result.oracle.is_some_and(|o| !o.converged) {
        converged = false;
    }
    let report = mixed_report(&result, &format!("paper-example-{}", a.which), start);
    emit(out, &report, a.json, &extra);
    Ok(if converged { 0 } else { 2 })
}
