//! Function model for the two factors of the integrand: a decaying `f` on
//! the line and a `T`-periodic `g`.
//!
//! Built-in families carry the closed-form Fourier data used by
//! [`crate::fourier`]; expression-defined functions go through the numeric
//! paths instead.

use std::f64::consts::{LN_2, PI};

use thiserror::Error;

use crate::expr::ExprAst;

const TWO_PI: f64 = 2.0 * PI;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FunctionError {
    #[error("parameter `{name}` must be positive, got {value}")]
    ParameterOutOfRange { name: &'static str, value: f64 },
    #[error("period must be positive and finite, got {0}")]
    NonPositivePeriod(f64),
    #[error("unknown function family `{0}`")]
    UnknownFamily(String),
    #[error("family `{family}` requires parameter `{name}`")]
    MissingParameter {
        family: &'static str,
        name: &'static str,
    },
    #[error("family `{family}` does not take parameter `{name}`")]
    UnexpectedParameter { family: &'static str, name: String },
}

/// Pointwise evaluation shared by both function kinds.
pub trait RealMap: Send + Sync {
    fn eval(&self, x: f64) -> f64;
}

impl<F: Fn(f64) -> f64 + Send + Sync> RealMap for F {
    fn eval(&self, x: f64) -> f64 {
        self(x)
    }
}

pub fn evaluate<M: RealMap + ?Sized>(func: &M, x: f64) -> f64 {
    func.eval(x)
}

fn positive(name: &'static str, value: f64) -> Result<f64, FunctionError> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(FunctionError::ParameterOutOfRange { name, value })
    }
}

/// Looks up `name` in a `key=value` parameter list, rejecting unknown keys.
fn take_param(
    family: &'static str,
    params: &[(String, f64)],
    allowed: &[&'static str],
    name: &'static str,
) -> Result<f64, FunctionError> {
    if let Some((bad, _)) = params.iter().find(|(k, _)| !allowed.contains(&k.as_str())) {
        return Err(FunctionError::UnexpectedParameter {
            family,
            name: bad.clone(),
        });
    }
    params
        .iter()
        .rev()
        .find(|(k, _)| k == name)
        .map(|(_, v)| *v)
        .ok_or(FunctionError::MissingParameter { family, name })
}

fn no_params(family: &'static str, params: &[(String, f64)]) -> Result<(), FunctionError> {
    match params.first() {
        Some((k, _)) => Err(FunctionError::UnexpectedParameter {
            family,
            name: k.clone(),
        }),
        None => Ok(()),
    }
}

/// Monotone bound on `|f(x)|` valid for `|x| >= from`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Envelope {
    /// `scale * exp(-rate * |x|)`
    Exponential { scale: f64, rate: f64 },
    /// `scale * exp(-rate * x^2)`
    Gaussian { scale: f64, rate: f64 },
}

impl Envelope {
    pub fn at(&self, x: f64) -> f64 {
        match *self {
            Envelope::Exponential { scale, rate } => scale * (-rate * x.abs()).exp(),
            Envelope::Gaussian { scale, rate } => scale * (-rate * x * x).exp(),
        }
    }

    /// Upper bound on the integral of the envelope over `|x| > cutoff`.
    pub fn two_sided_tail(&self, cutoff: f64) -> f64 {
        let cutoff = cutoff.max(0.0);
        match *self {
            Envelope::Exponential { scale, rate } => 2.0 * scale * (-rate * cutoff).exp() / rate,
            Envelope::Gaussian { scale, rate } => {
                // Each side is at most e^{-rL^2}/(2rL); both together never exceed the full mass.
                let full = scale * (PI / rate).sqrt();
                if cutoff == 0.0 {
                    full
                } else {
                    (scale * (-rate * cutoff * cutoff).exp() / (rate * cutoff)).min(full)
                }
            }
        }
    }

    /// Smallest cutoff (to bisection precision) whose two-sided tail, scaled
    /// by `factor`, stays below `budget`.
    pub fn cutoff_for(&self, budget: f64, factor: f64) -> f64 {
        let tail = |l: f64| factor * self.two_sided_tail(l);
        let mut hi = 1.0;
        while tail(hi) > budget && hi < 1e6 {
            hi *= 2.0;
        }
        let mut lo = if hi > 1.0 { hi / 2.0 } else { 0.0 };
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if tail(mid) > budget {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        hi
    }
}

/// An envelope together with the radius beyond which it holds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayBound {
    pub envelope: Envelope,
    pub from: f64,
}

impl DecayBound {
    /// Half-width `L` of a window `[-L, L]` outside of which
    /// `factor * ∫ envelope < budget`.
    pub fn window(&self, budget: f64, factor: f64) -> f64 {
        self.envelope.cutoff_for(budget, factor).max(self.from)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DecayFamily {
    /// `1 / cosh(b x)`
    Sech { b: f64 },
    /// `exp(-x^2 / (4 b))`
    Gaussian { b: f64 },
    /// `1 / (1 + exp(2 |x|))`
    LogisticTail,
}

impl DecayFamily {
    pub fn from_name(name: &str, params: &[(String, f64)]) -> Result<Self, FunctionError> {
        match name {
            "sech" => Ok(DecayFamily::Sech {
                b: take_param("sech", params, &["b"], "b")?,
            }),
            "gaussian" => Ok(DecayFamily::Gaussian {
                b: take_param("gaussian", params, &["b"], "b")?,
            }),
            "logistic-tail" => {
                no_params("logistic-tail", params)?;
                Ok(DecayFamily::LogisticTail)
            }
            other => Err(FunctionError::UnknownFamily(other.to_string())),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            DecayFamily::Sech { .. } => "sech",
            DecayFamily::Gaussian { .. } => "gaussian",
            DecayFamily::LogisticTail => "logistic-tail",
        }
    }

    fn validate(self) -> Result<Self, FunctionError> {
        match self {
            DecayFamily::Sech { b } => positive("b", b).map(|b| DecayFamily::Sech { b }),
            DecayFamily::Gaussian { b } => positive("b", b).map(|b| DecayFamily::Gaussian { b }),
            DecayFamily::LogisticTail => Ok(self),
        }
    }

    fn eval(&self, x: f64) -> f64 {
        match *self {
            DecayFamily::Sech { b } => 1.0 / (b * x).cosh(),
            DecayFamily::Gaussian { b } => (-x * x / (4.0 * b)).exp(),
            DecayFamily::LogisticTail => {
                let t = (-2.0 * x.abs()).exp();
                t / (1.0 + t)
            }
        }
    }

    fn decay_bound(&self) -> DecayBound {
        let envelope = match *self {
            // cosh y >= e^{|y|}/2
            DecayFamily::Sech { b } => Envelope::Exponential {
                scale: 2.0,
                rate: b,
            },
            DecayFamily::Gaussian { b } => Envelope::Gaussian {
                scale: 1.0,
                rate: 1.0 / (4.0 * b),
            },
            DecayFamily::LogisticTail => Envelope::Exponential {
                scale: 1.0,
                rate: 2.0,
            },
        };
        DecayBound {
            envelope,
            from: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum DecayingBody {
    Family(DecayFamily),
    Expr(ExprAst),
}

/// Construction input for [`make_decaying`].
#[derive(Debug, Clone)]
pub enum DecaySpec {
    Family(DecayFamily),
    Expr {
        ast: ExprAst,
        decay: Option<DecayBound>,
    },
}

/// The decaying factor `f`.
#[derive(Debug, Clone, PartialEq)]
pub struct DecayingFunction {
    body: DecayingBody,
    decay: Option<DecayBound>,
    kinks: Vec<f64>,
}

impl DecayingFunction {
    pub fn sech(b: f64) -> Result<Self, FunctionError> {
        Self::from_family(DecayFamily::Sech { b })
    }

    pub fn gaussian(b: f64) -> Result<Self, FunctionError> {
        Self::from_family(DecayFamily::Gaussian { b })
    }

    pub fn logistic_tail() -> Self {
        Self::from_family(DecayFamily::LogisticTail).expect("parameter-free family")
    }

    pub fn from_family(family: DecayFamily) -> Result<Self, FunctionError> {
        let family = family.validate()?;
        let kinks = match family {
            DecayFamily::LogisticTail => vec![0.0],
            _ => Vec::new(),
        };
        Ok(DecayingFunction {
            decay: Some(family.decay_bound()),
            body: DecayingBody::Family(family),
            kinks,
        })
    }

    /// Expression-defined `f`. Without a decay hint, line integration falls
    /// back to window doubling.
    pub fn from_expr(ast: ExprAst, decay: Option<DecayBound>) -> Self {
        DecayingFunction {
            body: DecayingBody::Expr(ast),
            decay,
            kinks: Vec::new(),
        }
    }

    pub fn family(&self) -> Option<DecayFamily> {
        match &self.body {
            DecayingBody::Family(f) => Some(*f),
            DecayingBody::Expr(_) => None,
        }
    }

    pub fn decay_bound(&self) -> Option<DecayBound> {
        self.decay
    }

    /// Points where `f` is continuous but not smooth; quadrature splits there.
    pub fn kinks(&self) -> &[f64] {
        &self.kinks
    }

    pub fn describe(&self) -> String {
        match &self.body {
            DecayingBody::Family(DecayFamily::Sech { b }) => format!("sech(b={b})"),
            DecayingBody::Family(DecayFamily::Gaussian { b }) => format!("gaussian(b={b})"),
            DecayingBody::Family(DecayFamily::LogisticTail) => "logistic-tail".into(),
            DecayingBody::Expr(ast) => format!("expr({})", ast.source()),
        }
    }
}

impl RealMap for DecayingFunction {
    fn eval(&self, x: f64) -> f64 {
        match &self.body {
            DecayingBody::Family(f) => f.eval(x),
            DecayingBody::Expr(ast) => ast.eval_at(x),
        }
    }
}

pub fn make_decaying(spec: DecaySpec) -> Result<DecayingFunction, FunctionError> {
    match spec {
        DecaySpec::Family(family) => DecayingFunction::from_family(family),
        DecaySpec::Expr { ast, decay } => Ok(DecayingFunction::from_expr(ast, decay)),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PeriodicFamily {
    /// `1 / (cosh a + cos x)`
    CoshPlusCos { a: f64 },
    /// `1 / (cosh a - cos x)`
    CoshMinusCos { a: f64 },
    /// `log(cos^2 x)`
    LogCosSquared,
}

impl PeriodicFamily {
    pub fn from_name(name: &str, params: &[(String, f64)]) -> Result<Self, FunctionError> {
        match name {
            "cosh-plus-cos" => Ok(PeriodicFamily::CoshPlusCos {
                a: take_param("cosh-plus-cos", params, &["a"], "a")?,
            }),
            "cosh-minus-cos" => Ok(PeriodicFamily::CoshMinusCos {
                a: take_param("cosh-minus-cos", params, &["a"], "a")?,
            }),
            "log-cos-squared" => {
                no_params("log-cos-squared", params)?;
                Ok(PeriodicFamily::LogCosSquared)
            }
            other => Err(FunctionError::UnknownFamily(other.to_string())),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            PeriodicFamily::CoshPlusCos { .. } => "cosh-plus-cos",
            PeriodicFamily::CoshMinusCos { .. } => "cosh-minus-cos",
            PeriodicFamily::LogCosSquared => "log-cos-squared",
        }
    }

    fn validate(self) -> Result<Self, FunctionError> {
        match self {
            PeriodicFamily::CoshPlusCos { a } => {
                positive("a", a).map(|a| PeriodicFamily::CoshPlusCos { a })
            }
            PeriodicFamily::CoshMinusCos { a } => {
                positive("a", a).map(|a| PeriodicFamily::CoshMinusCos { a })
            }
            PeriodicFamily::LogCosSquared => Ok(self),
        }
    }

    fn eval(&self, x: f64) -> f64 {
        match *self {
            PeriodicFamily::CoshPlusCos { a } => 1.0 / (a.cosh() + x.cos()),
            PeriodicFamily::CoshMinusCos { a } => 1.0 / (a.cosh() - x.cos()),
            PeriodicFamily::LogCosSquared => {
                let c = x.cos();
                (c * c).ln()
            }
        }
    }

    fn magnitude(&self) -> Magnitude {
        match *self {
            // cosh a - 1 = 2 sinh^2(a/2), kept accurate for small a.
            PeriodicFamily::CoshPlusCos { a } | PeriodicFamily::CoshMinusCos { a } => {
                let s = (0.5 * a).sinh();
                Magnitude::Bounded(1.0 / (2.0 * s * s))
            }
            // log(cos^2) <= 0 with mean -2 log 2 over any period.
            PeriodicFamily::LogCosSquared => Magnitude::MeanAbs(2.0 * LN_2),
        }
    }
}

/// What is known about `|g|`, used to size oracle truncation windows.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Magnitude {
    /// `sup |g|`
    Bounded(f64),
    /// Mean of `|g|` over one period; `g` itself may be unbounded.
    MeanAbs(f64),
}

#[derive(Debug, Clone, PartialEq)]
enum PeriodicBody {
    Family(PeriodicFamily),
    Expr(ExprAst),
}

/// Construction input for [`make_periodic`].
#[derive(Debug, Clone)]
pub enum PeriodicSpec {
    Family(PeriodicFamily),
    Expr { ast: ExprAst, period: f64 },
}

/// The periodic factor `g`.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicFunction {
    body: PeriodicBody,
    period: f64,
    /// Declared period divided by the family's natural period.
    multiple: u32,
    singular_points: Vec<f64>,
    unverified_period: bool,
}

impl PeriodicFunction {
    pub fn cosh_plus_cos(a: f64) -> Result<Self, FunctionError> {
        Self::from_family(PeriodicFamily::CoshPlusCos { a })
    }

    pub fn cosh_minus_cos(a: f64) -> Result<Self, FunctionError> {
        Self::from_family(PeriodicFamily::CoshMinusCos { a })
    }

    pub fn log_cos_squared() -> Self {
        Self::from_family(PeriodicFamily::LogCosSquared).expect("parameter-free family")
    }

    pub fn from_family(family: PeriodicFamily) -> Result<Self, FunctionError> {
        let family = family.validate()?;
        let singular_points = match family {
            PeriodicFamily::LogCosSquared => vec![0.5 * PI, 1.5 * PI],
            _ => Vec::new(),
        };
        Ok(PeriodicFunction {
            body: PeriodicBody::Family(family),
            period: TWO_PI,
            multiple: 1,
            singular_points,
            unverified_period: false,
        })
    }

    /// Expression-defined `g` with a declared period. The declaration is
    /// spot-checked and flagged via [`Self::unverified_period`] if it fails.
    pub fn from_expr(ast: ExprAst, period: f64) -> Result<Self, FunctionError> {
        if !(period > 0.0 && period.is_finite()) {
            return Err(FunctionError::NonPositivePeriod(period));
        }
        let mut g = PeriodicFunction {
            body: PeriodicBody::Expr(ast),
            period,
            multiple: 1,
            singular_points: Vec::new(),
            unverified_period: false,
        };
        g.unverified_period = !g.period_holds();
        Ok(g)
    }

    /// The same pointwise map declared with period `multiple * T`.
    pub fn with_period_multiple(&self, multiple: u32) -> Self {
        let multiple = multiple.max(1);
        let base = self.period;
        let singular_points = (0..multiple)
            .flat_map(|j| {
                self.singular_points
                    .iter()
                    .map(move |s| s + j as f64 * base)
            })
            .collect();
        PeriodicFunction {
            body: self.body.clone(),
            period: base * multiple as f64,
            multiple: self.multiple * multiple,
            singular_points,
            unverified_period: self.unverified_period,
        }
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn family(&self) -> Option<PeriodicFamily> {
        match &self.body {
            PeriodicBody::Family(f) => Some(*f),
            PeriodicBody::Expr(_) => None,
        }
    }

    /// Ratio of the declared period to the family's own period.
    pub fn period_multiple(&self) -> u32 {
        self.multiple
    }

    /// Singularities within `[0, T)`.
    pub fn singular_points(&self) -> &[f64] {
        &self.singular_points
    }

    pub fn unverified_period(&self) -> bool {
        self.unverified_period
    }

    pub fn magnitude(&self) -> Option<Magnitude> {
        match &self.body {
            PeriodicBody::Family(f) => Some(f.magnitude()),
            PeriodicBody::Expr(_) => {
                let samples = 4096;
                let mut sup: f64 = 0.0;
                for j in 0..samples {
                    let v = self.eval(self.period * (j as f64 + 0.5) / samples as f64);
                    if !v.is_finite() {
                        return None;
                    }
                    sup = sup.max(v.abs());
                }
                // Sampling can miss a narrow peak; pad the estimate.
                Some(Magnitude::Bounded(1.25 * sup))
            }
        }
    }

    /// `g(x + T) = g(x)` at 100 deterministic quasi-random points.
    pub fn period_holds(&self) -> bool {
        const GOLDEN: f64 = 0.618_033_988_749_894_9;
        (1..=100).all(|j| {
            let u = (j as f64 * GOLDEN).fract();
            let x = (u - 0.5) * 20.0 * self.period;
            let (a, b) = (self.eval(x), self.eval(x + self.period));
            if a.is_finite() && b.is_finite() {
                (a - b).abs() <= 1e-12 * a.abs().max(1.0)
            } else {
                a == b || (a.is_nan() && b.is_nan())
            }
        })
    }

    pub fn describe(&self) -> String {
        let base = match &self.body {
            PeriodicBody::Family(PeriodicFamily::CoshPlusCos { a }) => {
                format!("cosh-plus-cos(a={a})")
            }
            PeriodicBody::Family(PeriodicFamily::CoshMinusCos { a }) => {
                format!("cosh-minus-cos(a={a})")
            }
            PeriodicBody::Family(PeriodicFamily::LogCosSquared) => "log-cos-squared".into(),
            PeriodicBody::Expr(ast) => format!("expr({})", ast.source()),
        };
        format!("{base} with period {}", self.period)
    }
}

impl RealMap for PeriodicFunction {
    fn eval(&self, x: f64) -> f64 {
        match &self.body {
            PeriodicBody::Family(f) => f.eval(x),
            PeriodicBody::Expr(ast) => ast.eval_at(x),
        }
    }
}

pub fn make_periodic(spec: PeriodicSpec) -> Result<PeriodicFunction, FunctionError> {
    match spec {
        PeriodicSpec::Family(family) => PeriodicFunction::from_family(family),
        PeriodicSpec::Expr { ast, period } => PeriodicFunction::from_expr(ast, period),
    }
}
