//! Regularization schedules.
//!
//! Each schedule is `scale * f(inputs) * sqrt(log p / n)` for some
//! kind-specific `f`, with all universal constants folded into `scale`
//! (default 1). Logarithms are natural.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScheduleKind {
    /// `sqrt(alpha (1 - alpha) log p / n)`, used for the identity-design sweep.
    IdentityMcar,
    /// `sqrt((1 - alpha) log p / (alpha n))`, the variant motivated by the
    /// identity-covariance error bound.
    IdentityMcarBound,
    /// `(sigma_x sigma + sigma_x^2 sqrt(1 - alpha) R) sqrt(log p / n)`.
    SubGaussianMcar,
    /// `(sigma_x sigma + sigma_x^2 R) sqrt(log p / n)`.
    Mnar,
    /// `R / alpha^4 * sqrt(log p / n)`, used for the AR(1) sweep.
    Ar1,
    /// `(sigma_x sigma / alpha^2 + sigma_x^2 R / alpha^4) sqrt(log p / n)`.
    Ar1Theory,
    /// `lambda_max(Sigma_X) sqrt((1 - alpha) log p / n)`.
    Graphical,
    /// `sigma_x sqrt(log p / n)`; free of `sigma` and `R`.
    SqrtLassoPivotal,
    /// A fixed value.
    Manual(f64),
}

impl ScheduleKind {
    pub const NAMES: &'static [&'static str] = &[
        "identity-mcar",
        "identity-mcar-bound",
        "subgaussian-mcar",
        "mnar",
        "ar1",
        "ar1-theory",
        "graphical",
        "sqrt-pivotal",
    ];
}

impl FromStr for ScheduleKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "identity-mcar" => ScheduleKind::IdentityMcar,
            "identity-mcar-bound" => ScheduleKind::IdentityMcarBound,
            "subgaussian-mcar" => ScheduleKind::SubGaussianMcar,
            "mnar" => ScheduleKind::Mnar,
            "ar1" => ScheduleKind::Ar1,
            "ar1-theory" => ScheduleKind::Ar1Theory,
            "graphical" => ScheduleKind::Graphical,
            "sqrt-pivotal" => ScheduleKind::SqrtLassoPivotal,
            other => {
                return Err(Error::InvalidParameter(format!(
                    "unknown schedule '{other}' (expected one of {})",
                    ScheduleKind::NAMES.join(", ")
                )))
            }
        })
    }
}

impl fmt::Display for ScheduleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            ScheduleKind::IdentityMcar => "identity-mcar",
            ScheduleKind::IdentityMcarBound => "identity-mcar-bound",
            ScheduleKind::SubGaussianMcar => "subgaussian-mcar",
            ScheduleKind::Mnar => "mnar",
            ScheduleKind::Ar1 => "ar1",
            ScheduleKind::Ar1Theory => "ar1-theory",
            ScheduleKind::Graphical => "graphical",
            ScheduleKind::SqrtLassoPivotal => "sqrt-pivotal",
            ScheduleKind::Manual(v) => return write!(f, "manual({v})"),
        };
        f.write_str(name)
    }
}

/// Inputs a schedule may draw on. Only the fields a kind needs are checked.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ScheduleInputs {
    pub n: usize,
    pub p: usize,
    pub s: Option<usize>,
    pub alpha: Option<f64>,
    pub sigma: Option<f64>,
    pub sigma_x: Option<f64>,
    /// `R = ||beta0||_2`.
    pub radius: Option<f64>,
    /// Largest eigenvalue of the design covariance.
    pub sigma_max_eig: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LambdaSchedule {
    pub kind: ScheduleKind,
    pub inputs: ScheduleInputs,
    pub scale: f64,
}

impl LambdaSchedule {
    pub fn new(kind: ScheduleKind, inputs: ScheduleInputs) -> Self {
        Self {
            kind,
            inputs,
            scale: 1.0,
        }
    }

    pub fn with_scale(mut self, scale: f64) -> Self {
        self.scale = scale;
        self
    }

    pub fn value(&self) -> Result<f64> {
        lambda_value(self)
    }
}

fn need(v: Option<f64>, name: &'static str) -> Result<f64> {
    match v {
        Some(x) if x.is_finite() => Ok(x),
        Some(_) => Err(Error::InvalidParameter(format!("{name} must be finite"))),
        None => Err(Error::MissingInput(name)),
    }
}

fn need_alpha(v: Option<f64>) -> Result<f64> {
    let a = need(v, "alpha")?;
    if a > 0.0 && a <= 1.0 {
        Ok(a)
    } else {
        Err(Error::AlphaOutOfRange(a))
    }
}

/// Evaluate a schedule.
pub fn lambda_value(sched: &LambdaSchedule) -> Result<f64> {
    if !(sched.scale >= 0.0 && sched.scale.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "scale must be finite and nonnegative, got {}",
            sched.scale
        )));
    }
    if let ScheduleKind::Manual(v) = sched.kind {
        if !(v >= 0.0 && v.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "manual lambda must be >= 0, got {v}"
            )));
        }
        return Ok(sched.scale * v);
    }

    let inp = &sched.inputs;
    if inp.n < 2 || inp.p < 2 {
        return Err(Error::InvalidDimension(format!(
            "schedules need n, p >= 2 (got n={}, p={})",
            inp.n, inp.p
        )));
    }
    let rate = ((inp.p as f64).ln() / inp.n as f64).sqrt();

    let base = match sched.kind {
        ScheduleKind::IdentityMcar => {
            let a = need_alpha(inp.alpha)?;
            (a * (1.0 - a)).sqrt() * rate
        }
        ScheduleKind::IdentityMcarBound => {
            let a = need_alpha(inp.alpha)?;
            ((1.0 - a) / a).sqrt() * rate
        }
        ScheduleKind::SubGaussianMcar => {
            let a = need_alpha(inp.alpha)?;
            let sx = need(inp.sigma_x, "sigma_x")?;
            let sigma = need(inp.sigma, "sigma")?;
            let r = need(inp.radius, "radius")?;
            (sx * sigma + sx * sx * (1.0 - a).sqrt() * r) * rate
        }
        ScheduleKind::Mnar => {
            let sx = need(inp.sigma_x, "sigma_x")?;
            let sigma = need(inp.sigma, "sigma")?;
            let r = need(inp.radius, "radius")?;
            (sx * sigma + sx * sx * r) * rate
        }
        ScheduleKind::Ar1 => {
            let a = need_alpha(inp.alpha)?;
            let r = need(inp.radius, "radius")?;
            r / a.powi(4) * rate
        }
        ScheduleKind::Ar1Theory => {
            let a = need_alpha(inp.alpha)?;
            let sx = need(inp.sigma_x, "sigma_x")?;
            let sigma = need(inp.sigma, "sigma")?;
            let r = need(inp.radius, "radius")?;
            (sx * sigma / (a * a) + sx * sx * r / a.powi(4)) * rate
        }
        ScheduleKind::Graphical => {
            let a = need_alpha(inp.alpha)?;
            let top = need(inp.sigma_max_eig, "sigma_max_eig")?;
            top * ((1.0 - a).sqrt()) * rate
        }
        ScheduleKind::SqrtLassoPivotal => need(inp.sigma_x, "sigma_x")? * rate,
        ScheduleKind::Manual(_) => unreachable!(),
    };
    Ok(sched.scale * base)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn inputs(n: usize, p: usize) -> ScheduleInputs {
        ScheduleInputs {
            n,
            p,
            ..Default::default()
        }
    }

    #[test]
    fn identity_mcar_value() {
        let mut inp = inputs(1000, 1200);
        inp.alpha = Some(0.5);
        let v = lambda_value(&LambdaSchedule::new(ScheduleKind::IdentityMcar, inp)).unwrap();
        // sqrt(0.25 * ln(1200) / 1000)
        assert!((v - 0.042_101_2).abs() < 5e-7, "{v}");
    }

    #[test]
    fn identity_mcar_zero_at_full_observation() {
        let mut inp = inputs(100, 50);
        inp.alpha = Some(1.0);
        assert_eq!(
            lambda_value(&LambdaSchedule::new(ScheduleKind::IdentityMcar, inp)).unwrap(),
            0.0
        );
    }

    #[test]
    fn sqrt_pivotal_ignores_sigma_and_radius() {
        let mut a = inputs(400, 480);
        a.sigma_x = Some(1.0);
        let mut b = a;
        a.sigma = Some(0.1);
        a.radius = Some(1.0);
        b.sigma = Some(1.0);
        b.radius = Some(5.0);
        let la = lambda_value(&LambdaSchedule::new(ScheduleKind::SqrtLassoPivotal, a)).unwrap();
        let lb = lambda_value(&LambdaSchedule::new(ScheduleKind::SqrtLassoPivotal, b)).unwrap();
        assert_eq!(la.to_bits(), lb.to_bits());
    }

    #[test]
    fn missing_inputs_reported() {
        let mut inp = inputs(100, 100);
        inp.alpha = Some(0.8);
        assert_eq!(
            lambda_value(&LambdaSchedule::new(ScheduleKind::Ar1, inp)).unwrap_err(),
            Error::MissingInput("radius")
        );
        assert_eq!(
            lambda_value(&LambdaSchedule::new(ScheduleKind::Graphical, inp)).unwrap_err(),
            Error::MissingInput("sigma_max_eig")
        );
        assert!(lambda_value(&LambdaSchedule::new(ScheduleKind::IdentityMcar, inputs(1, 5))).is_err());
    }

    #[test]
    fn scale_and_manual() {
        let mut inp = inputs(100, 100);
        inp.alpha = Some(0.5);
        inp.radius = Some(2.0);
        let one = lambda_value(&LambdaSchedule::new(ScheduleKind::Ar1, inp)).unwrap();
        let three = lambda_value(&LambdaSchedule::new(ScheduleKind::Ar1, inp).with_scale(3.0)).unwrap();
        assert!((three - 3.0 * one).abs() < 1e-15);
        assert!((one - 2.0 * 16.0 * (100f64.ln() / 100.0).sqrt()).abs() < 1e-12);
        let manual = LambdaSchedule::new(ScheduleKind::Manual(0.3), ScheduleInputs::default());
        assert_eq!(lambda_value(&manual).unwrap(), 0.3);
    }

    #[test]
    fn names_round_trip() {
        for name in ScheduleKind::NAMES {
            assert_eq!(&name.parse::<ScheduleKind>().unwrap().to_string(), name);
        }
        assert!("nope".parse::<ScheduleKind>().is_err());
    }
}
