//! Named summands available from the command line.

use crate::summation::Summand;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BuiltinError {
    #[error(
        "unknown summand `{0}` (known: cosexp:a,b  polyexp:p,b  rational-tail:p,b  geometric:b)"
    )]
    Unknown(String),
    #[error("bad parameters for `{name}`: {reason}")]
    BadParams { name: String, reason: String },
}

/// A parsed builtin summand spec such as `cosexp:1,1.6`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Builtin {
    /// `cos(a x) e^{-b x}`
    CosExp { a: f64, b: f64 },
    /// `x^p e^{-b x}`
    PolyExp { p: f64, b: f64 },
    /// `e^{-b x} / (1 + x)^p`
    RationalTail { p: f64, b: f64 },
    /// `e^{-b x}`
    Geometric { b: f64 },
}

impl Builtin {
    pub fn parse(spec: &str) -> Result<Self, BuiltinError> {
        let (name, args) = spec.trim().split_once(':').unwrap_or((spec.trim(), ""));
        let bad = |reason: String| BuiltinError::BadParams {
            name: name.to_string(),
            reason,
        };
        let params = if args.is_empty() {
            Vec::new()
        } else {
            args.split(',')
                .map(|a| {
                    a.trim()
                        .parse::<f64>()
                        .map_err(|_| bad(format!("`{a}` is not a number")))
                })
                .collect::<Result<Vec<_>, _>>()?
        };
        if params.iter().any(|v| !v.is_finite()) {
            return Err(bad("parameters must be finite".into()));
        }
        let want = |n: usize| {
            if params.len() == n {
                Ok(())
            } else {
                Err(bad(format!(
                    "expected {n} parameters, got {}",
                    params.len()
                )))
            }
        };
        let positive_decay = |b: f64| {
            if b > 0.0 {
                Ok(b)
            } else {
                Err(bad(format!("decay b must be positive, got {b}")))
            }
        };

        let parsed = match name {
            "cosexp" => {
                want(2)?;
                Builtin::CosExp {
                    a: params[0],
                    b: positive_decay(params[1])?,
                }
            }
            "polyexp" => {
                want(2)?;
                if params[0] < 0.0 {
                    return Err(bad(format!(
                        "power p must be non-negative, got {}",
                        params[0]
                    )));
                }
                Builtin::PolyExp {
                    p: params[0],
                    b: positive_decay(params[1])?,
                }
            }
            "rational-tail" => {
                want(2)?;
                Builtin::RationalTail {
                    p: params[0],
                    b: positive_decay(params[1])?,
                }
            }
            "geometric" if params.is_empty() => Builtin::Geometric { b: 1.0 },
            "geometric" => {
                want(1)?;
                Builtin::Geometric {
                    b: positive_decay(params[0])?,
                }
            }
            _ => return Err(BuiltinError::Unknown(name.to_string())),
        };
        Ok(parsed)
    }

    pub fn decay(&self) -> f64 {
        match *self {
            Builtin::CosExp { b, .. }
            | Builtin::PolyExp { b, .. }
            | Builtin::RationalTail { b, .. }
            | Builtin::Geometric { b } => b,
        }
    }

    pub fn zero_limit(&self) -> f64 {
        match *self {
            Builtin::PolyExp { p, .. } if p > 0.0 => 0.0,
            _ => 1.0,
        }
    }

    pub fn summand(&self) -> Summand {
        let s = match *self {
            Builtin::CosExp { a, b } => Summand::full(move |x| (a * x).cos() * (-b * x).exp()),
            Builtin::PolyExp { p, b } => Summand::full(move |x| x.powf(p) * (-b * x).exp()),
            Builtin::RationalTail { p, b } => {
                Summand::full(move |x| (-b * x).exp() / (1.0 + x).powf(p))
            }
            Builtin::Geometric { b } => Summand::full(move |x| (-b * x).exp()),
        };
        s.with_decay_hint(self.decay())
            .with_zero_limit(self.zero_limit())
    }
}
