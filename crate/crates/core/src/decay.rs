//! Transport-cost weighting functions shared by the Huff, Competing
//! Destinations, Hansen, and 2SFCA analyses.
//!
//! Three families are supported:
//!
//! * power:       `w(t) = t^-lambda`
//! * exponential: `w(t) = exp(-lambda * t)`
//! * logistic:    `w(t) = 1 / (1 + exp(a + b * t))`
//!
//! Specs serialize as `power:2.0`, `exponential:0.1`, `logistic:-5.0,0.5`
//! (kind, colon, comma-separated parameters).

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Decay family without parameters; selects what a calibration estimates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecayKind {
    Power,
    Exponential,
    Logistic,
}

impl DecayKind {
    /// Number of free parameters the family carries.
    pub fn param_count(&self) -> usize {
        match self {
            DecayKind::Power | DecayKind::Exponential => 1,
            DecayKind::Logistic => 2,
        }
    }
}

impl fmt::Display for DecayKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DecayKind::Power => write!(f, "power"),
            DecayKind::Exponential => write!(f, "exponential"),
            DecayKind::Logistic => write!(f, "logistic"),
        }
    }
}

impl FromStr for DecayKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "power" => Ok(DecayKind::Power),
            "exponential" => Ok(DecayKind::Exponential),
            "logistic" => Ok(DecayKind::Logistic),
            other => Err(Error::InvalidValue(format!(
                "unknown decay family {other:?} (expected power, exponential, or logistic)"
            ))),
        }
    }
}

/// A parameterized transport-cost weighting function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DecaySpec {
    Power { lambda: f64 },
    Exponential { lambda: f64 },
    Logistic { a: f64, b: f64 },
}

impl DecaySpec {
    /// `t^-lambda`. Lambda zero is accepted as the degenerate flat weight;
    /// negative values are rejected.
    pub fn power(lambda: f64) -> Result<Self> {
        if !lambda.is_finite() || lambda < 0.0 {
            return Err(Error::InvalidValue(format!(
                "power decay needs lambda >= 0, got {lambda}"
            )));
        }
        Ok(DecaySpec::Power { lambda })
    }

    /// `exp(-lambda * t)`. Lambda zero is accepted as the degenerate flat
    /// weight; negative values are rejected.
    pub fn exponential(lambda: f64) -> Result<Self> {
        if !lambda.is_finite() || lambda < 0.0 {
            return Err(Error::InvalidValue(format!(
                "exponential decay needs lambda >= 0, got {lambda}"
            )));
        }
        Ok(DecaySpec::Exponential { lambda })
    }

    /// `1 / (1 + exp(a + b * t))` with b > 0 so the weight decreases in t.
    pub fn logistic(a: f64, b: f64) -> Result<Self> {
        if !a.is_finite() {
            return Err(Error::InvalidValue(format!(
                "logistic decay needs finite a, got {a}"
            )));
        }
        if !b.is_finite() || b <= 0.0 {
            return Err(Error::InvalidValue(format!(
                "logistic decay needs b > 0, got {b}"
            )));
        }
        Ok(DecaySpec::Logistic { a, b })
    }

    pub fn kind(&self) -> DecayKind {
        match self {
            DecaySpec::Power { .. } => DecayKind::Power,
            DecaySpec::Exponential { .. } => DecayKind::Exponential,
            DecaySpec::Logistic { .. } => DecayKind::Logistic,
        }
    }

    /// Weight for a transport cost `t >= 0`.
    ///
    /// The power family is singular at t = 0; callers keep costs above a
    /// positive floor (see the interaction matrix cost floor).
    pub fn eval(&self, t: f64) -> Result<f64> {
        if t.is_nan() || t < 0.0 {
            return Err(Error::Domain(format!(
                "transport cost must be non-negative, got {t}"
            )));
        }
        match *self {
            DecaySpec::Power { lambda } => {
                if t == 0.0 {
                    Err(Error::Domain(
                        "power decay is singular at t = 0; apply a cost floor".into(),
                    ))
                } else {
                    Ok(t.powf(-lambda))
                }
            }
            DecaySpec::Exponential { lambda } => Ok((-lambda * t).exp()),
            DecaySpec::Logistic { a, b } => Ok(1.0 / (1.0 + (a + b * t).exp())),
        }
    }
}

impl fmt::Display for DecaySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DecaySpec::Power { lambda } => write!(f, "power:{lambda}"),
            DecaySpec::Exponential { lambda } => write!(f, "exponential:{lambda}"),
            DecaySpec::Logistic { a, b } => write!(f, "logistic:{a},{b}"),
        }
    }
}

impl FromStr for DecaySpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (kind, params) = s.split_once(':').ok_or_else(|| {
            Error::InvalidValue(format!(
                "decay spec {s:?} must be kind:params, e.g. power:2.0 or logistic:-5.0,0.5"
            ))
        })?;
        let values: Vec<f64> = params
            .split(',')
            .map(|p| {
                p.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::InvalidValue(format!("unparsable decay parameter {p:?}")))
            })
            .collect::<Result<_>>()?;
        let kind: DecayKind = kind.parse()?;
        if values.len() != kind.param_count() {
            return Err(Error::InvalidValue(format!(
                "decay family {kind} expects {} parameter(s), got {}",
                kind.param_count(),
                values.len()
            )));
        }
        match kind {
            DecayKind::Power => DecaySpec::power(values[0]),
            DecayKind::Exponential => DecaySpec::exponential(values[0]),
            DecayKind::Logistic => DecaySpec::logistic(values[0], values[1]),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn power_weight_at_ten_with_lambda_two() {
        let spec = DecaySpec::power(2.0).unwrap();
        assert!((spec.eval(10.0).unwrap() - 0.01).abs() < 1e-15);
    }

    #[test]
    fn exponential_weight_is_one_at_zero_cost() {
        let spec = DecaySpec::exponential(0.1).unwrap();
        assert_eq!(spec.eval(0.0).unwrap(), 1.0);
    }

    #[test]
    fn logistic_weight_is_half_where_exponent_vanishes() {
        // a + b*t = -5 + 0.5*10 = 0, so the weight is 1/(1+1).
        let spec = DecaySpec::logistic(-5.0, 0.5).unwrap();
        assert!((spec.eval(10.0).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn power_decay_errors_at_zero_cost() {
        let spec = DecaySpec::power(1.5).unwrap();
        assert!(matches!(spec.eval(0.0), Err(Error::Domain(_))));
    }

    #[test]
    fn constructors_reject_invalid_parameters() {
        assert!(DecaySpec::power(-1.0).is_err());
        assert!(DecaySpec::exponential(f64::NAN).is_err());
        assert!(DecaySpec::logistic(0.0, 0.0).is_err());
        assert!(DecaySpec::logistic(0.0, -0.5).is_err());
    }

    #[test]
    fn weights_vanish_for_extreme_costs() {
        let exp = DecaySpec::exponential(0.1).unwrap();
        let logi = DecaySpec::logistic(0.0, 0.5).unwrap();
        assert!(exp.eval(1e6).unwrap() < 1e-12);
        assert!(logi.eval(1e6).unwrap() < 1e-12);
    }

    #[test]
    fn specs_round_trip_through_strings() {
        for text in ["power:2", "exponential:0.1", "logistic:-5,0.5"] {
            let spec: DecaySpec = text.parse().unwrap();
            let back: DecaySpec = spec.to_string().parse().unwrap();
            assert_eq!(spec, back);
        }
        assert!("power".parse::<DecaySpec>().is_err());
        assert!("power:1,2".parse::<DecaySpec>().is_err());
        assert!("gauss:1".parse::<DecaySpec>().is_err());
    }
}
