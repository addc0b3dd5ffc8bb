//! Division-rate descriptors.
//!
//! Textual forms accepted by [`RateSpec::parse`]:
//!
//! * `const:<v>`: `B(x) = v`
//! * `jump:<v1>:<v2>:<x_jump>`: `v1` below `x_jump`, `v2` from `x_jump` on
//! * `gauss-bump:<base>:<amp>:<center>:<width>`: `base + amp * exp(-width * (x - center)^2)`
//! * anything else is read as the path of a `x,value` CSV file

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::grid::{Grid, GridFunction};

#[derive(Clone, Debug, PartialEq)]
pub enum RateSpec {
    Constant(f64),
    Jump { low: f64, high: f64, at: f64 },
    GaussBump { base: f64, amp: f64, center: f64, width: f64 },
    File(PathBuf),
}

impl RateSpec {
    /// The three rates used throughout the experiments: `B = 1`, a jump from
    /// 1 to 5, and `1 + exp(-8 (x - 2)^2)`.
    pub fn builtin_trio() -> [RateSpec; 3] {
        [
            RateSpec::Constant(1.0),
            RateSpec::Jump { low: 1.0, high: 5.0, at: 2.0 },
            RateSpec::GaussBump { base: 1.0, amp: 1.0, center: 2.0, width: 8.0 },
        ]
    }

    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        let parts: Vec<&str> = s.split(':').collect();
        let nums = |expected: usize| -> Result<Vec<f64>> {
            if parts.len() != expected + 1 {
                return Err(bad(s, format!("expected {expected} numeric fields")));
            }
            parts[1..]
                .iter()
                .map(|p| p.parse::<f64>().map_err(|e| bad(s, e.to_string())))
                .collect()
        };
        let spec = match parts[0] {
            "const" => RateSpec::Constant(nums(1)?[0]),
            "jump" => {
                let v = nums(3)?;
                RateSpec::Jump { low: v[0], high: v[1], at: v[2] }
            }
            "gauss-bump" => {
                let v = nums(4)?;
                RateSpec::GaussBump { base: v[0], amp: v[1], center: v[2], width: v[3] }
            }
            _ => return Ok(RateSpec::File(PathBuf::from(s))),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            RateSpec::Constant(v) => v.is_finite() && v >= 0.0,
            RateSpec::Jump { low, high, at } => {
                low.is_finite() && high.is_finite() && at.is_finite() && low >= 0.0 && high >= 0.0
            }
            RateSpec::GaussBump { base, amp, center, width } => {
                [base, amp, center, width].iter().all(|v| v.is_finite())
                    && base >= 0.0
                    && base + amp.min(0.0) >= 0.0
                    && width >= 0.0
            }
            RateSpec::File(_) => true,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!("rate `{self}` is negative or not finite")))
        }
    }

    /// Pointwise value; `None` for file-backed rates.
    pub fn eval(&self, x: f64) -> Option<f64> {
        match *self {
            RateSpec::Constant(v) => Some(v),
            RateSpec::Jump { low, high, at } => Some(if x < at { low } else { high }),
            RateSpec::GaussBump { base, amp, center, width } => {
                Some(base + amp * (-width * (x - center).powi(2)).exp())
            }
            RateSpec::File(_) => None,
        }
    }

    pub fn sample(&self, grid: &Grid) -> Result<GridFunction> {
        match self {
            RateSpec::File(path) => GridFunction::read_csv(path)?.resample(grid),
            _ => Ok(GridFunction::from_fn(*grid, |x| self.eval(x).unwrap())),
        }
    }
}

fn bad(s: &str, detail: String) -> Error {
    Error::Parse { what: "rate spec", detail: format!("`{s}`: {detail}") }
}

impl FromStr for RateSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        RateSpec::parse(s)
    }
}

impl fmt::Display for RateSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RateSpec::Constant(v) => write!(f, "const:{v}"),
            RateSpec::Jump { low, high, at } => write!(f, "jump:{low}:{high}:{at}"),
            RateSpec::GaussBump { base, amp, center, width } => {
                write!(f, "gauss-bump:{base}:{amp}:{center}:{width}")
            }
            RateSpec::File(p) => write!(f, "{}", p.display()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_builtins() {
        assert_eq!(RateSpec::parse("const:1").unwrap(), RateSpec::Constant(1.0));
        assert_eq!(
            RateSpec::parse("jump:1:5:2").unwrap(),
            RateSpec::Jump { low: 1.0, high: 5.0, at: 2.0 }
        );
        let g = RateSpec::parse("gauss-bump:1:1:2:8").unwrap();
        assert!((g.eval(2.0).unwrap() - 2.0).abs() < 1e-15);
        assert!((g.eval(2.5).unwrap() - (1.0 + (-2.0f64).exp())).abs() < 1e-15);
        assert!(matches!(RateSpec::parse("some/file.csv").unwrap(), RateSpec::File(_)));
    }

    #[test]
    fn parse_errors() {
        assert!(RateSpec::parse("const:").is_err());
        assert!(RateSpec::parse("const:-1").is_err());
        assert!(RateSpec::parse("jump:1:5").is_err());
        assert!(RateSpec::parse("gauss-bump:1:x:2:8").is_err());
    }

    #[test]
    fn display_round_trips() {
        for spec in RateSpec::builtin_trio() {
            assert_eq!(RateSpec::parse(&spec.to_string()).unwrap(), spec);
        }
    }

    #[test]
    fn jump_is_right_continuous() {
        let j = RateSpec::Jump { low: 1.0, high: 5.0, at: 2.0 };
        assert_eq!(j.eval(1.999), Some(1.0));
        assert_eq!(j.eval(2.0), Some(5.0));
    }
}
