//! Named initial-condition families: `cosine:a`, `bump:a`, `expcos`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Field, TorusGrid};

/// Power of the concentrated bump `(1 + cos x)^m`.
pub const BUMP_POWER: i32 = 8;

/// Mean of `((1 + cos x)/2)^8` over a period, `C(16, 8) / 4^8`.
pub const BUMP_MEAN_FRACTION: f64 = 12870.0 / 65536.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum InitialCondition {
    /// `1 + a cos x`.
    Cosine(f64),
    /// `a ((1 + cos x)/2)^8`: peak `a` at `x = 0`, mean `a·C(16,8)/4^8`.
    Bump(f64),
    /// `exp(cos x)`.
    ExpCos,
}

impl InitialCondition {
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            InitialCondition::Cosine(a) => 1.0 + a * x.cos(),
            InitialCondition::Bump(a) => a * (0.5 + 0.5 * x.cos()).powi(BUMP_POWER),
            InitialCondition::ExpCos => x.cos().exp(),
        }
    }

    pub fn sample(&self, grid: TorusGrid) -> Result<Field> {
        Field::from_fn(grid, |x| self.eval(x))
    }
}

impl fmt::Display for InitialCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InitialCondition::Cosine(a) => write!(f, "cosine:{a}"),
            InitialCondition::Bump(a) => write!(f, "bump:{a}"),
            InitialCondition::ExpCos => f.write_str("expcos"),
        }
    }
}

impl FromStr for InitialCondition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InitialCondition(s.to_string());
        let (name, arg) = match s.split_once(':') {
            Some((n, a)) => (n.trim(), Some(a.trim())),
            None => (s.trim(), None),
        };
        let amp = |arg: Option<&str>| -> Result<f64> {
            let v: f64 = arg.ok_or_else(bad)?.parse().map_err(|_| bad())?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(bad())
            }
        };
        match name.to_ascii_lowercase().as_str() {
            "cosine" => Ok(InitialCondition::Cosine(amp(arg)?)),
            "bump" => Ok(InitialCondition::Bump(amp(arg)?)),
            "expcos" if arg.is_none() => Ok(InitialCondition::ExpCos),
            _ => Err(bad()),
        }
    }
}

impl TryFrom<String> for InitialCondition {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<InitialCondition> for String {
    fn from(ic: InitialCondition) -> String {
        ic.to_string()
    }
}
