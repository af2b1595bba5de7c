use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Entrywise ℓp matrix norm with finite exponent p ≥ 1.
///
/// ℓ∞ is excluded: every generalized correlation matrix has unit diagonal,
/// so its max-norm is always 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormSpec {
    exponent: f64,
}

impl NormSpec {
    pub const TAXICAB: NormSpec = NormSpec { exponent: 1.0 };
    pub const FROBENIUS: NormSpec = NormSpec { exponent: 2.0 };

    pub fn new(exponent: f64) -> Result<Self> {
        if !exponent.is_finite() || exponent < 1.0 {
            return Err(Error::Config(format!(
                "norm exponent must be finite and at least 1, got {exponent}"
            )));
        }
        Ok(Self { exponent })
    }

    pub fn exponent(&self) -> f64 {
        self.exponent
    }

    /// |v|^p, exact for the two presets.
    #[inline]
    pub fn power(&self, v: f64) -> f64 {
        if self.exponent == 2.0 {
            v * v
        } else if self.exponent == 1.0 {
            v.abs()
        } else {
            v.abs().powf(self.exponent)
        }
    }

    /// Inverse of [`power`](Self::power) applied to an accumulated sum.
    #[inline]
    pub fn root(&self, s: f64) -> f64 {
        if self.exponent == 2.0 {
            s.sqrt()
        } else if self.exponent == 1.0 {
            s
        } else {
            s.powf(1.0 / self.exponent)
        }
    }

    /// Short label: `T`, `F`, or `lp<exponent>`.
    pub fn label(&self) -> String {
        if *self == Self::TAXICAB {
            "T".into()
        } else if *self == Self::FROBENIUS {
            "F".into()
        } else {
            format!("lp{}", self.exponent)
        }
    }
}

impl fmt::Display for NormSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if *self == Self::TAXICAB {
            write!(f, "taxicab")
        } else if *self == Self::FROBENIUS {
            write!(f, "frobenius")
        } else {
            write!(f, "lp:{}", self.exponent)
        }
    }
}

impl FromStr for NormSpec {
    type Err = Error;

    /// Accepts `taxicab`, `frobenius`, or `lp:<exponent>`.
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "taxicab" | "t" | "l1" => Ok(Self::TAXICAB),
            "frobenius" | "f" | "l2" => Ok(Self::FROBENIUS),
            other => {
                let v = other
                    .strip_prefix("lp:")
                    .ok_or_else(|| Error::Config(format!("unknown norm '{s}'")))?;
                let e: f64 = v
                    .parse()
                    .map_err(|_| Error::Config(format!("bad norm exponent '{v}'")))?;
                Self::new(e)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_presets_and_custom() {
        assert_eq!("taxicab".parse::<NormSpec>().unwrap(), NormSpec::TAXICAB);
        assert_eq!("Frobenius".parse::<NormSpec>().unwrap(), NormSpec::FROBENIUS);
        assert_eq!("lp:3".parse::<NormSpec>().unwrap().exponent(), 3.0);
        assert!("lp:0.5".parse::<NormSpec>().is_err());
        assert!("lp:inf".parse::<NormSpec>().is_err());
        assert!("max".parse::<NormSpec>().is_err());
    }

    #[test]
    fn display_round_trips() {
        for n in [NormSpec::TAXICAB, NormSpec::FROBENIUS, NormSpec::new(1.5).unwrap()] {
            assert_eq!(n.to_string().parse::<NormSpec>().unwrap(), n);
        }
    }
}
