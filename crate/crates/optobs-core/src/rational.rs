//! Exact rational arithmetic and the textual number grammar shared by the
//! model file format, the command line and the SMT-LIB renderer.

use alloc::string::{String, ToString};
use core::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Exact rational number used for all model data.
pub type Rat = BigRational;

/// Error raised when a rational string does not match the grammar
/// `integer | integer "/" positive-integer | decimal`.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid rational literal `{input}`")]
pub struct ParseRatError {
    pub input: String,
}

/// Parses a rational literal: `3`, `-7`, `2/3`, `1.25`.
pub fn parse_rat(s: &str) -> Result<Rat, ParseRatError> {
    let err = || ParseRatError {
        input: s.to_string(),
    };
    let s = s.trim();
    if s.is_empty() {
        return Err(err());
    }
    if let Some((num, den)) = s.split_once('/') {
        let num: BigInt = num.trim().parse().map_err(|_| err())?;
        let den: BigInt = den.trim().parse().map_err(|_| err())?;
        if den <= BigInt::zero() {
            return Err(err());
        }
        return Ok(Rat::new(num, den));
    }
    if let Some((int_part, frac_part)) = s.split_once('.') {
        if frac_part.is_empty() || !frac_part.bytes().all(|b| b.is_ascii_digit()) {
            return Err(err());
        }
        let negative = int_part.starts_with('-');
        let int: BigInt = if int_part == "-" || int_part.is_empty() {
            BigInt::zero()
        } else {
            int_part.parse().map_err(|_| err())?
        };
        let scale = BigInt::from(10u32).pow(frac_part.len() as u32);
        let frac: BigInt = frac_part.parse().map_err(|_| err())?;
        let mut value = Rat::new(int.abs() * &scale + frac, scale);
        if negative || int.is_negative() {
            value = -value;
        }
        return Ok(value);
    }
    let int: BigInt = s.parse().map_err(|_| err())?;
    Ok(Rat::from_integer(int))
}

/// Renders a rational in the file-format grammar: `n` when integral,
/// `a/b` otherwise.
pub fn format_rat(r: &Rat) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        alloc::format!("{}/{}", r.numer(), r.denom())
    }
}

/// Converts an `f64` to the exact rational it represents.
///
/// Every finite `f64` is a dyadic rational, so this is lossless.
pub fn rat_from_f64(x: f64) -> Option<Rat> {
    Rat::from_float(x)
}

/// Nearest `f64` to the rational.
pub fn rat_to_f64(r: &Rat) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// `0` as a rational.
pub fn zero() -> Rat {
    Rat::zero()
}

/// `1` as a rational.
pub fn one() -> Rat {
    Rat::one()
}

/// `n` as a rational.
pub fn int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

/// `a/b` as a rational. Panics if `b == 0`.
pub fn ratio(a: i64, b: i64) -> Rat {
    Rat::new(BigInt::from(a), BigInt::from(b))
}

/// Renders a nonnegative rational as an SMT-LIB real term, e.g. `(/ 2 3)`.
/// Negative values are wrapped as `(- ...)`.
pub struct SmtLibReal<'a>(pub &'a Rat);

impl fmt::Display for SmtLibReal<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let r = self.0;
        if r.is_negative() {
            let pos = -r.clone();
            return write!(f, "(- {})", SmtLibReal(&pos));
        }
        if r.is_integer() {
            write!(f, "{}", r.numer())
        } else {
            write!(f, "(/ {} {})", r.numer(), r.denom())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_integers_and_quotients() {
        assert_eq!(parse_rat("3").unwrap(), int(3));
        assert_eq!(parse_rat("-7").unwrap(), int(-7));
        assert_eq!(parse_rat("2/3").unwrap(), ratio(2, 3));
        assert_eq!(parse_rat("13248/575").unwrap(), ratio(13248, 575));
    }

    #[test]
    fn parses_decimals_exactly() {
        assert_eq!(parse_rat("1.25").unwrap(), ratio(5, 4));
        assert_eq!(parse_rat("0.5").unwrap(), ratio(1, 2));
        assert_eq!(parse_rat("-0.5").unwrap(), ratio(-1, 2));
        assert_eq!(parse_rat(".5").unwrap(), ratio(1, 2));
    }

    #[test]
    fn rejects_garbage() {
        assert!(parse_rat("").is_err());
        assert!(parse_rat("a/b").is_err());
        assert!(parse_rat("1/0").is_err());
        assert!(parse_rat("1/-2").is_err());
        assert!(parse_rat("1.2.3").is_err());
    }

    #[test]
    fn format_round_trips() {
        for s in ["0", "5", "-5", "2/3", "125/2"] {
            let r = parse_rat(s).unwrap();
            assert_eq!(parse_rat(&format_rat(&r)).unwrap(), r);
        }
    }

    #[test]
    fn smtlib_rendering() {
        assert_eq!(SmtLibReal(&int(4)).to_string(), "4");
        assert_eq!(SmtLibReal(&ratio(2, 3)).to_string(), "(/ 2 3)");
        assert_eq!(SmtLibReal(&ratio(-2, 3)).to_string(), "(- (/ 2 3))");
    }
}
