//! Exact rational scalars and the small combinatorial helpers built on them.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Arbitrary-precision rational; `num-rational` keeps it reduced with a
/// positive denominator.
pub type ExactScalar = BigRational;

pub fn int(v: i64) -> ExactScalar {
    BigRational::from_integer(BigInt::from(v))
}

/// `n / d`, reduced. Panics on `d == 0`.
pub fn ratio(n: i64, d: i64) -> ExactScalar {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseScalarError {
    pub input: String,
    pub reason: &'static str,
}

impl fmt::Display for ParseScalarError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "cannot parse {:?} as an exact rational: {}", self.input, self.reason)
    }
}

impl std::error::Error for ParseScalarError {}

/// Parses a fraction (`"3/10"`, `"7"`) or a finite decimal (`"0.3"`,
/// `"-1.25"`) into an exact rational. No floating point is involved.
pub fn parse_exact(s: &str) -> Result<ExactScalar, ParseScalarError> {
    let err = |reason| ParseScalarError { input: s.to_string(), reason };
    let t = s.trim();
    if t.is_empty() {
        return Err(err("empty string"));
    }
    if let Some((num, den)) = t.split_once('/') {
        let n = parse_integer(num.trim()).ok_or_else(|| err("bad numerator"))?;
        let d = parse_integer(den.trim()).ok_or_else(|| err("bad denominator"))?;
        if d.is_zero() {
            return Err(err("zero denominator"));
        }
        return Ok(BigRational::new(n, d));
    }
    if let Some((whole, frac)) = t.split_once('.') {
        let (negative, whole) = match whole.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, whole.strip_prefix('+').unwrap_or(whole)),
        };
        if (whole.is_empty() && frac.is_empty())
            || !whole.bytes().all(|b| b.is_ascii_digit())
            || !frac.bytes().all(|b| b.is_ascii_digit())
        {
            return Err(err("bad decimal"));
        }
        let digits = format!("{whole}{frac}");
        let mantissa: BigInt = digits.parse().map_err(|_| err("bad decimal"))?;
        let scale = num_traits::pow(BigInt::from(10), frac.len());
        let value = BigRational::new(mantissa, scale);
        return Ok(if negative { -value } else { value });
    }
    parse_integer(t).map(BigRational::from_integer).ok_or_else(|| err("not a number"))
}

fn parse_integer(s: &str) -> Option<BigInt> {
    let body = s.strip_prefix(['-', '+']).unwrap_or(s);
    if body.is_empty() || !body.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    s.parse().ok()
}

/// Canonical text form: `"p"` for integers, `"p/q"` otherwise.
pub fn format_exact(x: &ExactScalar) -> String {
    x.to_string()
}

/// Nearest `f64`, for display only.
pub fn to_f64(x: &ExactScalar) -> f64 {
    x.to_f64().unwrap_or_else(|| {
        // Out of range for the direct conversion: go through the integer parts.
        let n = x.numer().to_f64().unwrap_or(f64::INFINITY);
        let d = x.denom().to_f64().unwrap_or(f64::INFINITY);
        if x.is_negative() {
            -(n.abs() / d)
        } else {
            n / d
        }
    })
}

/// Binomial coefficient with `C(n, k) = 0` for `k > n`.
pub fn choose(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * u128::from(n - i) / u128::from(i + 1);
    }
    u64::try_from(acc).expect("binomial coefficient overflows u64")
}

pub fn factorial(n: u64) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, i| acc * BigInt::from(i))
}

/// `base^exp` for non-negative integer exponents (`0^0 = 1`).
pub fn pow(base: &ExactScalar, exp: u64) -> ExactScalar {
    num_traits::pow(base.clone(), exp as usize)
}

/// Multinomial coefficient `(Σ v)! / Π v_i!`.
pub fn multinomial(parts: &[i64]) -> BigInt {
    let total: i64 = parts.iter().sum();
    let mut acc = factorial(total as u64);
    for &p in parts {
        acc /= factorial(p as u64);
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_the_three_forms() {
        assert_eq!(parse_exact("7").unwrap(), int(7));
        assert_eq!(parse_exact("3/10").unwrap(), ratio(3, 10));
        assert_eq!(parse_exact("0.3").unwrap(), ratio(3, 10));
        assert_eq!(parse_exact("-1.25").unwrap(), ratio(-5, 4));
        assert_eq!(parse_exact(" 6/4 ").unwrap(), ratio(3, 2));
        assert_eq!(parse_exact(".5").unwrap(), ratio(1, 2));
        assert_eq!(parse_exact("2.").unwrap(), int(2));
    }

    #[test]
    fn rejects_garbage() {
        for bad in ["", "1/0", "abc", "1.2.3", "1e-3", "-", ".", "1/x"] {
            assert!(parse_exact(bad).is_err(), "{bad:?} should not parse");
        }
    }

    #[test]
    fn canonical_form_is_reduced() {
        let x = ratio(6, -4);
        assert_eq!(format_exact(&x), "-3/2");
        assert!(x.denom().is_positive());
        assert_eq!(ratio(1, 3) + ratio(1, 6), ratio(1, 2));
    }

    #[test]
    fn combinatorics() {
        assert_eq!(choose(5, 2), 10);
        assert_eq!(choose(2, 3), 0);
        assert_eq!(choose(0, 0), 1);
        assert_eq!(multinomial(&[1, 1]), BigInt::from(2));
        assert_eq!(multinomial(&[2, 1, 0]), BigInt::from(3));
        assert_eq!(pow(&int(0), 0), int(1));
    }

    #[test]
    fn float_rendering() {
        assert_eq!(to_f64(&ratio(1, 4)), 0.25);
    }
}
