//! Exact rational helpers: parsing, canonical text, decimal rendering.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub type Rational = BigRational;

pub fn int(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn from_u64(v: u64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

/// Parses `"7"`, `"-2/3"`, or a plain decimal such as `"0.95"` exactly.
pub fn parse(s: &str) -> Option<Rational> {
    let s = s.trim();
    if s.is_empty() {
        return None;
    }
    if let Ok(v) = s.parse::<i64>() {
        return Some(int(v));
    }
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().ok()?;
        let d: BigInt = d.trim().parse().ok()?;
        if d.is_zero() {
            return None;
        }
        return Some(Rational::new(n, d));
    }
    parse_decimal(s)
}

fn parse_decimal(s: &str) -> Option<Rational> {
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(pos) => (&s[..pos], s[pos + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (neg, body) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (whole, frac) = body.split_once('.').unwrap_or((body, ""));
    if whole.is_empty() && frac.is_empty() {
        return None;
    }
    if !whole.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{whole}{frac}");
    let mut value = Rational::from_integer(digits.parse::<BigInt>().ok()?);
    let scale = exp - frac.len() as i32;
    let ten = Rational::from_integer(BigInt::from(10));
    if scale >= 0 {
        value *= num_traits::pow(ten, scale as usize);
    } else {
        value /= num_traits::pow(ten, (-scale) as usize);
    }
    Some(if neg { -value } else { value })
}

/// Canonical `num/den` text (plain integer when the denominator is one).
pub fn to_text(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// True when the reduced denominator has no prime factors other than 2 and 5.
pub fn is_terminating(r: &Rational) -> bool {
    let mut d = r.denom().clone();
    let two = BigInt::from(2);
    let five = BigInt::from(5);
    while d.is_even() {
        d /= &two;
    }
    while (&d % &five).is_zero() {
        d /= &five;
    }
    d.is_one()
}

/// Exact decimal rendering; `None` when the expansion does not terminate.
pub fn to_decimal(r: &Rational) -> Option<String> {
    if r.is_integer() {
        return Some(r.numer().to_string());
    }
    if !is_terminating(r) {
        return None;
    }
    let ten = BigInt::from(10);
    let mut places = 0usize;
    let mut scaled = r.abs();
    while !scaled.is_integer() {
        scaled *= Rational::from_integer(ten.clone());
        places += 1;
    }
    let digits = scaled.to_integer().to_string();
    let padded = format!("{digits:0>width$}", width = places + 1);
    let (whole, frac) = padded.split_at(padded.len() - places);
    let sign = if r.is_negative() { "-" } else { "" };
    Some(format!("{sign}{whole}.{frac}"))
}

/// Least common multiple of the denominators.
pub fn denominator_lcm<'a>(values: impl IntoIterator<Item = &'a Rational>) -> BigInt {
    values.into_iter().fold(BigInt::one(), |acc, v| acc.lcm(v.denom()))
}

/// Smallest integer greater than or equal to `r`.
pub fn ceil(r: &Rational) -> BigInt {
    r.ceil().to_integer()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fractions_and_decimals() {
        assert_eq!(parse("1/3"), Some(ratio(1, 3)));
        assert_eq!(parse("-4/6"), Some(ratio(-2, 3)));
        assert_eq!(parse("0.95"), Some(ratio(19, 20)));
        assert_eq!(parse("1.0"), Some(int(1)));
        assert_eq!(parse("-2"), Some(int(-2)));
        assert_eq!(parse("2.5e1"), Some(int(25)));
        assert_eq!(parse("1/0"), None);
        assert_eq!(parse("abc"), None);
        assert_eq!(parse("."), None);
    }

    #[test]
    fn decimal_rendering() {
        assert_eq!(to_decimal(&ratio(1, 4)).as_deref(), Some("0.25"));
        assert_eq!(to_decimal(&ratio(-13, 2)).as_deref(), Some("-6.5"));
        assert_eq!(to_decimal(&ratio(1, 80)).as_deref(), Some("0.0125"));
        assert_eq!(to_decimal(&int(7)).as_deref(), Some("7"));
        assert_eq!(to_decimal(&ratio(1, 3)), None);
    }

    #[test]
    fn lcm_of_denominators() {
        let vals = [ratio(1, 3), ratio(1, 6), int(2)];
        assert_eq!(denominator_lcm(vals.iter()), BigInt::from(6));
    }
}
