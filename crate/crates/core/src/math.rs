//! Exact arithmetic helpers shared by every module: big rationals, binomial
//! coefficients, lexicographic subset enumeration and rational text I/O.

use itertools::Itertools;
use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Arbitrary-precision rational used for every load and time value.
pub type Rational = num_rational::BigRational;

pub fn int(v: impl Into<BigInt>) -> Rational {
    Rational::from_integer(v.into())
}

pub fn frac(num: impl Into<BigInt>, den: impl Into<BigInt>) -> Rational {
    Rational::new(num.into(), den.into())
}

/// `C(n, k)`, zero whenever `k < 0`, `n < 0` or `k > n`.
pub fn binom(n: i64, k: i64) -> BigInt {
    if n < 0 || k < 0 || k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc *= n - i;
        acc /= i + 1;
    }
    acc
}

/// `C(n, k)` for small arguments where the caller needs a machine integer
/// (batch counts, symbol counts). Panics on overflow, which cannot happen at
/// the node counts this crate plans for.
pub fn binom_usize(n: usize, k: usize) -> usize {
    binom(n as i64, k as i64).to_usize().expect("binomial coefficient exceeds usize")
}

/// All `k`-subsets of `items` in lexicographic order (items must be sorted).
pub fn subsets<T: Clone>(items: &[T], k: usize) -> Vec<Vec<T>> {
    items.iter().cloned().combinations(k).collect()
}

pub fn min_rational<'a>(a: &'a Rational, b: &'a Rational) -> &'a Rational {
    if b < a {
        b
    } else {
        a
    }
}

pub fn max_rational<'a>(a: &'a Rational, b: &'a Rational) -> &'a Rational {
    if b > a {
        b
    } else {
        a
    }
}

pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Parses `"p/q"`, an integer, or a plain decimal such as `"0.125"` or
/// `"-1.5e-3"` into an exact rational.
pub fn parse_rational(text: &str) -> Result<Rational> {
    let t = text.trim();
    if t.is_empty() {
        return Err(Error::Parse("empty rational".into()));
    }
    if let Some((p, q)) = t.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| Error::Parse(format!("bad numerator in {t:?}")))?;
        let q: BigInt = q.trim().parse().map_err(|_| Error::Parse(format!("bad denominator in {t:?}")))?;
        if q.is_zero() {
            return Err(Error::Parse(format!("zero denominator in {t:?}")));
        }
        return Ok(Rational::new(p, q));
    }
    parse_decimal(t)
}

fn parse_decimal(t: &str) -> Result<Rational> {
    let bad = || Error::Parse(format!("not a rational or decimal: {t:?}"));
    let (mantissa, exp) = match t.find(['e', 'E']) {
        Some(i) => (&t[..i], t[i + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (t, 0),
    };
    let (neg, body) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (whole, fraction) = body.split_once('.').unwrap_or((body, ""));
    if whole.is_empty() && fraction.is_empty() {
        return Err(bad());
    }
    if !whole.chars().chain(fraction.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits = format!("{whole}{fraction}");
    let mut value = Rational::from_integer(digits.parse::<BigInt>().map_err(|_| bad())?);
    let scale = exp - fraction.len() as i32;
    let ten = Rational::from_integer(BigInt::from(10));
    if scale >= 0 {
        value *= num_traits::pow(ten, scale as usize);
    } else {
        value /= num_traits::pow(ten, (-scale) as usize);
    }
    Ok(if neg { -value } else { value })
}

/// Reduced `"p/q"` form (or `"p"` for integers).
pub fn fmt_exact(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Decimal rendering with 12 significant digits, trailing zeros trimmed.
pub fn fmt_decimal(r: &Rational) -> String {
    if r.is_zero() {
        return "0".into();
    }
    let x = to_f64(r);
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = (11 - magnitude).max(0) as usize;
    let mut s = format!("{x:.decimals$}");
    if s.contains('.') {
        while s.ends_with('0') {
            s.pop();
        }
        if s.ends_with('.') {
            s.pop();
        }
    }
    s
}

/// `"p/q (decimal)"` as used in human-readable reports.
pub fn fmt_both(r: &Rational) -> String {
    format!("{} ({})", fmt_exact(r), fmt_decimal(r))
}

/// True when `r` is a nonnegative integer; returns it.
pub fn as_usize(r: &Rational) -> Option<usize> {
    if r.is_integer() && !r.is_negative() {
        r.to_integer().to_usize()
    } else {
        None
    }
}

pub fn divides(d: usize, n: usize) -> bool {
    d != 0 && n.is_multiple_of(d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomials() {
        assert_eq!(binom(5, 2), BigInt::from(10));
        assert_eq!(binom(5, 6), BigInt::zero());
        assert_eq!(binom(5, -1), BigInt::zero());
        assert_eq!(binom(0, 0), BigInt::one());
        assert_eq!(binom(30, 15), BigInt::from(155_117_520u64));
    }

    #[test]
    fn subsets_are_lexicographic() {
        let s = subsets(&[1, 2, 3, 4], 2);
        assert_eq!(s, vec![vec![1, 2], vec![1, 3], vec![1, 4], vec![2, 3], vec![2, 4], vec![3, 4]]);
        assert_eq!(subsets(&[1, 2], 0), vec![Vec::<i32>::new()]);
    }

    #[test]
    fn parse_forms() {
        assert_eq!(parse_rational("3/6").unwrap(), frac(1, 2));
        assert_eq!(parse_rational("2").unwrap(), int(2));
        assert_eq!(parse_rational("0.125").unwrap(), frac(1, 8));
        assert_eq!(parse_rational("-1.5e-3").unwrap(), frac(-3, 2000));
        assert_eq!(parse_rational("2.5E2").unwrap(), int(250));
        assert_eq!(parse_rational(".5").unwrap(), frac(1, 2));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("abc").is_err());
        assert!(parse_rational("").is_err());
    }

    #[test]
    fn formatting() {
        assert_eq!(fmt_exact(&frac(4, 6)), "2/3");
        assert_eq!(fmt_exact(&int(5)), "5");
        assert_eq!(fmt_decimal(&frac(2, 3)), "0.666666666667");
        assert_eq!(fmt_decimal(&frac(17, 4)), "4.25");
        assert_eq!(fmt_decimal(&int(0)), "0");
        assert_eq!(fmt_both(&frac(8, 3)), "8/3 (2.66666666667)");
    }
}
