//! Scalar abstractions.
//!
//! Estimation, auditing and diagnostics are written against [`Real`], which
//! is implemented for `f32` and `f64`. The linear-feasibility solver used by
//! synthesis is written against [`LpScalar`], implemented for `f64` and for
//! exact [`BigRational`] arithmetic.

use std::fmt::{Debug, Display};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Float, FromPrimitive, Num, One, Signed, ToPrimitive, Zero};

/// Floating point parameter type: `f32` or `f64`.
pub trait Real: Float + FromPrimitive + Debug + Display + Default + Send + Sync + 'static {
    /// Lossy conversion from an `f64` literal.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Neumaier-compensated sum; the result depends only on the iteration order.
pub fn compensated_sum<T: Real>(terms: impl IntoIterator<Item = T>) -> T {
    let mut sum = T::zero();
    let mut comp = T::zero();
    for x in terms {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            comp = comp + ((sum - t) + x);
        } else {
            comp = comp + ((x - t) + sum);
        }
        sum = t;
    }
    sum + comp
}

/// Ordered field used by the simplex solver.
///
/// `pivot_tol` is zero for exact types; entries with magnitude at or below it
/// are treated as zero.
pub trait LpScalar:
    Clone + PartialOrd + Num + Signed + Debug + Display + FromStr + Send + Sync + 'static
{
    fn pivot_tol() -> Self;

    fn from_i64(n: i64) -> Self;

    fn to_f64(&self) -> f64;

    /// Scales nonnegative `values` to the smallest proportional nonnegative
    /// integers. `None` when the values are not representable that way.
    fn integer_weights(values: &[Self]) -> Option<Vec<u64>>;

    /// Parses either `p/q` or a plain decimal.
    fn parse_lenient(s: &str) -> Option<Self>;

    fn is_zero_tol(&self) -> bool {
        self.abs() <= Self::pivot_tol()
    }
}

impl LpScalar for f64 {
    fn pivot_tol() -> Self {
        1e-11
    }

    fn from_i64(n: i64) -> Self {
        n as f64
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn integer_weights(values: &[Self]) -> Option<Vec<u64>> {
        let exact: Option<Vec<BigRational>> = values
            .iter()
            .map(|v| {
                let r = num_rational::Ratio::<i64>::approximate_float(*v)?;
                Some(BigRational::new(
                    BigInt::from(*r.numer()),
                    BigInt::from(*r.denom()),
                ))
            })
            .collect();
        BigRational::integer_weights(&exact?)
    }

    fn parse_lenient(s: &str) -> Option<Self> {
        let s = s.trim();
        if let Some((p, q)) = s.split_once('/') {
            let p: f64 = p.trim().parse().ok()?;
            let q: f64 = q.trim().parse().ok()?;
            return Some(p / q);
        }
        s.parse().ok()
    }
}

impl LpScalar for BigRational {
    fn pivot_tol() -> Self {
        BigRational::zero()
    }

    fn from_i64(n: i64) -> Self {
        BigRational::from_integer(BigInt::from(n))
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn integer_weights(values: &[Self]) -> Option<Vec<u64>> {
        if values.iter().any(|v| v.is_negative()) {
            return None;
        }
        let lcm = values
            .iter()
            .fold(BigInt::one(), |acc, v| acc.lcm(v.denom()));
        let scaled: Vec<BigInt> = values
            .iter()
            .map(|v| (v * BigRational::from_integer(lcm.clone())).to_integer())
            .collect();
        let gcd = scaled.iter().fold(BigInt::zero(), |acc, v| acc.gcd(v));
        if gcd.is_zero() {
            return Some(vec![0; values.len()]);
        }
        scaled.iter().map(|v| (v / &gcd).to_u64()).collect()
    }

    fn parse_lenient(s: &str) -> Option<Self> {
        let s = s.trim();
        if s.contains('/') {
            return BigRational::from_str(s).ok();
        }
        parse_decimal_big(s)
    }
}

/// Exact parse of a dot-separated decimal (optional exponent) into a rational.
pub fn parse_decimal_big(s: &str) -> Option<BigRational> {
    let s = s.trim();
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (neg, mantissa) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part
        .chars()
        .chain(frac_part.chars())
        .all(|c| c.is_ascii_digit())
    {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    let mut numer = BigInt::from_str(if digits.is_empty() { "0" } else { &digits }).ok()?;
    if neg {
        numer = -numer;
    }
    let scale = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10u32);
    Some(if scale >= 0 {
        BigRational::from_integer(numer * num_traits::pow(ten, scale as usize))
    } else {
        BigRational::new(numer, num_traits::pow(ten, (-scale) as usize))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_sum_recovers_cancellation() {
        let s = compensated_sum([1e16, 1.0, -1e16]);
        assert_eq!(s, 1.0);
    }

    #[test]
    fn decimal_parse_is_exact() {
        let r = parse_decimal_big("0.2").unwrap();
        assert_eq!(r, BigRational::new(1.into(), 5.into()));
        assert_eq!(
            parse_decimal_big("-1.5e2").unwrap(),
            BigRational::from_integer((-150).into())
        );
        assert!(parse_decimal_big("1,5").is_none());
        assert!(parse_decimal_big("").is_none());
    }

    #[test]
    fn integer_weights_scale_to_smallest_integers() {
        let v = vec![
            BigRational::new(1.into(), 3.into()),
            BigRational::new(2.into(), 3.into()),
            BigRational::zero(),
        ];
        assert_eq!(BigRational::integer_weights(&v), Some(vec![1, 2, 0]));
        assert_eq!(f64::integer_weights(&[0.5, 0.25]), Some(vec![2, 1]));
    }
}
