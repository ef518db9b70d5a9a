//! Exact rationals and their canonical text form.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;

pub type Rational = BigRational;

pub fn ratio(num: impl Into<BigInt>, den: impl Into<BigInt>) -> Rational {
    Rational::new(num.into(), den.into())
}

pub fn int(n: impl Into<BigInt>) -> Rational {
    Rational::from_integer(n.into())
}

/// Always `num/den`, with the sign on the numerator.
pub fn format_rational(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// `num/den` or a bare integer when the denominator is 1.
pub fn format_compact(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format_rational(r)
    }
}

pub fn pow_int(base: u64, exp: i64) -> Rational {
    let b = BigInt::from(base);
    if exp >= 0 {
        Rational::from_integer(num_traits::pow(b, exp as usize))
    } else {
        Rational::new(BigInt::one(), num_traits::pow(b, (-exp) as usize))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formats() {
        assert_eq!(format_rational(&ratio(2, 4)), "1/2");
        assert_eq!(format_rational(&int(3)), "3/1");
        assert_eq!(format_rational(&ratio(1, -3)), "-1/3");
        assert_eq!(format_compact(&int(-3)), "-3");
        assert_eq!(pow_int(3, -2), ratio(1, 9));
    }
}
