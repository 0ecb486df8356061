//! Exact scalar arithmetic: arbitrary-precision rationals plus the small
//! combinatorial helpers (factorials, binomial and multinomial coefficients)
//! used by divided powers and index expansions.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

/// Scalar type for every coefficient in the crate. Kept in lowest terms with a
/// positive denominator by construction.
pub type Rational = num_rational::BigRational;

/// Rational from an integer.
pub fn rat(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Rational `n/d`. Panics if `d == 0`.
pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// `k!` as a rational (convenient for divided-power scaling).
pub fn factorial(k: u32) -> Rational {
    let mut acc = BigInt::one();
    for i in 2..=k as u64 {
        acc *= i;
    }
    Rational::from_integer(acc)
}

/// Binomial coefficient `C(n, k)`; zero when `k > n`.
pub fn binomial(n: u32, k: u32) -> Rational {
    if k > n {
        return Rational::zero();
    }
    let k = k.min(n - k);
    let mut num = BigInt::one();
    let mut den = BigInt::one();
    for i in 0..k {
        num *= n as u64 - i as u64;
        den *= i as u64 + 1;
    }
    Rational::from_integer(num / den)
}

/// Multinomial coefficient `(|k|)! / (k_1! ... k_m!)`.
pub fn multinomial(parts: &[u32]) -> Rational {
    let total: u32 = parts.iter().sum();
    let mut acc = factorial(total);
    for &p in parts {
        acc /= factorial(p);
    }
    acc
}

/// Renders a rational in the `p/q` form used everywhere in reports
/// (`3`, `-1/2`, ...).
pub fn render_rational(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// True when the rational is negative (used by term renderers to fold signs).
pub fn is_negative(r: &Rational) -> bool {
    r.is_negative()
}
