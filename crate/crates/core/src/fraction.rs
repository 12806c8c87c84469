//! Exact non-negative rationals.
//!
//! Subset sizes such as `ceil(15/16 * n)` must not go through floating point:
//! `0.35 * 20` is `7.000000000000001` in `f64`, which would round a threshold
//! of 7 up to 8.

use core::cmp::Ordering;
use core::fmt;
use core::str::FromStr;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FractionError {
    #[error("denominator must be positive")]
    ZeroDenominator,
    #[error("cannot parse `{0}` as a fraction")]
    Parse(alloc::string::String),
    #[error("fraction overflows 64-bit numerator or denominator")]
    Overflow,
}

/// A reduced fraction `num / den` with `den > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Fraction {
    num: u64,
    den: u64,
}

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

impl Fraction {
    pub const ZERO: Fraction = Fraction { num: 0, den: 1 };
    pub const ONE: Fraction = Fraction { num: 1, den: 1 };

    pub fn new(num: u64, den: u64) -> Result<Self, FractionError> {
        if den == 0 {
            return Err(FractionError::ZeroDenominator);
        }
        Self::reduce(num as u128, den as u128)
    }

    fn reduce(num: u128, den: u128) -> Result<Self, FractionError> {
        let g = gcd(num, den).max(1);
        let (num, den) = (num / g, den / g);
        if num > u64::MAX as u128 || den > u64::MAX as u128 {
            return Err(FractionError::Overflow);
        }
        Ok(Fraction {
            num: num as u64,
            den: den as u64,
        })
    }

    pub const fn integer(value: u64) -> Self {
        Fraction { num: value, den: 1 }
    }

    pub fn numer(&self) -> u64 {
        self.num
    }

    pub fn denom(&self) -> u64 {
        self.den
    }

    pub fn to_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }

    pub fn is_zero(&self) -> bool {
        self.num == 0
    }

    /// `ceil(self * n)`, computed exactly.
    pub fn ceil_mul(self, n: usize) -> usize {
        let prod = self.num as u128 * n as u128;
        prod.div_ceil(self.den as u128) as usize
    }

    /// `floor(self * n)`, computed exactly.
    pub fn floor_mul(self, n: usize) -> usize {
        (self.num as u128 * n as u128 / self.den as u128) as usize
    }

    pub fn checked_mul(self, other: Fraction) -> Result<Fraction, FractionError> {
        Self::reduce(
            self.num as u128 * other.num as u128,
            self.den as u128 * other.den as u128,
        )
    }

    pub fn checked_add(self, other: Fraction) -> Result<Fraction, FractionError> {
        Self::reduce(
            self.num as u128 * other.den as u128 + other.num as u128 * self.den as u128,
            self.den as u128 * other.den as u128,
        )
    }

    /// `self / k` for a positive integer `k`.
    pub fn checked_div_int(self, k: u64) -> Result<Fraction, FractionError> {
        if k == 0 {
            return Err(FractionError::ZeroDenominator);
        }
        Self::reduce(self.num as u128, self.den as u128 * k as u128)
    }
}

impl PartialOrd for Fraction {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Fraction {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.num as u128 * other.den as u128).cmp(&(other.num as u128 * self.den as u128))
    }
}

impl fmt::Display for Fraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

/// Accepts `p/q`, plain integers, and finite decimals such as `0.35`.
impl FromStr for Fraction {
    type Err = FractionError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let bad = || FractionError::Parse(alloc::string::String::from(s));
        if let Some((p, q)) = s.split_once('/') {
            let p: u64 = p.trim().parse().map_err(|_| bad())?;
            let q: u64 = q.trim().parse().map_err(|_| bad())?;
            return Fraction::new(p, q);
        }
        let (int_part, frac_part) = match s.split_once('.') {
            Some((i, f)) => (i, f),
            None => (s, ""),
        };
        if int_part.is_empty() && frac_part.is_empty() {
            return Err(bad());
        }
        let all_digits = |t: &str| t.bytes().all(|b| b.is_ascii_digit());
        if !all_digits(int_part) || !all_digits(frac_part) || frac_part.len() > 18 {
            return Err(bad());
        }
        let int_val: u64 = if int_part.is_empty() {
            0
        } else {
            int_part.parse().map_err(|_| bad())?
        };
        let scale = 10u128.pow(frac_part.len() as u32);
        let frac_val: u128 = if frac_part.is_empty() {
            0
        } else {
            frac_part.parse().map_err(|_| bad())?
        };
        Self::reduce(int_val as u128 * scale + frac_val, scale)
    }
}
