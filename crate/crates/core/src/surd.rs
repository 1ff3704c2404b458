//! Exact arithmetic in `Q(√d)` for square-free-ish `d`, enough to verify the
//! polynomial side conditions of the example families without rounding.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// `a + b·√d` with rational `a`, `b`. For `d < 0` this is the complex number
/// `a + i·b·√|d|`, and the field conjugate is the complex conjugate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuadSurd {
    pub a: BigRational,
    pub b: BigRational,
    pub d: i64,
}

fn is_square(d: i64) -> bool {
    if d < 0 {
        return false;
    }
    let r = (d as f64).sqrt().round() as i64;
    (r - 1..=r + 1).any(|s| s >= 0 && s * s == d)
}

pub fn rational(s: &str) -> Result<BigRational> {
    BigRational::from_str(s.trim()).map_err(|_| Error::InvalidInput(format!("not a rational number: {s:?}")))
}

fn ratio(n: i64, m: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(m))
}

impl QuadSurd {
    pub fn new(a: BigRational, b: BigRational, d: i64) -> Result<Self> {
        if d == 0 || is_square(d) {
            return Err(Error::InvalidInput(format!("radicand {d} must not be a perfect square")));
        }
        Ok(QuadSurd { a, b, d })
    }

    /// Parses rational strings such as `"2/3"`.
    pub fn parse(a: &str, b: &str, d: i64) -> Result<Self> {
        Self::new(rational(a)?, rational(b)?, d)
    }

    /// `n/m + (p/q)√d` from small integers.
    pub fn from_ints((n, m): (i64, i64), (p, q): (i64, i64), d: i64) -> Result<Self> {
        Self::new(ratio(n, m), ratio(p, q), d)
    }

    pub fn rational(&self, a: BigRational) -> Self {
        QuadSurd {
            a,
            b: BigRational::zero(),
            d: self.d,
        }
    }

    pub fn one_like(&self) -> Self {
        self.rational(BigRational::one())
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    pub fn conj(&self) -> Self {
        QuadSurd {
            a: self.a.clone(),
            b: -self.b.clone(),
            d: self.d,
        }
    }

    /// `a² − d·b²`, the field norm.
    pub fn norm(&self) -> BigRational {
        &self.a * &self.a - BigRational::from_integer(self.d.into()) * &self.b * &self.b
    }

    pub fn recip(&self) -> Result<Self> {
        let n = self.norm();
        if n.is_zero() {
            return Err(Error::InvalidInput("inverse of zero".into()));
        }
        Ok(QuadSurd {
            a: &self.a / &n,
            b: -&self.b / &n,
            d: self.d,
        })
    }

    pub fn pow(&self, k: i32) -> Result<Self> {
        let base = if k < 0 { self.recip()? } else { self.clone() };
        let mut out = self.one_like();
        for _ in 0..k.unsigned_abs() {
            out = &out * &base;
        }
        Ok(out)
    }

    /// Real part when read as a complex number.
    pub fn real_part(&self) -> Self {
        if self.d < 0 {
            self.rational(self.a.clone())
        } else {
            self.clone()
        }
    }

    pub fn is_real(&self) -> bool {
        self.d > 0 || self.b.is_zero()
    }

    pub fn to_complex(&self) -> Complex64 {
        let a = self.a.to_f64().unwrap_or(f64::NAN);
        let b = self.b.to_f64().unwrap_or(f64::NAN);
        let r = (self.d.unsigned_abs() as f64).sqrt();
        if self.d < 0 {
            Complex64::new(a, b * r)
        } else {
            Complex64::new(a + b * r, 0.0)
        }
    }

    fn same_field(&self, other: &Self) {
        assert_eq!(self.d, other.d, "mixed radicands");
    }
}

impl Add for &QuadSurd {
    type Output = QuadSurd;
    fn add(self, o: &QuadSurd) -> QuadSurd {
        self.same_field(o);
        QuadSurd {
            a: &self.a + &o.a,
            b: &self.b + &o.b,
            d: self.d,
        }
    }
}

impl Sub for &QuadSurd {
    type Output = QuadSurd;
    fn sub(self, o: &QuadSurd) -> QuadSurd {
        self.same_field(o);
        QuadSurd {
            a: &self.a - &o.a,
            b: &self.b - &o.b,
            d: self.d,
        }
    }
}

impl Mul for &QuadSurd {
    type Output = QuadSurd;
    fn mul(self, o: &QuadSurd) -> QuadSurd {
        self.same_field(o);
        let d = BigRational::from_integer(self.d.into());
        QuadSurd {
            a: &self.a * &o.a + d * &self.b * &o.b,
            b: &self.a * &o.b + &self.b * &o.a,
            d: self.d,
        }
    }
}

impl Neg for &QuadSurd {
    type Output = QuadSurd;
    fn neg(self) -> QuadSurd {
        QuadSurd {
            a: -self.a.clone(),
            b: -self.b.clone(),
            d: self.d,
        }
    }
}

impl fmt::Display for QuadSurd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.b.is_zero() {
            return write!(f, "{}", self.a);
        }
        let sign = if self.b.is_negative() { '-' } else { '+' };
        write!(f, "{} {} {}*sqrt({})", self.a, sign, self.b.abs(), self.d)
    }
}
