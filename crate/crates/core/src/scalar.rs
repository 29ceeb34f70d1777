//! Coefficient rings shared by the series and symbolic layers.
//!
//! Two tiers: [`Complex64`] for the numeric dynamics and [`QComplex`]
//! (rational real and imaginary parts) for identities that must hold exactly.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Minimal commutative-ring interface used by [`crate::series`] and the
/// symbolic algebra. Division is only ever by integers or by units.
pub trait Scalar:
    Clone
    + fmt::Debug
    + PartialEq
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
    fn from_int(n: i64) -> Self;

    /// Multiplicative inverse, if this element is a unit.
    fn try_inverse(&self) -> Option<Self>;

    fn div_int(&self, d: i64) -> Self;

    fn scale_int(&self, k: i64) -> Self {
        self.clone() * Self::from_int(k)
    }
}

impl Scalar for Complex64 {
    fn from_int(n: i64) -> Self {
        Complex64::new(n as f64, 0.0)
    }

    fn try_inverse(&self) -> Option<Self> {
        if self.is_zero() {
            None
        } else {
            Some(self.inv())
        }
    }

    fn div_int(&self, d: i64) -> Self {
        self / d as f64
    }

    fn scale_int(&self, k: i64) -> Self {
        self * k as f64
    }
}

/// Exact complex number with arbitrary-precision rational parts.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct QComplex {
    pub re: BigRational,
    pub im: BigRational,
}

impl QComplex {
    pub fn new(re: BigRational, im: BigRational) -> Self {
        Self { re, im }
    }

    pub fn from_ratio(num: i64, den: i64) -> Self {
        Self {
            re: BigRational::new(BigInt::from(num), BigInt::from(den)),
            im: BigRational::zero(),
        }
    }

    pub fn i() -> Self {
        Self {
            re: BigRational::zero(),
            im: BigRational::one(),
        }
    }

    pub fn conj(&self) -> Self {
        Self {
            re: self.re.clone(),
            im: -self.im.clone(),
        }
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    pub fn to_complex64(&self) -> Complex64 {
        Complex64::new(
            self.re.to_f64().unwrap_or(f64::NAN),
            self.im.to_f64().unwrap_or(f64::NAN),
        )
    }

    /// Exact conversion of a finite double (every finite f64 is a dyadic rational).
    pub fn from_complex64(z: Complex64) -> Option<Self> {
        Some(Self {
            re: BigRational::from_float(z.re)?,
            im: BigRational::from_float(z.im)?,
        })
    }
}

impl Zero for QComplex {
    fn zero() -> Self {
        Self::default()
    }
    fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }
}

impl One for QComplex {
    fn one() -> Self {
        Self {
            re: BigRational::one(),
            im: BigRational::zero(),
        }
    }
}

impl Add for QComplex {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self {
            re: self.re + rhs.re,
            im: self.im + rhs.im,
        }
    }
}

impl AddAssign for QComplex {
    fn add_assign(&mut self, rhs: Self) {
        self.re += rhs.re;
        self.im += rhs.im;
    }
}

impl Sub for QComplex {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self {
            re: self.re - rhs.re,
            im: self.im - rhs.im,
        }
    }
}

impl Mul for QComplex {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        &self * &rhs
    }
}

impl Mul for &QComplex {
    type Output = QComplex;
    fn mul(self, rhs: &QComplex) -> QComplex {
        if self.im.is_zero() && rhs.im.is_zero() {
            return QComplex {
                re: &self.re * &rhs.re,
                im: BigRational::zero(),
            };
        }
        QComplex {
            re: &self.re * &rhs.re - &self.im * &rhs.im,
            im: &self.re * &rhs.im + &self.im * &rhs.re,
        }
    }
}

impl Neg for QComplex {
    type Output = Self;
    fn neg(self) -> Self {
        Self {
            re: -self.re,
            im: -self.im,
        }
    }
}

impl Scalar for QComplex {
    fn from_int(n: i64) -> Self {
        Self {
            re: BigRational::from_integer(BigInt::from(n)),
            im: BigRational::zero(),
        }
    }

    fn try_inverse(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        let norm = &self.re * &self.re + &self.im * &self.im;
        Some(Self {
            re: &self.re / &norm,
            im: -(&self.im / &norm),
        })
    }

    fn div_int(&self, d: i64) -> Self {
        let d = BigRational::from_integer(BigInt::from(d));
        Self {
            re: &self.re / &d,
            im: &self.im / &d,
        }
    }
}

impl From<i64> for QComplex {
    fn from(n: i64) -> Self {
        Self::from_int(n)
    }
}

impl fmt::Debug for QComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for QComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.re.is_zero(), self.im.is_zero()) {
            (_, true) => write!(f, "{}", self.re),
            (true, false) => {
                if self.im.is_one() {
                    write!(f, "i")
                } else if (-self.im.clone()).is_one() {
                    write!(f, "-i")
                } else {
                    write!(f, "{}i", self.im)
                }
            }
            (false, false) => {
                let sign = if self.im.is_negative() { '-' } else { '+' };
                write!(f, "({}{}{}i)", self.re, sign, self.im.abs())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_is_exact() {
        let z = QComplex::new(
            BigRational::new(3.into(), 2.into()),
            BigRational::new((-5).into(), 7.into()),
        );
        let w = z.try_inverse().unwrap();
        assert_eq!(z * w, QComplex::one());
        assert!(QComplex::zero().try_inverse().is_none());
    }

    #[test]
    fn display_forms() {
        assert_eq!(QComplex::from_ratio(-2, 3).to_string(), "-2/3");
        assert_eq!(QComplex::i().to_string(), "i");
        let z = QComplex::from_int(1) + QComplex::i().scale_int(-2);
        assert_eq!(z.to_string(), "(1-2i)");
    }

    #[test]
    fn float_round_trip() {
        let z = Complex64::new(0.1, -3.25);
        let q = QComplex::from_complex64(z).unwrap();
        assert_eq!(q.to_complex64(), z);
    }
}
