//! Truncated formal power series and Laurent windows.
//!
//! A [`TruncatedTaylor`] of order `N` stores `a_0..a_N`; coefficients past
//! `N` are unknown, not zero. Every binary operation therefore returns the
//! smaller of the two orders.
//!
//! A [`LaurentWindow`] stores powers `z^-M..z^M` together with the range of
//! powers that are actually trustworthy, and whether the series is known to
//! vanish beyond the window on either side.

use std::ops::{Add, Mul, Neg, Sub};

use num_traits::Zero;

use crate::error::SeriesError;
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq)]
pub struct TruncatedTaylor<T> {
    coeffs: Vec<T>,
}

impl<T: Scalar> TruncatedTaylor<T> {
    /// Builds a series from `a_0..a_N`. An empty slice is the zero series of order 0.
    pub fn new(coeffs: Vec<T>) -> Self {
        if coeffs.is_empty() {
            return Self {
                coeffs: vec![T::zero()],
            };
        }
        Self { coeffs }
    }

    pub fn zero(order: usize) -> Self {
        Self {
            coeffs: vec![T::zero(); order + 1],
        }
    }

    pub fn constant(value: T, order: usize) -> Self {
        let mut s = Self::zero(order);
        s.coeffs[0] = value;
        s
    }

    /// The series `z` known to the given order.
    pub fn identity(order: usize) -> Self {
        let mut s = Self::zero(order);
        if order >= 1 {
            s.coeffs[1] = T::one();
        }
        s
    }

    /// `z^k` known to the given order.
    pub fn monomial(k: usize, value: T, order: usize) -> Self {
        let mut s = Self::zero(order);
        if k <= order {
            s.coeffs[k] = value;
        }
        s
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<T> {
        self.coeffs
    }

    /// Coefficient of `z^k`, or `None` past the truncation order.
    pub fn coeff(&self, k: usize) -> Option<&T> {
        self.coeffs.get(k)
    }

    /// Drops known coefficients above `order`. Never raises the order.
    pub fn truncate(&self, order: usize) -> Self {
        let keep = order.min(self.order());
        Self {
            coeffs: self.coeffs[..=keep].to_vec(),
        }
    }

    pub fn scale(&self, s: &T) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|c| c.clone() * s.clone()).collect(),
        }
    }

    /// Multiplies by `z^k`, which shifts the known range up by `k`.
    pub fn shift_up(&self, k: usize) -> Self {
        let mut coeffs = vec![T::zero(); k];
        coeffs.extend(self.coeffs.iter().cloned());
        Self { coeffs }
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.order().min(other.order());
        Self {
            coeffs: (0..=n)
                .map(|k| self.coeffs[k].clone() + other.coeffs[k].clone())
                .collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        let n = self.order().min(other.order());
        Self {
            coeffs: (0..=n)
                .map(|k| self.coeffs[k].clone() - other.coeffs[k].clone())
                .collect(),
        }
    }

    /// Cauchy product truncated at the smaller order.
    pub fn mul(&self, other: &Self) -> Self {
        let n = self.order().min(other.order());
        let mut out = vec![T::zero(); n + 1];
        for (i, a) in self.coeffs.iter().take(n + 1).enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().take(n + 1 - i).enumerate() {
                if b.is_zero() {
                    continue;
                }
                out[i + j] = out[i + j].clone() + a.clone() * b.clone();
            }
        }
        Self { coeffs: out }
    }

    /// `self(other(z))` by Horner's scheme. `other` must vanish at the origin.
    pub fn compose(&self, other: &Self) -> Result<Self, SeriesError> {
        if !other.coeffs[0].is_zero() {
            return Err(SeriesError::NonZeroConstant);
        }
        let n = self.order().min(other.order());
        let inner = other.truncate(n);
        let mut acc = Self::constant(self.coeffs[n].clone(), n);
        for k in (0..n).rev() {
            acc = acc.mul(&inner);
            acc.coeffs[0] = acc.coeffs[0].clone() + self.coeffs[k].clone();
        }
        Ok(acc)
    }

    /// Multiplicative inverse, solved triangularly from `a_0^{-1}`.
    pub fn reciprocal(&self) -> Result<Self, SeriesError> {
        let inv0 = self.coeffs[0]
            .try_inverse()
            .ok_or(SeriesError::NotInvertible)?;
        let n = self.order();
        let mut out: Vec<T> = Vec::with_capacity(n + 1);
        out.push(inv0.clone());
        for k in 1..=n {
            let mut acc = T::zero();
            for j in 1..=k {
                let a = &self.coeffs[j];
                if a.is_zero() {
                    continue;
                }
                acc = acc + a.clone() * out[k - j].clone();
            }
            out.push(-(acc * inv0.clone()));
        }
        Ok(Self { coeffs: out })
    }

    /// Term-wise derivative. The order drops by one; an order-0 input gives
    /// the zero series of order 0.
    pub fn derivative(&self) -> Self {
        if self.order() == 0 {
            return Self::zero(0);
        }
        Self {
            coeffs: self
                .coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| c.scale_int(k as i64))
                .collect(),
        }
    }
}

impl TruncatedTaylor<num_complex::Complex64> {
    pub fn eval(&self, z: num_complex::Complex64) -> num_complex::Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(num_complex::Complex64::zero(), |acc, c| acc * z + c)
    }
}

impl<T: Scalar> Add for &TruncatedTaylor<T> {
    type Output = TruncatedTaylor<T>;
    fn add(self, rhs: Self) -> TruncatedTaylor<T> {
        TruncatedTaylor::add(self, rhs)
    }
}

impl<T: Scalar> Sub for &TruncatedTaylor<T> {
    type Output = TruncatedTaylor<T>;
    fn sub(self, rhs: Self) -> TruncatedTaylor<T> {
        TruncatedTaylor::sub(self, rhs)
    }
}

impl<T: Scalar> Mul for &TruncatedTaylor<T> {
    type Output = TruncatedTaylor<T>;
    fn mul(self, rhs: Self) -> TruncatedTaylor<T> {
        TruncatedTaylor::mul(self, rhs)
    }
}

impl<T: Scalar> Neg for &TruncatedTaylor<T> {
    type Output = TruncatedTaylor<T>;
    fn neg(self) -> TruncatedTaylor<T> {
        TruncatedTaylor {
            coeffs: self.coeffs.iter().map(|c| -c.clone()).collect(),
        }
    }
}

/// Finite window of a Laurent series, `z^-M..z^M`, with explicit validity.
#[derive(Clone, Debug, PartialEq)]
pub struct LaurentWindow<T> {
    window: usize,
    coeffs: Vec<T>,
    /// Inclusive range of trustworthy powers; empty when `lo > hi`.
    valid_lo: i64,
    valid_hi: i64,
    /// The true series vanishes for every power below `-M`.
    zero_below: bool,
    /// The true series vanishes for every power above `M`.
    zero_above: bool,
}

impl<T: Scalar> LaurentWindow<T> {
    /// An exact Laurent polynomial supported in `z^-M..z^M`.
    /// `coeffs[i]` is the coefficient of `z^(i - M)`.
    pub fn new(window: usize, coeffs: Vec<T>) -> Result<Self, SeriesError> {
        if coeffs.len() != 2 * window + 1 {
            return Err(SeriesError::WindowLength {
                expected: 2 * window + 1,
                got: coeffs.len(),
            });
        }
        let m = window as i64;
        Ok(Self {
            window,
            coeffs,
            valid_lo: -m,
            valid_hi: m,
            zero_below: true,
            zero_above: true,
        })
    }

    pub fn zero(window: usize) -> Self {
        Self::new(window, vec![T::zero(); 2 * window + 1]).expect("length matches")
    }

    /// Builds a window from `(power, value)` pairs.
    pub fn from_terms(window: usize, terms: impl IntoIterator<Item = (i64, T)>) -> Self {
        let mut w = Self::zero(window);
        for (k, v) in terms {
            w.set(k, v);
        }
        w
    }

    /// Embeds a truncated Taylor series: negative powers are exactly zero and
    /// powers above its order are unknown.
    pub fn from_taylor(series: &TruncatedTaylor<T>) -> Self {
        let n = series.order();
        let mut w = Self::zero(n);
        for (k, c) in series.coeffs().iter().enumerate() {
            w.set(k as i64, c.clone());
        }
        w.zero_above = false;
        w
    }

    /// Restricts the trustworthy range; powers outside become unknown.
    pub fn with_validity(mut self, lo: i64, hi: i64) -> Self {
        self.valid_lo = lo.max(-(self.window as i64));
        self.valid_hi = hi.min(self.window as i64);
        if self.valid_lo > -(self.window as i64) {
            self.zero_below = false;
        }
        if self.valid_hi < self.window as i64 {
            self.zero_above = false;
        }
        self
    }

    /// Declares the series unknown above the window.
    pub fn with_unknown_above(mut self) -> Self {
        self.zero_above = false;
        self
    }

    /// Declares the series unknown below the window.
    pub fn with_unknown_below(mut self) -> Self {
        self.zero_below = false;
        self
    }

    pub fn window(&self) -> usize {
        self.window
    }

    pub fn validity(&self) -> Option<(i64, i64)> {
        (self.valid_lo <= self.valid_hi).then_some((self.valid_lo, self.valid_hi))
    }

    pub fn zero_tails(&self) -> (bool, bool) {
        (self.zero_below, self.zero_above)
    }

    fn index(&self, k: i64) -> Option<usize> {
        let m = self.window as i64;
        (-m..=m).contains(&k).then(|| (k + m) as usize)
    }

    fn set(&mut self, k: i64, v: T) {
        let i = self
            .index(k)
            .unwrap_or_else(|| panic!("power {k} outside window {}", self.window));
        self.coeffs[i] = v;
    }

    /// Stored coefficient at `z^k` (trusted or not). `None` outside the window.
    pub fn coeff(&self, k: i64) -> Option<&T> {
        self.index(k).map(|i| &self.coeffs[i])
    }

    /// Coefficient at `z^k` only if it lies in the validity range.
    pub fn trusted(&self, k: i64) -> Option<&T> {
        if k < self.valid_lo || k > self.valid_hi {
            return None;
        }
        self.coeff(k)
    }

    fn known(&self, k: i64) -> bool {
        let m = self.window as i64;
        if k < -m {
            self.zero_below
        } else if k > m {
            self.zero_above
        } else {
            (self.valid_lo..=self.valid_hi).contains(&k)
        }
    }

    fn known_zero(&self, k: i64) -> bool {
        self.known(k) && self.coeff(k).is_none_or(|c| c.is_zero())
    }

    /// Convolution product. A result power is trusted only when every
    /// contributing pair is either fully known or contains a known zero.
    pub fn mul(&self, other: &Self) -> Self {
        let (ma, mb) = (self.window as i64, other.window as i64);
        let m = ma + mb;
        let mut coeffs = vec![T::zero(); (2 * m + 1) as usize];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                if b.is_zero() {
                    continue;
                }
                let k = i + j;
                coeffs[k] = coeffs[k].clone() + a.clone() * b.clone();
            }
        }
        // Tails far away from both windows contribute only through the flags.
        let tails_ok = (self.zero_above || other.zero_below) && (self.zero_below || other.zero_above);
        let exact = |j: i64| -> bool {
            if !tails_ok {
                return false;
            }
            let r = m + j.abs() + 1;
            (-r..=r).all(|a| {
                let b = j - a;
                (self.known(a) && other.known(b)) || self.known_zero(a) || other.known_zero(b)
            })
        };
        let mask: Vec<bool> = (-m..=m).map(exact).collect();
        let (lo, hi) = longest_run(&mask)
            .map(|(s, e)| (s as i64 - m, e as i64 - m))
            .unwrap_or((1, 0));
        Self {
            window: m as usize,
            coeffs,
            valid_lo: lo,
            valid_hi: hi,
            zero_below: self.zero_below && other.zero_below,
            zero_above: self.zero_above && other.zero_above,
        }
    }
}

fn longest_run(mask: &[bool]) -> Option<(usize, usize)> {
    let mut best: Option<(usize, usize)> = None;
    let mut start = None;
    for (i, &ok) in mask.iter().chain(std::iter::once(&false)).enumerate() {
        match (ok, start) {
            (true, None) => start = Some(i),
            (false, Some(s)) => {
                let len = i - s;
                if best.is_none_or(|(bs, be)| len > be + 1 - bs) {
                    best = Some((s, i - 1));
                }
                start = None;
            }
            _ => {}
        }
    }
    best
}

/// Free-function form of [`LaurentWindow::mul`].
pub fn laurent_mul<T: Scalar>(a: &LaurentWindow<T>, b: &LaurentWindow<T>) -> LaurentWindow<T> {
    a.mul(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::QComplex;
    use num_complex::Complex64;

    fn q(v: &[i64]) -> TruncatedTaylor<QComplex> {
        TruncatedTaylor::new(v.iter().map(|&x| QComplex::from_int(x)).collect())
    }

    #[test]
    fn add_examples() {
        assert_eq!(q(&[1, 1]).add(&q(&[1, -1])), q(&[2, 0]));
        assert_eq!(q(&[0, 0, 0]).add(&q(&[3, 1, 4])), q(&[3, 1, 4]));
        assert_eq!(q(&[1, 2]).add(&q(&[3, 4])), q(&[4, 6]));
    }

    #[test]
    fn add_takes_min_order() {
        assert_eq!(q(&[1, 2, 3]).add(&q(&[1, 1])).order(), 1);
    }

    #[test]
    fn mul_examples() {
        assert_eq!(q(&[1, 1, 0]).mul(&q(&[1, -1, 0])), q(&[1, 0, -1]));
        assert_eq!(q(&[5, 7, 9]).mul(&q(&[1, 0, 0])), q(&[5, 7, 9]));
        assert_eq!(q(&[1, 1, 1]).mul(&q(&[1, 1, 1])), q(&[1, 2, 3]));
    }

    #[test]
    fn compose_examples() {
        let b = q(&[0, 3, -2, 5]);
        assert_eq!(q(&[0, 1, 0, 0]).compose(&b).unwrap(), b);
        assert_eq!(q(&[0, 0, 1, 0]).compose(&q(&[0, 1, 1, 0])).unwrap(), q(&[0, 0, 1, 2]));
        assert_eq!(q(&[1, 1]).compose(&q(&[0, 2])).unwrap(), q(&[1, 2]));
        assert_eq!(
            q(&[1, 1]).compose(&q(&[1, 2])),
            Err(SeriesError::NonZeroConstant)
        );
    }

    #[test]
    fn reciprocal_examples() {
        assert_eq!(q(&[1, -1, 0, 0]).reciprocal().unwrap(), q(&[1, 1, 1, 1]));
        assert_eq!(q(&[1]).reciprocal().unwrap(), q(&[1]));
        assert_eq!(q(&[1, 2, 3]).reciprocal().unwrap(), q(&[1, -2, 1]));
        assert_eq!(q(&[0, 1]).reciprocal(), Err(SeriesError::NotInvertible));
    }

    #[test]
    fn derivative_examples() {
        assert_eq!(q(&[0, 0, 0, 1]).derivative(), q(&[0, 0, 3]));
        assert_eq!(q(&[5, 0, 0]).derivative(), q(&[0, 0]));
        assert_eq!(q(&[7]).derivative(), q(&[0]));
    }

    #[test]
    fn complex_eval() {
        let s = TruncatedTaylor::new(vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 2.0)]);
        assert_eq!(s.eval(Complex64::new(0.5, 0.0)), Complex64::new(1.0, 1.0));
    }

    fn lw(window: usize, terms: &[(i64, i64)]) -> LaurentWindow<QComplex> {
        LaurentWindow::from_terms(window, terms.iter().map(|&(k, v)| (k, QComplex::from_int(v))))
    }

    #[test]
    fn laurent_unit() {
        let p = lw(1, &[(1, 1)]).mul(&lw(1, &[(-1, 1)]));
        assert_eq!(p.coeff(0), Some(&QComplex::from_int(1)));
        assert_eq!(p.validity(), Some((-2, 2)));
        for k in [-2, -1, 1, 2] {
            assert!(p.coeff(k).unwrap().is_zero());
        }
    }

    #[test]
    fn laurent_scalar_window() {
        let s = lw(0, &[(0, 3)]);
        let b = lw(2, &[(-2, 1), (1, 5)]);
        let p = s.mul(&b);
        assert_eq!(p.window(), 2);
        assert_eq!(p.coeff(-2), Some(&QComplex::from_int(3)));
        assert_eq!(p.coeff(1), Some(&QComplex::from_int(15)));
    }

    #[test]
    fn laurent_truncated_factor_limits_validity() {
        // 1 + 2z known to order 1 (unknown above) times psi1/z + psi2/z^2.
        let f = LaurentWindow::from_taylor(&q(&[1, 2]));
        let psi = lw(2, &[(-1, 5), (-2, 7)]);
        let p = f.mul(&psi);
        // z^-1 coefficient psi1 + 2 psi2, exact.
        assert_eq!(p.trusted(-1), Some(&QComplex::from_int(5 + 14)));
        assert_eq!(p.trusted(-2), Some(&QComplex::from_int(7)));
        // z^0 would need the unknown z^2 coefficient of f.
        assert_eq!(p.validity(), Some((-3, -1)));
        assert!(p.trusted(1).is_none());
    }

    #[test]
    fn longest_run_picks_first_of_ties() {
        assert_eq!(longest_run(&[true, false, true]), Some((0, 0)));
        assert_eq!(longest_run(&[false, true, true, false, true]), Some((1, 2)));
        assert_eq!(longest_run(&[false]), None);
    }
}
