//! Sparse multivariate polynomials in the coefficient variables `c_1, c_2, ...`
//! with exact [`QComplex`] coefficients.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use num_traits::{One, Zero};

use crate::scalar::{QComplex, Scalar};

/// Exponent vector; entry `i` is the power of `c_{i+1}`. Trailing zeros are
/// stripped so equal monomials compare equal regardless of variable count.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Monomial(Vec<u32>);

impl Monomial {
    pub fn one() -> Self {
        Self(Vec::new())
    }

    /// The variable `c_var` (1-based).
    pub fn var(var: usize) -> Self {
        assert!(var >= 1, "coefficient variables are 1-based");
        let mut e = vec![0; var];
        e[var - 1] = 1;
        Self(e)
    }

    pub fn from_exponents(mut e: Vec<u32>) -> Self {
        while e.last() == Some(&0) {
            e.pop();
        }
        Self(e)
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn exponent(&self, var: usize) -> u32 {
        self.0.get(var - 1).copied().unwrap_or(0)
    }

    /// Weighted degree with `wt(c_k) = k`.
    pub fn weight(&self) -> u64 {
        self.0
            .iter()
            .enumerate()
            .map(|(i, &e)| (i as u64 + 1) * e as u64)
            .sum()
    }

    pub fn degree(&self) -> u64 {
        self.0.iter().map(|&e| e as u64).sum()
    }

    /// Largest variable index present, 0 for the constant monomial.
    pub fn max_var(&self) -> usize {
        self.0.len()
    }

    pub fn mul(&self, other: &Self) -> Self {
        let len = self.0.len().max(other.0.len());
        let e = (0..len)
            .map(|i| self.0.get(i).copied().unwrap_or(0) + other.0.get(i).copied().unwrap_or(0))
            .collect();
        Self(e)
    }

    /// `∂/∂c_var`, returning the multiplicity and the reduced monomial.
    pub fn diff(&self, var: usize) -> Option<(u32, Self)> {
        let k = self.exponent(var);
        if k == 0 {
            return None;
        }
        let mut e = self.0.clone();
        e[var - 1] -= 1;
        Some((k, Self::from_exponents(e)))
    }

    pub fn eval(&self, c: &[Complex64]) -> Complex64 {
        let mut acc = Complex64::one();
        for (i, &e) in self.0.iter().enumerate() {
            if e > 0 {
                let v = c.get(i).copied().unwrap_or_default();
                acc *= v.powu(e);
            }
        }
        acc
    }
}

impl Ord for Monomial {
    // Graded by weight; within a weight, higher powers of low-index variables first.
    fn cmp(&self, other: &Self) -> Ordering {
        self.weight().cmp(&other.weight()).then_with(|| {
            let len = self.0.len().max(other.0.len());
            for i in 0..len {
                let a = self.0.get(i).copied().unwrap_or(0);
                let b = other.0.get(i).copied().unwrap_or(0);
                if a != b {
                    return b.cmp(&a);
                }
            }
            Ordering::Equal
        })
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, &e) in self.0.iter().enumerate() {
            if e == 0 {
                continue;
            }
            if !first {
                write!(f, "*")?;
            }
            first = false;
            write!(f, "c{}", i + 1)?;
            if e > 1 {
                write!(f, "^{e}")?;
            }
        }
        if first {
            write!(f, "1")?;
        }
        Ok(())
    }
}

/// Polynomial over `c_1, c_2, ...` with no zero terms stored.
#[derive(Clone, PartialEq, Eq, Default)]
pub struct CoeffPolynomial {
    terms: BTreeMap<Monomial, QComplex>,
}

impl CoeffPolynomial {
    pub fn constant(v: QComplex) -> Self {
        let mut p = Self::default();
        p.add_term(Monomial::one(), v);
        p
    }

    pub fn int(v: i64) -> Self {
        Self::constant(QComplex::from_int(v))
    }

    /// The variable `c_var`.
    pub fn var(var: usize) -> Self {
        Self::term(QComplex::one(), Monomial::var(var))
    }

    pub fn term(coeff: QComplex, mono: Monomial) -> Self {
        let mut p = Self::default();
        p.add_term(mono, coeff);
        p
    }

    pub fn add_term(&mut self, mono: Monomial, coeff: QComplex) {
        if coeff.is_zero() {
            return;
        }
        match self.terms.remove(&mono) {
            Some(old) => {
                let s = old + coeff;
                if !s.is_zero() {
                    self.terms.insert(mono, s);
                }
            }
            None => {
                self.terms.insert(mono, coeff);
            }
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &QComplex)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff_of(&self, mono: &Monomial) -> QComplex {
        self.terms.get(mono).cloned().unwrap_or_default()
    }

    /// Largest variable index occurring in any term.
    pub fn max_var(&self) -> usize {
        self.terms.keys().map(Monomial::max_var).max().unwrap_or(0)
    }

    /// `Some(w)` when every term has weighted degree `w`.
    pub fn homogeneous_weight(&self) -> Option<u64> {
        let mut it = self.terms.keys().map(Monomial::weight);
        let w = it.next()?;
        it.all(|x| x == w).then_some(w)
    }

    pub fn as_constant(&self) -> Option<QComplex> {
        match self.terms.len() {
            0 => Some(QComplex::zero()),
            1 => self.terms.get(&Monomial::one()).cloned(),
            _ => None,
        }
    }

    pub fn diff(&self, var: usize) -> Self {
        let mut out = Self::default();
        for (m, c) in &self.terms {
            if let Some((k, dm)) = m.diff(var) {
                out.add_term(dm, c.scale_int(k as i64));
            }
        }
        out
    }

    pub fn scale(&self, s: &QComplex) -> Self {
        let mut out = Self::default();
        for (m, c) in &self.terms {
            out.add_term(m.clone(), c * s);
        }
        out
    }

    /// Drops every term containing a variable with index above `n`
    /// (the projection `c_k = 0` for `k > n`).
    pub fn project(&self, n: usize) -> Self {
        Self {
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| m.max_var() <= n)
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect(),
        }
    }

    /// Coefficient-wise complex conjugate.
    pub fn conj(&self) -> Self {
        Self {
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (m.clone(), c.conj()))
                .collect(),
        }
    }

    pub fn eval(&self, c: &[Complex64]) -> Complex64 {
        self.terms
            .iter()
            .map(|(m, q)| q.to_complex64() * m.eval(c))
            .sum()
    }

    /// Substitutes exact values for the variables.
    pub fn eval_exact(&self, c: &[QComplex]) -> QComplex {
        let mut acc = QComplex::zero();
        for (m, q) in &self.terms {
            let mut t = q.clone();
            for (i, &e) in m.exponents().iter().enumerate() {
                for _ in 0..e {
                    t = &t * &c.get(i).cloned().unwrap_or_default();
                }
            }
            acc += t;
        }
        acc
    }
}

impl Zero for CoeffPolynomial {
    fn zero() -> Self {
        Self::default()
    }
    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
}

impl One for CoeffPolynomial {
    fn one() -> Self {
        Self::int(1)
    }
}

impl Add for CoeffPolynomial {
    type Output = Self;
    fn add(mut self, rhs: Self) -> Self {
        for (m, c) in rhs.terms {
            self.add_term(m, c);
        }
        self
    }
}

impl Add for &CoeffPolynomial {
    type Output = CoeffPolynomial;
    fn add(self, rhs: &CoeffPolynomial) -> CoeffPolynomial {
        self.clone() + rhs.clone()
    }
}

impl Sub for CoeffPolynomial {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl Sub for &CoeffPolynomial {
    type Output = CoeffPolynomial;
    fn sub(self, rhs: &CoeffPolynomial) -> CoeffPolynomial {
        self.clone() - rhs.clone()
    }
}

impl Neg for CoeffPolynomial {
    type Output = Self;
    fn neg(self) -> Self {
        Self {
            terms: self.terms.into_iter().map(|(m, c)| (m, -c)).collect(),
        }
    }
}

impl Mul for &CoeffPolynomial {
    type Output = CoeffPolynomial;
    fn mul(self, rhs: &CoeffPolynomial) -> CoeffPolynomial {
        let mut out = CoeffPolynomial::default();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &rhs.terms {
                out.add_term(ma.mul(mb), ca * cb);
            }
        }
        out
    }
}

impl Mul for CoeffPolynomial {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        &self * &rhs
    }
}

impl Scalar for CoeffPolynomial {
    fn from_int(n: i64) -> Self {
        Self::int(n)
    }

    fn try_inverse(&self) -> Option<Self> {
        self.as_constant()?.try_inverse().map(Self::constant)
    }

    fn div_int(&self, d: i64) -> Self {
        Self {
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (m.clone(), c.div_int(d)))
                .collect(),
        }
    }

    fn scale_int(&self, k: i64) -> Self {
        let mut out = Self::default();
        for (m, c) in &self.terms {
            out.add_term(m.clone(), c.scale_int(k));
        }
        out
    }
}

impl fmt::Debug for CoeffPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Canonical text: terms in graded order, e.g. `4*c1^2 - 3*c2`.
impl fmt::Display for CoeffPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (m, c)) in self.terms.iter().enumerate() {
            let neg_real = c.is_real() && c.re < num_rational::BigRational::zero();
            let mag = if neg_real { -c.clone() } else { c.clone() };
            match (i, neg_real) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            if *m == Monomial::one() {
                write!(f, "{mag}")?;
            } else if mag.is_one() {
                write!(f, "{m}")?;
            } else {
                write!(f, "{mag}*{m}")?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(k: usize) -> CoeffPolynomial {
        CoeffPolynomial::var(k)
    }

    #[test]
    fn canonical_text() {
        let p = (&c(1) * &c(1)).scale_int(4) - c(2).scale_int(3);
        assert_eq!(p.to_string(), "4*c1^2 - 3*c2");
        assert_eq!(CoeffPolynomial::zero().to_string(), "0");
        assert_eq!((-c(3)).to_string(), "-c3");
    }

    #[test]
    fn cancellation_leaves_no_zero_terms() {
        let p = &c(1) - &c(1);
        assert!(p.is_zero());
        assert_eq!(p.len(), 0);
    }

    #[test]
    fn weight_is_additive() {
        let p = &c(1) * &c(2);
        let q = &c(3) + &(&c(1) * &c(2));
        assert_eq!(p.homogeneous_weight(), Some(3));
        assert_eq!(q.homogeneous_weight(), Some(3));
        assert_eq!((&p * &q).homogeneous_weight(), Some(6));
        assert_eq!((&c(1) + &c(2)).homogeneous_weight(), None);
    }

    #[test]
    fn derivative_and_projection() {
        let p = &(&c(1) * &c(1)) * &c(4);
        assert_eq!(p.diff(1), (&c(1) * &c(4)).scale_int(2));
        assert!(p.diff(2).is_zero());
        assert!(p.project(3).is_zero());
        assert_eq!(p.max_var(), 4);
    }

    #[test]
    fn evaluation() {
        let p = (&c(1) * &c(2)).scale_int(3) + CoeffPolynomial::int(1);
        let v = [Complex64::new(2.0, 0.0), Complex64::new(0.0, 1.0)];
        assert_eq!(p.eval(&v), Complex64::new(1.0, 6.0));
        let e = p.eval_exact(&[QComplex::from_int(2), QComplex::i()]);
        assert_eq!(e, QComplex::from_int(1) + QComplex::i().scale_int(6));
    }
}
