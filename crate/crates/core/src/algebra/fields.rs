//! First-order vector fields on the truncated coefficient body, their dual
//! momenta-linear functionals, and one-forms.
//!
//! Bracket convention: both [`lie_bracket`] and [`poisson_bracket`] are
//! normalized so that the Kirillov fields satisfy
//! `[L_m, L_k] = (k - m) L_{m+k}`. For fields this is `B(A) - A(B)`, the
//! negative of the composition commutator; it is exactly what the
//! coordinate Poisson bracket `Σ ∂F/∂c_i ∂G/∂ψ̄_i - ∂F/∂ψ̄_i ∂G/∂c_i` induces
//! on the dual functionals.
//!
//! Every field and functional carries a trusted prefix: slots `1..=trusted`
//! agree with the untruncated object. Slots above it were affected by
//! dropping variables `c_k`, `k > n`, or momenta `ψ̄_k`, `k > n`.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::Zero;

use crate::algebra::poly::CoeffPolynomial;
use crate::error::{Error, Result};
use crate::scalar::{QComplex, Scalar};
use crate::series::TruncatedTaylor;

use num_complex::Complex64;

#[derive(Clone, Debug, PartialEq)]
pub struct VectorFieldOnM {
    components: Vec<CoeffPolynomial>,
    trusted: usize,
}

impl VectorFieldOnM {
    /// A field with `components[j-1]` multiplying `∂_j`; fully trusted.
    pub fn new(components: Vec<CoeffPolynomial>) -> Self {
        let trusted = components.len();
        Self {
            components,
            trusted,
        }
    }

    pub fn zero(n: usize) -> Self {
        Self::new(vec![CoeffPolynomial::zero(); n])
    }

    pub fn with_trusted(mut self, trusted: usize) -> Self {
        self.trusted = trusted.min(self.components.len());
        self
    }

    pub fn n(&self) -> usize {
        self.components.len()
    }

    pub fn trusted(&self) -> usize {
        self.trusted
    }

    pub fn components(&self) -> &[CoeffPolynomial] {
        &self.components
    }

    /// Component multiplying `∂_slot` (1-based).
    pub fn component(&self, slot: usize) -> &CoeffPolynomial {
        &self.components[slot - 1]
    }

    /// Applies the field as a derivation: `Σ_j A_j ∂p/∂c_j`.
    pub fn apply(&self, p: &CoeffPolynomial) -> CoeffPolynomial {
        let mut out = CoeffPolynomial::zero();
        for var in 1..=p.max_var().min(self.n()) {
            let d = p.diff(var);
            if d.is_zero() {
                continue;
            }
            out = out + &self.components[var - 1] * &d;
        }
        out
    }

    /// The image of `f = z + Σ c_k z^{k+1}` under the field, `Σ_j A_j z^{j+1}`,
    /// as a series of order `n + 1`.
    pub fn on_function(&self) -> TruncatedTaylor<CoeffPolynomial> {
        let n = self.n();
        let mut coeffs = vec![CoeffPolynomial::zero(); n + 2];
        for (j, a) in self.components.iter().enumerate() {
            coeffs[j + 2] = a.clone();
        }
        TruncatedTaylor::new(coeffs)
    }

    pub fn eval(&self, c: &[Complex64]) -> Vec<Complex64> {
        self.components.iter().map(|a| a.eval(c)).collect()
    }

    pub fn dual(&self) -> CovariantFunctional {
        CovariantFunctional {
            coeffs: self.components.clone(),
            extra: BTreeMap::new(),
            trusted: self.trusted,
        }
    }

    pub fn scale(&self, s: &QComplex) -> Self {
        Self {
            components: self.components.iter().map(|a| a.scale(s)).collect(),
            trusted: self.trusted,
        }
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        same_n(self.n(), other.n())?;
        Ok(Self {
            components: self
                .components
                .iter()
                .zip(&other.components)
                .map(|(a, b)| a - b)
                .collect(),
            trusted: self.trusted.min(other.trusted),
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        same_n(self.n(), other.n())?;
        Ok(Self {
            components: self
                .components
                .iter()
                .zip(&other.components)
                .map(|(a, b)| a + b)
                .collect(),
            trusted: self.trusted.min(other.trusted),
        })
    }

    /// Multiplies every component by a polynomial.
    pub fn times(&self, p: &CoeffPolynomial) -> Self {
        Self {
            components: self.components.iter().map(|a| a * p).collect(),
            trusted: self.trusted,
        }
    }

    /// True when every trusted slot is the zero polynomial.
    pub fn is_zero_on_trusted(&self) -> bool {
        self.components[..self.trusted].iter().all(Zero::is_zero)
    }
}

impl fmt::Display for VectorFieldOnM {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_linear(f, self.components.iter().enumerate().map(|(j, a)| (format!("d{}", j + 1), a)))
    }
}

/// Truncated Kirillov field `L_j = ∂_j + Σ_{k=1}^{n-j} (k+1) c_k ∂_{j+k}`.
pub fn kirillov_field(j: usize, n: usize) -> Result<VectorFieldOnM> {
    if j == 0 || j > n {
        return Err(Error::IndexOutOfRange { index: j as i64, n });
    }
    let mut comps = vec![CoeffPolynomial::zero(); n];
    comps[j - 1] = CoeffPolynomial::int(1);
    for k in 1..=n - j {
        comps[j + k - 1] = CoeffPolynomial::var(k).scale_int(k as i64 + 1);
    }
    Ok(VectorFieldOnM::new(comps))
}

/// `Σ_k a_k(c) ψ̄_k`, optionally with explicit entries for `ψ̄_0, ψ̄_{-1}, ...`.
#[derive(Clone, Debug, PartialEq)]
pub struct CovariantFunctional {
    coeffs: Vec<CoeffPolynomial>,
    /// Entries for non-positive momentum indices.
    extra: BTreeMap<i64, CoeffPolynomial>,
    trusted: usize,
}

impl CovariantFunctional {
    pub fn new(coeffs: Vec<CoeffPolynomial>) -> Self {
        let trusted = coeffs.len();
        Self {
            coeffs,
            extra: BTreeMap::new(),
            trusted,
        }
    }

    pub fn zero(n: usize) -> Self {
        Self::new(vec![CoeffPolynomial::zero(); n])
    }

    /// Sets the polynomial multiplying `ψ̄_index` for `index <= 0`.
    pub fn with_extra(mut self, index: i64, p: CoeffPolynomial) -> Self {
        assert!(index <= 0, "extra entries are for non-positive momenta");
        if p.is_zero() {
            self.extra.remove(&index);
        } else {
            self.extra.insert(index, p);
        }
        self
    }

    pub fn with_trusted(mut self, trusted: usize) -> Self {
        self.trusted = trusted.min(self.coeffs.len());
        self
    }

    pub fn n(&self) -> usize {
        self.coeffs.len()
    }

    pub fn trusted(&self) -> usize {
        self.trusted
    }

    pub fn coeffs(&self) -> &[CoeffPolynomial] {
        &self.coeffs
    }

    /// Polynomial multiplying `ψ̄_index`. Indices above `n` are zero.
    pub fn coeff(&self, index: i64) -> CoeffPolynomial {
        if index >= 1 {
            self.coeffs
                .get(index as usize - 1)
                .cloned()
                .unwrap_or_default()
        } else {
            self.extra.get(&index).cloned().unwrap_or_default()
        }
    }

    pub fn extra(&self) -> &BTreeMap<i64, CoeffPolynomial> {
        &self.extra
    }

    /// Linear in `ψ̄_1..ψ̄_n` only, with no surviving non-positive entries.
    pub fn is_momenta_linear(&self) -> bool {
        self.extra.values().all(Zero::is_zero)
    }

    pub fn dual_field(&self) -> Result<VectorFieldOnM> {
        if !self.is_momenta_linear() {
            return Err(Error::InvalidArgument(
                "functional has non-positive momentum entries".into(),
            ));
        }
        Ok(VectorFieldOnM::new(self.coeffs.clone()).with_trusted(self.trusted))
    }

    pub fn scale(&self, s: &QComplex) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|a| a.scale(s)).collect(),
            extra: self.extra.iter().map(|(k, a)| (*k, a.scale(s))).collect(),
            trusted: self.trusted,
        }
    }

    pub fn times(&self, p: &CoeffPolynomial) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|a| a * p).collect(),
            extra: self.extra.iter().map(|(k, a)| (*k, a * p)).collect(),
            trusted: self.trusted,
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.combine(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.combine(other, |a, b| a - b)
    }

    fn combine(
        &self,
        other: &Self,
        op: impl Fn(&CoeffPolynomial, &CoeffPolynomial) -> CoeffPolynomial,
    ) -> Result<Self> {
        same_n(self.n(), other.n())?;
        let mut extra = BTreeMap::new();
        for k in self.extra.keys().chain(other.extra.keys()) {
            let v = op(&self.coeff(*k), &other.coeff(*k));
            if !v.is_zero() {
                extra.insert(*k, v);
            }
        }
        Ok(Self {
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| op(a, b))
                .collect(),
            extra,
            trusted: self.trusted.min(other.trusted),
        })
    }

    /// Numeric value at a point `(c, ψ̄_1..ψ̄_n)`; extra entries are ignored.
    pub fn eval(&self, c: &[Complex64], psibar: &[Complex64]) -> Complex64 {
        self.coeffs
            .iter()
            .zip(psibar)
            .map(|(a, p)| a.eval(c) * p)
            .sum()
    }

    /// True when `self - other` vanishes on the slots both trust.
    pub fn agrees_on_trusted(&self, other: &Self) -> bool {
        let t = self.trusted.min(other.trusted);
        (0..t).all(|i| self.coeffs[i] == other.coeffs[i])
    }
}

impl fmt::Display for CovariantFunctional {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let extra = self
            .extra
            .iter()
            .rev()
            .map(|(k, a)| (format!("psibar{k}"), a));
        let main = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(j, a)| (format!("psibar{}", j + 1), a));
        write_linear(f, extra.chain(main))
    }
}

fn write_linear<'a>(
    f: &mut fmt::Formatter<'_>,
    items: impl Iterator<Item = (String, &'a CoeffPolynomial)>,
) -> fmt::Result {
    let mut first = true;
    for (name, a) in items {
        if a.is_zero() {
            continue;
        }
        if !first {
            write!(f, " + ")?;
        }
        first = false;
        write!(f, "({a})*{name}")?;
    }
    if first {
        write!(f, "0")?;
    }
    Ok(())
}

fn same_n(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::Dimension(format!("truncation {a} vs {b}")));
    }
    Ok(())
}

/// Coordinate Poisson bracket of two momenta-linear functionals,
/// summed over the retained momenta `ψ̄_1..ψ̄_n`.
///
/// The coefficient of `ψ̄_k` is `Σ_i (∂_i a_k) b_i - a_i (∂_i b_k)`.
pub fn poisson_bracket(
    f: &CovariantFunctional,
    g: &CovariantFunctional,
) -> Result<CovariantFunctional> {
    same_n(f.n(), g.n())?;
    let n = f.n();
    let entry = |a: &CoeffPolynomial, b: &CoeffPolynomial| -> CoeffPolynomial {
        let mut out = CoeffPolynomial::zero();
        for i in 1..=n {
            let da = a.diff(i);
            if !da.is_zero() {
                out = out + &da * &g.coeffs[i - 1];
            }
            let db = b.diff(i);
            if !db.is_zero() {
                out = out - &f.coeffs[i - 1] * &db;
            }
        }
        out
    };
    let coeffs: Vec<CoeffPolynomial> = (0..n).map(|k| entry(&f.coeffs[k], &g.coeffs[k])).collect();
    let mut extra = BTreeMap::new();
    for k in f.extra.keys().chain(g.extra.keys()) {
        let v = entry(&f.coeff(*k), &g.coeff(*k));
        if !v.is_zero() {
            extra.insert(*k, v);
        }
    }
    let trusted = (1..=n.min(f.trusted).min(g.trusted))
        .take_while(|&k| {
            f.coeffs[k - 1].max_var() <= g.trusted && g.coeffs[k - 1].max_var() <= f.trusted
        })
        .last()
        .unwrap_or(0);
    Ok(CovariantFunctional {
        coeffs,
        extra,
        trusted,
    })
}

/// Lie bracket normalized to the Witt relation, `[A, B] = B(A) - A(B)`;
/// see the module docs. Slots above `n` are dropped.
pub fn lie_bracket(a: &VectorFieldOnM, b: &VectorFieldOnM) -> Result<VectorFieldOnM> {
    poisson_bracket(&a.dual(), &b.dual())?.dual_field()
}

/// `Σ_k coeff_k dc_k`.
#[derive(Clone, Debug, PartialEq)]
pub struct OneForm {
    coeffs: Vec<CoeffPolynomial>,
}

impl OneForm {
    pub fn new(coeffs: Vec<CoeffPolynomial>) -> Self {
        Self { coeffs }
    }

    /// `dc_k` in dimension `n`.
    pub fn basis(k: usize, n: usize) -> Self {
        let mut coeffs = vec![CoeffPolynomial::zero(); n];
        coeffs[k - 1] = CoeffPolynomial::int(1);
        Self { coeffs }
    }

    pub fn n(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[CoeffPolynomial] {
        &self.coeffs
    }

    pub fn pair(&self, v: &VectorFieldOnM) -> Result<CoeffPolynomial> {
        same_n(self.n(), v.n())?;
        Ok(self
            .coeffs
            .iter()
            .zip(v.components())
            .filter(|(a, b)| !a.is_zero() && !b.is_zero())
            .fold(CoeffPolynomial::zero(), |acc, (a, b)| acc + a * b))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        same_n(self.n(), other.n())?;
        Ok(Self {
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a - b)
                .collect(),
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        same_n(self.n(), other.n())?;
        Ok(Self {
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn times(&self, p: &CoeffPolynomial) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|a| a * p).collect(),
        }
    }
}

impl fmt::Display for OneForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_linear(f, self.coeffs.iter().enumerate().map(|(j, a)| (format!("dc{}", j + 1), a)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(k: usize) -> CoeffPolynomial {
        CoeffPolynomial::var(k)
    }

    #[test]
    fn kirillov_shapes() {
        let top = kirillov_field(4, 4).unwrap();
        assert_eq!(top.to_string(), "(1)*d4");
        let l1 = kirillov_field(1, 3).unwrap();
        assert_eq!(l1.component(1), &CoeffPolynomial::int(1));
        assert_eq!(l1.component(2), &c(1).scale_int(2));
        assert_eq!(l1.component(3), &c(2).scale_int(3));
        assert!(kirillov_field(0, 3).is_err());
        assert!(kirillov_field(4, 3).is_err());
    }

    #[test]
    fn kirillov_on_function_is_z_pow_times_derivative() {
        let n = 6;
        let order = n + 1;
        let mut f = vec![CoeffPolynomial::zero(); order + 1];
        f[1] = CoeffPolynomial::int(1);
        for k in 1..=n {
            f[k + 1] = c(k);
        }
        let f = TruncatedTaylor::new(f);
        for j in 1..=n {
            let lf = kirillov_field(j, n).unwrap().on_function();
            let expected = f.derivative().shift_up(j + 1);
            // z^{j+1} f' is known through z^{n+j+1}; compare the field's range.
            for k in 0..=order {
                assert_eq!(lf.coeff(k), expected.coeff(k), "j={j} k={k}");
            }
        }
    }

    #[test]
    fn witt_examples() {
        let n = 12;
        let l = |j| kirillov_field(j, n).unwrap();
        assert!(lie_bracket(&l(1), &l(1)).unwrap().is_zero_on_trusted());
        assert_eq!(lie_bracket(&l(1), &l(2)).unwrap(), l(3));
        let b = lie_bracket(&l(2), &l(5)).unwrap();
        assert_eq!(b, l(7).scale(&QComplex::from_int(3)));
        assert_eq!(b.trusted(), n);
    }

    #[test]
    fn bracket_is_negative_of_composition_commutator() {
        let n = 5;
        let a = kirillov_field(1, n).unwrap();
        let b = kirillov_field(2, n).unwrap();
        let br = lie_bracket(&a, &b).unwrap();
        let p = &c(3) * &c(2);
        let comm = a.apply(&b.apply(&p)) - b.apply(&a.apply(&p));
        assert_eq!(br.apply(&p), -comm);
    }

    #[test]
    fn poisson_on_duals_mirrors_lie() {
        let n = 8;
        let f1 = kirillov_field(1, n).unwrap().dual();
        let f2 = kirillov_field(2, n).unwrap().dual();
        let pb = poisson_bracket(&f1, &f2).unwrap();
        assert_eq!(pb, kirillov_field(3, n).unwrap().dual());
        assert!(poisson_bracket(&f1, &f1).unwrap().coeffs().iter().all(Zero::is_zero));
    }

    #[test]
    fn poisson_trust_shrinks_with_truncated_inputs() {
        let n = 6;
        // a_k = c_{k+1}: slot n would need c_{n+1}, so only n-1 slots are trusted.
        let mut coeffs: Vec<_> = (1..=n).map(|k| if k < n { c(k + 1) } else { CoeffPolynomial::zero() }).collect();
        coeffs[0] = c(2);
        let f = CovariantFunctional::new(coeffs).with_trusted(n - 1);
        let g = kirillov_field(1, n).unwrap().dual();
        let pb = poisson_bracket(&f, &g).unwrap();
        assert!(pb.trusted() < n);
    }

    #[test]
    fn one_form_pairing() {
        let n = 3;
        let w = OneForm::basis(2, n).sub(&OneForm::basis(1, n).times(&c(1).scale_int(2))).unwrap();
        let l1 = kirillov_field(1, n).unwrap();
        assert!(w.pair(&l1).unwrap().is_zero());
    }

    #[test]
    fn functional_display() {
        let f = CovariantFunctional::new(vec![c(1), c(2).scale_int(2)]).with_extra(0, CoeffPolynomial::int(1));
        assert_eq!(f.to_string(), "(1)*psibar0 + (c1)*psibar1 + (2*c2)*psibar2");
        assert!(!f.is_momenta_linear());
    }
}
