//! Polynomial recurrences on the coefficient body: the coefficients `P_k` of
//! `1/f'`, the `K_m`/`Π_m` expansion of `L_0`, the one-forms `ω_k` dual to
//! the Kirillov fields, and the change between `ċ` and Kirillov-basis
//! velocities `u`.

use num_traits::Zero;

use crate::algebra::fields::{kirillov_field, OneForm, VectorFieldOnM};
use crate::algebra::poly::CoeffPolynomial;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

fn c(k: usize) -> CoeffPolynomial {
    CoeffPolynomial::var(k)
}

/// `P_0..P_n` with `P_k = -Σ_{j=1}^k (j+1) c_j P_{k-j}`.
pub fn p_polynomials(n: usize) -> Vec<CoeffPolynomial> {
    let mut p = vec![CoeffPolynomial::int(1)];
    for k in 1..=n {
        let mut acc = CoeffPolynomial::zero();
        for j in 1..=k {
            acc = acc - &c(j).scale_int(j as i64 + 1) * &p[k - j];
        }
        p.push(acc);
    }
    p
}

/// `L_k` applied to `P_m` as a derivation. Vanishes when `m < k`.
pub fn kirillov_action_on_p(k: usize, m: usize) -> Result<CoeffPolynomial> {
    if k == 0 {
        return Err(Error::IndexOutOfRange { index: 0, n: m });
    }
    let p = p_polynomials(m);
    let field = kirillov_field(k, k.max(m))?;
    Ok(field.apply(&p[m]))
}

/// `K_1..K_n` and `Π_1..Π_n`.
#[derive(Clone, Debug, PartialEq)]
pub struct PiExpansion {
    pub k: Vec<CoeffPolynomial>,
    pub pi: Vec<CoeffPolynomial>,
}

impl PiExpansion {
    pub fn k(&self, m: usize) -> &CoeffPolynomial {
        &self.k[m - 1]
    }

    pub fn pi(&self, m: usize) -> &CoeffPolynomial {
        &self.pi[m - 1]
    }

    /// `Σ_m Π_m L_m` at truncation `n`.
    pub fn l0_field(&self) -> Result<VectorFieldOnM> {
        let n = self.pi.len();
        let mut acc = VectorFieldOnM::zero(n);
        for (m, pi) in self.pi.iter().enumerate() {
            acc = acc.add(&kirillov_field(m + 1, n)?.times(pi))?;
        }
        Ok(acc)
    }
}

/// `K_m = -Σ_{j=1}^{m-1} j (m-j+1) c_{m-j} c_j` and
/// `Π_m = m c_m + Σ_{j=1}^m K_{m-j+1} P_{j-1}`.
pub fn pi_expansion(n: usize) -> Result<PiExpansion> {
    if n == 0 {
        return Err(Error::InvalidArgument("pi_expansion needs n >= 1".into()));
    }
    let p = p_polynomials(n);
    let k: Vec<CoeffPolynomial> = (1..=n)
        .map(|m| {
            let mut acc = CoeffPolynomial::zero();
            for j in 1..m {
                acc = acc - (&c(m - j) * &c(j)).scale_int((j * (m - j + 1)) as i64);
            }
            acc
        })
        .collect();
    let pi = (1..=n)
        .map(|m| {
            let mut acc = c(m).scale_int(m as i64);
            for j in 1..=m {
                acc = acc + &k[m - j] * &p[j - 1];
            }
            acc
        })
        .collect();
    Ok(PiExpansion { k, pi })
}

/// `ω_1..ω_n` by `ω_k = dc_k - Σ_{j=1}^{k-1} (j+1) c_j ω_{k-j}`.
pub fn omega_forms(n: usize) -> Vec<OneForm> {
    let mut out: Vec<OneForm> = Vec::with_capacity(n);
    for k in 1..=n {
        let mut w = OneForm::basis(k, n);
        for j in 1..k {
            let term = out[k - j - 1].times(&c(j).scale_int(j as i64 + 1));
            w = w.sub(&term).expect("same dimension");
        }
        out.push(w);
    }
    out
}

/// `ω_1..ω_n` by the closed form `ω_k = dc_k + Σ_{j=1}^{k-1} P_j dc_{k-j}`.
pub fn omega_forms_closed(n: usize) -> Vec<OneForm> {
    let p = p_polynomials(n);
    (1..=n)
        .map(|k| {
            let mut w = OneForm::basis(k, n);
            for (j, pj) in p.iter().enumerate().take(k).skip(1) {
                w = w.add(&OneForm::basis(k - j, n).times(pj)).expect("same dimension");
            }
            w
        })
        .collect()
}

fn check_len(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::Dimension(format!("velocity length {a} vs coefficient length {b}")));
    }
    Ok(())
}

/// Kirillov-basis velocity: `u_k = ċ_k - Σ_{j=1}^{k-1} (j+1) c_j u_{k-j}`.
pub fn u_from_cdot<T: Scalar>(cdot: &[T], c: &[T]) -> Result<Vec<T>> {
    check_len(cdot.len(), c.len())?;
    let mut u: Vec<T> = Vec::with_capacity(cdot.len());
    for k in 0..cdot.len() {
        let mut acc = cdot[k].clone();
        for j in 1..=k {
            acc = acc - c[j - 1].scale_int(j as i64 + 1) * u[k - j].clone();
        }
        u.push(acc);
    }
    Ok(u)
}

/// `ċ = Σ_k u_k L_k(c)`, i.e. `ċ_i = u_i + Σ_{j=1}^{i-1} (j+1) c_j u_{i-j}`.
pub fn cdot_from_u<T: Scalar>(u: &[T], c: &[T]) -> Result<Vec<T>> {
    check_len(u.len(), c.len())?;
    Ok((0..u.len())
        .map(|i| {
            let mut acc = u[i].clone();
            for j in 1..=i {
                acc = acc + c[j - 1].scale_int(j as i64 + 1) * u[i - j].clone();
            }
            acc
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::QComplex;
    use num_complex::Complex64;

    #[test]
    fn printed_p_polynomials() {
        let p = p_polynomials(3);
        assert_eq!(p[0], CoeffPolynomial::int(1));
        assert_eq!(p[1], c(1).scale_int(-2));
        assert_eq!(p[2], (&c(1) * &c(1)).scale_int(4) - c(2).scale_int(3));
    }

    #[test]
    fn action_examples() {
        assert!(kirillov_action_on_p(1, 0).unwrap().is_zero());
        assert_eq!(kirillov_action_on_p(1, 1).unwrap(), CoeffPolynomial::int(-2));
        assert_eq!(kirillov_action_on_p(2, 3).unwrap(), c(1).scale_int(4));
    }

    #[test]
    fn pi_examples() {
        let e = pi_expansion(3).unwrap();
        assert!(e.k(1).is_zero());
        assert_eq!(e.pi(1), &c(1));
        assert_eq!(e.pi(2), &(c(2).scale_int(2) - (&c(1) * &c(1)).scale_int(2)));
        let c1 = c(1);
        let expected = c(3).scale_int(3) - (&c1 * &c(2)).scale_int(7) + (&(&c1 * &c1) * &c1).scale_int(4);
        assert_eq!(e.pi(3), &expected);
    }

    #[test]
    fn omega_examples() {
        let w = omega_forms(3);
        assert_eq!(w[0], OneForm::basis(1, 3));
        assert!(w[1].pair(&kirillov_field(1, 3).unwrap()).unwrap().is_zero());
        assert_eq!(w, omega_forms_closed(3));
    }

    #[test]
    fn velocity_examples() {
        let z = Complex64::new;
        let c = [z(0.3, 0.1), z(-0.2, 0.5), z(0.0, 0.0)];
        let cdot = [z(1.0, 0.0), z(0.5, -1.0), z(0.25, 0.0)];
        let u = u_from_cdot(&cdot, &c).unwrap();
        assert_eq!(u[0], cdot[0]);
        assert_eq!(u[1], cdot[1] - c[0] * 2.0 * cdot[0]);
        let zero = [z(0.0, 0.0); 3];
        assert_eq!(u_from_cdot(&cdot, &zero).unwrap(), cdot.to_vec());

        let e1 = [z(1.0, 0.0), z(0.0, 0.0), z(0.0, 0.0)];
        let cd = cdot_from_u(&e1, &c).unwrap();
        assert_eq!(cd, vec![z(1.0, 0.0), c[0] * 2.0, c[1] * 3.0]);
        let e3 = [z(0.0, 0.0), z(0.0, 0.0), z(1.0, 0.0)];
        assert_eq!(cdot_from_u(&e3, &c).unwrap(), e3.to_vec());
        assert!(u_from_cdot(&cdot[..2], &c).is_err());
    }

    #[test]
    fn exact_round_trip() {
        let q = |a: i64, b: i64| QComplex::from_ratio(a, b);
        let c = vec![q(1, 3), q(-2, 5), q(7, 2), q(0, 1)];
        let u = vec![q(1, 1), q(-1, 7), QComplex::i(), q(5, 3)];
        let cd = cdot_from_u(&u, &c).unwrap();
        assert_eq!(u_from_cdot(&cd, &c).unwrap(), u);
    }
}
