//! Geodesic flow on the coefficient body for the metric in which the
//! Kirillov fields `L_1..L_n` are orthonormal.
//!
//! A cotangent state `(c, ψ̄)` has Kirillov momenta
//! `l_k = ψ̄_k + Σ_{j=1}^{n-k} (j+1) c_j ψ̄_{k+j}` and velocity coordinates
//! `u_k = l̄_k`. The velocities decouple:
//! `u̇_k = Σ_{j=1}^{n-k} (j-k) ū_j u_{j+k}`, which keeps `Σ |u_k|^2` fixed.
//!
//! Energy is reported as `Σ |u_k|^2` and the Lagrangian as `½ Σ |u_k|^2`.

use num_complex::Complex64;
use num_traits::Zero;

use crate::algebra::poly::CoeffPolynomial;
use crate::algebra::recurrences::cdot_from_u;
use crate::error::{Error, Result};
use crate::ode::{integrate_fixed, FixedStep};
use crate::scalar::{QComplex, Scalar};

#[derive(Clone, Debug, PartialEq)]
pub struct CotangentState {
    pub c: Vec<Complex64>,
    pub psibar: Vec<Complex64>,
}

impl CotangentState {
    pub fn new(c: Vec<Complex64>, psibar: Vec<Complex64>) -> Result<Self> {
        if c.len() != psibar.len() {
            return Err(Error::Dimension(format!("{} momenta for {} coefficients", psibar.len(), c.len())));
        }
        Ok(Self { c, psibar })
    }

    pub fn n(&self) -> usize {
        self.c.len()
    }
}

/// `l_k = ψ̄_k + Σ_{j=1}^{n-k} (j+1) c_j ψ̄_{k+j}`.
pub fn momenta_from_state(s: &CotangentState) -> Vec<Complex64> {
    let n = s.n();
    (1..=n)
        .map(|k| {
            let mut acc = s.psibar[k - 1];
            for j in 1..=n - k {
                acc += s.c[j - 1] * (j as f64 + 1.0) * s.psibar[k + j - 1];
            }
            acc
        })
        .collect()
}

/// Inverse of [`momenta_from_state`] for fixed `c`, solved from `k = n` down.
pub fn state_from_momenta(l: &[Complex64], c: &[Complex64]) -> Result<Vec<Complex64>> {
    if l.len() != c.len() {
        return Err(Error::Dimension(format!("{} momenta for {} coefficients", l.len(), c.len())));
    }
    let n = l.len();
    let mut psi = vec![Complex64::default(); n];
    for k in (1..=n).rev() {
        let mut acc = l[k - 1];
        for j in 1..=n - k {
            acc -= c[j - 1] * (j as f64 + 1.0) * psi[k + j - 1];
        }
        psi[k - 1] = acc;
    }
    Ok(psi)
}

/// Right-hand side of the Hamiltonian system:
/// `ċ_k = l̄_k + Σ_{j=1}^{k-1} (j+1) c_j l̄_{k-j}` and
/// `ψ̄̇_p = -(p+1) Σ_{k=1}^{n-p} l̄_k ψ̄_{k+p}`, so `ψ̄̇_n = 0`.
///
/// The momentum equation pairs `ψ̄` with `l̄_k`: only this form keeps
/// `u = l̄` on solutions of the decoupled velocity flow.
pub fn hamiltonian_rhs(s: &CotangentState) -> (Vec<Complex64>, Vec<Complex64>) {
    let n = s.n();
    let lbar: Vec<Complex64> = momenta_from_state(s).iter().map(|z| z.conj()).collect();
    let cdot = cdot_from_u(&lbar, &s.c).expect("equal lengths");
    let psidot = (1..=n)
        .map(|p| {
            let mut acc = Complex64::default();
            for k in 1..=n - p {
                acc += lbar[k - 1] * s.psibar[k + p - 1];
            }
            -acc * (p as f64 + 1.0)
        })
        .collect();
    (cdot, psidot)
}

/// `u̇_k = Σ_{j=1}^{n-k} (j-k) ū_j u_{j+k}`.
pub fn u_flow_rhs(u: &[Complex64]) -> Vec<Complex64> {
    let n = u.len();
    (1..=n)
        .map(|k| {
            let mut acc = Complex64::default();
            for j in 1..=n - k {
                acc += u[j - 1].conj() * u[j + k - 1] * (j as f64 - k as f64);
            }
            acc
        })
        .collect()
}

/// `l̇_k = Σ_{j=1}^{n-k} (j-k) l̄_j l_{j+k}`, the momentum form of the flow.
pub fn l_flow_rhs(l: &[Complex64]) -> Vec<Complex64> {
    let n = l.len();
    (1..=n)
        .map(|k| {
            let mut acc = Complex64::default();
            for j in 1..=n - k {
                acc += l[j - 1].conj() * l[j + k - 1] * (j as f64 - k as f64);
            }
            acc
        })
        .collect()
}

/// Symbolic right-hand sides over `2n` formal variables: variable `k`
/// stands for `x_k` and variable `n + k` for `x̄_k`, `k = 1..n`.
pub mod symbolic {
    use super::*;

    fn x(k: usize) -> CoeffPolynomial {
        CoeffPolynomial::var(k)
    }

    fn xbar(k: usize, n: usize) -> CoeffPolynomial {
        CoeffPolynomial::var(n + k)
    }

    /// `u̇_k` with `x = u`.
    pub fn u_flow(n: usize) -> Vec<CoeffPolynomial> {
        (1..=n)
            .map(|k| {
                let mut acc = CoeffPolynomial::zero();
                for j in 1..=n - k {
                    acc = acc + (&xbar(j, n) * &x(j + k)).scale_int(j as i64 - k as i64);
                }
                acc
            })
            .collect()
    }

    /// `l̇_k` with `x = l`.
    pub fn l_flow(n: usize) -> Vec<CoeffPolynomial> {
        (1..=n)
            .map(|k| {
                let mut acc = CoeffPolynomial::zero();
                for j in 1..=n - k {
                    acc = acc + (&xbar(j, n) * &x(j + k)).scale_int(j as i64 - k as i64);
                }
                acc
            })
            .collect()
    }

    /// Complex conjugation of an expression: conjugates the coefficients
    /// and swaps `x_k` with `x̄_k`.
    pub fn conjugate(p: &CoeffPolynomial, n: usize) -> CoeffPolynomial {
        swap_vars(&p.conj(), n)
    }

    /// The substitution `x_k ↔ x̄_k` with coefficients untouched, e.g.
    /// rewriting an expression in `l` as one in `u` when `l = ū`.
    pub fn swap_vars(p: &CoeffPolynomial, n: usize) -> CoeffPolynomial {
        let mut out = CoeffPolynomial::zero();
        for (m, q) in p.terms() {
            let mut term = CoeffPolynomial::constant(q.clone());
            for (i, &e) in m.exponents().iter().enumerate() {
                let var = i + 1;
                let swapped = if var <= n { var + n } else { var - n };
                for _ in 0..e {
                    term = &term * &x(swapped);
                }
            }
            out = out + term;
        }
        out
    }

    /// Contribution of the unordered pair `{k, j}` to `Σ_i ū_i u̇_i`: the
    /// terms `ū_k ū_j u_{j+k}` coming from `u̇_k` (index `j`) and from
    /// `u̇_j` (index `k`).
    pub fn pair_contribution(n: usize, k: usize, j: usize) -> CoeffPolynomial {
        let term = |a: usize, b: usize| -> CoeffPolynomial {
            if a + b > n {
                return CoeffPolynomial::zero();
            }
            (&(&xbar(a, n) * &xbar(b, n)) * &x(a + b)).scale_int(b as i64 - a as i64)
        };
        if k == j {
            term(k, j)
        } else {
            term(k, j) + term(j, k)
        }
    }
}

pub fn energy(u: &[Complex64]) -> f64 {
    u.iter().map(|z| z.norm_sqr()).fold(0.0, |a, b| a + b)
}

/// `½ Σ |u_k|^2`.
pub fn lagrangian(u: &[Complex64]) -> f64 {
    0.5 * energy(u)
}

#[derive(Clone, Debug, PartialEq)]
pub struct GeodesicSample {
    pub t: f64,
    pub state: CotangentState,
    /// Velocities propagated by the decoupled flow.
    pub u: Vec<Complex64>,
}

/// RK4 on the Hamiltonian system, with `u` (started at `l̄(0)`) carried
/// along by the decoupled velocity flow as a consistency channel.
pub fn integrate_geodesic(s0: &CotangentState, t_end: f64, dt: f64) -> Result<Vec<GeodesicSample>> {
    integrate_geodesic_with(s0, t_end, &FixedStep::new(dt), 1e6)
}

pub fn integrate_geodesic_with(
    s0: &CotangentState,
    t_end: f64,
    opts: &FixedStep,
    blowup: f64,
) -> Result<Vec<GeodesicSample>> {
    let n = s0.n();
    let u0: Vec<Complex64> = momenta_from_state(s0).iter().map(|z| z.conj()).collect();
    let mut y0 = s0.c.clone();
    y0.extend_from_slice(&s0.psibar);
    y0.extend_from_slice(&u0);
    let rhs = |_t: f64, y: &[Complex64]| -> Vec<Complex64> {
        let s = CotangentState {
            c: y[..n].to_vec(),
            psibar: y[n..2 * n].to_vec(),
        };
        let (mut a, b) = hamiltonian_rhs(&s);
        a.extend(b);
        a.extend(u_flow_rhs(&y[2 * n..]));
        a
    };
    let check = |t: f64, y: &[Complex64]| -> Result<()> {
        for (i, v) in y[..n].iter().enumerate() {
            if !(v.norm() <= blowup) {
                return Err(Error::BlowUp {
                    t,
                    index: i + 1,
                    magnitude: v.norm(),
                });
            }
        }
        Ok(())
    };
    let out = integrate_fixed(rhs, 0.0, y0, t_end, opts, check)?;
    Ok(out
        .into_iter()
        .map(|(t, y)| GeodesicSample {
            t,
            state: CotangentState {
                c: y[..n].to_vec(),
                psibar: y[n..2 * n].to_vec(),
            },
            u: y[2 * n..].to_vec(),
        })
        .collect())
}

/// RK4 on the decoupled velocity flow alone; returns `(t, u)` samples.
pub fn integrate_u_flow(u0: &[Complex64], t_end: f64, opts: &FixedStep) -> Result<Vec<(f64, Vec<Complex64>)>> {
    integrate_fixed(|_t, u| u_flow_rhs(u), 0.0, u0.to_vec(), t_end, opts, |_, _| Ok(()))
}

/// Polynomial in `s`, coefficients lowest degree first.
pub type SPoly<T> = Vec<T>;

fn poly_mul_scalar<T: Scalar>(p: &[T], a: &T) -> SPoly<T> {
    p.iter().map(|x| x.clone() * a.clone()).collect()
}

fn poly_add<T: Scalar>(a: &[T], b: &[T]) -> SPoly<T> {
    let len = a.len().max(b.len());
    (0..len)
        .map(|i| {
            let x = a.get(i).cloned().unwrap_or_else(T::zero);
            let y = b.get(i).cloned().unwrap_or_else(T::zero);
            x + y
        })
        .collect()
}

/// Exact solution of `ċ = Σ_k ū_k L_k(c)` with constant `ū`: each `c_i(s)`
/// is the antiderivative of `ū_i + Σ_{j<i} (j+1) c_j(s) ū_{i-j}` plus `c_i(0)`.
/// Takes the conjugated velocities `ubar` directly so the coefficient ring
/// can be symbolic.
pub fn constant_u_polynomials<T: Scalar>(c0: &[T], ubar: &[T]) -> Result<Vec<SPoly<T>>> {
    if c0.len() != ubar.len() {
        return Err(Error::Dimension(format!("{} velocities for {} coefficients", ubar.len(), c0.len())));
    }
    let n = c0.len();
    let mut polys: Vec<SPoly<T>> = Vec::with_capacity(n);
    for i in 1..=n {
        // Integrand as a polynomial in s.
        let mut integrand: SPoly<T> = vec![ubar[i - 1].clone()];
        for j in 1..i {
            let term = poly_mul_scalar(&polys[j - 1], &ubar[i - j - 1].scale_int(j as i64 + 1));
            integrand = poly_add(&integrand, &term);
        }
        let mut anti = vec![c0[i - 1].clone()];
        for (d, a) in integrand.iter().enumerate() {
            anti.push(a.div_int(d as i64 + 1));
        }
        while anti.len() > 1 && anti.last().is_some_and(Zero::is_zero) {
            anti.pop();
        }
        polys.push(anti);
    }
    Ok(polys)
}

/// Evaluates the constant-velocity geodesic at parameter `s`.
pub fn constant_u_geodesic(c0: &[Complex64], u0: &[Complex64], s: f64) -> Result<Vec<Complex64>> {
    let ubar: Vec<Complex64> = u0.iter().map(|z| z.conj()).collect();
    let polys = constant_u_polynomials(c0, &ubar)?;
    Ok(polys
        .iter()
        .map(|p| p.iter().rev().fold(Complex64::default(), |acc, a| acc * s + a))
        .collect())
}

/// RK4 on `ċ = Σ_k ū_k L_k(c)` with the velocities held fixed; the
/// numerical counterpart of [`constant_u_geodesic`].
pub fn constant_u_numeric(c0: &[Complex64], u0: &[Complex64], s: f64, opts: &FixedStep) -> Result<Vec<Complex64>> {
    if c0.len() != u0.len() {
        return Err(Error::Dimension(format!("{} velocities for {} coefficients", u0.len(), c0.len())));
    }
    let ubar: Vec<Complex64> = u0.iter().map(|z| z.conj()).collect();
    let rhs = |_s: f64, c: &[Complex64]| cdot_from_u(&ubar, c).expect("equal lengths");
    let out = integrate_fixed(rhs, 0.0, c0.to_vec(), s, opts, |_, _| Ok(()))?;
    Ok(out.last().expect("non-empty").1.clone())
}

/// Exact constant-velocity polynomials with symbolic `ū_k` (variable `k`)
/// and `c(0) = 0`.
pub fn constant_u_symbolic(n: usize) -> Vec<SPoly<CoeffPolynomial>> {
    let c0 = vec![CoeffPolynomial::zero(); n];
    let ubar: Vec<CoeffPolynomial> = (1..=n).map(CoeffPolynomial::var).collect();
    constant_u_polynomials(&c0, &ubar).expect("equal lengths")
}

/// Exact rational-complex version of [`constant_u_geodesic`]'s coefficients.
pub fn constant_u_exact(c0: &[QComplex], ubar: &[QComplex]) -> Result<Vec<SPoly<QComplex>>> {
    constant_u_polynomials(c0, ubar)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::recurrences::u_from_cdot;

    fn cx(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn momenta_examples() {
        let psi = vec![cx(1.0, 2.0), cx(-0.5, 0.1)];
        let s = CotangentState::new(vec![cx(0.0, 0.0); 2], psi.clone()).unwrap();
        assert_eq!(momenta_from_state(&s), psi);
        let c = vec![cx(0.3, -0.1), cx(0.7, 0.2)];
        let s = CotangentState::new(c.clone(), psi.clone()).unwrap();
        let l = momenta_from_state(&s);
        assert_eq!(l[0], psi[0] + c[0] * 2.0 * psi[1]);
        assert_eq!(l[1], psi[1]);
        let back = state_from_momenta(&l, &c).unwrap();
        for (a, b) in back.iter().zip(&psi) {
            assert!((a - b).norm() < 1e-15);
        }
    }

    #[test]
    fn hamiltonian_examples() {
        let s = CotangentState::new(vec![cx(0.0, 0.0); 3], vec![cx(1.0, 0.0), cx(0.0, 0.0), cx(0.0, 0.0)]).unwrap();
        let (cd, pd) = hamiltonian_rhs(&s);
        assert_eq!(cd, vec![cx(1.0, 0.0), cx(0.0, 0.0), cx(0.0, 0.0)]);
        assert!(pd.iter().all(|z| z.norm() == 0.0));

        let s = CotangentState::new(vec![cx(0.2, 0.4); 4], vec![cx(0.3, -0.6); 4]).unwrap();
        assert_eq!(hamiltonian_rhs(&s).1[3], cx(0.0, 0.0));

        let s = CotangentState::new(vec![cx(0.5, 0.5)], vec![cx(2.0, 3.0)]).unwrap();
        let out = integrate_geodesic(&s, 1.5, 0.1).unwrap();
        let last = out.last().unwrap();
        assert!((last.state.c[0] - (cx(2.0, -3.0) * 1.5 + cx(0.5, 0.5))).norm() < 1e-13);
        assert_eq!(last.state.psibar[0], cx(2.0, 3.0));
    }

    #[test]
    fn u_flow_examples() {
        let u2 = [cx(1.0, 2.0), cx(-3.0, 0.5)];
        assert!(u_flow_rhs(&u2).iter().all(|z| z.norm() == 0.0));
        let u = [cx(1.0, 2.0), cx(-3.0, 0.5), cx(0.25, -1.0)];
        let d = u_flow_rhs(&u);
        assert_eq!(d[0], u[1].conj() * u[2]);
        assert_eq!(d[1], -(u[0].conj() * u[2]));
        assert_eq!(d[2], cx(0.0, 0.0));
        assert!(u_flow_rhs(&[cx(0.0, 0.0); 5]).iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn conjugate_forms_agree() {
        let u = [cx(1.0, 2.0), cx(-3.0, 0.5), cx(0.25, -1.0), cx(0.1, 0.9)];
        let ubar: Vec<Complex64> = u.iter().map(|z| z.conj()).collect();
        let via_l: Vec<Complex64> = l_flow_rhs(&ubar).iter().map(|z| z.conj()).collect();
        assert_eq!(via_l, u_flow_rhs(&u));
        for n in 1..=6 {
            // Conjugate l̇, then substitute l = ū: the result must be u̇.
            let conj: Vec<CoeffPolynomial> = symbolic::l_flow(n)
                .iter()
                .map(|p| symbolic::swap_vars(&symbolic::conjugate(p, n), n))
                .collect();
            assert_eq!(conj, symbolic::u_flow(n));
        }
    }

    #[test]
    fn pairwise_cancellation() {
        for n in 1..=6 {
            for k in 1..=n {
                for j in k..=n {
                    assert!(symbolic::pair_contribution(n, k, j).is_zero(), "n={n} k={k} j={j}");
                }
            }
        }
    }

    #[test]
    fn lagrangian_examples() {
        assert_eq!(lagrangian(&[cx(0.0, 0.0)]), 0.0);
        assert_eq!(lagrangian(&[cx(1.0, 0.0), cx(0.0, 0.0)]), 0.5);
        assert_eq!(lagrangian(&[cx(3.0, 0.0), cx(4.0, 0.0)]), 12.5);
    }

    #[test]
    fn printed_constant_u_lines() {
        let polys = constant_u_symbolic(3);
        let v = |k| CoeffPolynomial::var(k);
        assert_eq!(polys[0], vec![CoeffPolynomial::zero(), v(1)]);
        assert_eq!(polys[1], vec![CoeffPolynomial::zero(), v(2), &v(1) * &v(1)]);
        for (i, p) in polys.iter().enumerate() {
            assert_eq!(p.len() - 1, i + 1, "degree of c_{}", i + 1);
        }
    }

    #[test]
    fn constant_u_numeric_matches_polynomials() {
        let c0 = vec![cx(0.1, -0.2), cx(0.05, 0.0), cx(-0.1, 0.1)];
        let u0 = vec![cx(0.3, 0.4), cx(-0.2, 0.1), cx(0.5, 0.0)];
        let num = constant_u_numeric(&c0, &u0, 1.0, &FixedStep::new(1e-2)).unwrap();
        let poly = constant_u_geodesic(&c0, &u0, 1.0).unwrap();
        for (a, b) in num.iter().zip(&poly) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn channels_agree_along_geodesic() {
        let c = vec![cx(0.1, 0.0), cx(-0.05, 0.1), cx(0.02, 0.0), cx(0.0, 0.03)];
        let psi = vec![cx(0.4, -0.2), cx(0.1, 0.3), cx(-0.2, 0.1), cx(0.3, 0.0)];
        let s0 = CotangentState::new(c, psi).unwrap();
        let out = integrate_geodesic(&s0, 1.0, 1e-3).unwrap();
        for smp in out.iter().step_by(100) {
            let l = momenta_from_state(&smp.state);
            for (a, b) in l.iter().zip(&smp.u) {
                assert!((a.conj() - b).norm() < 1e-9);
            }
            let (cd, _) = hamiltonian_rhs(&smp.state);
            let u = u_from_cdot(&cd, &smp.state.c).unwrap();
            for (a, b) in u.iter().zip(&smp.u) {
                assert!((a - b).norm() < 1e-9);
            }
        }
    }
}
