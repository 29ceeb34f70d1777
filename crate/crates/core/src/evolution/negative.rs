//! Symbolic construction of `L_0, L_{-1}, L_{-2}, ...` as momenta-linear
//! functionals, starting from the conserved non-negative coefficients
//! `𝓛_{-k} = Σ_{i≥0} (i+1) c_i ψ̄_{i-k}` (with `c_0 = 1`) of `f'(z) ψ̄(z)`.
//!
//! The seeds remove the non-positive momenta explicitly:
//!
//! ```text
//! L_0    = 𝓛_0    - (ψ̄_0 - ψ̄_0*)
//! L_{-1} = 𝓛_{-1} - (ψ̄_{-1} - ψ̄_{-1}*) - 2c_1 (ψ̄_0 - ψ̄_0*)
//! L_{-2} = 𝓛_{-2} - (ψ̄_{-2} - ψ̄_{-2}*) - 2c_1 (ψ̄_{-1} - ψ̄_{-1}*) - 3c_2 (ψ̄_0 - ψ̄_0*)
//! ```
//!
//! with `ψ̄_0* = -Σ c_k ψ̄_k`, `ψ̄_{-1}* = 0`, and `ψ̄_{-2}*` read off the
//! function `1/z - 1/f - c_1 - (c_2 - c_1^2) f` through the pairing
//! `ψ̄_k ↔ z^{k+1}`. Deeper generators follow from
//! `L_{-m} = {L_{-m+1}, L_{-1}} / (m - 2)`.

use num_traits::Zero;

use crate::algebra::fields::{poisson_bracket, CovariantFunctional};
use crate::algebra::poly::CoeffPolynomial;
use crate::error::{Error, Result};
use crate::scalar::{QComplex, Scalar};
use crate::series::TruncatedTaylor;

fn c(k: usize) -> CoeffPolynomial {
    if k == 0 {
        CoeffPolynomial::int(1)
    } else {
        CoeffPolynomial::var(k)
    }
}

/// `𝓛_{-k}` with explicit entries for `ψ̄_0..ψ̄_{-k}`. Slots `j > n - k`
/// would need `c_{j+k}` beyond the truncation and are untrusted.
pub fn curly_l(k: usize, n: usize) -> CovariantFunctional {
    let coeffs = (1..=n)
        .map(|j| if j + k <= n { c(j + k).scale_int((j + k + 1) as i64) } else { CoeffPolynomial::zero() })
        .collect();
    let mut out = CovariantFunctional::new(coeffs).with_trusted(n.saturating_sub(k));
    for i in 0..=k {
        out = out.with_extra(i as i64 - k as i64, c(i).scale_int(i as i64 + 1));
    }
    out
}

/// `ψ̄_index` as a functional (index <= 0).
fn psi_low(index: i64, n: usize) -> CovariantFunctional {
    CovariantFunctional::zero(n).with_extra(index, CoeffPolynomial::int(1))
}

/// `f/z = 1 + Σ c_k z^k` through `z^n`, symbolic.
fn f_over_z(n: usize) -> TruncatedTaylor<CoeffPolynomial> {
    TruncatedTaylor::new((0..=n).map(c).collect())
}

/// `ψ̄_0* = -Σ c_k ψ̄_k`.
pub fn psi0_star(n: usize) -> CovariantFunctional {
    CovariantFunctional::new((1..=n).map(|k| -c(k)).collect())
}

/// `ψ̄_{-2}*` from `z (1/z - 1/f - c_1 - (c_2 - c_1^2) f)
/// = 1 - z/f - c_1 z - (c_2 - c_1^2) z f`, whose `z^{k+2}` coefficient
/// multiplies `ψ̄_k`. Known through `z^n`, so slots up to `n - 2` are trusted.
pub fn psi_m2_star(n: usize) -> Result<CovariantFunctional> {
    let fz = f_over_z(n);
    let inv = fz.reciprocal()?;
    let c1 = c(1);
    let a = &c(2) - &(&c1 * &c1);
    let zf = fz.shift_up(2).truncate(n);
    let mut s = -&inv;
    s = &s - &TruncatedTaylor::monomial(1, c1, n);
    s = &s - &zf.scale(&a);
    let coeffs = (1..=n)
        .map(|k| if k + 2 <= n { s.coeffs()[k + 2].clone() } else { CoeffPolynomial::zero() })
        .collect();
    Ok(CovariantFunctional::new(coeffs).with_trusted(n.saturating_sub(2)))
}

fn require_linear(f: CovariantFunctional, what: &str) -> Result<CovariantFunctional> {
    if !f.is_momenta_linear() {
        return Err(Error::InvalidArgument(format!("{what} retained non-positive momenta")));
    }
    Ok(f)
}

/// The three seeds `L_0, L_{-1}, L_{-2}` at truncation `n`.
pub fn seeds(n: usize) -> Result<[CovariantFunctional; 3]> {
    if n < 3 {
        return Err(Error::InvalidArgument(format!("seeds need n >= 3, got {n}")));
    }
    let p0 = psi0_star(n);
    let d0 = psi_low(0, n).sub(&p0)?; // ψ̄_0 - ψ̄_0*
    let d1 = psi_low(-1, n); // ψ̄_{-1} - 0
    let d2 = psi_low(-2, n).sub(&psi_m2_star(n)?)?;

    let l0 = curly_l(0, n).sub(&d0)?;
    let l1 = curly_l(1, n).sub(&d1)?.sub(&d0.times(&c(1).scale_int(2)))?;
    let l2 = curly_l(2, n)
        .sub(&d2)?
        .sub(&d1.times(&c(1).scale_int(2)))?
        .sub(&d0.times(&c(2).scale_int(3)))?;
    Ok([
        require_linear(l0, "L_0")?,
        require_linear(l1, "L_-1")?,
        require_linear(l2, "L_-2")?,
    ])
}

/// `[L_0, L_{-1}, ..., L_{-m}]`, all momenta-linear.
pub fn build_l_nonpositive(n: usize, m: usize) -> Result<Vec<CovariantFunctional>> {
    if n < 3 || m + 1 > n {
        return Err(Error::InvalidArgument(format!(
            "depth {m} needs 3 <= n and m <= n - 1, got n = {n}"
        )));
    }
    let [l0, l1, l2] = seeds(n)?;
    let mut out = vec![l0, l1.clone(), l2];
    for k in 3..=m {
        let br = poisson_bracket(&out[k - 1], &l1)?;
        let next = br.scale(&QComplex::from_ratio(1, k as i64 - 2));
        out.push(require_linear(next, "bracket")?);
    }
    out.truncate(m + 1);
    Ok(out)
}

/// `L_{-m}` by the second route `{L_{-m+2}, L_{-2}} / (m - 4)`, for `m >= 5`.
pub fn l_nonpositive_via_l2(n: usize, m: usize) -> Result<CovariantFunctional> {
    if m < 5 {
        return Err(Error::InvalidArgument("second route needs m >= 5".into()));
    }
    let all = build_l_nonpositive(n, m - 2)?;
    let br = poisson_bracket(&all[m - 2], &all[2])?;
    Ok(br.scale(&QComplex::from_ratio(1, m as i64 - 4)))
}

/// Printed function-level action of `L_0`, `L_{-1}`, `L_{-2}` on a symbolic
/// normalized `f`, as the coefficient list of powers `z^0, z^1, ...`.
/// `L_0[f] = z f' - f`, `L_{-1}[f] = f' - 2c_1 f - 1`,
/// `L_{-2}[f] = f'/z - 1/f - 3c_1 + (c_1^2 - 4c_2) f`.
pub fn function_formula(k: i64, n: usize) -> Result<Vec<CoeffPolynomial>> {
    let fz = f_over_z(n);
    let f = fz.shift_up(1); // order n + 1
    let fp = f.derivative(); // order n
    let c1 = c(1);
    match k {
        0 => {
            let zfp = fp.shift_up(1);
            Ok((&zfp - &f).into_coeffs())
        }
        -1 => {
            let s = &(&fp - &f.scale(&c1.scale_int(2))) - &TruncatedTaylor::constant(CoeffPolynomial::int(1), n + 1);
            Ok(s.into_coeffs())
        }
        -2 => {
            // z L_{-2}[f] = f' - z/f - 3c_1 z + (c_1^2 - 4c_2) z f, through z^n.
            let inv = fz.reciprocal()?;
            let b = &(&c1 * &c1) - &c(2).scale_int(4);
            let mut s = &fp - &inv;
            s = &s - &TruncatedTaylor::monomial(1, c1.scale_int(3), n);
            s = &s + &fz.shift_up(2).truncate(n).scale(&b);
            let coeffs = s.into_coeffs();
            if !coeffs[0].is_zero() {
                return Err(Error::InvalidArgument("z^-1 term of L_-2[f] does not cancel".into()));
            }
            Ok(coeffs[1..].to_vec())
        }
        _ => Err(Error::InvalidArgument(format!("no printed formula for k = {k}"))),
    }
}

/// Outcome of [`kirillov_action_check`].
#[derive(Clone, Debug, PartialEq)]
pub struct ActionCheck {
    pub k: i64,
    pub n: usize,
    /// Slots compared: `ψ̄_j` against the `z^{j+1}` coefficient.
    pub trusted: usize,
    /// Slots where the two routes disagree; the low powers `z^0, z^1`
    /// must vanish and a violation there is reported as slot 0.
    pub mismatches: Vec<usize>,
}

impl ActionCheck {
    pub fn ok(&self) -> bool {
        self.mismatches.is_empty()
    }
}

/// Compares the printed function-level formula with the functional from
/// [`build_l_nonpositive`] through `ψ̄_j ↔ z^{j+1}`.
pub fn kirillov_action_check(k: i64, n: usize) -> Result<ActionCheck> {
    if !(-2..=0).contains(&k) {
        return Err(Error::InvalidArgument(format!("k must be 0, -1 or -2, got {k}")));
    }
    let seeds = seeds(n)?;
    let func = &seeds[(-k) as usize];
    let series = function_formula(k, n)?;
    let trusted = func.trusted().min(series.len().saturating_sub(2));
    let mut mismatches = Vec::new();
    if !series[0].is_zero() || !series[1].is_zero() {
        mismatches.push(0);
    }
    for j in 1..=trusted {
        if series[j + 1] != func.coeffs()[j - 1] {
            mismatches.push(j);
        }
    }
    Ok(ActionCheck {
        k,
        n,
        trusted,
        mismatches,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::fields::kirillov_field;
    use crate::algebra::fields::lie_bracket;

    #[test]
    fn printed_leading_terms() {
        let ls = build_l_nonpositive(6, 2).unwrap();
        let c1 = c(1);
        assert_eq!(ls[0].coeffs()[0], c1);
        assert_eq!(ls[0].coeffs()[1], c(2).scale_int(2));
        assert_eq!(ls[1].coeffs()[0], c(2).scale_int(3) - (&c1 * &c1).scale_int(2));
        let l2 = c(3).scale_int(5) - (&c1 * &c(2)).scale_int(6) + (&(&c1 * &c1) * &c1).scale_int(2);
        assert_eq!(ls[2].coeffs()[0], l2);
        assert_eq!(ls[0].trusted(), 6);
        assert_eq!(ls[1].trusted(), 5);
        assert_eq!(ls[2].trusted(), 4);
    }

    #[test]
    fn star_leading_term() {
        let s = psi_m2_star(5).unwrap();
        let c1 = c(1);
        let expected = c(3) - (&c1 * &c(2)).scale_int(3) + (&(&c1 * &c1) * &c1).scale_int(2);
        assert_eq!(s.coeffs()[0], expected);
    }

    #[test]
    fn action_checks_pass() {
        for k in [0, -1, -2] {
            let r = kirillov_action_check(k, 7).unwrap();
            assert!(r.ok(), "{r:?}");
            assert!(r.trusted >= 4);
        }
    }

    #[test]
    fn action_examples_at_special_points() {
        let zero = vec![QComplex::zero(); 4];
        for k in [0, -1] {
            for p in function_formula(k, 4).unwrap() {
                assert!(p.eval_exact(&zero).is_zero());
            }
        }
        // f = z + c1 z^2: L_0[f] = c1 z^2.
        let mut pt = zero.clone();
        pt[0] = QComplex::from_ratio(3, 7);
        let l0 = function_formula(0, 4).unwrap();
        assert_eq!(l0[2].eval_exact(&pt), QComplex::from_ratio(3, 7));
        assert!(l0.iter().enumerate().filter(|(i, _)| *i != 2).all(|(_, p)| p.eval_exact(&pt).is_zero()));
    }

    #[test]
    fn cross_route_for_l5() {
        let n = 9;
        let a = build_l_nonpositive(n, 5).unwrap().pop().unwrap();
        let b = l_nonpositive_via_l2(n, 5).unwrap();
        assert!(a.trusted() > 0 && b.trusted() > 0);
        assert!(a.agrees_on_trusted(&b));
    }

    #[test]
    fn depth_is_limited() {
        assert!(build_l_nonpositive(5, 4).is_ok());
        assert!(build_l_nonpositive(5, 5).is_err());
    }

    #[test]
    fn witt_with_positive_generators() {
        // [L_1, L_{-1}] = -2 L_0 on the slots both sides trust.
        let n = 7;
        let ls = build_l_nonpositive(n, 2).unwrap();
        let l1 = kirillov_field(1, n).unwrap();
        let lm1 = ls[1].dual_field().unwrap();
        let br = lie_bracket(&l1, &lm1).unwrap();
        let expected = ls[0].dual_field().unwrap().scale(&QComplex::from_int(-2));
        let t = br.trusted().min(expected.trusted());
        assert!(t >= 4);
        assert_eq!(&br.components()[..t], &expected.components()[..t]);
    }
}
