//! Exact identity checks over the polynomial ring, packaged as reports.
//!
//! Residuals are the ℓ¹ norm of the rational coefficients of the
//! difference, summed over the compared slots. They are zero exactly when
//! the identity holds.

use num_traits::Zero;
use serde::Serialize;

use crate::algebra::fields::{kirillov_field, lie_bracket};
use crate::algebra::poly::CoeffPolynomial;
use crate::algebra::recurrences::{kirillov_action_on_p, omega_forms, omega_forms_closed, p_polynomials, pi_expansion};
use crate::error::{Error, Result};
use crate::evolution::negative::{build_l_nonpositive, kirillov_action_check, l_nonpositive_via_l2};
use crate::scalar::{QComplex, Scalar};
use crate::series::TruncatedTaylor;

fn norm1(p: &CoeffPolynomial) -> f64 {
    p.terms().map(|(_, q)| q.to_complex64().norm()).fold(0.0, |a, b| a + b)
}

fn c(k: usize) -> CoeffPolynomial {
    CoeffPolynomial::var(k)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WittEntry {
    pub m: usize,
    pub k: usize,
    pub slots: usize,
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WittReport {
    pub n: usize,
    pub entries: Vec<WittEntry>,
}

impl WittReport {
    pub fn all_zero(&self) -> bool {
        self.entries.iter().all(|e| e.residual == 0.0)
    }
}

/// `[L_m, L_k] - (k-m) L_{m+k}` for `1 <= m < k`, `m + k <= n`, on the
/// slots the bracket trusts.
pub fn witt_check(n: usize) -> Result<WittReport> {
    let fields: Vec<_> = (1..=n).map(|j| kirillov_field(j, n)).collect::<Result<_>>()?;
    let mut entries = Vec::new();
    for m in 1..n {
        for k in (m + 1)..=(n - m) {
            let br = lie_bracket(&fields[m - 1], &fields[k - 1])?;
            let rhs = fields[m + k - 1].scale(&QComplex::from(k as i64 - m as i64));
            let slots = br.trusted().min(rhs.trusted());
            let residual = (0..slots)
                .map(|i| norm1(&(&br.components()[i] - &rhs.components()[i])))
                .fold(0.0, |a, b| a + b);
            entries.push(WittEntry { m, k, slots, residual });
        }
    }
    Ok(WittReport { n, entries })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PActionEntry {
    pub k: usize,
    pub m: usize,
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct POracleReport {
    pub n: usize,
    /// `|P_k - [z^k] 1/f'|` for `k = 0..n`.
    pub reciprocal_residuals: Vec<f64>,
    pub action: Vec<PActionEntry>,
    /// `P_k` as text, for inspection.
    pub polynomials: Vec<String>,
}

impl POracleReport {
    pub fn all_zero(&self) -> bool {
        self.reciprocal_residuals.iter().all(|&r| r == 0.0) && self.action.iter().all(|e| e.residual == 0.0)
    }
}

/// `P_k` against the series reciprocal of `f' = 1 + Σ (k+1) c_k z^k` for
/// `k <= n`, and `L_k P_m = (m-2k-1) P_{m-k}` for `1 <= k <= m <= m_max`.
pub fn p_oracle(n: usize, m_max: usize) -> Result<POracleReport> {
    let p = p_polynomials(n.max(m_max));
    let mut fp = vec![CoeffPolynomial::int(1)];
    fp.extend((1..=n).map(|k| c(k).scale_int(k as i64 + 1)));
    let recip = TruncatedTaylor::new(fp).reciprocal()?;
    let reciprocal_residuals = (0..=n).map(|k| norm1(&(&p[k] - &recip.coeffs()[k]))).collect();
    let mut action = Vec::new();
    for m in 1..=m_max {
        for k in 1..=m {
            let lhs = kirillov_action_on_p(k, m)?;
            let rhs = p[m - k].scale_int(m as i64 - 2 * k as i64 - 1);
            action.push(PActionEntry {
                k,
                m,
                residual: norm1(&(lhs - rhs)),
            });
        }
    }
    Ok(POracleReport {
        n,
        reciprocal_residuals,
        action,
        polynomials: p[..=n].iter().map(|q| q.to_string()).collect(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DualityReport {
    pub n: usize,
    /// `Σ_{k,m} |ω_k(L_m) - δ_{km}|`.
    pub pairing_residual: f64,
    /// `Σ_k |ω_k^{recurrence} - ω_k^{closed}|`.
    pub constructions_residual: f64,
}

impl DualityReport {
    pub fn all_zero(&self) -> bool {
        self.pairing_residual == 0.0 && self.constructions_residual == 0.0
    }
}

pub fn duality_check(n: usize) -> Result<DualityReport> {
    let rec = omega_forms(n);
    let closed = omega_forms_closed(n);
    let mut pairing_residual = 0.0;
    for m in 1..=n {
        let field = kirillov_field(m, n)?;
        for (k, w) in rec.iter().enumerate() {
            let mut v = w.pair(&field)?;
            if k + 1 == m {
                v = v - CoeffPolynomial::int(1);
            }
            pairing_residual += norm1(&v);
        }
    }
    let mut constructions_residual = 0.0;
    for (a, b) in rec.iter().zip(&closed) {
        for (x, y) in a.coeffs().iter().zip(b.coeffs()) {
            constructions_residual += norm1(&(x - y));
        }
    }
    Ok(DualityReport {
        n,
        pairing_residual,
        constructions_residual,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct L0ExpansionReport {
    pub n: usize,
    pub slots: usize,
    /// Component residual against `k c_k`, the `z^{k+1}` coefficient of `z f' - f`.
    pub residual: f64,
    pub pi: Vec<String>,
}

/// `Σ_{m=1}^n Π_m L_m` applied to `f` against `z f' - f`.
pub fn l0_expansion_check(n: usize) -> Result<L0ExpansionReport> {
    let e = pi_expansion(n)?;
    let field = e.l0_field()?;
    let lf = field.on_function();
    let mut fc = vec![CoeffPolynomial::zero(), CoeffPolynomial::int(1)];
    fc.extend((1..=n).map(c));
    let f = TruncatedTaylor::new(fc);
    let target = &f.derivative().shift_up(1) - &f;
    let slots = field.trusted();
    let mut residual = 0.0;
    for k in 0..=slots + 1 {
        let a = lf.coeff(k).cloned().unwrap_or_else(CoeffPolynomial::zero);
        let b = target.coeff(k).cloned().unwrap_or_else(CoeffPolynomial::zero);
        residual += norm1(&(a - b));
    }
    Ok(L0ExpansionReport {
        n,
        slots,
        residual,
        pi: e.pi.iter().map(|p| p.to_string()).collect(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LeadingTerm {
    pub generator: String,
    /// Index `j` of the momentum `ψ̄_j` whose coefficient is compared.
    pub slot: usize,
    pub coefficient: String,
    pub expected: String,
    pub matches: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NegativeReport {
    pub n: usize,
    pub depth: usize,
    pub generators: Vec<String>,
    pub trusted: Vec<usize>,
    pub leading_terms: Vec<LeadingTerm>,
    /// `(k, trusted slots, mismatching slots)` for `k = 0, -1, -2`.
    pub action_checks: Vec<(i64, usize, Vec<usize>)>,
    /// Slots compared between the two routes to `L_{-5}`, when `depth >= 5`.
    pub cross_route_slots: Option<usize>,
    pub cross_route_agrees: Option<bool>,
}

impl NegativeReport {
    pub fn all_ok(&self) -> bool {
        self.leading_terms.iter().all(|l| l.matches)
            && self.action_checks.iter().all(|a| a.2.is_empty())
            && self.cross_route_agrees != Some(false)
    }
}

/// Builds `L_0..L_{-depth}` and checks the printed `ψ̄_1` coefficients of
/// `L_0`, `L_{-1}`, `L_{-2}`, the function-level formulas, and the two
/// bracket routes to `L_{-5}`.
pub fn negative_check(n: usize, depth: usize) -> Result<NegativeReport> {
    if depth < 2 {
        return Err(Error::InvalidArgument("depth must be at least 2".into()));
    }
    let ls = build_l_nonpositive(n, depth)?;
    let c1 = c(1);
    let c1sq = &c1 * &c1;
    let expected = [
        ("L_0", c1.clone()),
        ("L_-1", c(2).scale_int(3) - c1sq.scale_int(2)),
        ("L_-2", c(3).scale_int(5) - (&c1 * &c(2)).scale_int(6) + (&c1sq * &c1).scale_int(2)),
    ];
    let mut leading_terms: Vec<LeadingTerm> = expected
        .iter()
        .zip(&ls)
        .map(|((name, e), l)| LeadingTerm {
            generator: name.to_string(),
            slot: 1,
            coefficient: l.coeffs()[0].to_string(),
            expected: e.to_string(),
            matches: &l.coeffs()[0] == e,
        })
        .collect();
    // L_0 continues as 2 c_2 ψ̄_2 + 3 c_3 ψ̄_3 + ...
    for k in 2..=ls[0].trusted() {
        let e = c(k).scale_int(k as i64);
        leading_terms.push(LeadingTerm {
            generator: "L_0".into(),
            slot: k,
            coefficient: ls[0].coeffs()[k - 1].to_string(),
            expected: e.to_string(),
            matches: ls[0].coeffs()[k - 1] == e,
        });
    }
    let action_checks = [0, -1, -2]
        .iter()
        .map(|&k| kirillov_action_check(k, n).map(|r| (k, r.trusted, r.mismatches)))
        .collect::<Result<_>>()?;
    let (cross_route_slots, cross_route_agrees) = if depth >= 5 {
        let a = &ls[5];
        let b = l_nonpositive_via_l2(n, 5)?;
        (Some(a.trusted().min(b.trusted())), Some(a.agrees_on_trusted(&b)))
    } else {
        (None, None)
    };
    Ok(NegativeReport {
        n,
        depth,
        generators: ls.iter().map(|l| l.to_string()).collect(),
        trusted: ls.iter().map(|l| l.trusted()).collect(),
        leading_terms,
        action_checks,
        cross_route_slots,
        cross_route_agrees,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_instances_hold() {
        let w = witt_check(6).unwrap();
        assert!(w.all_zero());
        assert_eq!(w.entries.len(), 6);
        assert!(p_oracle(6, 5).unwrap().all_zero());
        assert!(duality_check(5).unwrap().all_zero());
        let l0 = l0_expansion_check(5).unwrap();
        assert_eq!(l0.residual, 0.0);
        assert_eq!(l0.slots, 5);
        assert!(negative_check(6, 2).unwrap().all_ok());
    }

    #[test]
    fn residual_detects_a_wrong_identity() {
        let p = p_polynomials(3);
        assert_eq!(norm1(&(&p[2] - &p[2])), 0.0);
        assert_eq!(norm1(&p[1]), 2.0);
    }
}
