//! Conserved Laurent coefficients of `L(z) = f'(z) ψ̄(z)` along a trajectory.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::evolution::flow::{EvolutionState, Trajectory};
use crate::series::{LaurentWindow, TruncatedTaylor};

/// Time series of one Laurent coefficient.
///
/// `k >= 1` labels `L_k`, the coefficient of `z^{-k}`; `k <= 0` labels
/// `𝓛_k`, the coefficient of `z^{-k}` in the non-negative part.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConservedSeries {
    pub k: i64,
    pub name: String,
    pub series: Vec<SeriesPoint>,
    pub max_abs_drift: f64,
    /// Drift relative to `|value(0)|`; equal to the absolute drift when the
    /// initial value is exactly zero.
    pub max_rel_drift: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SeriesPoint {
    pub t: f64,
    pub re: f64,
    pub im: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConservedReport {
    pub quantities: Vec<ConservedSeries>,
}

impl ConservedReport {
    pub fn get(&self, k: i64) -> Option<&ConservedSeries> {
        self.quantities.iter().find(|q| q.k == k)
    }

    /// `L_1..L_n`.
    pub fn positive(&self) -> impl Iterator<Item = &ConservedSeries> {
        self.quantities.iter().filter(|q| q.k >= 1)
    }

    /// `𝓛_0, 𝓛_{-1}, ...` that were computable.
    pub fn nonpositive(&self) -> impl Iterator<Item = &ConservedSeries> {
        self.quantities.iter().filter(|q| q.k <= 0)
    }

    pub fn max_abs_drift(&self) -> f64 {
        self.quantities.iter().map(|q| q.max_abs_drift).fold(0.0, f64::max)
    }

    pub fn max_rel_drift(&self) -> f64 {
        self.quantities.iter().map(|q| q.max_rel_drift).fold(0.0, f64::max)
    }
}

/// `L(z) = f'(z) ψ̄(z)` for one state, with its validity range.
pub fn generating_function(state: &EvolutionState) -> Result<LaurentWindow<Complex64>> {
    let psi = state.psibar.as_ref().ok_or(Error::MissingMomenta)?;
    let n = state.n();
    let mut f = vec![Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)];
    f.extend_from_slice(&state.c);
    let fprime = TruncatedTaylor::new(f).derivative();
    let m = state.psibar_low.len();
    let window = n.max(m);
    let terms = psi
        .iter()
        .enumerate()
        .map(|(i, v)| (-(i as i64 + 1), *v))
        .chain(state.psibar_low.iter().enumerate().map(|(i, v)| (i as i64, *v)));
    // Powers z^{m}.. and beyond are momenta we do not track.
    let psi_w = LaurentWindow::from_terms(window, terms).with_validity(-(window as i64), m as i64 - 1);
    Ok(LaurentWindow::from_taylor(&fprime).mul(&psi_w))
}

fn drift(values: &[Complex64]) -> (f64, f64) {
    let v0 = values[0];
    let abs = values.iter().map(|v| (v - v0).norm()).fold(0.0, f64::max);
    let rel = if v0.norm() > 0.0 { abs / v0.norm() } else { abs };
    (abs, rel)
}

/// Records `L_k` for `k = 1..n` and every `𝓛_{-k}`, `k = 0..n`, that lies
/// in the trusted range at every sample.
pub fn conserved_virasoro(traj: &Trajectory) -> Result<ConservedReport> {
    let first = traj.samples.first().ok_or(Error::MissingMomenta)?;
    let n = first.n() as i64;
    let windows: Vec<LaurentWindow<Complex64>> =
        traj.samples.iter().map(generating_function).collect::<Result<_>>()?;
    let mut quantities = Vec::new();
    for power in (-n..=n).rev() {
        if !windows.iter().all(|w| w.trusted(power).is_some()) {
            continue;
        }
        let values: Vec<Complex64> = windows.iter().map(|w| *w.trusted(power).expect("checked")).collect();
        let (max_abs_drift, max_rel_drift) = drift(&values);
        let k = -power;
        let name = if k >= 1 { format!("L_{k}") } else { format!("Lcal_{k}") };
        quantities.push(ConservedSeries {
            k,
            name,
            series: traj
                .samples
                .iter()
                .zip(&values)
                .map(|(s, v)| SeriesPoint { t: s.t, re: v.re, im: v.im })
                .collect(),
            max_abs_drift,
            max_rel_drift,
        });
    }
    quantities.sort_by_key(|q| if q.k >= 1 { (0, q.k) } else { (1, -q.k) });
    Ok(ConservedReport { quantities })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolution::driving::DrivingFunction;
    use crate::evolution::flow::integrate;

    fn cx(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn printed_first_coefficient() {
        // z^{-1} coefficient of (1 + 2c1 z + 3c2 z^2)(ψ̄1/z + ψ̄2/z^2 + ψ̄3/z^3).
        let s = EvolutionState::identity(3)
            .momenta(vec![cx(1.0, 0.5), cx(-2.0, 0.0), cx(0.3, 0.3)]);
        let mut s = s;
        s.c = vec![cx(0.1, 0.2), cx(-0.4, 0.0), cx(0.0, 0.1)];
        let l = generating_function(&s).unwrap();
        let psi = s.psibar.as_ref().unwrap();
        let expected = psi[0] + 2.0 * s.c[0] * psi[1] + 3.0 * s.c[1] * psi[2];
        assert!((l.trusted(-1).unwrap() - expected).norm() < 1e-15);
        assert!(l.trusted(0).is_none());
    }

    #[test]
    fn frozen_state_is_exactly_conserved() {
        let p = DrivingFunction::constant_real(&[1.0]).unwrap();
        let s0 = EvolutionState::with_default_momenta(4).low_momenta(vec![cx(0.5, 0.0); 2]);
        let rep = conserved_virasoro(&integrate(&s0, &p, 1.0, 0.25).unwrap()).unwrap();
        assert_eq!(rep.positive().count(), 4);
        assert_eq!(rep.nonpositive().count(), 2);
        assert_eq!(rep.max_abs_drift(), 0.0);
        assert_eq!(rep.get(1).unwrap().series[0].re, 1.0);
    }

    #[test]
    fn requires_momenta() {
        let p = DrivingFunction::constant_real(&[1.0, 0.5]).unwrap();
        let tr = integrate(&EvolutionState::identity(3), &p, 0.1, 0.05).unwrap();
        assert!(matches!(conserved_virasoro(&tr), Err(Error::MissingMomenta)));
    }
}
