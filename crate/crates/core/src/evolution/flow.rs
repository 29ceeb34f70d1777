//! Coefficient and momentum dynamics of the Löwner-Kufarev flow.
//!
//! With `w(z,t) = e^{-t} f(z,t)` and `f = z(1 + Σ c_k z^k)` the coefficients
//! obey `ḟ = f(1 - p(w, t))`. The momenta `ψ̄_j` follow the adjoint flow
//! `ψ̄̇_j = -ψ̄_j + Σ_{k≥j} ψ̄_k q_{k-j}` with `q = p(w) + w p'(w)`.
//! The same equation is used for the optional non-positive momenta
//! `ψ̄_0, ψ̄_{-1}, ...`, which are what make the non-negative part of
//! `f'(z) ψ̄(z)` conserved.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::evolution::driving::DrivingFunction;
use crate::ode::{integrate_fixed, FixedStep};
use crate::scalar::Scalar;
use crate::series::TruncatedTaylor;

#[derive(Clone, Debug, PartialEq)]
pub struct EvolutionState {
    pub t: f64,
    /// `c_1..c_n`.
    pub c: Vec<Complex64>,
    /// `ψ̄_1..ψ̄_n`.
    pub psibar: Option<Vec<Complex64>>,
    /// `ψ̄_0, ψ̄_{-1}, ..., ψ̄_{-m}`; empty when not tracked.
    pub psibar_low: Vec<Complex64>,
    /// Scale `a_0` of a non-normalized evolution.
    pub a0: Option<Complex64>,
}

impl EvolutionState {
    /// `w(z, 0) = z`: all coefficients zero, no momenta.
    pub fn identity(n: usize) -> Self {
        Self {
            t: 0.0,
            c: vec![Complex64::default(); n],
            psibar: None,
            psibar_low: Vec::new(),
            a0: None,
        }
    }

    /// Identity map with the default momenta `ψ̄_k = δ_{k1}`.
    pub fn with_default_momenta(n: usize) -> Self {
        let mut psi = vec![Complex64::default(); n];
        if n > 0 {
            psi[0] = Complex64::new(1.0, 0.0);
        }
        Self::identity(n).momenta(psi)
    }

    pub fn momenta(mut self, psibar: Vec<Complex64>) -> Self {
        self.psibar = Some(psibar);
        self
    }

    /// Tracks `ψ̄_0..ψ̄_{-m}` with the given initial values.
    pub fn low_momenta(mut self, low: Vec<Complex64>) -> Self {
        self.psibar_low = low;
        self
    }

    pub fn n(&self) -> usize {
        self.c.len()
    }

    fn validate(&self) -> Result<()> {
        if let Some(p) = &self.psibar {
            if p.len() != self.c.len() {
                return Err(Error::Dimension(format!(
                    "{} momenta for {} coefficients",
                    p.len(),
                    self.c.len()
                )));
            }
        } else if !self.psibar_low.is_empty() {
            return Err(Error::MissingMomenta);
        }
        if let Some(p) = &self.psibar {
            // The support of ψ̄ never grows upward; non-positive momenta
            // need q up to order K + m, which is known only when K + m <= n.
            let top = p.iter().rposition(|z| *z != Complex64::default()).map_or(0, |i| i + 1);
            if top + self.psibar_low.len().saturating_sub(1) > self.n() {
                return Err(Error::InvalidArgument(format!(
                    "{} non-positive momenta exceed what n = {} supports with ψ̄ reaching index {top}",
                    self.psibar_low.len(),
                    self.n()
                )));
            }
        }
        Ok(())
    }

    fn pack(&self) -> Vec<Complex64> {
        let mut y = self.c.clone();
        if let Some(p) = &self.psibar {
            y.extend_from_slice(p);
        }
        y.extend_from_slice(&self.psibar_low);
        y
    }

    fn unpack(template: &Self, t: f64, y: &[Complex64]) -> Self {
        let n = template.n();
        let has_psi = template.psibar.is_some();
        let psibar = has_psi.then(|| y[n..2 * n].to_vec());
        let low_start = if has_psi { 2 * n } else { n };
        Self {
            t,
            c: y[..n].to_vec(),
            psibar,
            psibar_low: y[low_start..].to_vec(),
            a0: template.a0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrajectoryMeta {
    pub dt: f64,
    pub method: String,
    pub driving: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub samples: Vec<EvolutionState>,
    pub meta: TrajectoryMeta,
}

impl Trajectory {
    pub fn last(&self) -> &EvolutionState {
        self.samples.last().expect("trajectories are never empty")
    }
}

/// `F = 1 + Σ c_k z^k` through `z^n`.
fn f_over_z(c: &[Complex64]) -> TruncatedTaylor<Complex64> {
    let mut coeffs = vec![Complex64::new(1.0, 0.0)];
    coeffs.extend_from_slice(c);
    TruncatedTaylor::new(coeffs)
}

/// `w = e^{-t} z F` through `z^n`.
fn w_series(c: &[Complex64], t: f64) -> TruncatedTaylor<Complex64> {
    let n = c.len();
    f_over_z(c).shift_up(1).truncate(n).scale(&Complex64::new((-t).exp(), 0.0))
}

fn velocity_with(c: &[Complex64], p: &TruncatedTaylor<Complex64>, t: f64) -> Vec<Complex64> {
    let n = c.len();
    let pw = p.truncate(n).compose(&w_series(c, t)).expect("w vanishes at 0");
    let g = &TruncatedTaylor::constant(Complex64::new(1.0, 0.0), n) - &pw;
    let prod = &f_over_z(c) * &g;
    prod.coeffs()[1..=n].to_vec()
}

/// `ċ_k = [z^{k+1}] f (1 - p(e^{-t} f, t))`.
pub fn coefficient_velocity(c: &[Complex64], p: &DrivingFunction, t: f64) -> Vec<Complex64> {
    velocity_with(c, &p.series_at(t, c.len()), t)
}

fn q_with(c: &[Complex64], p: &TruncatedTaylor<Complex64>, t: f64) -> TruncatedTaylor<Complex64> {
    let n = c.len();
    // q = d/dw (w p(w)) evaluated at w.
    let dq: Vec<Complex64> = p.coeffs().iter().take(n + 1).enumerate().map(|(k, v)| v.scale_int(k as i64 + 1)).collect();
    let mut dq = dq;
    dq.resize(n + 1, Complex64::default());
    TruncatedTaylor::new(dq).compose(&w_series(c, t)).expect("w vanishes at 0")
}

/// `q(z, t) = p(w) + w p'(w)` as a series in `z` through `z^n`.
pub fn q_series(c: &[Complex64], p: &DrivingFunction, t: f64) -> TruncatedTaylor<Complex64> {
    q_with(c, &p.series_at(t, c.len()), t)
}

fn momentum_with(
    q: &TruncatedTaylor<Complex64>,
    psibar: &[Complex64],
    low: &[Complex64],
) -> (Vec<Complex64>, Vec<Complex64>) {
    let n = psibar.len();
    // Index j in 1..=n lives at psibar[j-1]; j = 0, -1, ... at low[-j].
    let get = |j: i64| -> Complex64 {
        if j >= 1 {
            psibar[j as usize - 1]
        } else {
            low[(-j) as usize]
        }
    };
    let qk = |k: i64| -> Complex64 { q.coeffs().get(k as usize).copied().unwrap_or_default() };
    let rate = |j: i64| -> Complex64 {
        let mut acc = -get(j);
        for k in j..=n as i64 {
            let v = get(k);
            if v != Complex64::default() {
                acc += v * qk(k - j);
            }
        }
        acc
    };
    let high = (1..=n as i64).map(rate).collect();
    let lowr = (0..low.len() as i64).map(|i| rate(-i)).collect();
    (high, lowr)
}

/// `ψ̄̇_j = -ψ̄_j + Σ_{k=j}^{n} ψ̄_k [z^{k-j}] q` for `j = 1..n`.
pub fn momentum_velocity(c: &[Complex64], psibar: &[Complex64], p: &DrivingFunction, t: f64) -> Result<Vec<Complex64>> {
    if c.len() != psibar.len() {
        return Err(Error::Dimension(format!("{} momenta for {} coefficients", psibar.len(), c.len())));
    }
    Ok(momentum_with(&q_series(c, p, t), psibar, &[]).0)
}

/// Options for [`integrate_with`].
#[derive(Clone, Debug)]
pub struct IntegrateOptions {
    pub dt: f64,
    /// Abort when any `|c_k|` exceeds this bound.
    pub blowup: f64,
    /// Record every `stride`-th step.
    pub stride: usize,
}

impl IntegrateOptions {
    pub fn new(dt: f64) -> Self {
        Self {
            dt,
            blowup: 1e6,
            stride: 1,
        }
    }
}

/// RK4 on the joint `(c, ψ̄)` system from `initial.t` to `t_end`.
pub fn integrate(initial: &EvolutionState, p: &DrivingFunction, t_end: f64, dt: f64) -> Result<Trajectory> {
    integrate_with(initial, p, t_end, &IntegrateOptions::new(dt))
}

pub fn integrate_with(
    initial: &EvolutionState,
    p: &DrivingFunction,
    t_end: f64,
    opts: &IntegrateOptions,
) -> Result<Trajectory> {
    initial.validate()?;
    if !(opts.dt > 0.0) {
        return Err(Error::InvalidArgument(format!("dt must be positive, got {}", opts.dt)));
    }
    if !(t_end > initial.t) {
        return Err(Error::InvalidArgument(format!("t_end {t_end} must exceed t0 {}", initial.t)));
    }
    let n = initial.n();
    let has_psi = initial.psibar.is_some();
    let n_low = initial.psibar_low.len();
    let bound = opts.blowup;

    let mut bounds: Vec<f64> = p.breakpoints().into_iter().filter(|b| *b > initial.t && *b < t_end).collect();
    bounds.push(t_end);
    let mut samples = vec![initial.clone()];
    let mut a = initial.t;
    let mut y = initial.pack();
    for b in bounds {
        let mid = 0.5 * (a + b);
        let rhs = |t: f64, y: &[Complex64]| -> Vec<Complex64> {
            let c = &y[..n];
            let ps = p.series_on_piece(t, Some(mid), n);
            let mut out = velocity_with(c, &ps, t);
            if has_psi {
                let q = q_with(c, &ps, t);
                let (hi, lo) = momentum_with(&q, &y[n..2 * n], &y[2 * n..2 * n + n_low]);
                out.extend(hi);
                out.extend(lo);
            }
            out
        };
        let check = |t: f64, y: &[Complex64]| -> Result<()> {
            for (i, v) in y[..n].iter().enumerate() {
                let m = v.norm();
                if !(m <= bound) {
                    return Err(Error::BlowUp {
                        t,
                        index: i + 1,
                        magnitude: m,
                    });
                }
            }
            Ok(())
        };
        let fixed = FixedStep {
            dt: opts.dt,
            breakpoints: vec![],
            stride: opts.stride,
        };
        let seg = integrate_fixed(rhs, a, y.clone(), b, &fixed, check)?;
        for (t, ys) in seg.into_iter().skip(1) {
            samples.push(EvolutionState::unpack(initial, t, &ys));
        }
        y = samples.last().expect("non-empty").pack();
        a = b;
    }
    Ok(Trajectory {
        samples,
        meta: TrajectoryMeta {
            dt: opts.dt,
            method: "rk4".into(),
            driving: p.describe(),
        },
    })
}

/// Result of [`loewner_limit`].
#[derive(Clone, Debug, PartialEq)]
pub struct LimitResult {
    pub c: Vec<Complex64>,
    /// `max_k |ċ_k(T)|`. Every velocity carries a factor `e^{-t}` or
    /// faster, so this bounds the change still to come after `T`.
    pub tail_estimate: f64,
}

/// Integrates from the identity to `horizon` and returns `c(T)` as the
/// approximation of the coefficients of `lim e^t w(z, t)`.
pub fn loewner_limit(p: &DrivingFunction, horizon: f64, n: usize, dt: f64) -> Result<LimitResult> {
    if !(horizon > 0.0) {
        return Err(Error::InvalidArgument("horizon must be positive".into()));
    }
    let mut opts = IntegrateOptions::new(dt);
    opts.stride = usize::MAX;
    let traj = integrate_with(&EvolutionState::identity(n), p, horizon, &opts)?;
    let c = traj.last().c.clone();
    let tail_estimate = coefficient_velocity(&c, p, horizon)
        .iter()
        .map(|v| v.norm())
        .fold(0.0, f64::max);
    Ok(LimitResult { c, tail_estimate })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cx(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn driver(p: &[Complex64]) -> DrivingFunction {
        DrivingFunction::alternate(crate::evolution::driving::DrivingKind::Constant(p.to_vec())).unwrap()
    }

    #[test]
    fn printed_coefficient_velocities() {
        let (p1, p2) = (cx(0.3, -0.2), cx(-0.1, 0.4));
        let p = driver(&[cx(1.0, 0.0), p1, p2, cx(0.05, 0.0)]);
        let c = vec![cx(0.2, 0.1), cx(-0.3, 0.05), cx(0.1, 0.1)];
        let t: f64 = 0.7;
        let e = (-t).exp();
        let v = coefficient_velocity(&c, &p, t);
        assert!((v[0] - (-e * p1)).norm() < 1e-15);
        assert!((v[1] - (-2.0 * e * p1 * c[0] - e * e * p2)).norm() < 1e-15);
        let unit = driver(&[cx(1.0, 0.0)]);
        assert!(coefficient_velocity(&c, &unit, t).iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn printed_momentum_velocities() {
        let (p1, p2) = (cx(0.3, -0.2), cx(-0.1, 0.4));
        let p = driver(&[cx(1.0, 0.0), p1, p2]);
        let c = vec![cx(0.2, 0.1), cx(-0.3, 0.05), cx(0.1, 0.1)];
        let psi = vec![cx(0.5, 0.0), cx(-1.0, 0.3), cx(0.2, 0.7)];
        let t: f64 = 0.4;
        let e = (-t).exp();
        let v = momentum_velocity(&c, &psi, &p, t).unwrap();
        assert_eq!(v[2], cx(0.0, 0.0));
        assert!((v[1] - 2.0 * e * p1 * psi[2]).norm() < 1e-15);
        let expected = 2.0 * e * p1 * psi[1] + (2.0 * e * p1 * c[0] + 3.0 * e * e * p2) * psi[2];
        assert!((v[0] - expected).norm() < 1e-15);
    }

    #[test]
    fn q_has_unit_constant_term() {
        let p = DrivingFunction::kernel(0.3).unwrap();
        let c = vec![cx(0.2, 0.1), cx(-0.3, 0.05)];
        assert_eq!(q_series(&c, &p, 1.3).coeffs()[0], cx(1.0, 0.0));
    }

    #[test]
    fn frozen_under_unit_driver() {
        let p = DrivingFunction::constant_real(&[1.0]).unwrap();
        let s0 = EvolutionState::with_default_momenta(4).momenta(vec![cx(1.0, 0.0), cx(0.0, 2.0), cx(0.0, 0.0), cx(-1.0, 0.0)]);
        let tr = integrate(&s0, &p, 1.0, 0.1).unwrap();
        assert_eq!(tr.samples.len(), 11);
        for s in &tr.samples {
            assert_eq!(s.c, s0.c);
            assert_eq!(s.psibar, s0.psibar);
        }
    }

    #[test]
    fn riccati_closed_form() {
        let p = DrivingFunction::constant_real(&[1.0, 0.5]).unwrap();
        let tr = integrate(&EvolutionState::identity(5), &p, 2.0, 1e-3).unwrap();
        let last = tr.last();
        assert_eq!(last.t, 2.0);
        let x = -0.5 * (1.0 - (-2.0f64).exp());
        for (k, c) in last.c.iter().enumerate() {
            assert!((c - cx(x.powi(k as i32 + 1), 0.0)).norm() < 1e-11, "k={k}");
        }
    }

    #[test]
    fn limit_examples() {
        let unit = DrivingFunction::constant_real(&[1.0]).unwrap();
        let r = loewner_limit(&unit, 1.0, 3, 0.1).unwrap();
        assert!(r.c.iter().all(|z| z.norm() == 0.0));
        let k = DrivingFunction::kernel(0.0).unwrap();
        let r = loewner_limit(&k, 0.01, 3, 1e-3).unwrap();
        assert!((r.c[0].re - 2.0 * ((-0.01f64).exp() - 1.0)).abs() < 1e-13);
    }

    #[test]
    fn blow_up_is_reported() {
        let p = DrivingFunction::constant_real(&[1.0, 0.5]).unwrap();
        let mut opts = IntegrateOptions::new(0.01);
        opts.blowup = 1e-3;
        match integrate_with(&EvolutionState::identity(2), &p, 1.0, &opts) {
            Err(Error::BlowUp { index, .. }) => assert_eq!(index, 1),
            other => panic!("expected blow-up, got {other:?}"),
        }
    }

    #[test]
    fn low_momenta_depth_is_checked() {
        let p = DrivingFunction::constant_real(&[1.0, 0.5]).unwrap();
        let s = EvolutionState::with_default_momenta(3).low_momenta(vec![Complex64::default(); 4]);
        assert!(integrate(&s, &p, 1.0, 0.1).is_err());
        let s = EvolutionState::with_default_momenta(3).low_momenta(vec![Complex64::default(); 3]);
        assert!(integrate(&s, &p, 1.0, 0.1).is_ok());
    }
}
