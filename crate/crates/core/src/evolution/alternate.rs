//! Non-normalized chains `F(z,t) = a_0 z + a_1 z^2 + ...` moving by
//! `Ḟ = z F' p` with `p = u_0 + u_1 z + ...` of unconstrained sign.
//!
//! For any driver, the chain started at `F = z` and the characteristic
//! flow `ẇ = -w p(w)` started at `w = z` satisfy `F_t(w_t(z)) = z`:
//! differentiating gives `w F'(w) p(w) - F'(w) w p(w) = 0`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::evolution::driving::DrivingFunction;
use crate::evolution::flow::{EvolutionState, Trajectory, TrajectoryMeta};
use crate::ode::{integrate_fixed, FixedStep};
use crate::series::TruncatedTaylor;

/// How normalized coefficients are read off `a_0, a_1, ...`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Normalization {
    /// `c_k = a_k / a_0`.
    Divide,
    /// `c_k = a_k / a_0^{k+1}`, the coefficients of `F(z/a_0)`.
    Rescale,
}

impl Normalization {
    fn to_c(self, a: &[Complex64]) -> Vec<Complex64> {
        let a0 = a[0];
        a[1..]
            .iter()
            .enumerate()
            .map(|(i, ak)| match self {
                Normalization::Divide => ak / a0,
                Normalization::Rescale => ak / a0.powi(i as i32 + 2),
            })
            .collect()
    }

    fn to_a(self, a0: Complex64, c: &[Complex64]) -> Vec<Complex64> {
        std::iter::once(a0)
            .chain(c.iter().enumerate().map(|(i, ck)| match self {
                Normalization::Divide => ck * a0,
                Normalization::Rescale => ck * a0.powi(i as i32 + 2),
            }))
            .collect()
    }
}

/// `ȧ_k = Σ_{i=0}^{k} (i+1) a_i p_{k-i}`, i.e. `[z^{k+1}] z F' p`.
pub fn alternate_velocity(a: &[Complex64], p: &TruncatedTaylor<Complex64>) -> Vec<Complex64> {
    (0..a.len())
        .map(|k| {
            (0..=k)
                .map(|i| a[i] * (i as f64 + 1.0) * p.coeffs().get(k - i).copied().unwrap_or_default())
                .sum()
        })
        .collect()
}

/// Evolves the chain whose normalized coefficients at `initial.t` are
/// `initial.c` under the chosen map and whose scale is `initial.a0`.
/// Returned states carry normalized `c` and the current `a0`.
pub fn alternate_evolve(
    initial: &EvolutionState,
    controls: &DrivingFunction,
    t_end: f64,
    dt: f64,
    normalization: Normalization,
) -> Result<Trajectory> {
    let a0 = initial
        .a0
        .ok_or_else(|| Error::InvalidArgument("alternate evolution needs a0".into()))?;
    if a0.norm() == 0.0 {
        return Err(Error::Degenerate { t: initial.t });
    }
    let n = initial.n();
    let y0 = normalization.to_a(a0, &initial.c);
    let mut bounds: Vec<f64> = controls
        .breakpoints()
        .into_iter()
        .filter(|b| *b > initial.t && *b < t_end)
        .collect();
    bounds.push(t_end);
    let mut samples = vec![initial.clone()];
    let mut a = initial.t;
    let mut y = y0;
    for b in bounds {
        let mid = 0.5 * (a + b);
        let rhs = |t: f64, y: &[Complex64]| alternate_velocity(y, &controls.series_on_piece(t, Some(mid), n));
        let check = |t: f64, y: &[Complex64]| -> Result<()> {
            if y[0].norm() == 0.0 || !y[0].re.is_finite() {
                return Err(Error::Degenerate { t });
            }
            Ok(())
        };
        let seg = integrate_fixed(rhs, a, y.clone(), b, &FixedStep::new(dt), check)?;
        for (t, ys) in seg.into_iter().skip(1) {
            samples.push(EvolutionState {
                t,
                c: normalization.to_c(&ys),
                psibar: None,
                psibar_low: Vec::new(),
                a0: Some(ys[0]),
            });
            y = ys;
        }
        a = b;
    }
    Ok(Trajectory {
        samples,
        meta: TrajectoryMeta {
            dt,
            method: "rk4".into(),
            driving: controls.describe(),
        },
    })
}

/// The series `F = a_0 z + a_1 z^2 + ...` through `z^{n+1}` for a state
/// produced with the given normalization.
pub fn chain_series(state: &EvolutionState, normalization: Normalization) -> Result<TruncatedTaylor<Complex64>> {
    let a0 = state
        .a0
        .ok_or_else(|| Error::InvalidArgument("state carries no a0".into()))?;
    let mut coeffs = vec![Complex64::default()];
    coeffs.extend(normalization.to_a(a0, &state.c));
    Ok(TruncatedTaylor::new(coeffs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolution::driving::DrivingKind;

    fn cx(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn controls(u: &[f64]) -> DrivingFunction {
        DrivingFunction::alternate(DrivingKind::Constant(u.iter().map(|&x| cx(x, 0.0)).collect())).unwrap()
    }

    fn start(c: Vec<Complex64>) -> EvolutionState {
        let mut s = EvolutionState::identity(c.len());
        s.c = c;
        s.a0 = Some(cx(1.0, 0.0));
        s
    }

    #[test]
    fn diagonal_growth() {
        let c0 = vec![cx(0.2, 0.0), cx(-0.1, 0.3), cx(0.05, 0.0)];
        let p = controls(&[1.0]);
        let t = 0.5;
        let rs = alternate_evolve(&start(c0.clone()), &p, t, 1e-3, Normalization::Rescale).unwrap();
        let last = rs.last();
        assert!((last.a0.unwrap() - cx(t.exp(), 0.0)).norm() < 1e-12);
        for (a, b) in last.c.iter().zip(&c0) {
            assert!((a - b).norm() < 1e-12);
        }
        let dv = alternate_evolve(&start(c0.clone()), &p, t, 1e-3, Normalization::Divide).unwrap();
        for (k, (a, b)) in dv.last().c.iter().zip(&c0).enumerate() {
            assert!((a - b * ((k as f64 + 1.0) * t).exp()).norm() < 1e-11);
        }
    }

    #[test]
    fn zero_controls_freeze() {
        let c0 = vec![cx(0.2, 0.0), cx(-0.1, 0.3)];
        let p = controls(&[0.0]);
        let tr = alternate_evolve(&start(c0.clone()), &p, 1.0, 0.1, Normalization::Divide).unwrap();
        assert_eq!(tr.last().c, c0);
        assert_eq!(tr.last().a0, Some(cx(1.0, 0.0)));
    }

    #[test]
    fn degenerate_scale_is_rejected() {
        let mut s = start(vec![cx(0.0, 0.0)]);
        s.a0 = Some(cx(0.0, 0.0));
        assert!(matches!(
            alternate_evolve(&s, &controls(&[1.0]), 1.0, 0.1, Normalization::Divide),
            Err(Error::Degenerate { .. })
        ));
    }

    #[test]
    fn linear_driver_closed_form() {
        // F_0 = z, p = 1 + p1 z: a_k(t) = e^t (p1 (e^t - 1))^k.
        let p1 = 0.3;
        let t = 0.8;
        let tr = alternate_evolve(&start(vec![cx(0.0, 0.0); 4]), &controls(&[1.0, p1]), t, 1e-3, Normalization::Divide).unwrap();
        let last = tr.last();
        let f = chain_series(last, Normalization::Divide).unwrap();
        for k in 0..=4 {
            let expected = t.exp() * (p1 * (t.exp() - 1.0)).powi(k as i32);
            assert!((f.coeffs()[k + 1].re - expected).abs() < 1e-10 * expected.max(1.0), "k={k}");
        }
    }
}
