//! Classical fourth-order Runge-Kutta for complex state vectors.
//!
//! [`integrate_fixed`] takes uniform steps between forced breakpoints and
//! shortens the last step of every segment so it lands on the boundary.
//! [`integrate_adaptive`] uses step doubling for error control (the two
//! half steps are kept, no extrapolation) and
//! keeps the remaining time `t_end - t` as its own variable, so it can
//! approach a singular endpoint far closer than `t` itself can resolve.

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type State = Vec<Complex64>;

fn axpy(y: &[Complex64], h: f64, k: &[Complex64]) -> State {
    y.iter().zip(k).map(|(a, b)| a + b * h).collect()
}

/// One classical RK4 step.
pub fn rk4_step<F>(f: &F, t: f64, y: &[Complex64], h: f64) -> State
where
    F: Fn(f64, &[Complex64]) -> State,
{
    let k1 = f(t, y);
    let k2 = f(t + 0.5 * h, &axpy(y, 0.5 * h, &k1));
    let k3 = f(t + 0.5 * h, &axpy(y, 0.5 * h, &k2));
    let k4 = f(t + h, &axpy(y, h, &k3));
    y.iter()
        .enumerate()
        .map(|(i, yi)| yi + (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) * (h / 6.0))
        .collect()
}

/// Fixed-step options.
#[derive(Clone, Debug)]
pub struct FixedStep {
    pub dt: f64,
    /// Times strictly inside the interval where a step must end.
    pub breakpoints: Vec<f64>,
    /// Keep every `stride`-th step (the final state is always kept).
    pub stride: usize,
}

impl FixedStep {
    pub fn new(dt: f64) -> Self {
        Self {
            dt,
            breakpoints: Vec::new(),
            stride: 1,
        }
    }
}

/// Integrates from `t0` to `t_end`, returning `(t, y)` samples including
/// both endpoints. `check` runs after every step and may abort the run.
pub fn integrate_fixed<F, C>(
    f: F,
    t0: f64,
    y0: State,
    t_end: f64,
    opts: &FixedStep,
    mut check: C,
) -> Result<Vec<(f64, State)>>
where
    F: Fn(f64, &[Complex64]) -> State,
    C: FnMut(f64, &[Complex64]) -> Result<()>,
{
    if !(opts.dt > 0.0) || !opts.dt.is_finite() {
        return Err(Error::InvalidArgument(format!("step must be positive, got {}", opts.dt)));
    }
    if !(t_end > t0) {
        return Err(Error::InvalidArgument(format!("t_end {t_end} must exceed t0 {t0}")));
    }
    let stride = opts.stride.max(1);
    let mut bounds: Vec<f64> = opts
        .breakpoints
        .iter()
        .copied()
        .filter(|b| *b > t0 && *b < t_end)
        .collect();
    bounds.sort_by(f64::total_cmp);
    bounds.dedup();
    bounds.push(t_end);

    let mut out = vec![(t0, y0.clone())];
    let mut y = y0;
    let mut a = t0;
    let mut count = 0usize;
    for b in bounds {
        // Steps are anchored at the segment start to avoid drift in t.
        let len = b - a;
        let steps = ((len / opts.dt - 1e-9).ceil() as usize).max(1);
        for i in 0..steps {
            let t = a + i as f64 * opts.dt;
            let next = if i + 1 == steps { b } else { a + (i + 1) as f64 * opts.dt };
            y = rk4_step(&f, t, &y, next - t);
            check(next, &y)?;
            count += 1;
            if count.is_multiple_of(stride) || (next == t_end) {
                out.push((next, y.clone()));
            }
        }
        a = b;
    }
    Ok(out)
}

/// Adaptive options.
#[derive(Clone, Debug)]
pub struct Adaptive {
    /// Local error tolerance per step, mixed absolute/relative.
    pub tol: f64,
    pub h0: f64,
    pub max_steps: usize,
}

impl Default for Adaptive {
    fn default() -> Self {
        Self {
            tol: 1e-14,
            h0: 1e-3,
            max_steps: 1_000_000,
        }
    }
}

/// Accepted `(tau, y)` samples of [`integrate_adaptive`].
#[derive(Clone, Debug, PartialEq)]
pub struct AdaptiveRun {
    pub samples: Vec<(f64, State)>,
    /// Remaining time at which the step size fell below the resolution of
    /// `tau` itself; the run ends there instead of at `tau = 0`.
    pub stalled_at: Option<f64>,
}

/// Step-doubling RK4. The right-hand side receives the remaining time
/// `tau = t_end - t` rather than `t`. Samples start at `tau = t_end - t0`
/// and end at `tau = 0` unless the run stalls at a singularity.
pub fn integrate_adaptive<F>(f: F, t0: f64, y0: State, t_end: f64, opts: &Adaptive) -> Result<AdaptiveRun>
where
    F: Fn(f64, &[Complex64]) -> State,
{
    if !(t_end > t0) {
        return Err(Error::InvalidArgument(format!("t_end {t_end} must exceed t0 {t0}")));
    }
    // In remaining time the system reads dy/dtau = -f.
    let g = |tau: f64, y: &[Complex64]| -> State { f(tau, y).into_iter().map(|v| -v).collect() };
    let mut tau = t_end - t0;
    let mut y = y0;
    let mut h = opts.h0.min(tau);
    let mut out = vec![(tau, y.clone())];
    for _ in 0..opts.max_steps {
        if tau <= 0.0 {
            return Ok(AdaptiveRun {
                samples: out,
                stalled_at: None,
            });
        }
        let h_try = h.min(tau);
        if h_try <= 4.0 * f64::EPSILON * tau {
            return Ok(AdaptiveRun {
                samples: out,
                stalled_at: Some(tau),
            });
        }
        let full = rk4_step(&g, tau, &y, -h_try);
        let half = rk4_step(&g, tau, &y, -0.5 * h_try);
        let two = rk4_step(&g, tau - 0.5 * h_try, &half, -0.5 * h_try);
        let mut err = 0.0f64;
        let mut scale = 0.0f64;
        for (a, b) in two.iter().zip(&full) {
            err = err.max((a - b).norm() / 15.0);
            scale = scale.max(a.norm());
        }
        let bound = opts.tol * (1.0 + scale);
        if err <= bound {
            y = two;
            tau = if h_try >= tau { 0.0 } else { tau - h_try };
            out.push((tau, y.clone()));
            let grow = if err == 0.0 { 4.0 } else { (0.9 * (bound / err).powf(0.2)).clamp(0.2, 4.0) };
            h = h_try * grow;
        } else {
            h = h_try * (0.9 * (bound / err).powf(0.2)).clamp(0.1, 0.5);
        }
        if !y.iter().all(|v| v.re.is_finite() && v.im.is_finite()) {
            return Err(Error::BlowUp {
                t: t_end - tau,
                index: 0,
                magnitude: f64::INFINITY,
            });
        }
    }
    Err(Error::InvalidArgument("adaptive integrator exceeded max_steps".into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_fixed() {
        let f = |_t: f64, y: &[Complex64]| vec![y[0]];
        let out = integrate_fixed(f, 0.0, vec![Complex64::new(1.0, 0.0)], 1.0, &FixedStep::new(0.01), |_, _| Ok(())).unwrap();
        assert_eq!(out.len(), 101);
        assert_eq!(out.last().unwrap().0, 1.0);
        assert!((out.last().unwrap().1[0].re - 1f64.exp()).abs() < 1e-9);
    }

    #[test]
    fn final_step_is_shortened_and_breakpoints_respected() {
        let f = |_t: f64, _y: &[Complex64]| vec![Complex64::new(1.0, 0.0)];
        let mut opts = FixedStep::new(0.3);
        opts.breakpoints = vec![0.5];
        let out = integrate_fixed(f, 0.0, vec![Complex64::new(0.0, 0.0)], 1.0, &opts, |_, _| Ok(())).unwrap();
        let ts: Vec<f64> = out.iter().map(|s| s.0).collect();
        assert_eq!(ts, vec![0.0, 0.3, 0.5, 0.8, 1.0]);
        assert!(ts.contains(&0.5));
        assert_eq!(*ts.last().unwrap(), 1.0);
        assert!((out.last().unwrap().1[0].re - 1.0).abs() < 1e-14);
    }

    #[test]
    fn fourth_order_convergence() {
        let f = |t: f64, y: &[Complex64]| vec![y[0] * Complex64::new(t.cos(), 1.0)];
        let exact = Complex64::new(1f64.sin(), 1.0).exp();
        let run = |dt: f64| {
            let out = integrate_fixed(f, 0.0, vec![Complex64::new(1.0, 0.0)], 1.0, &FixedStep::new(dt), |_, _| Ok(())).unwrap();
            let y = out.last().unwrap().1[0];
            (y - exact).norm()
        };
        let ratio = run(0.02) / run(0.01);
        assert!((14.0..18.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn adaptive_matches_exponential() {
        let f = |_tau: f64, y: &[Complex64]| vec![y[0] * -1.0];
        let out = integrate_adaptive(f, 0.0, vec![Complex64::new(1.0, 0.0)], 2.0, &Adaptive::default()).unwrap().samples;
        assert_eq!(out.last().unwrap().0, 0.0);
        assert!((out.last().unwrap().1[0].re - (-2f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_steps() {
        let f = |_t: f64, y: &[Complex64]| y.to_vec();
        assert!(integrate_fixed(f, 0.0, vec![], 1.0, &FixedStep::new(0.0), |_, _| Ok(())).is_err());
        assert!(integrate_fixed(f, 1.0, vec![], 1.0, &FixedStep::new(0.1), |_, _| Ok(())).is_err());
    }
}
