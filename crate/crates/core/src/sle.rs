//! Chordal SLE in the upper half-plane.
//!
//! `k_t(z) = g_t(z) - ξ_t` with `ξ_t = √κ B_t` obeys
//! `dk = (2/k) dt - dξ`, discretized by Euler-Maruyama. Observables are
//! finite sums `Σ a z^α` on the principal branch, and the Itô drift
//! operator maps `z^α` to `α((κ/2)(α-1) + 2) z^{α-2}`.
//!
//! Random numbers: path `i` of a run with seed `s` draws its standard
//! normals from `ChaCha8Rng::seed_from_u64(s)` switched to stream `i`.
//! Results therefore do not depend on thread count or scheduling.

use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::ode::{integrate_adaptive, integrate_fixed, Adaptive, FixedStep};

#[derive(Clone, Debug, PartialEq)]
pub struct SleParams {
    pub kappa: f64,
    pub dt: f64,
    pub horizon: f64,
    pub n_paths: usize,
    pub seed: u64,
    /// A path is swallowed once `|k| < swallow_eps` or `Im k <= 0`.
    pub swallow_eps: f64,
    /// Record every `record_stride`-th step (the last step is always kept).
    pub record_stride: usize,
    /// Multiplies the Brownian increments; 0 gives the deterministic flow.
    pub noise_scale: f64,
}

impl SleParams {
    pub fn new(kappa: f64, dt: f64, horizon: f64, n_paths: usize, seed: u64) -> Self {
        Self {
            kappa,
            dt,
            horizon,
            n_paths,
            seed,
            swallow_eps: 1e-3,
            record_stride: 1,
            noise_scale: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.kappa > 0.0) || !self.kappa.is_finite() {
            return Err(Error::InvalidArgument(format!("kappa must be positive, got {}", self.kappa)));
        }
        if !(self.dt > 0.0) || !(self.horizon > 0.0) {
            return Err(Error::InvalidArgument("dt and horizon must be positive".into()));
        }
        if self.n_paths == 0 {
            return Err(Error::InvalidArgument("n_paths must be at least 1".into()));
        }
        Ok(())
    }

    fn steps(&self) -> usize {
        ((self.horizon / self.dt - 1e-9).ceil() as usize).max(1)
    }

    fn time_of(&self, i: usize) -> f64 {
        if i >= self.steps() {
            self.horizon
        } else {
            i as f64 * self.dt
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ChargeWeight {
    pub c: f64,
    pub h: f64,
}

/// `c = (6-κ)(3κ-8)/(2κ)`, `h = (6-κ)/(2κ)`.
pub fn charge_weight(kappa: f64) -> Result<ChargeWeight> {
    if !(kappa > 0.0) {
        return Err(Error::InvalidArgument(format!("kappa must be positive, got {kappa}")));
    }
    Ok(ChargeWeight {
        c: (6.0 - kappa) * (3.0 * kappa - 8.0) / (2.0 * kappa),
        h: (6.0 - kappa) / (2.0 * kappa),
    })
}

/// Exact rational form of [`charge_weight`].
pub fn charge_weight_exact(kappa: &BigRational) -> Result<(BigRational, BigRational)> {
    if *kappa <= BigRational::zero() {
        return Err(Error::InvalidArgument("kappa must be positive".into()));
    }
    let int = |v: i64| BigRational::from_integer(v.into());
    let six_minus = int(6) - kappa;
    let two_k = int(2) * kappa;
    let c = &six_minus * (int(3) * kappa - int(8)) / &two_k;
    let h = six_minus / two_k;
    Ok((c, h))
}

/// `√(z² + 4t)` on the branch continuous from `g(z, 0) = z`, i.e. in the
/// closed upper half-plane.
pub fn deterministic_map(z: Complex64, t: f64) -> Complex64 {
    upper_sqrt(z * z + 4.0 * t)
}

/// [`deterministic_map`] at `t = t_end - tau`, with `z² + 4 t_end` formed
/// first so that `tau` far below the resolution of `t_end` still counts.
pub fn deterministic_map_remaining(z: Complex64, t_end: f64, tau: f64) -> Complex64 {
    upper_sqrt((z * z + 4.0 * t_end) - 4.0 * tau)
}

fn upper_sqrt(w: Complex64) -> Complex64 {
    let r = w.sqrt();
    if r.im < 0.0 {
        -r
    } else {
        r
    }
}

fn loewner_rhs(_t: f64, g: &[Complex64]) -> Vec<Complex64> {
    vec![Complex64::new(2.0, 0.0) / g[0]]
}

/// Fixed-step RK4 for `dg/dt = 2/g` from `g(0) = z`; returns `(t, g)`.
pub fn deterministic_map_rk4(z: Complex64, t_end: f64, dt: f64) -> Result<Vec<(f64, Complex64)>> {
    let out = integrate_fixed(loewner_rhs, 0.0, vec![z], t_end, &FixedStep::new(dt), |_, _| Ok(()))?;
    Ok(out.into_iter().map(|(t, g)| (t, g[0])).collect())
}

/// Adaptive RK4 for `dg/dt = 2/g` with samples `(tau, g)`, `tau = t_end - t`.
#[derive(Clone, Debug, PartialEq)]
pub struct MapRun {
    pub samples: Vec<(f64, Complex64)>,
    /// Set when the run stopped short of `t_end` at a point where `g`
    /// reached zero, which happens when `z² + 4 t_end` is zero up to rounding.
    pub stalled_at: Option<f64>,
}

pub fn deterministic_map_adaptive(z: Complex64, t_end: f64, opts: &Adaptive) -> Result<MapRun> {
    let run = integrate_adaptive(loewner_rhs, 0.0, vec![z], t_end, opts)?;
    Ok(MapRun {
        samples: run.samples.into_iter().map(|(tau, g)| (tau, g[0])).collect(),
        stalled_at: run.stalled_at,
    })
}

/// Coefficient of `1/z` in the numerically integrated `g(z, t)`: the
/// values `z (g - z)` at `z = i R` for the given radii are extrapolated to
/// `1/z → 0` by the interpolating polynomial in `1/z`.
pub fn capacity_coefficient(t: f64, radii: &[f64], opts: &Adaptive) -> Result<Complex64> {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for &r in radii {
        let z = Complex64::new(0.0, r);
        let run = deterministic_map_adaptive(z, t, opts)?;
        if let Some(tau) = run.stalled_at {
            return Err(Error::Degenerate { t: t - tau });
        }
        let g = run.samples.last().expect("non-empty").1;
        xs.push(z.inv());
        ys.push(z * (g - z));
    }
    // Lagrange interpolation evaluated at x = 0.
    let mut acc = Complex64::default();
    for i in 0..xs.len() {
        let mut w = Complex64::new(1.0, 0.0);
        for j in 0..xs.len() {
            if i != j {
                w *= (-xs[j]) / (xs[i] - xs[j]);
            }
        }
        acc += ys[i] * w;
    }
    Ok(acc)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SlePath {
    pub times: Vec<f64>,
    pub k_values: Vec<Complex64>,
    pub xi: Vec<f64>,
    /// Time of the swallow event, if any; no samples are recorded after it.
    pub swallowed_at: Option<f64>,
}

impl SlePath {
    /// The recorded value at time `t` if the path was alive there.
    pub fn value_at(&self, t: f64) -> Option<Complex64> {
        let i = self.times.iter().position(|&s| (s - t).abs() <= 1e-12 * t.max(1.0))?;
        Some(self.k_values[i])
    }
}

fn path_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

fn simulate_one(params: &SleParams, z0: Complex64, index: usize) -> SlePath {
    let mut rng = path_rng(params.seed, index);
    let steps = params.steps();
    let stride = params.record_stride.max(1);
    let sk = params.kappa.sqrt() * params.noise_scale;
    let mut k = z0;
    let mut xi = 0.0;
    let mut path = SlePath {
        times: vec![0.0],
        k_values: vec![k],
        xi: vec![0.0],
        swallowed_at: None,
    };
    for i in 0..steps {
        let t = params.time_of(i);
        let next = params.time_of(i + 1);
        let h = next - t;
        let z: f64 = StandardNormal.sample(&mut rng);
        let db = h.sqrt() * z;
        k += Complex64::new(2.0 * h, 0.0) / k - sk * db;
        xi += sk * db;
        if k.norm() < params.swallow_eps || k.im <= 0.0 || !k.re.is_finite() {
            path.swallowed_at = Some(next);
            break;
        }
        if (i + 1) % stride == 0 || i + 1 == steps {
            path.times.push(next);
            path.k_values.push(k);
            path.xi.push(xi);
        }
    }
    path
}

/// Euler-Maruyama ensemble, ordered by path index.
pub fn simulate_chordal(params: &SleParams, z0: Complex64) -> Result<Vec<SlePath>> {
    params.validate()?;
    if !(z0.im > 0.0) {
        return Err(Error::InvalidArgument("z0 must lie in the upper half-plane".into()));
    }
    Ok((0..params.n_paths)
        .into_par_iter()
        .map(|i| simulate_one(params, z0, i))
        .collect())
}

/// `Σ a_j z^{α_j}` on the principal branch.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct Observable {
    pub terms: Vec<(Complex64, f64)>,
}

impl Observable {
    pub fn monomial(a: Complex64, alpha: f64) -> Self {
        Self {
            terms: vec![(a, alpha)],
        }
    }

    pub fn constant(a: Complex64) -> Self {
        Self::monomial(a, 0.0)
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.terms
            .iter()
            .map(|&(a, alpha)| {
                if a == Complex64::default() {
                    Complex64::default()
                } else if alpha.fract() == 0.0 && alpha.abs() < 64.0 {
                    a * z.powi(alpha as i32)
                } else {
                    a * (z.ln() * alpha).exp()
                }
            })
            .sum()
    }

    /// Merges equal powers and drops zero coefficients.
    pub fn normalized(&self) -> Self {
        let mut out: Vec<(Complex64, f64)> = Vec::new();
        for &(a, alpha) in &self.terms {
            match out.iter_mut().find(|t| t.1 == alpha) {
                Some(t) => t.0 += a,
                None => out.push((a, alpha)),
            }
        }
        out.retain(|t| t.0 != Complex64::default());
        Self { terms: out }
    }

    /// True when every coefficient is below `tol` relative to `scale`.
    pub fn is_negligible(&self, scale: f64, tol: f64) -> bool {
        self.terms.iter().all(|t| t.0.norm() <= tol * scale.max(f64::MIN_POSITIVE))
    }

    fn scale(&self) -> f64 {
        self.terms.iter().map(|t| t.0.norm()).fold(0.0, f64::max)
    }
}

/// `(κ/2) F'' + (2/z) F'`, the Itô drift of `F(k_t)`; equal to
/// `((κ/2) L_{-1}^2 - 2 L_{-2}) F` with `L_{-1} = -d/dz` and
/// `L_{-2} = -(1/z) d/dz`.
pub fn drift_operator(f: &Observable, kappa: f64) -> Observable {
    Observable {
        terms: f
            .terms
            .iter()
            .map(|&(a, alpha)| (a * (alpha * (0.5 * kappa * (alpha - 1.0) + 2.0)), alpha - 2.0))
            .collect(),
    }
    .normalized()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Checkpoint {
    pub t: f64,
    pub mean_re: f64,
    pub mean_im: f64,
    pub stderr: f64,
    pub n_alive: usize,
    /// `|mean - F(z0)| / stderr`; zero when both vanish.
    pub deviation: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MartingaleReport {
    pub kappa: f64,
    pub c: f64,
    pub h: f64,
    pub f_z0_re: f64,
    pub f_z0_im: f64,
    pub checkpoints: Vec<Checkpoint>,
    pub swallowed_fraction: f64,
    pub warnings: Vec<String>,
}

impl MartingaleReport {
    pub fn max_deviation(&self) -> f64 {
        self.checkpoints.iter().map(|c| c.deviation).fold(0.0, f64::max)
    }
}

/// Relative tolerance for declaring the drift of an observable zero.
pub const DRIFT_TOL: f64 = 1e-12;

/// Monte-Carlo check that `E[F(k_t)]` stays at `F(z0)`. Checkpoints are the
/// recorded times shared by all paths; swallowed paths are excluded from
/// checkpoints after their swallow time.
pub fn martingale_test(f: &Observable, params: &SleParams, z0: Complex64) -> Result<MartingaleReport> {
    let drift = drift_operator(f, params.kappa);
    if !drift.is_negligible(f.scale(), DRIFT_TOL) {
        return Err(Error::InvalidArgument(format!(
            "observable is not drift-less for kappa = {}",
            params.kappa
        )));
    }
    let cw = charge_weight(params.kappa)?;
    let paths = simulate_chordal(params, z0)?;
    let f0 = f.eval(z0);
    let steps = params.steps();
    let stride = params.record_stride.max(1);
    let mut idx: Vec<usize> = (stride..=steps).step_by(stride).collect();
    if idx.last() != Some(&steps) {
        idx.push(steps);
    }
    let times: Vec<f64> = idx.iter().map(|&i| params.time_of(i)).collect();
    let checkpoints = times
        .iter()
        .enumerate()
        .map(|(ci, &t)| {
            // Sample slot ci + 1 holds time t for every path alive at t.
            let vals: Vec<Complex64> = paths
                .iter()
                .filter(|p| p.swallowed_at.is_none_or(|s| s > t))
                .map(|p| f.eval(p.k_values[ci + 1]))
                .collect();
            let n = vals.len();
            let mean = if n > 0 {
                vals.iter().sum::<Complex64>() / n as f64
            } else {
                Complex64::new(f64::NAN, f64::NAN)
            };
            let var = if n > 1 {
                vals.iter().map(|v| (v - mean).norm_sqr()).sum::<f64>() / (n - 1) as f64
            } else {
                f64::NAN
            };
            let stderr = (var / n as f64).sqrt();
            let diff = (mean - f0).norm();
            let deviation = if diff == 0.0 { 0.0 } else { diff / stderr };
            Checkpoint {
                t,
                mean_re: mean.re,
                mean_im: mean.im,
                stderr,
                n_alive: n,
                deviation,
            }
        })
        .collect();
    let swallowed = paths.iter().filter(|p| p.swallowed_at.is_some()).count();
    let swallowed_fraction = swallowed as f64 / paths.len() as f64;
    let mut warnings = Vec::new();
    if swallowed_fraction > 0.01 {
        warnings.push(format!("swallowed fraction {swallowed_fraction:.4} exceeds 1%"));
    }
    Ok(MartingaleReport {
        kappa: params.kappa,
        c: cw.c,
        h: cw.h,
        f_z0_re: f0.re,
        f_z0_im: f0.im,
        checkpoints,
        swallowed_fraction,
        warnings,
    })
}

/// `1 - 4/κ` as an exact rational, the exponent of the drift-less power.
pub fn driftless_exponent(kappa: &BigRational) -> BigRational {
    BigRational::one() - BigRational::from_integer(4.into()) / kappa
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cx(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn charge_weight_examples() {
        let r = |a: i64, b: i64| BigRational::new(a.into(), b.into());
        assert_eq!(charge_weight_exact(&r(6, 1)).unwrap(), (r(0, 1), r(0, 1)));
        assert_eq!(charge_weight_exact(&r(8, 3)).unwrap(), (r(0, 1), r(5, 8)));
        assert_eq!(charge_weight_exact(&r(2, 1)).unwrap(), (r(-2, 1), r(1, 1)));
        assert!(charge_weight(0.0).is_err());
        assert!(charge_weight_exact(&r(-1, 1)).is_err());
        let cw = charge_weight(2.0).unwrap();
        assert_eq!((cw.c, cw.h), (-2.0, 1.0));
    }

    #[test]
    fn deterministic_examples() {
        let z = cx(0.3, 1.7);
        assert_eq!(deterministic_map(z, 0.0), z);
        let big = cx(3.0, 50.0);
        let t = 0.2;
        let rem = deterministic_map(big, t) - big - 2.0 * t / big;
        assert!(rem.norm() < 4.0 * t * t / big.norm().powi(3));
        let g = deterministic_map(cx(-1.0, 0.5), 0.7);
        assert!(g.im > 0.0);
        let num = deterministic_map_rk4(cx(2.0, 1.0), 1.0, 1e-3).unwrap();
        assert!((num.last().unwrap().1 - deterministic_map(cx(2.0, 1.0), 1.0)).norm() < 1e-12);
    }

    #[test]
    fn drift_examples() {
        assert!(drift_operator(&Observable::constant(cx(3.0, 1.0)), 2.5).terms.is_empty());
        assert!(drift_operator(&Observable::monomial(cx(1.0, 0.0), -1.0), 2.0).terms.is_empty());
        for kappa in [1.0, 2.0, 3.0, 8.0 / 3.0, 5.0, 7.5] {
            let f = Observable::monomial(cx(1.0, 0.0), 1.0 - 4.0 / kappa);
            assert!(drift_operator(&f, kappa).is_negligible(1.0, DRIFT_TOL), "kappa {kappa}");
        }
        let d = drift_operator(&Observable::monomial(cx(1.0, 0.0), 2.0), 2.0);
        assert_eq!(d.terms, vec![(cx(6.0, 0.0), 0.0)]);
    }

    #[test]
    fn deterministic_given_seed_and_independent_of_threads() {
        let mut p = SleParams::new(2.0, 1e-2, 0.5, 40, 7);
        p.record_stride = 10;
        let a = simulate_chordal(&p, cx(0.0, 2.0)).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = pool.install(|| simulate_chordal(&p, cx(0.0, 2.0)).unwrap());
        assert_eq!(a, b);
        p.seed = 8;
        assert_ne!(a, simulate_chordal(&p, cx(0.0, 2.0)).unwrap());
    }

    #[test]
    fn imaginary_part_is_monotone() {
        let p = SleParams::new(4.0, 1e-3, 0.3, 20, 1);
        for path in simulate_chordal(&p, cx(0.5, 1.0)).unwrap() {
            for w in path.k_values.windows(2) {
                assert!(w[1].im <= w[0].im);
            }
        }
    }

    #[test]
    fn noiseless_limit_follows_deterministic_map() {
        let mut p = SleParams::new(2.0, 1e-3, 1.0, 2, 3);
        p.noise_scale = 0.0;
        let z = cx(0.4, 1.5);
        let path = &simulate_chordal(&p, z).unwrap()[0];
        let err = (path.k_values.last().unwrap() - deterministic_map(z, 1.0)).norm();
        assert!(err < 2e-3, "err {err}");
        assert!(path.xi.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn constant_observable_has_zero_deviation() {
        let mut p = SleParams::new(2.0, 1e-2, 0.2, 50, 5);
        p.record_stride = 5;
        let r = martingale_test(&Observable::constant(cx(2.0, -1.0)), &p, cx(0.0, 2.0)).unwrap();
        assert_eq!(r.max_deviation(), 0.0);
        assert_eq!(r.checkpoints.last().unwrap().t, 0.2);
        assert!(martingale_test(&Observable::monomial(cx(1.0, 0.0), 2.0), &p, cx(0.0, 2.0)).is_err());
    }

    #[test]
    fn exact_driftless_exponent() {
        let r = |a: i64, b: i64| BigRational::new(a.into(), b.into());
        assert_eq!(driftless_exponent(&r(2, 1)), r(-1, 1));
        assert_eq!(driftless_exponent(&r(8, 3)), r(-1, 2));
    }
}
