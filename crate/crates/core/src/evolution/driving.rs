//! Driving functions `p(z, t)` for the Löwner-Kufarev flow and their JSON form.
//!
//! JSON examples:
//!
//! ```json
//! {"kind": "constant", "p": [1.0, 0.5]}
//! {"kind": "piecewise", "pieces": [{"t0": 0.0, "p": [1.0, 0.5]}, {"t0": 1.0, "p": [1.0, [0.0, 0.3]]}]}
//! {"kind": "kernel", "u": 0.25}
//! {"kind": "kernel", "u": {"times": [0.0, 1.0], "values": [0.0, 3.14]}}
//! {"kind": "table", "times": [0.0, 2.0], "p": [[1.0, 0.5], [1.0, 0.0]]}
//! ```
//!
//! A coefficient is either a real number or a `[re, im]` pair. `order` and
//! `allow_alternate` are optional on every kind.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::TruncatedTaylor;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CoeffValue {
    Real(f64),
    Complex([f64; 2]),
}

impl From<CoeffValue> for Complex64 {
    fn from(v: CoeffValue) -> Self {
        match v {
            CoeffValue::Real(r) => Complex64::new(r, 0.0),
            CoeffValue::Complex([re, im]) => Complex64::new(re, im),
        }
    }
}

impl From<Complex64> for CoeffValue {
    fn from(z: Complex64) -> Self {
        if z.im == 0.0 {
            CoeffValue::Real(z.re)
        } else {
            CoeffValue::Complex([z.re, z.im])
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PieceSpec {
    pub t0: f64,
    pub p: Vec<CoeffValue>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AngleTable {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AngleSpec {
    Constant(f64),
    Table(AngleTable),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DrivingSpec {
    Constant {
        p: Vec<CoeffValue>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        order: Option<usize>,
        #[serde(default, skip_serializing_if = "is_false")]
        allow_alternate: bool,
    },
    Piecewise {
        pieces: Vec<PieceSpec>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        order: Option<usize>,
        #[serde(default, skip_serializing_if = "is_false")]
        allow_alternate: bool,
    },
    Kernel {
        u: AngleSpec,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        order: Option<usize>,
    },
    Table {
        times: Vec<f64>,
        p: Vec<Vec<CoeffValue>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        order: Option<usize>,
        #[serde(default, skip_serializing_if = "is_false")]
        allow_alternate: bool,
    },
}

fn is_false(b: &bool) -> bool {
    !*b
}

#[derive(Clone, Debug, PartialEq)]
pub enum DrivingKind {
    /// `p(z) = Σ p[k] z^k`, independent of time.
    Constant(Vec<Complex64>),
    /// Each piece is active from its start time until the next start.
    Piecewise(Vec<(f64, Vec<Complex64>)>),
    /// `(e^{iu} + z)/(e^{iu} - z)` with `u(t)` constant or linearly interpolated.
    Kernel(AngleSpec),
    /// Coefficients linearly interpolated between sample times, held
    /// constant outside the sampled range.
    Table {
        times: Vec<f64>,
        p: Vec<Vec<Complex64>>,
    },
}

/// Sampling grid for [`caratheodory_check`]: circles `|z| = r_i`,
/// `r_i = (1 - eps) i / radii` for `i = 0..=radii`.
#[derive(Clone, Copy, Debug)]
pub struct CaratheodoryGrid {
    pub radii: usize,
    pub angles: usize,
    pub eps: f64,
}

impl Default for CaratheodoryGrid {
    fn default() -> Self {
        Self {
            radii: 20,
            angles: 128,
            eps: 1e-3,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CaratheodoryReport {
    pub ok: bool,
    /// Minimum of `Re p` over the grid.
    pub margin: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DrivingFunction {
    kind: DrivingKind,
    order: Option<usize>,
    allow_alternate: bool,
}

fn interp(times: &[f64], t: f64) -> (usize, usize, f64) {
    if t <= times[0] {
        return (0, 0, 0.0);
    }
    let last = times.len() - 1;
    if t >= times[last] {
        return (last, last, 0.0);
    }
    let i = times.partition_point(|&s| s <= t) - 1;
    let w = (t - times[i]) / (times[i + 1] - times[i]);
    (i, i + 1, w)
}

fn strictly_increasing(times: &[f64], what: &str) -> Result<()> {
    if times.is_empty() {
        return Err(Error::InvalidArgument(format!("{what}: at least one sample required")));
    }
    if times.iter().any(|t| !t.is_finite()) || times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument(format!("{what}: times must be finite and strictly increasing")));
    }
    Ok(())
}

fn finite(p: &[Complex64], what: &str) -> Result<()> {
    if p.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::InvalidArgument(format!("{what}: non-finite coefficient")));
    }
    Ok(())
}

impl DrivingFunction {
    /// Validates the normalization `p(0) = 1` and the Carathéodory
    /// condition unless `allow_alternate` is set.
    pub fn new(kind: DrivingKind, order: Option<usize>, allow_alternate: bool) -> Result<Self> {
        let rows: Vec<Vec<Complex64>> = match &kind {
            DrivingKind::Constant(p) => vec![p.clone()],
            DrivingKind::Piecewise(pieces) => {
                if pieces.is_empty() {
                    return Err(Error::InvalidArgument("piecewise: no pieces".into()));
                }
                let starts: Vec<f64> = pieces.iter().map(|p| p.0).collect();
                strictly_increasing(&starts, "piecewise")?;
                pieces.iter().map(|p| p.1.clone()).collect()
            }
            DrivingKind::Kernel(AngleSpec::Constant(u)) => {
                if !u.is_finite() {
                    return Err(Error::InvalidArgument("kernel: non-finite angle".into()));
                }
                vec![]
            }
            DrivingKind::Kernel(AngleSpec::Table(tab)) => {
                strictly_increasing(&tab.times, "kernel")?;
                if tab.values.len() != tab.times.len() || tab.values.iter().any(|u| !u.is_finite()) {
                    return Err(Error::InvalidArgument("kernel: values must be finite and match times".into()));
                }
                vec![]
            }
            DrivingKind::Table { times, p } => {
                strictly_increasing(times, "table")?;
                if p.len() != times.len() {
                    return Err(Error::InvalidArgument("table: one coefficient row per time required".into()));
                }
                p.clone()
            }
        };
        let driving = Self {
            kind,
            order,
            allow_alternate,
        };
        for row in &rows {
            if row.is_empty() {
                return Err(Error::InvalidArgument("empty coefficient list".into()));
            }
            finite(row, "driving function")?;
            if !allow_alternate {
                if row[0] != Complex64::new(1.0, 0.0) {
                    return Err(Error::InvalidArgument(format!(
                        "normalization p(0) = 1 violated: p(0) = {}",
                        row[0]
                    )));
                }
                let report = caratheodory_poly(row, CaratheodoryGrid::default());
                if !report.ok {
                    return Err(Error::InvalidArgument(format!(
                        "Re p is not positive on the disk (min {:.3e})",
                        report.margin
                    )));
                }
            }
        }
        Ok(driving)
    }

    /// `p ≡ 1 + Σ p_k z^k`, validated.
    pub fn constant(p: Vec<Complex64>) -> Result<Self> {
        Self::new(DrivingKind::Constant(p), None, false)
    }

    /// Constant real coefficients, validated.
    pub fn constant_real(p: &[f64]) -> Result<Self> {
        Self::constant(p.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn kernel(u: f64) -> Result<Self> {
        Self::new(DrivingKind::Kernel(AngleSpec::Constant(u)), None, false)
    }

    /// Coefficients with unconstrained `p(0)` and real part.
    pub fn alternate(kind: DrivingKind) -> Result<Self> {
        Self::new(kind, None, true)
    }

    pub fn from_spec(spec: &DrivingSpec) -> Result<Self> {
        let conv = |p: &[CoeffValue]| -> Vec<Complex64> { p.iter().map(|&v| v.into()).collect() };
        match spec {
            DrivingSpec::Constant {
                p,
                order,
                allow_alternate,
            } => Self::new(DrivingKind::Constant(conv(p)), *order, *allow_alternate),
            DrivingSpec::Piecewise {
                pieces,
                order,
                allow_alternate,
            } => Self::new(
                DrivingKind::Piecewise(pieces.iter().map(|pc| (pc.t0, conv(&pc.p))).collect()),
                *order,
                *allow_alternate,
            ),
            DrivingSpec::Kernel { u, order } => Self::new(DrivingKind::Kernel(u.clone()), *order, false),
            DrivingSpec::Table {
                times,
                p,
                order,
                allow_alternate,
            } => Self::new(
                DrivingKind::Table {
                    times: times.clone(),
                    p: p.iter().map(|row| conv(row)).collect(),
                },
                *order,
                *allow_alternate,
            ),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: DrivingSpec =
            serde_json::from_str(text).map_err(|e| Error::InvalidArgument(format!("driving function: {e}")))?;
        Self::from_spec(&spec)
    }

    pub fn to_spec(&self) -> DrivingSpec {
        let conv = |p: &[Complex64]| -> Vec<CoeffValue> { p.iter().map(|&z| z.into()).collect() };
        match &self.kind {
            DrivingKind::Constant(p) => DrivingSpec::Constant {
                p: conv(p),
                order: self.order,
                allow_alternate: self.allow_alternate,
            },
            DrivingKind::Piecewise(pieces) => DrivingSpec::Piecewise {
                pieces: pieces
                    .iter()
                    .map(|(t0, p)| PieceSpec { t0: *t0, p: conv(p) })
                    .collect(),
                order: self.order,
                allow_alternate: self.allow_alternate,
            },
            DrivingKind::Kernel(u) => DrivingSpec::Kernel {
                u: u.clone(),
                order: self.order,
            },
            DrivingKind::Table { times, p } => DrivingSpec::Table {
                times: times.clone(),
                p: p.iter().map(|row| conv(row)).collect(),
                order: self.order,
                allow_alternate: self.allow_alternate,
            },
        }
    }

    /// Compact JSON description used in trajectory metadata.
    pub fn describe(&self) -> String {
        serde_json::to_string(&self.to_spec()).unwrap_or_default()
    }

    pub fn kind(&self) -> &DrivingKind {
        &self.kind
    }

    pub fn order(&self) -> Option<usize> {
        self.order
    }

    pub fn allow_alternate(&self) -> bool {
        self.allow_alternate
    }

    /// Times where the driver is discontinuous or has a kink; integrators
    /// end a step at each of them.
    pub fn breakpoints(&self) -> Vec<f64> {
        match &self.kind {
            DrivingKind::Constant(_) | DrivingKind::Kernel(AngleSpec::Constant(_)) => vec![],
            DrivingKind::Piecewise(pieces) => pieces.iter().skip(1).map(|p| p.0).collect(),
            DrivingKind::Kernel(AngleSpec::Table(tab)) => tab.times.clone(),
            DrivingKind::Table { times, .. } => times.clone(),
        }
    }

    fn angle(u: &AngleSpec, t: f64) -> f64 {
        match u {
            AngleSpec::Constant(u) => *u,
            AngleSpec::Table(tab) => {
                let (i, j, w) = interp(&tab.times, t);
                tab.values[i] * (1.0 - w) + tab.values[j] * w
            }
        }
    }

    /// The full coefficient list of a polynomial driver at time `t`, or
    /// `None` for the kernel.
    fn poly_at(&self, t: f64, piece_hint: Option<f64>) -> Option<Vec<Complex64>> {
        match &self.kind {
            DrivingKind::Constant(p) => Some(p.clone()),
            DrivingKind::Piecewise(pieces) => {
                let s = piece_hint.unwrap_or(t);
                let idx = pieces.partition_point(|p| p.0 <= s).saturating_sub(1);
                Some(pieces[idx].1.clone())
            }
            DrivingKind::Table { times, p } => {
                let (i, j, w) = interp(times, t);
                let len = p[i].len().max(p[j].len());
                let at = |row: &Vec<Complex64>, k: usize| row.get(k).copied().unwrap_or_default();
                Some((0..len).map(|k| at(&p[i], k) * (1.0 - w) + at(&p[j], k) * w).collect())
            }
            DrivingKind::Kernel(_) => None,
        }
    }

    /// Taylor series of `p(·, t)` through `z^order`.
    pub fn series_at(&self, t: f64, order: usize) -> TruncatedTaylor<Complex64> {
        self.series_on_piece(t, None, order)
    }

    /// Like [`Self::series_at`], but a piecewise driver uses the piece active
    /// at `piece_time`. Integrators pass the midpoint of the current segment
    /// so stages evaluated at a segment boundary see the left-hand piece.
    pub fn series_on_piece(&self, t: f64, piece_time: Option<f64>, order: usize) -> TruncatedTaylor<Complex64> {
        match &self.kind {
            DrivingKind::Kernel(u) => kernel_series(Self::angle(u, t), order),
            _ => {
                let p = self.poly_at(t, piece_time).expect("polynomial driver");
                let mut coeffs = vec![Complex64::default(); order + 1];
                for (k, v) in p.into_iter().enumerate().take(order + 1) {
                    coeffs[k] = v;
                }
                TruncatedTaylor::new(coeffs)
            }
        }
    }

    /// Exact value of `p(z, t)` inside the unit disk.
    pub fn eval(&self, z: Complex64, t: f64) -> Complex64 {
        match &self.kind {
            DrivingKind::Kernel(u) => {
                let e = Complex64::from_polar(1.0, Self::angle(u, t));
                (e + z) / (e - z)
            }
            _ => {
                let p = self.poly_at(t, None).expect("polynomial driver");
                p.iter().rev().fold(Complex64::default(), |acc, c| acc * z + c)
            }
        }
    }
}

/// `(e^{iu} + z)/(e^{iu} - z) = 1 + 2 Σ_{k=1}^n e^{-iku} z^k`.
pub fn kernel_series(u: f64, n: usize) -> TruncatedTaylor<Complex64> {
    let mut coeffs = vec![Complex64::new(1.0, 0.0)];
    for k in 1..=n {
        coeffs.push(Complex64::from_polar(2.0, -(k as f64) * u));
    }
    TruncatedTaylor::new(coeffs)
}

fn grid_points(grid: CaratheodoryGrid) -> impl Iterator<Item = Complex64> {
    let radii = grid.radii.max(1);
    let angles = grid.angles.max(1);
    (0..=radii).flat_map(move |i| {
        let r = (1.0 - grid.eps) * i as f64 / radii as f64;
        (0..angles).map(move |j| Complex64::from_polar(r, std::f64::consts::TAU * j as f64 / angles as f64))
    })
}

fn caratheodory_poly(p: &[Complex64], grid: CaratheodoryGrid) -> CaratheodoryReport {
    let margin = grid_points(grid)
        .map(|z| p.iter().rev().fold(Complex64::default(), |acc, c| acc * z + c).re)
        .fold(f64::INFINITY, f64::min);
    CaratheodoryReport { ok: margin > 0.0, margin }
}

/// Minimum of `Re p(z, t)` on concentric circles inside the disk.
/// Kernel drivers use their closed form, every other kind its polynomial.
pub fn caratheodory_check(p: &DrivingFunction, t: f64, grid: CaratheodoryGrid) -> CaratheodoryReport {
    let margin = grid_points(grid)
        .map(|z| p.eval(z, t).re)
        .fold(f64::INFINITY, f64::min);
    CaratheodoryReport { ok: margin > 0.0, margin }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn caratheodory_examples() {
        let g = CaratheodoryGrid::default();
        let one = DrivingFunction::constant_real(&[1.0]).unwrap();
        let r = caratheodory_check(&one, 0.0, g);
        assert!(r.ok);
        assert_eq!(r.margin, 1.0);

        let edge = DrivingFunction::alternate(DrivingKind::Constant(vec![Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0)])).unwrap();
        let r = caratheodory_check(&edge, 0.0, g);
        assert!(r.ok);
        assert!((r.margin - g.eps).abs() < 1e-12);
        let finer = CaratheodoryGrid { eps: 1e-6, ..g };
        assert!(caratheodory_check(&edge, 0.0, finer).margin < 1e-5);

        let bad = DrivingFunction::alternate(DrivingKind::Constant(vec![Complex64::new(1.0, 0.0), Complex64::new(3.0, 0.0)])).unwrap();
        assert!(!caratheodory_check(&bad, 0.0, g).ok);
        assert!(DrivingFunction::constant_real(&[1.0, 3.0]).is_err());
        assert!(DrivingFunction::constant_real(&[2.0, 0.5]).is_err());
    }

    #[test]
    fn kernel_expansion() {
        let s = kernel_series(0.0, 4);
        let expected: Vec<Complex64> = [1.0, 2.0, 2.0, 2.0, 2.0].iter().map(|&x| Complex64::new(x, 0.0)).collect();
        assert_eq!(s.coeffs(), &expected[..]);
        let s = kernel_series(0.7, 6);
        assert_eq!(s.coeffs()[0], Complex64::new(1.0, 0.0));
        for c in &s.coeffs()[1..] {
            assert!((c.norm() - 2.0).abs() < 1e-15);
        }
        let k = DrivingFunction::kernel(0.7).unwrap();
        let z = Complex64::new(0.1, -0.2);
        assert!((k.eval(z, 0.0) - kernel_series(0.7, 60).eval(z)).norm() < 1e-14);
        assert!(caratheodory_check(&k, 0.0, CaratheodoryGrid::default()).ok);
    }

    #[test]
    fn json_round_trip_and_kinds() {
        let d = DrivingFunction::from_json(r#"{"kind":"constant","p":[1.0, 0.5]}"#).unwrap();
        assert_eq!(d.series_at(0.0, 3).coeffs(), &[Complex64::new(1.0, 0.0), Complex64::new(0.5, 0.0), Complex64::default(), Complex64::default()]);
        assert_eq!(DrivingFunction::from_json(&d.describe()).unwrap(), d);

        let pw = DrivingFunction::from_json(r#"{"kind":"piecewise","pieces":[{"t0":0.0,"p":[1.0,0.5]},{"t0":1.0,"p":[1.0,[0.0,0.25]]}]}"#).unwrap();
        assert_eq!(pw.breakpoints(), vec![1.0]);
        assert_eq!(pw.series_at(1.0, 1).coeffs()[1], Complex64::new(0.0, 0.25));
        assert_eq!(pw.series_on_piece(1.0, Some(0.9), 1).coeffs()[1], Complex64::new(0.5, 0.0));

        let tab = DrivingFunction::from_json(r#"{"kind":"table","times":[0.0,2.0],"p":[[1.0,0.5],[1.0,0.0]]}"#).unwrap();
        assert_eq!(tab.series_at(1.0, 1).coeffs()[1], Complex64::new(0.25, 0.0));
        assert_eq!(tab.series_at(5.0, 1).coeffs()[1], Complex64::new(0.0, 0.0));

        let ker = DrivingFunction::from_json(r#"{"kind":"kernel","u":{"times":[0.0,1.0],"values":[0.0,1.0]}}"#).unwrap();
        assert_eq!(ker.series_at(0.5, 1).coeffs()[1], Complex64::from_polar(2.0, -0.5));

        assert!(DrivingFunction::from_json(r#"{"kind":"constant","p":[1.0],"extra":1}"#).is_err());
        assert!(DrivingFunction::from_json(r#"{"kind":"nope"}"#).is_err());
    }
}
