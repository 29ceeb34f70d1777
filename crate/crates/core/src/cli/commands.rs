use num_complex::Complex64;
use num_rational::BigRational;
use serde::Serialize;
use serde_json::{json, Map, Value};

use super::config::{random_complex_vec, rational_to_f64, Fields};
use super::{check, Context, Failure, Outcome};
use crate::checks;
use crate::evolution::conserved::{conserved_virasoro, ConservedReport};
use crate::evolution::driving::{DrivingFunction, DrivingKind, DrivingSpec};
use crate::evolution::flow::{integrate_with, loewner_limit, EvolutionState, IntegrateOptions, Trajectory};
use crate::geodesics::{
    constant_u_geodesic, constant_u_numeric, constant_u_symbolic, energy, integrate_geodesic_with, integrate_u_flow,
    CotangentState,
};
use crate::io::{fmt_f64, CsvTable};
use crate::ode::{Adaptive, FixedStep};
use crate::sle::{
    capacity_coefficient, charge_weight, charge_weight_exact, deterministic_map, deterministic_map_adaptive,
    deterministic_map_remaining, deterministic_map_rk4, martingale_test, simulate_chordal, Observable, SleParams,
};

type Cfg = Map<String, Value>;

fn pair(z: Complex64) -> [f64; 2] {
    [z.re, z.im]
}

fn pairs(v: &[Complex64]) -> Vec<[f64; 2]> {
    v.iter().map(|&z| pair(z)).collect()
}

fn driving(f: &mut Fields) -> Option<DrivingFunction> {
    let v = f.raw_req("driving")?;
    let spec: DrivingSpec = match serde_json::from_value(v.clone()) {
        Ok(s) => s,
        Err(e) => {
            f.error("driving", e.to_string());
            return None;
        }
    };
    match DrivingFunction::from_spec(&spec) {
        Ok(d) => Some(d),
        Err(e) => {
            f.error("driving", e.to_string());
            None
        }
    }
}

fn len_check(f: &mut Fields, name: &str, v: &Option<Vec<Complex64>>, n: Option<u64>) {
    if let (Some(v), Some(n)) = (v, n) {
        if v.len() as u64 != n {
            f.error(name, format!("expected {n} entries, got {}", v.len()));
        }
    }
}

/// `p = 1 + p1 z` with nothing else: returns `p1`.
fn linear_constant_driver(d: &DrivingFunction) -> Option<Complex64> {
    match d.kind() {
        DrivingKind::Constant(p) if p.len() >= 2 && p[2..].iter().all(|z| z.norm() == 0.0) => Some(p[1]),
        DrivingKind::Constant(p) if p.len() == 1 => Some(Complex64::default()),
        _ => None,
    }
}

fn trajectory_csv(traj: &Trajectory) -> CsvTable {
    let first = &traj.samples[0];
    let n = first.n();
    let mut header = vec!["t".to_string()];
    for k in 1..=n {
        header.push(format!("re_c{k}"));
        header.push(format!("im_c{k}"));
    }
    if first.psibar.is_some() {
        for k in 1..=n {
            header.push(format!("re_psibar{k}"));
            header.push(format!("im_psibar{k}"));
        }
    }
    for j in 0..first.psibar_low.len() {
        header.push(format!("re_psibar_neg{j}"));
        header.push(format!("im_psibar_neg{j}"));
    }
    let mut table = CsvTable::new(header);
    for s in &traj.samples {
        let mut row = vec![s.t];
        let all = s.c.iter().chain(s.psibar.iter().flatten()).chain(&s.psibar_low);
        for z in all {
            row.push(z.re);
            row.push(z.im);
        }
        table.push(row);
    }
    table
}

pub(super) fn evolve(cfg: &Cfg, ctx: &Context) -> Result<Outcome, Failure> {
    let mut f = Fields::new(cfg);
    let n = f.u64_req("n", 1);
    let dt = f.f64_req("dt", true);
    let t_end = f.f64_req("t_end", true);
    let drv = driving(&mut f);
    let c0 = f.complex_vec_opt("c0");
    let psibar = f.complex_vec_opt("psibar");
    let low = f.complex_vec_opt("psibar_low");
    let stride = f.u64_opt("stride", 1).unwrap_or(1);
    let blowup = f.f64_opt("blowup", true).unwrap_or(1e6);
    let limit_horizon = f.f64_opt("limit_horizon", true);
    let limit_dt = f.f64_opt("limit_dt", true);
    len_check(&mut f, "c0", &c0, n);
    len_check(&mut f, "psibar", &psibar, n);
    if low.is_some() && psibar.is_none() {
        f.error("psibar_low", "requires psibar");
    }
    check(f.finish())?;
    let (n, dt, t_end, drv) = (n.unwrap() as usize, dt.unwrap(), t_end.unwrap(), drv.unwrap());

    let mut init = EvolutionState::identity(n);
    let c0_given = c0.is_some();
    if let Some(c0) = c0 {
        init.c = c0;
    }
    if let Some(p) = psibar {
        init = init.momenta(p).low_momenta(low.unwrap_or_default());
    }
    let opts = IntegrateOptions {
        dt,
        blowup,
        stride: stride as usize,
    };
    let traj = integrate_with(&init, &drv, t_end, &opts)?;
    let csv = ctx.write("csv", &trajectory_csv(&traj).render())?;

    let last = traj.last();
    let p1 = if c0_given { None } else { linear_constant_driver(&drv) };
    let closed = p1.map(|p1| {
        let err = traj
            .samples
            .iter()
            .flat_map(|s| {
                let r = -p1 * (1.0 - (-s.t).exp());
                s.c.iter()
                    .enumerate()
                    .map(move |(k, c)| (c - r.powi(k as i32 + 1)).norm())
            })
            .fold(0.0, f64::max);
        json!({"formula": "c_k(t) = (-p1 (1 - e^{-t}))^k", "max_abs_error": err})
    });
    let limit = match limit_horizon {
        Some(h) => {
            let lr = loewner_limit(&drv, h, n, limit_dt.unwrap_or(dt))?;
            let err = p1.map(|p1| {
                lr.c.iter()
                    .enumerate()
                    .map(|(k, c)| (c - (-p1).powi(k as i32 + 1)).norm())
                    .fold(0.0, f64::max)
            });
            Some(json!({
                "horizon": h,
                "dt": limit_dt.unwrap_or(dt),
                "c": pairs(&lr.c),
                "tail_estimate": lr.tail_estimate,
                "max_abs_error_vs_closed_form": err,
            }))
        }
        None => None,
    };
    let summary_json = json!({
        "command": "evolve",
        "n": n,
        "meta": traj.meta,
        "samples": traj.samples.len(),
        "final": {"t": last.t, "c": pairs(&last.c)},
        "closed_form": closed,
        "limit": limit,
    });
    let js = ctx.write_json(&summary_json)?;
    let mut summary = format!("evolve: n={n} t_end={t_end} dt={dt} samples={}", traj.samples.len());
    if let Some(c) = &closed {
        summary.push_str(&format!(" closed_form_max_error={}", fmt_f64(c["max_abs_error"].as_f64().unwrap_or(f64::NAN))));
    }
    if let Some(l) = &limit {
        if let Some(e) = l["max_abs_error_vs_closed_form"].as_f64() {
            summary.push_str(&format!(" limit_max_error={}", fmt_f64(e)));
        }
    }
    Ok(Outcome {
        summary,
        artifacts: vec![csv, js],
        warnings: vec![],
    })
}

#[derive(Serialize)]
struct DriftComparison {
    dt: f64,
    dt_coarse: f64,
    max_abs_drift: f64,
    max_abs_drift_coarse: f64,
    /// Coarse over fine; about 16 for a fourth-order method.
    ratio: f64,
}

/// Keeps every `stride`-th point of each series and the last one.
fn thin(report: &ConservedReport, stride: usize) -> ConservedReport {
    let mut r = report.clone();
    for q in &mut r.quantities {
        let len = q.series.len();
        q.series = q
            .series
            .iter()
            .enumerate()
            .filter(|(i, _)| i % stride == 0 || *i + 1 == len)
            .map(|(_, p)| p.clone())
            .collect();
    }
    r
}

pub(super) fn conserve(cfg: &Cfg, ctx: &Context) -> Result<Outcome, Failure> {
    let mut f = Fields::new(cfg);
    let n = f.u64_req("n", 1);
    let dt = f.f64_req("dt", true);
    let t_end = f.f64_req("t_end", true);
    let drv = driving(&mut f);
    let psibar = f.complex_vec_opt("psibar");
    let low = f.complex_vec_opt("psibar_low");
    let compare_dt = f.f64_opt("compare_dt", true);
    let series_stride = f.u64_opt("series_stride", 1).unwrap_or(10) as usize;
    len_check(&mut f, "psibar", &psibar, n);
    check(f.finish())?;
    let (n, dt, t_end, drv) = (n.unwrap() as usize, dt.unwrap(), t_end.unwrap(), drv.unwrap());

    let psi = psibar.unwrap_or_else(|| {
        let mut e1 = vec![Complex64::default(); n];
        e1[0] = Complex64::new(1.0, 0.0);
        e1
    });
    // Default: as many non-positive momenta as the support of ψ̄ allows.
    let top = psi.iter().rposition(|z| z.norm() != 0.0).map_or(0, |i| i + 1);
    let low = low.unwrap_or_else(|| vec![Complex64::default(); n + 1 - top.max(1)]);
    let init = EvolutionState::identity(n).momenta(psi).low_momenta(low);
    let run = |h: f64| -> Result<ConservedReport, Failure> {
        let traj = integrate_with(&init, &drv, t_end, &IntegrateOptions::new(h))?;
        Ok(conserved_virasoro(&traj)?)
    };
    let report = run(dt)?;
    let comparison = match compare_dt {
        Some(h) => {
            let coarse = run(h)?;
            Some(DriftComparison {
                dt,
                dt_coarse: h,
                max_abs_drift: report.max_abs_drift(),
                max_abs_drift_coarse: coarse.max_abs_drift(),
                ratio: coarse.max_abs_drift() / report.max_abs_drift(),
            })
        }
        None => None,
    };
    let lk_rel = report.positive().map(|q| q.max_rel_drift).fold(0.0, f64::max);
    let js = ctx.write_json(&json!({
        "command": "conserve",
        "n": n,
        "dt": dt,
        "t_end": t_end,
        "max_rel_drift_positive": lk_rel,
        "max_rel_drift": report.max_rel_drift(),
        "max_abs_drift": report.max_abs_drift(),
        "comparison": comparison,
        "report": thin(&report, series_stride.max(1)),
    }))?;
    let mut summary = format!(
        "conserve: n={n} dt={dt} max_rel_drift(L_k)={} max_rel_drift(all)={}",
        fmt_f64(lk_rel),
        fmt_f64(report.max_rel_drift())
    );
    if let Some(c) = &comparison {
        summary.push_str(&format!(" drift_ratio={}", fmt_f64(c.ratio)));
    }
    Ok(Outcome {
        summary,
        artifacts: vec![js],
        warnings: vec![],
    })
}

pub(super) fn build_lneg(cfg: &Cfg, ctx: &Context) -> Result<Outcome, Failure> {
    let mut f = Fields::new(cfg);
    let n = f.u64_req("n", 3);
    let depth = f.u64_req("depth", 2);
    check(f.finish())?;
    let (n, depth) = (n.unwrap() as usize, depth.unwrap() as usize);
    let report = checks::negative_check(n, depth)?;
    let js = ctx.write_json(&report)?;
    let summary = format!(
        "build-lneg: n={n} depth={depth} leading_terms_ok={} action_checks_ok={} cross_route={}",
        report.leading_terms.iter().all(|l| l.matches),
        report.action_checks.iter().all(|a| a.2.is_empty()),
        report.cross_route_agrees.map_or("n/a".to_string(), |b| b.to_string())
    );
    Ok(Outcome {
        summary,
        artifacts: vec![js],
        warnings: vec![],
    })
}

pub(super) fn witt_check(cfg: &Cfg, ctx: &Context) -> Result<Outcome, Failure> {
    let mut f = Fields::new(cfg);
    let n = f.u64_req("n", 2);
    let action_max = f.u64_opt("action_max", 1);
    check(f.finish())?;
    let n = n.unwrap() as usize;
    let action_max = action_max.map_or(n, |m| m as usize);
    let witt = checks::witt_check(n)?;
    let p = checks::p_oracle(n, action_max)?;
    let max_w = witt.entries.iter().map(|e| e.residual).fold(0.0, f64::max);
    let max_p = p
        .reciprocal_residuals
        .iter()
        .copied()
        .chain(p.action.iter().map(|e| e.residual))
        .fold(0.0, f64::max);
    let js = ctx.write_json(&json!({"command": "witt-check", "witt": witt, "p_oracle": p}))?;
    Ok(Outcome {
        summary: format!(
            "witt-check: n={n} brackets={} max_residual={} p_oracle_max_residual={}",
            witt.entries.len(),
            fmt_f64(max_w),
            fmt_f64(max_p)
        ),
        artifacts: vec![js],
        warnings: vec![],
    })
}

pub(super) fn duality_check(cfg: &Cfg, ctx: &Context) -> Result<Outcome, Failure> {
    let mut f = Fields::new(cfg);
    let n = f.u64_req("n", 1);
    check(f.finish())?;
    let n = n.unwrap() as usize;
    let d = checks::duality_check(n)?;
    let l0 = checks::l0_expansion_check(n)?;
    let js = ctx.write_json(&json!({"command": "duality-check", "duality": d, "l0_expansion": l0}))?;
    Ok(Outcome {
        summary: format!(
            "duality-check: n={n} pairing_residual={} constructions_residual={} l0_expansion_residual={}",
            fmt_f64(d.pairing_residual),
            fmt_f64(d.constructions_residual),
            fmt_f64(l0.residual)
        ),
        artifacts: vec![js],
        warnings: vec![],
    })
}

pub(super) fn geodesic(cfg: &Cfg, ctx: &Context) -> Result<Outcome, Failure> {
    let mut f = Fields::new(cfg);
    let n = f.u64_req("n", 1);
    let dt = f.f64_req("dt", true);
    let t_end = f.f64_req("t_end", true);
    let u0 = f.complex_vec_opt("u0");
    let seed = f.u64_opt("seed", 0);
    let scale = f.f64_opt("scale", true).unwrap_or(1.0);
    let c0 = f.complex_vec_opt("c0");
    let psibar0 = f.complex_vec_opt("psibar0");
    let stride = f.u64_opt("stride", 1).unwrap_or(1) as usize;
    len_check(&mut f, "u0", &u0, n);
    len_check(&mut f, "c0", &c0, n);
    len_check(&mut f, "psibar0", &psibar0, n);
    let given = [u0.is_some(), seed.is_some(), psibar0.is_some()].iter().filter(|b| **b).count();
    if given != 1 {
        f.error("u0", "give exactly one of u0, seed, or psibar0");
    }
    if c0.is_some() && psibar0.is_none() {
        f.error("c0", "only used together with psibar0");
    }
    check(f.finish())?;
    let (n, dt, t_end) = (n.unwrap() as usize, dt.unwrap(), t_end.unwrap());
    let mut opts = FixedStep::new(dt);
    opts.stride = stride;

    let samples: Vec<(f64, Vec<Complex64>)> = if let Some(psi) = psibar0 {
        let s0 = CotangentState::new(c0.unwrap_or_else(|| vec![Complex64::default(); n]), psi)?;
        integrate_geodesic_with(&s0, t_end, &opts, 1e6)?
            .into_iter()
            .map(|s| (s.t, s.u))
            .collect()
    } else {
        let u0 = u0.unwrap_or_else(|| random_complex_vec(seed.unwrap_or(0), n, scale));
        integrate_u_flow(&u0, t_end, &opts)?
    };
    let mut header = vec!["t".to_string()];
    for k in 1..=n {
        header.push(format!("re_u{k}"));
        header.push(format!("im_u{k}"));
    }
    header.push("energy".into());
    let mut table = CsvTable::new(header);
    let e0 = energy(&samples[0].1);
    let mut max_abs = 0.0f64;
    for (t, u) in &samples {
        let mut row = vec![*t];
        for z in u {
            row.push(z.re);
            row.push(z.im);
        }
        let e = energy(u);
        max_abs = max_abs.max((e - e0).abs());
        row.push(e);
        table.push(row);
    }
    let rel = if e0 > 0.0 { max_abs / e0 } else { max_abs };
    let csv = ctx.write("csv", &table.render())?;
    let js = ctx.write_json(&json!({
        "command": "geodesic",
        "n": n,
        "dt": dt,
        "t_end": t_end,
        "u0": pairs(&samples[0].1),
        "energy0": e0,
        "max_abs_energy_drift": max_abs,
        "max_rel_energy_drift": rel,
    }))?;
    Ok(Outcome {
        summary: format!(
            "geodesic: n={n} t_end={t_end} dt={dt} energy0={} max_rel_energy_drift={}",
            fmt_f64(e0),
            fmt_f64(rel)
        ),
        artifacts: vec![csv, js],
        warnings: vec![],
    })
}

fn spoly_strings(p: &[crate::algebra::poly::CoeffPolynomial]) -> Vec<String> {
    // Variable k of the symbolic solution stands for ū_k.
    p.iter().map(|c| c.to_string().replace('c', "ubar")).collect()
}

pub(super) fn geodesic_const(cfg: &Cfg, ctx: &Context) -> Result<Outcome, Failure> {
    let mut f = Fields::new(cfg);
    let n = f.u64_req("n", 1);
    let s = f.f64_req("s", true);
    let dt = f.f64_req("dt", true);
    let seed = f.u64_opt("seed", 0);
    let scale = f.f64_opt("scale", true).unwrap_or(0.5);
    let c0 = f.complex_vec_opt("c0");
    let u0 = f.complex_vec_opt("u0");
    len_check(&mut f, "c0", &c0, n);
    len_check(&mut f, "u0", &u0, n);
    if seed.is_none() && (c0.is_none() || u0.is_none()) {
        f.error("seed", "give a seed or both c0 and u0");
    }
    check(f.finish())?;
    let (n, s, dt) = (n.unwrap() as usize, s.unwrap(), dt.unwrap());
    let seed = seed.unwrap_or(0);
    let c0 = c0.unwrap_or_else(|| random_complex_vec(seed, n, scale));
    let u0 = u0.unwrap_or_else(|| random_complex_vec(seed.wrapping_add(1), n, scale));
    let exact = constant_u_geodesic(&c0, &u0, s)?;
    let numeric = constant_u_numeric(&c0, &u0, s, &FixedStep::new(dt))?;
    let max_err = exact.iter().zip(&numeric).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    let symbolic = constant_u_symbolic(n);
    let js = ctx.write_json(&json!({
        "command": "geodesic-const",
        "n": n,
        "s": s,
        "dt": dt,
        "c0": pairs(&c0),
        "u0": pairs(&u0),
        "polynomial": pairs(&exact),
        "numeric": pairs(&numeric),
        "max_coefficient_error": max_err,
        "symbolic_from_zero": symbolic.iter().map(|p| spoly_strings(p)).collect::<Vec<_>>(),
    }))?;
    Ok(Outcome {
        summary: format!("geodesic-const: n={n} s={s} dt={dt} max_coefficient_error={}", fmt_f64(max_err)),
        artifacts: vec![js],
        warnings: vec![],
    })
}

struct SleInputs {
    kappa: BigRational,
    params: SleParams,
    z0: Complex64,
}

fn sle_inputs(f: &mut Fields) -> Option<SleInputs> {
    let kappa = f.rational_req("kappa");
    let dt = f.f64_req("dt", true);
    let horizon = f.f64_req("T", true);
    let n_paths = f.u64_req("n_paths", 1);
    let seed = f.u64_req("seed", 0);
    let z0 = f.complex_req("z0");
    let eps = f.f64_opt("swallow_eps", true);
    let stride = f.u64_opt("record_stride", 1);
    let noise = f.f64_opt("noise_scale", false);
    if let Some(k) = &kappa {
        if rational_to_f64(k) <= 0.0 {
            f.error("kappa", "must be positive");
        }
    }
    if let Some(z) = z0 {
        if !(z.im > 0.0) {
            f.error("z0", "must lie in the upper half-plane");
        }
    }
    if let Some(x) = noise {
        if x < 0.0 {
            f.error("noise_scale", "must be non-negative");
        }
    }
    let (kappa, dt, horizon, n_paths, seed, z0) = (kappa?, dt?, horizon?, n_paths?, seed?, z0?);
    let mut params = SleParams::new(rational_to_f64(&kappa), dt, horizon, n_paths as usize, seed);
    if let Some(e) = eps {
        params.swallow_eps = e;
    }
    params.record_stride = stride.map_or_else(|| ((horizon / dt / 10.0).round() as usize).max(1), |s| s as usize);
    params.noise_scale = noise.unwrap_or(1.0);
    Some(SleInputs { kappa, params, z0 })
}

fn exact_pair(kappa: &BigRational) -> Result<Value, Failure> {
    let (c, h) = charge_weight_exact(kappa)?;
    let cw = charge_weight(rational_to_f64(kappa))?;
    Ok(json!({"kappa": kappa.to_string(), "c": c.to_string(), "h": h.to_string(), "c_float": cw.c, "h_float": cw.h}))
}

fn map_check(f: &mut Fields) -> Option<(Complex64, f64, f64, f64, Vec<f64>)> {
    let v = f.raw_opt("map_check")?;
    let Some(obj) = v.as_object() else {
        f.error("map_check", "expected an object");
        return None;
    };
    let mut g = Fields::new(obj);
    let z = g.complex_req("z");
    let t_end = g.f64_req("t_end", true);
    let dt = g.f64_opt("dt", true).unwrap_or(1e-3);
    let cap_t = g.f64_opt("capacity_t", true).unwrap_or(0.1);
    let radii: Option<Vec<f64>> = g.complex_vec_opt("radii").map(|r| r.iter().map(|z| z.re).collect());
    for d in g.finish() {
        f.error(&format!("map_check.{}", d.field), d.message);
    }
    Some((z?, t_end?, dt, cap_t, radii.unwrap_or_else(|| vec![10.0, 20.0, 40.0])))
}

pub(super) fn sle_sim(cfg: &Cfg, ctx: &Context) -> Result<Outcome, Failure> {
    let mut f = Fields::new(cfg);
    let inputs = sle_inputs(&mut f);
    let table = f.rational_vec_opt("charge_table");
    let mc = map_check(&mut f);
    let diags = f.finish();
    check(diags)?;
    let SleInputs { kappa, params, z0 } = inputs.expect("validated");

    let paths = simulate_chordal(&params, z0)?;
    let mut csv = CsvTable::new(vec!["path".into(), "t".into(), "re_k".into(), "im_k".into(), "xi".into()]);
    for (i, p) in paths.iter().enumerate() {
        for j in 0..p.times.len() {
            csv.push(vec![i as f64, p.times[j], p.k_values[j].re, p.k_values[j].im, p.xi[j]]);
        }
    }
    let csv_path = ctx.write("csv", &csv.render())?;
    let swallowed = paths.iter().filter(|p| p.swallowed_at.is_some()).count() as f64 / paths.len() as f64;
    let finals: Vec<f64> = paths
        .iter()
        .filter(|p| p.swallowed_at.is_none())
        .map(|p| *p.xi.last().expect("non-empty"))
        .collect();
    let m = finals.len() as f64;
    let mean = finals.iter().sum::<f64>() / m;
    let var = finals.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (m - 1.0);
    let table_out = table
        .unwrap_or_default()
        .iter()
        .map(exact_pair)
        .collect::<Result<Vec<_>, _>>()?;
    let map_out = match mc {
        Some((z, t_end, mdt, cap_t, radii)) => {
            let run = deterministic_map_adaptive(z, t_end, &Adaptive::default())?;
            let adaptive_err = run
                .samples
                .iter()
                .map(|(tau, g)| (g - deterministic_map_remaining(z, t_end, *tau)).norm())
                .fold(0.0, f64::max);
            let reached_t = t_end - run.stalled_at.unwrap_or(0.0);
            let fixed = deterministic_map_rk4(z, t_end, mdt)?;
            let fixed_err = fixed
                .iter()
                .map(|(t, g)| (g - deterministic_map(z, *t)).norm())
                .fold(0.0, f64::max);
            let endpoint_err = (fixed.last().expect("non-empty").1 - deterministic_map(z, t_end)).norm();
            let cap = capacity_coefficient(cap_t, &radii, &Adaptive::default())?;
            Some(json!({
                "z": pair(z),
                "t_end": t_end,
                "adaptive": {"max_abs_error": adaptive_err, "reached_t": reached_t, "stalled": run.stalled_at.is_some(), "steps": run.samples.len() - 1},
                "fixed_step": {"dt": mdt, "max_abs_error": fixed_err, "endpoint_abs_error": endpoint_err},
                "capacity": {"t": cap_t, "radii": radii, "coefficient": pair(cap), "rel_error_vs_2t": (cap - 2.0 * cap_t).norm() / (2.0 * cap_t)},
            }))
        }
        None => None,
    };
    let own = exact_pair(&kappa)?;
    let js = ctx.write_json(&json!({
        "command": "sle-sim",
        "kappa": params.kappa,
        "charge_weight": own,
        "n_paths": params.n_paths,
        "swallowed_fraction": swallowed,
        "xi_final_mean": mean,
        "xi_final_stderr": (var / m).sqrt(),
        "charge_table": table_out,
        "map_check": map_out,
    }))?;
    let mut summary = format!(
        "sle-sim: kappa={} c={} h={} paths={} swallowed_fraction={}",
        kappa,
        own["c"].as_str().unwrap_or(""),
        own["h"].as_str().unwrap_or(""),
        params.n_paths,
        fmt_f64(swallowed)
    );
    if let Some(m) = &map_out {
        summary.push_str(&format!(
            " map_fixed_max_error={} map_adaptive_reached_t={} capacity_rel_error={}",
            fmt_f64(m["fixed_step"]["max_abs_error"].as_f64().unwrap_or(f64::NAN)),
            fmt_f64(m["adaptive"]["reached_t"].as_f64().unwrap_or(f64::NAN)),
            fmt_f64(m["capacity"]["rel_error_vs_2t"].as_f64().unwrap_or(f64::NAN)),
        ));
    }
    let mut warnings = Vec::new();
    if swallowed > 0.01 {
        warnings.push(format!("swallowed fraction {swallowed} exceeds 1%"));
    }
    Ok(Outcome {
        summary,
        artifacts: vec![csv_path, js],
        warnings,
    })
}

fn observable(f: &mut Fields) -> Option<Observable> {
    let v = f.raw_req("observable")?;
    let Some(items) = v.as_array() else {
        f.error("observable", "expected an array of {\"coeff\", \"power\"} terms");
        return None;
    };
    let mut terms = Vec::new();
    for (i, item) in items.iter().enumerate() {
        let Some(obj) = item.as_object() else {
            f.error(&format!("observable[{i}]"), "expected an object");
            continue;
        };
        let mut g = Fields::new(obj);
        let a = g.complex_req("coeff");
        let p = g.rational_req("power");
        for d in g.finish() {
            f.error(&format!("observable[{i}].{}", d.field), d.message);
        }
        if let (Some(a), Some(p)) = (a, p) {
            terms.push((a, rational_to_f64(&p)));
        }
    }
    if terms.is_empty() {
        f.error("observable", "needs at least one term");
        return None;
    }
    Some(Observable { terms })
}

pub(super) fn sle_martingale(cfg: &Cfg, ctx: &Context) -> Result<Outcome, Failure> {
    let mut f = Fields::new(cfg);
    let inputs = sle_inputs(&mut f);
    let obs = observable(&mut f);
    check(f.finish())?;
    let SleInputs { kappa, params, z0 } = inputs.expect("validated");
    let obs = obs.expect("validated");
    let report = martingale_test(&obs, &params, z0)?;
    let exact = exact_pair(&kappa)?;
    let js = ctx.write_json(&json!({
        "command": "sle-martingale",
        "kappa": report.kappa,
        "c": report.c,
        "h": report.h,
        "c_exact": exact["c"],
        "h_exact": exact["h"],
        "f_z0": [report.f_z0_re, report.f_z0_im],
        "checkpoints": report.checkpoints,
        "swallowed_fraction": report.swallowed_fraction,
        "max_deviation_in_stderr": report.max_deviation(),
        "warnings": report.warnings,
    }))?;
    let last = report.checkpoints.last().expect("at least one checkpoint");
    Ok(Outcome {
        summary: format!(
            "sle-martingale: kappa={kappa} paths={} final_deviation={} max_deviation={} (standard errors) swallowed_fraction={}",
            params.n_paths,
            fmt_f64(last.deviation),
            fmt_f64(report.max_deviation()),
            fmt_f64(report.swallowed_fraction)
        ),
        artifacts: vec![js],
        warnings: report.warnings.clone(),
    })
}
