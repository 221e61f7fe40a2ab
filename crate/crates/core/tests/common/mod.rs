//! Shared fixtures and independent oracles for the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;

use gfpc::cli::{CaseConfig, CsvData, CsvTable, TIMESERIES_HEADER};
use gfpc::plant::{ControlParams, ConverterParams, OperatingPoint};
use gfpc::ratfun::Polynomial;
use gfpc::simulate::{self, SimConfig, TimeSeries};
use gfpc::stability::{self, Stability};
use gfpc::ModelKind;
use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

pub fn params() -> ConverterParams {
    ConverterParams::default()
}

pub fn unloaded() -> OperatingPoint {
    OperatingPoint::unloaded(&params())
}

/// Published low-gain-margin tuning.
pub fn case1() -> ControlParams {
    ControlParams::new(0.0584, 0.0658, 0.0)
}

/// Published high-gain-margin tuning with the formula droop.
pub fn case2() -> ControlParams {
    ControlParams::new(0.0565, 0.1667, 0.0)
}

/// No virtual impedance.
pub fn case3() -> ControlParams {
    ControlParams::new(0.01, 0.0, 0.0)
}

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

/// `|L(jω)|` of the unloaded static-gain EMT loop written out by hand:
/// `K_p V^2 ω_1 / L / |jω (ω_1^2 + k^2/L^2 - ω^2 + 2 j k ω / L)|`.
pub fn emt_loop_magnitude(p: &ConverterParams, c: &ControlParams, w: f64) -> f64 {
    let (l, v, w1, k) = (p.l_c, p.v_set, p.omega_1, c.k_v);
    let re = w1 * w1 + k * k / (l * l) - w * w;
    let im = 2.0 * k * w / l;
    c.k_p * v * v * w1 / l / (w * (re * re + im * im).sqrt())
}

/// Lowest unit-gain frequency of [`emt_loop_magnitude`] by bisection on a
/// fine linear scan.
pub fn emt_crossover_oracle(p: &ConverterParams, c: &ControlParams) -> f64 {
    let f = |w: f64| emt_loop_magnitude(p, c, w) - 1.0;
    let mut lo = 1e-6;
    let mut hi = lo;
    while f(hi) > 0.0 {
        lo = hi;
        hi *= 1.01;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Relative L2 distance of `a` from `b`, normalized by the excursion of `b`
/// from `base`.
pub fn rel_l2(a: &[f64], b: &[f64], base: f64) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum();
    let den: f64 = b.iter().map(|y| (y - base).powi(2)).sum();
    (num / den).sqrt()
}

/// Samples of `ts` in `[from, to]`.
pub fn window(ts: &TimeSeries, from: f64, to: f64) -> (Vec<f64>, Vec<f64>) {
    ts.t.iter()
        .zip(&ts.p)
        .filter(|(t, _)| **t >= from - 1e-12 && **t <= to + 1e-12)
        .map(|(t, p)| (*t, *p))
        .unzip()
}

/// Nonlinear run against the linear step response over `horizon` seconds
/// after the step. Returns the relative L2 error.
pub fn small_signal_error(ctrl: &ControlParams, kind: ModelKind, step: f64, horizon: f64) -> f64 {
    let p = params();
    let op = unloaded();
    let cfg = SimConfig {
        model: kind,
        t_end: 0.1 + horizon,
        step_size: step,
        ..SimConfig::default()
    };
    let ts = simulate::simulate(&p, ctrl, &op, &cfg).unwrap();
    let lin = simulate::linearized_step_response(&p, ctrl, &op, kind, step, cfg.step_time, &ts.t).unwrap();
    let (_, a) = window(&ts, cfg.step_time, cfg.t_end);
    let (_, b) = window(&lin, cfg.step_time, cfg.t_end);
    rel_l2(&a, &b, op.p_0)
}

// ---- property checks shared by the suites and the acceptance harness ----

/// Random real polynomials built from known roots: `poly_roots` recovers
/// them, and the polynomial vanishes at each recovered root, to `tol`.
pub fn roots_round_trip(draws: usize, seed: u64, tol: f64) -> Result<(), String> {
    let mut r = rng(seed);
    for _ in 0..draws {
        let n_real = r.random_range(0..=3usize);
        let n_pairs = r.random_range(0..=1usize) + usize::from(n_real == 0);
        let mut roots = Vec::new();
        for _ in 0..n_real {
            roots.push(Complex64::new(r.random_range(-3.0..3.0), 0.0));
        }
        for _ in 0..n_pairs {
            let z = Complex64::new(r.random_range(-2.0..2.0), r.random_range(0.2..3.0));
            roots.push(z);
            roots.push(z.conj());
        }
        let lead = r.random_range(0.5..4.0) * if r.random_bool(0.5) { 1.0 } else { -1.0 };
        let p = Polynomial::from_roots(&roots).scale(lead);
        let got = p.roots().map_err(|e| e.to_string())?;
        for z in &roots {
            let nearest = got.iter().map(|g| (g - z).norm()).fold(f64::INFINITY, f64::min);
            let sep = roots
                .iter()
                .filter(|w| *w != z)
                .map(|w| (w - z).norm())
                .fold(f64::INFINITY, f64::min);
            // clustered roots are ill-conditioned; only well-separated ones are checked
            if sep > 0.05 && nearest > tol * (1.0 + z.norm()) {
                return Err(format!("root {z} of {p} recovered only to {nearest:e}"));
            }
        }
        for g in &got {
            let resid = p.eval(*g).norm() / p.eval_scale(*g);
            if resid > tol {
                return Err(format!("residual {resid:e} at {g} for {p}"));
            }
        }
    }
    Ok(())
}

/// Routh verdicts agree with the sign of the largest root real part.
pub fn routh_agrees_with_roots(draws: usize, seed: u64) -> Result<(), String> {
    let mut r = rng(seed);
    for _ in 0..draws {
        let a0: f64 = r.random_range(0.2..3.0) * if r.random_bool(0.2) { -1.0 } else { 1.0 };
        let [a1, a2, a3]: [f64; 3] = std::array::from_fn(|_| {
            let x: f64 = r.random_range(-0.5..4.0);
            x
        });
        let v = stability::routh_cubic(a0, a1, a2, a3).map_err(|e| e.to_string())?;
        let roots = Polynomial::new(vec![a3, a2, a1, a0]).roots().map_err(|e| e.to_string())?;
        let max_re = stability::max_real_part(&roots);
        let agrees = match v.status {
            Stability::Stable => max_re < 1e-8,
            Stability::Unstable => max_re > -1e-8,
            Stability::Marginal => max_re.abs() <= 1e-8,
        };
        if !agrees {
            return Err(format!("({a0}, {a1}, {a2}, {a3}): verdict {:?}, max Re {max_re}", v.status));
        }
    }
    Ok(())
}

/// With no step, every channel stays at its initial value over 1 s.
pub fn steady_state_hold(tol: f64) -> Result<(), String> {
    let p = ConverterParams { r_c: 0.01, ..params() };
    let op = gfpc::plant::solve_operating_point(&p, 0.5, 1.02).map_err(|e| e.to_string())?;
    for kind in ModelKind::ALL {
        for ctrl in [case1(), ControlParams::new(0.0565, 0.1667, 0.1)] {
            let cfg = SimConfig {
                model: kind,
                step_size: 0.0,
                t_end: 1.0,
                ..SimConfig::default()
            };
            let ts = simulate::simulate(&p, &ctrl, &op, &cfg).map_err(|e| e.to_string())?;
            for ch in [&ts.p, &ts.omega_i, &ts.i_d, &ts.i_q, &ts.v_mag, &ts.delta_theta] {
                let drift = ch.iter().map(|v| (v - ch[0]).abs()).fold(0.0, f64::max);
                if drift > tol {
                    return Err(format!("{kind} drift {drift:e}"));
                }
            }
        }
    }
    Ok(())
}

/// Halving the time step moves the last 0.5 s of `P` by less than `tol` in
/// RMS-average.
pub fn step_halving(tol: f64) -> Result<(), String> {
    let p = params();
    let op = unloaded();
    for (kind, dt) in [(ModelKind::Emt, 1e-4), (ModelKind::Rms, 1e-3)] {
        for ctrl in [case1(), case2()] {
            let run = |dt: f64| {
                let cfg = SimConfig { model: kind, dt, ..SimConfig::default() };
                simulate::simulate(&p, &ctrl, &op, &cfg)
            };
            let coarse = run(dt).map_err(|e| e.to_string())?;
            let fine = run(dt / 2.0).map_err(|e| e.to_string())?;
            let (t, a) = window(&coarse, 0.5, 1.0);
            let b: Vec<f64> = t.iter().map(|&s| fine.interpolate(simulate::Channel::P, s)).collect();
            let rms = (a.iter().zip(&b).map(|(x, y)| (x - y).powi(2)).sum::<f64>() / a.len() as f64).sqrt();
            if rms > tol {
                return Err(format!("{kind}: dt-halving change {rms:e}"));
            }
        }
    }
    Ok(())
}

/// Random configs survive serialize/parse; random series survive CSV
/// write/read bit for bit.
pub fn config_and_csv_round_trip(draws: usize, seed: u64) -> Result<(), String> {
    let mut r = rng(seed);
    for _ in 0..draws {
        let mut cfg = CaseConfig::default();
        cfg.converter.l_c = r.random_range(0.05..0.5);
        cfg.converter.r_c = r.random_range(0.0..0.05);
        cfg.control.k_p = r.random_range(0.0..0.2);
        cfg.control.k_v = r.random_range(0.0..0.3);
        if r.random_bool(0.5) {
            cfg.control.omega_v = r.random_range(0.0..0.5);
            cfg.omega_v_explicit = true;
        }
        cfg.operating.p_ref = r.random_range(-0.5..0.5);
        cfg.operating.v_g = r.random_range(0.95..1.05);
        cfg.sim.model = if r.random_bool(0.5) { ModelKind::Emt } else { ModelKind::Rms };
        cfg.sim.dt = r.random_range(1e-6..1e-4);
        cfg.sim.step_size = r.random_range(-0.3..0.3);
        cfg.analysis.points = r.random_range(2..2000);
        let text = cfg.to_config_string();
        let back = CaseConfig::parse_str(&text).map_err(|e| format!("{e}\n{text}"))?;
        if back != cfg {
            return Err(format!("config round trip changed fields:\n{text}"));
        }
    }

    let n = 200;
    let mut ts = simulate::simulate(&params(), &case1(), &unloaded(), &SimConfig { t_end: 0.02, step_time: 0.005, ..SimConfig::default() })
        .map_err(|e| e.to_string())?;
    ts.p.iter_mut().take(n).for_each(|v| *v += r.random_range(-1.0..1.0) * PI * 1e-7);
    let table = CsvTable::from_timeseries(&ts);
    let text = table.to_csv_string().map_err(|e| e.to_string())?;
    if !text.starts_with(&(TIMESERIES_HEADER.join(",") + "\n")) {
        return Err("CSV header mismatch".into());
    }
    let back = CsvData::parse_str(&text).map_err(|e| e.to_string())?;
    let cols = [&ts.t, &ts.p, &ts.omega_i, &ts.i_d, &ts.i_q, &ts.v_mag, &ts.delta_theta];
    for (name, col) in TIMESERIES_HEADER.iter().zip(cols) {
        let got = back.column_f64(name).map_err(|e| e.to_string())?;
        if got.len() != col.len() || got.iter().zip(col.iter()).any(|(a, b)| a.to_bits() != b.to_bits()) {
            return Err(format!("column {name} not bit-identical"));
        }
    }
    Ok(())
}

/// Bisection on `K_p` for the flip of the unloaded EMT Routh verdict.
pub fn routh_flip_gain(p: &ConverterParams, k_v: f64, hi: f64) -> f64 {
    let op = OperatingPoint::unloaded(p);
    let stable = |kp: f64| {
        stability::condition_with_virtual_impedance(p, &ControlParams::new(kp, k_v, 0.0), &op)
            .unwrap()
            .verdict
            .is_stable()
    };
    let (mut lo, mut hi) = (0.0_f64, hi);
    assert!(!stable(hi));
    while hi - lo > 1e-13 {
        let mid = 0.5 * (lo + hi);
        if mid > 0.0 && stable(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}
