//! Command layer behind the `gfpc` binary: case configuration files, the
//! analyze/tune/simulate/compare/rootlocus/bode commands, text-plus-JSON
//! reports and CSV output.
//!
//! # Config format
//!
//! Flat `key = value` lines; `#` starts a comment; keys are case-insensitive.
//! Missing keys take the defaults of [`CaseConfig::default`]. `kp` and `kv`
//! are accepted as aliases of `k_p` and `k_v`. When `omega_v` is omitted the
//! analysis uses `0` and the simulation `0.1 ω_1`.
//!
//! # Report format
//!
//! A human-readable block, then a line `--- json ---`, then one JSON object
//! whose top-level `command` key names the command.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::Path;

use num_complex::Complex64;
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::margins::{self, MarginReport, PhaseFloor};
use crate::plant::{
    closed_loop_tf, loop_tf, mismatch_tf, solve_operating_point, ControlParams, ConverterParams,
    ModelKind, OperatingPoint,
};
use crate::ratfun::{logspace, RationalTf};
use crate::simulate::{self, Channel, MismatchMetrics, SimConfig, TimeSeries};
use crate::stability::{self, Stability, StabilityVerdict};

/// Exact header of simulation CSV files.
pub const TIMESERIES_HEADER: [&str; 7] = [
    "t_s", "p_pu", "omega_pu", "id_pu", "iq_pu", "vmag_pu", "dtheta_rad",
];

pub const JSON_MARKER: &str = "--- json ---";

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OperatingSpec {
    pub p_ref: f64,
    pub v_g: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AnalysisGrid {
    pub omega_grid_min: f64,
    pub omega_grid_max: f64,
    pub points: usize,
}

impl AnalysisGrid {
    pub fn omegas(&self) -> Vec<f64> {
        logspace(self.omega_grid_min, self.omega_grid_max, self.points)
    }
}

/// One case file: plant, controller, operating condition, simulation and
/// frequency-grid settings.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CaseConfig {
    pub converter: ConverterParams,
    /// `omega_v` here is the explicit value, or `0` when the file omits it.
    pub control: ControlParams,
    pub omega_v_explicit: bool,
    pub operating: OperatingSpec,
    pub sim: SimConfig,
    pub analysis: AnalysisGrid,
}

impl Default for CaseConfig {
    fn default() -> Self {
        CaseConfig {
            converter: ConverterParams::default(),
            control: ControlParams::default(),
            omega_v_explicit: false,
            operating: OperatingSpec { p_ref: 0.0, v_g: 1.0 },
            sim: SimConfig::default(),
            analysis: AnalysisGrid {
                omega_grid_min: 1e-6,
                omega_grid_max: 1e3,
                points: 451,
            },
        }
    }
}

const KEYS: [&str; 19] = [
    "l_c",
    "r_c",
    "v_set",
    "omega_1",
    "omega_b",
    "k_p",
    "k_v",
    "omega_v",
    "p_ref",
    "v_g",
    "model",
    "t_end",
    "dt",
    "step_time",
    "step_size",
    "record_decimation",
    "omega_grid_min",
    "omega_grid_max",
    "points",
];

fn canonical_key(key: &str) -> Option<&'static str> {
    let k = key.to_ascii_lowercase();
    let k = match k.as_str() {
        "kp" => "k_p",
        "kv" => "k_v",
        other => other,
    };
    KEYS.iter().copied().find(|&c| c == k)
}

impl CaseConfig {
    pub fn parse_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::parse_str(&text)
    }

    pub fn parse_str(text: &str) -> Result<Self> {
        let mut cfg = CaseConfig::default();
        let mut seen: HashMap<&'static str, usize> = HashMap::new();

        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let err = |msg: String| Error::Config { line, msg };
            let (key, value) = body
                .split_once('=')
                .ok_or_else(|| err(format!("expected `key = value`, got {body:?}")))?;
            let (key, value) = (key.trim(), value.trim());
            let canon = canonical_key(key).ok_or_else(|| err(format!("unknown key {key:?}")))?;
            if let Some(first) = seen.insert(canon, line) {
                return Err(err(format!("duplicate key {canon:?}, first set on line {first}")));
            }
            let real = || {
                value
                    .parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| err(format!("{canon}: expected a finite number, got {value:?}")))
            };
            let count = || {
                value
                    .parse::<usize>()
                    .map_err(|_| err(format!("{canon}: expected a positive integer, got {value:?}")))
            };
            match canon {
                "l_c" => cfg.converter.l_c = real()?,
                "r_c" => cfg.converter.r_c = real()?,
                "v_set" => cfg.converter.v_set = real()?,
                "omega_1" => cfg.converter.omega_1 = real()?,
                "omega_b" => cfg.converter.omega_b = real()?,
                "k_p" => cfg.control.k_p = real()?,
                "k_v" => cfg.control.k_v = real()?,
                "omega_v" => {
                    cfg.control.omega_v = real()?;
                    cfg.omega_v_explicit = true;
                }
                "p_ref" => cfg.operating.p_ref = real()?,
                "v_g" => cfg.operating.v_g = real()?,
                "model" => cfg.sim.model = value.parse().map_err(|e: Error| err(e.to_string()))?,
                "t_end" => cfg.sim.t_end = real()?,
                "dt" => cfg.sim.dt = real()?,
                "step_time" => cfg.sim.step_time = real()?,
                "step_size" => cfg.sim.step_size = real()?,
                "record_decimation" => cfg.sim.record_decimation = count()?,
                "omega_grid_min" => cfg.analysis.omega_grid_min = real()?,
                "omega_grid_max" => cfg.analysis.omega_grid_max = real()?,
                "points" => cfg.analysis.points = count()?,
                _ => unreachable!("every canonical key is handled"),
            }
        }

        let line_of = |keys: &[&str]| keys.iter().filter_map(|k| seen.get(k).copied()).min().unwrap_or(0);
        let at = |keys: &[&str], e: Error| Error::Config {
            line: line_of(keys),
            msg: e.to_string(),
        };
        cfg.converter
            .validate()
            .map_err(|e| at(&["l_c", "r_c", "v_set", "omega_1", "omega_b"], e))?;
        cfg.control
            .validate()
            .map_err(|e| at(&["k_p", "k_v", "omega_v"], e))?;
        cfg.simulation_control()
            .validate()
            .map_err(|e| at(&["omega_v", "omega_1"], e))?;
        cfg.operating_point()
            .map_err(|e| at(&["p_ref", "v_g", "l_c", "v_set"], e))?;
        cfg.sim
            .validate()
            .map_err(|e| at(&["model", "t_end", "dt", "step_time", "step_size", "record_decimation"], e))?;
        let a = &cfg.analysis;
        if !(a.omega_grid_min > 0.0 && a.omega_grid_min < a.omega_grid_max) || a.points < 2 {
            return Err(Error::Config {
                line: line_of(&["omega_grid_min", "omega_grid_max", "points"]),
                msg: "analysis grid needs 0 < omega_grid_min < omega_grid_max and points >= 2".into(),
            });
        }
        Ok(cfg)
    }

    /// Inverse of [`CaseConfig::parse_str`]; every field is written so that
    /// re-parsing reproduces it exactly.
    pub fn to_config_string(&self) -> String {
        let c = &self.converter;
        let mut out = String::new();
        let mut kv = |k: &str, v: String| writeln!(out, "{k} = {v}").expect("write to String");
        kv("l_c", c.l_c.to_string());
        kv("r_c", c.r_c.to_string());
        kv("v_set", c.v_set.to_string());
        kv("omega_1", c.omega_1.to_string());
        kv("omega_b", c.omega_b.to_string());
        kv("k_p", self.control.k_p.to_string());
        kv("k_v", self.control.k_v.to_string());
        if self.omega_v_explicit {
            kv("omega_v", self.control.omega_v.to_string());
        }
        kv("p_ref", self.operating.p_ref.to_string());
        kv("v_g", self.operating.v_g.to_string());
        kv("model", self.sim.model.to_string());
        kv("t_end", self.sim.t_end.to_string());
        kv("dt", self.sim.dt.to_string());
        kv("step_time", self.sim.step_time.to_string());
        kv("step_size", self.sim.step_size.to_string());
        kv("record_decimation", self.sim.record_decimation.to_string());
        kv("omega_grid_min", self.analysis.omega_grid_min.to_string());
        kv("omega_grid_max", self.analysis.omega_grid_max.to_string());
        kv("points", self.analysis.points.to_string());
        out
    }

    pub fn analysis_control(&self) -> ControlParams {
        self.control
    }

    pub fn simulation_control(&self) -> ControlParams {
        let omega_v = if self.omega_v_explicit {
            self.control.omega_v
        } else {
            0.1 * self.converter.omega_1
        };
        ControlParams { omega_v, ..self.control }
    }

    pub fn operating_point(&self) -> Result<OperatingPoint> {
        solve_operating_point(&self.converter, self.operating.p_ref, self.operating.v_g)
    }
}

pub fn parse_config(path: impl AsRef<Path>) -> Result<CaseConfig> {
    CaseConfig::parse_file(path)
}

/// Text for people, JSON for machines.
#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    pub text: String,
    pub json: Value,
}

impl Report {
    pub fn render(&self) -> String {
        let json = serde_json::to_string_pretty(&self.json).expect("report JSON serializes");
        format!("{}\n{JSON_MARKER}\n{json}\n", self.text.trim_end())
    }

    /// Recovers the JSON section of a rendered report.
    pub fn parse_json_section(rendered: &str) -> Result<Value> {
        let (_, json) = rendered
            .split_once(JSON_MARKER)
            .ok_or_else(|| Error::InvalidArgument("report has no JSON section".into()))?;
        serde_json::from_str(json).map_err(|e| Error::InvalidArgument(e.to_string()))
    }
}

fn fmt_opt(x: Option<f64>, digits: usize) -> String {
    match x {
        Some(v) => format!("{v:.digits$}"),
        None => "undefined".into(),
    }
}

fn fmt_gm(gm: f64) -> String {
    if gm.is_infinite() {
        "infinite".into()
    } else {
        format!("{gm:.4}")
    }
}

fn status_str(s: Stability) -> &'static str {
    match s {
        Stability::Stable => "stable",
        Stability::Marginal => "marginal",
        Stability::Unstable => "unstable",
    }
}

fn poles_json(poles: &[Complex64]) -> Value {
    Value::Array(poles.iter().map(|p| json!([p.re, p.im])).collect())
}

/// Per-model section of the analysis report.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelAnalysis {
    pub model: ModelKind,
    /// Closed-form verdict in static-gain mode.
    pub routh: StabilityVerdict,
    /// Verdict from the closed-loop poles with the filter as configured.
    pub eigen_status: Stability,
    pub poles: Vec<Complex64>,
    pub margins: MarginReport,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Analysis {
    pub op: OperatingPoint,
    pub models: Vec<ModelAnalysis>,
    pub condition: stability::VirtualImpedanceCondition,
}

pub fn analyze(cfg: &CaseConfig) -> Result<Analysis> {
    let (params, ctrl) = (&cfg.converter, cfg.analysis_control());
    let op = cfg.operating_point()?;
    let condition = stability::condition_with_virtual_impedance(params, &ctrl, &op)?;
    let models = ModelKind::ALL
        .iter()
        .map(|&kind| {
            let routh = match kind {
                ModelKind::Emt => condition.verdict.clone(),
                ModelKind::Rms => stability::rms_verdict(params, &ctrl, &op),
            };
            let poles = stability::closed_loop_poles(params, &ctrl, &op, kind)?;
            Ok(ModelAnalysis {
                model: kind,
                routh,
                eigen_status: stability::classify_poles(&poles),
                margins: margins::margin_report(params, &ctrl, &op, kind)?,
                poles,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Analysis { op, models, condition })
}

pub fn cmd_analyze(cfg: &CaseConfig) -> Result<(Report, Analysis)> {
    let a = analyze(cfg)?;
    let ctrl = cfg.analysis_control();
    let mut text = String::new();
    let w = &mut text;
    writeln!(w, "analysis").ok();
    writeln!(w, "  K_p = {}, k_v = {}, omega_v = {}", ctrl.k_p, ctrl.k_v, ctrl.omega_v).ok();
    writeln!(
        w,
        "  operating point: P_0 = {:.6}, i_d0 = {:.6}, i_q0 = {:.6}, theta_0 = {:.6} rad",
        a.op.p_0, a.op.i_d0, a.op.i_q0, a.op.theta_0
    )
    .ok();
    writeln!(w, "  EMT Routh condition value: {:.6e}", a.condition.condition_lhs).ok();
    if let Some(b) = a.condition.kp_bound {
        writeln!(w, "  K_p stability bound (unloaded): {b:.6}").ok();
    }
    let mut models_json = serde_json::Map::new();
    for m in &a.models {
        writeln!(w, "{}", m.model.to_string().to_uppercase()).ok();
        writeln!(
            w,
            "  routh verdict: {} (margin {:.6e}, {})",
            status_str(m.routh.status),
            m.routh.margin,
            m.routh.binding_condition
        )
        .ok();
        writeln!(w, "  eigenvalue verdict: {}", status_str(m.eigen_status)).ok();
        writeln!(w, "  poles: {}", simulate::format_poles(&m.poles)).ok();
        writeln!(
            w,
            "  gain margin: {} at omega_180 = {}",
            fmt_gm(m.margins.gain_margin),
            fmt_opt(m.margins.omega_180, 6)
        )
        .ok();
        writeln!(
            w,
            "  phase margin: {} deg at omega_c = {}",
            fmt_opt(m.margins.phase_margin_deg, 3),
            fmt_opt(m.margins.omega_c, 6)
        )
        .ok();
        models_json.insert(
            m.model.to_string(),
            json!({
                "routh": m.routh,
                "eigen_status": m.eigen_status,
                "poles": poles_json(&m.poles),
                "margins": m.margins,
            }),
        );
    }
    let json = json!({
        "command": "analyze",
        "control": ctrl,
        "operating_point": a.op,
        "condition_lhs": a.condition.condition_lhs,
        "kp_bound": a.condition.kp_bound,
        "models": models_json,
    });
    Ok((Report { text, json }, a))
}

pub fn cmd_tune(cfg: &CaseConfig, target_gm: f64, floor: PhaseFloor) -> Result<Report> {
    let op = cfg.operating_point()?;
    let t = margins::tune(&cfg.converter, &op, target_gm, floor)?;
    let mut text = String::new();
    writeln!(text, "tuning for g_m = {target_gm}, phase floor {floor} deg").ok();
    writeln!(text, "  k_v = {:.6}", t.k_v).ok();
    writeln!(text, "  K_p = {:.6}", t.k_p).ok();
    writeln!(text, "  measured g_m = {:.6}", t.measured_gm).ok();
    writeln!(text, "  measured phase margin = {:.3} deg", t.measured_pm_deg).ok();
    if !t.feasible {
        writeln!(text, "  warning: measured phase margin is below the {floor} deg floor").ok();
    }
    writeln!(text, "config lines:\n  k_v = {}\n  k_p = {}", t.k_v, t.k_p).ok();
    let json = json!({ "command": "tune", "result": t });
    Ok(Report { text, json })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunSummary {
    pub model: ModelKind,
    pub samples: usize,
    pub final_p: f64,
    pub settling_time_s: Option<f64>,
    pub diverged_at_s: Option<f64>,
    pub diverging: bool,
    pub dominant_frequency_hz: Option<f64>,
    pub growth_rate_per_s: Option<f64>,
}

impl RunSummary {
    pub fn of(ts: &TimeSeries) -> Self {
        RunSummary {
            model: ts.model,
            samples: ts.len(),
            final_p: ts.p.last().copied().unwrap_or(f64::NAN),
            settling_time_s: ts.settling_time(),
            diverged_at_s: ts.diverged_at,
            diverging: ts.is_diverging(),
            dominant_frequency_hz: simulate::dominant_frequency(ts, Channel::P),
            growth_rate_per_s: simulate::oscillation_growth_rate(ts, Channel::P)
                .filter(|g| g.is_finite()),
        }
    }

    fn write_text(&self, w: &mut String) {
        writeln!(w, "{} run: {} samples", self.model.to_string().to_uppercase(), self.samples).ok();
        writeln!(w, "  final P = {:.6} p.u.", self.final_p).ok();
        match self.settling_time_s {
            Some(t) => writeln!(w, "  98% settling time = {:.2} ms", 1e3 * t).ok(),
            None => writeln!(w, "  98% settling time: not settled").ok(),
        };
        if let Some(t) = self.diverged_at_s {
            writeln!(w, "  diverged at t = {t:.4} s").ok();
        }
        writeln!(w, "  diverging: {}", if self.diverging { "yes" } else { "no" }).ok();
        writeln!(w, "  dominant frequency = {} Hz", fmt_opt(self.dominant_frequency_hz, 3)).ok();
    }
}

pub fn cmd_simulate(cfg: &CaseConfig, model: Option<ModelKind>) -> Result<(Report, TimeSeries)> {
    let sim = cfg.sim.with_model(model.unwrap_or(cfg.sim.model));
    let ctrl = cfg.simulation_control();
    let op = cfg.operating_point()?;
    let ts = simulate::simulate(&cfg.converter, &ctrl, &op, &sim)?;
    let summary = RunSummary::of(&ts);
    let mut text = String::new();
    writeln!(
        text,
        "simulation: step {} p.u. at t = {} s, dt = {} s, omega_v = {}",
        sim.step_size, sim.step_time, sim.dt, ctrl.omega_v
    )
    .ok();
    summary.write_text(&mut text);
    let json = json!({ "command": "simulate", "config": sim, "control": ctrl, "run": summary });
    Ok((Report { text, json }, ts))
}

pub struct Comparison {
    pub emt: TimeSeries,
    pub rms: TimeSeries,
    pub metrics: MismatchMetrics,
}

pub fn cmd_compare(cfg: &CaseConfig) -> Result<(Report, Comparison)> {
    let ctrl = cfg.simulation_control();
    let op = cfg.operating_point()?;
    let run = |kind| simulate::simulate(&cfg.converter, &ctrl, &op, &cfg.sim.with_model(kind));
    let (emt, rms) = (run(ModelKind::Emt)?, run(ModelKind::Rms)?);
    let metrics = simulate::compare_runs(&emt, &rms)?;
    let (se, sr) = (RunSummary::of(&emt), RunSummary::of(&rms));
    let mut text = String::new();
    writeln!(text, "EMT vs RMS, step {} p.u. at t = {} s", cfg.sim.step_size, cfg.sim.step_time).ok();
    se.write_text(&mut text);
    sr.write_text(&mut text);
    writeln!(text, "mismatch").ok();
    writeln!(text, "  max |dP| = {:.6} p.u.", metrics.max_abs_dp).ok();
    writeln!(text, "  rms |dP| = {:.6} p.u.", metrics.rms_dp).ok();
    let json = json!({
        "command": "compare",
        "control": ctrl,
        "emt": se,
        "rms": sr,
        "metrics": metrics,
    });
    Ok((Report { text, json }, Comparison { emt, rms, metrics }))
}

/// Inclusive linear range written `min:max:n`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Range {
    pub min: f64,
    pub max: f64,
    pub n: usize,
}

impl std::str::FromStr for Range {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidArgument(format!("expected min:max:n, got {s:?}"));
        let parts: Vec<&str> = s.split(':').collect();
        let [a, b, n] = parts.as_slice() else {
            return Err(bad());
        };
        let r = Range {
            min: a.trim().parse().map_err(|_| bad())?,
            max: b.trim().parse().map_err(|_| bad())?,
            n: n.trim().parse().map_err(|_| bad())?,
        };
        if !(r.min.is_finite() && r.max.is_finite() && r.min <= r.max) || r.n == 0 {
            return Err(bad());
        }
        Ok(r)
    }
}

impl Range {
    pub fn linspace(&self) -> Vec<f64> {
        if self.n == 1 {
            return vec![self.min];
        }
        (0..self.n)
            .map(|k| self.min + (self.max - self.min) * k as f64 / (self.n - 1) as f64)
            .collect()
    }
}

fn models_for(model: Option<ModelKind>) -> Vec<ModelKind> {
    model.map_or_else(|| ModelKind::ALL.to_vec(), |m| vec![m])
}

/// CSV header `model,k_p,branch,re,im`.
pub fn cmd_rootlocus(cfg: &CaseConfig, kp: Range, model: Option<ModelKind>) -> Result<(Report, CsvTable)> {
    let op = cfg.operating_point()?;
    let grid = kp.linspace();
    let mut table = CsvTable::new(&["model", "k_p", "branch", "re", "im"]);
    let mut text = format!("root locus over K_p in [{}, {}] ({} points)\n", kp.min, kp.max, kp.n);
    let mut json_models = serde_json::Map::new();
    for kind in models_for(model) {
        let rl = stability::root_locus(&cfg.converter, &cfg.analysis_control(), &op, kind, &grid)?;
        for (g, poles) in rl.gains.iter().zip(&rl.branches) {
            for (b, p) in poles.iter().enumerate() {
                table.push(vec![
                    Cell::Text(kind.to_string()),
                    Cell::Real(*g),
                    Cell::Int(b),
                    Cell::Real(p.re),
                    Cell::Real(p.im),
                ]);
            }
        }
        let last = rl.branches.last().expect("grid is nonempty");
        let first = &rl.branches[0];
        let crossing = rl
            .gains
            .iter()
            .zip(&rl.branches)
            .find(|(_, p)| stability::max_real_part(p) > 0.0)
            .map(|(g, _)| *g);
        writeln!(text, "{}", kind.to_string().to_uppercase()).ok();
        writeln!(text, "  poles at K_p = {}: {}", kp.min, simulate::format_poles(first)).ok();
        writeln!(text, "  poles at K_p = {}: {}", kp.max, simulate::format_poles(last)).ok();
        writeln!(text, "  first gain with a right-half-plane pole: {}", fmt_opt(crossing, 6)).ok();
        json_models.insert(
            kind.to_string(),
            json!({
                "first": poles_json(first),
                "last": poles_json(last),
                "first_unstable_gain": crossing,
            }),
        );
    }
    let json = json!({ "command": "rootlocus", "kp_range": [kp.min, kp.max, kp.n], "models": json_models });
    Ok((Report { text, json }, table))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BodeWhich {
    Open,
    Closed,
    Mismatch,
}

impl std::str::FromStr for BodeWhich {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "open" => Ok(BodeWhich::Open),
            "closed" => Ok(BodeWhich::Closed),
            "mismatch" => Ok(BodeWhich::Mismatch),
            _ => Err(Error::InvalidArgument(format!("expected open, closed or mismatch, got {s:?}"))),
        }
    }
}

/// CSV header `series,omega_pu,mag,mag_db,phase_deg`. With a range the grid
/// is log-spaced between its ends; otherwise the config's analysis grid.
pub fn cmd_bode(
    cfg: &CaseConfig,
    which: BodeWhich,
    omega: Option<Range>,
    model: Option<ModelKind>,
) -> Result<(Report, CsvTable)> {
    let op = cfg.operating_point()?;
    let (params, ctrl) = (&cfg.converter, cfg.analysis_control());
    let omegas = match omega {
        Some(r) => {
            if !(r.min > 0.0) {
                return Err(Error::InvalidArgument("omega range must be positive".into()));
            }
            logspace(r.min, r.max, r.n)
        }
        None => cfg.analysis.omegas(),
    };
    let series: Vec<(String, RationalTf)> = match which {
        BodeWhich::Open => models_for(model)
            .into_iter()
            .map(|k| (k.to_string(), loop_tf(params, &ctrl, &op, k)))
            .collect(),
        BodeWhich::Closed => models_for(model)
            .into_iter()
            .map(|k| (k.to_string(), closed_loop_tf(params, &ctrl, &op, k)))
            .collect(),
        BodeWhich::Mismatch => vec![("mismatch".into(), mismatch_tf(params, &ctrl, &op))],
    };
    let mut table = CsvTable::new(&["series", "omega_pu", "mag", "mag_db", "phase_deg"]);
    let mut text = format!(
        "{} response on {} points in [{:e}, {:e}] p.u.\n",
        serde_json::to_value(which).expect("enum serializes").as_str().unwrap_or(""),
        omegas.len(),
        omegas[0],
        omegas[omegas.len() - 1]
    );
    let mut json_series = serde_json::Map::new();
    for (name, tf) in &series {
        let h = tf.freq_response(&omegas)?;
        let mut peak = (0.0, 0.0);
        for (&w, z) in omegas.iter().zip(&h) {
            let mag = z.norm();
            if mag > peak.1 {
                peak = (w, mag);
            }
            table.push(vec![
                Cell::Text(name.clone()),
                Cell::Real(w),
                Cell::Real(mag),
                Cell::Real(20.0 * mag.log10()),
                Cell::Real(z.arg().to_degrees()),
            ]);
        }
        writeln!(
            text,
            "  {name}: |H| at first point = {:.3e}, peak {:.6} at omega = {:.4} p.u.",
            h[0].norm(),
            peak.1,
            peak.0
        )
        .ok();
        json_series.insert(
            name.clone(),
            json!({ "first_mag": h[0].norm(), "peak_mag": peak.1, "peak_omega": peak.0 }),
        );
    }
    let json = json!({ "command": "bode", "which": which, "series": json_series });
    Ok((Report { text, json }, table))
}

/// One CSV field. Reals are written with 17 significant digits so that
/// reading them back is bit-exact.
#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Real(f64),
    Int(usize),
    Text(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Real(v) => format!("{v:.16e}"),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct CsvTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl CsvTable {
    pub fn new(header: &[&str]) -> Self {
        CsvTable {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn from_timeseries(ts: &TimeSeries) -> Self {
        let mut t = CsvTable::new(&TIMESERIES_HEADER);
        for k in 0..ts.len() {
            t.push(
                [ts.t[k], ts.p[k], ts.omega_i[k], ts.i_d[k], ts.i_q[k], ts.v_mag[k], ts.delta_theta[k]]
                    .into_iter()
                    .map(Cell::Real)
                    .collect(),
            );
        }
        t
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render))?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
    }

    /// Writes to a sibling temporary file, then renames it over `path`.
    pub fn write_atomic(&self, path: impl AsRef<Path>) -> Result<()> {
        write_atomic(path.as_ref(), self.to_csv_string()?.as_bytes())
    }
}

pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.flush()?;
    tmp.persist(path).map_err(|e| Error::Io(e.to_string()))?;
    Ok(())
}

/// A CSV file read back as strings, with numeric column access.
#[derive(Clone, Debug, PartialEq)]
pub struct CsvData {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl CsvData {
    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_reader(fs::File::open(path)?)
    }

    pub fn parse_str(text: &str) -> Result<Self> {
        Self::from_reader(text.as_bytes())
    }

    fn from_reader(r: impl std::io::Read) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(r);
        let header = rdr.headers()?.iter().map(str::to_string).collect();
        let rows = rdr
            .records()
            .map(|rec| Ok(rec?.iter().map(str::to_string).collect()))
            .collect::<Result<_>>()?;
        Ok(CsvData { header, rows })
    }

    pub fn column_f64(&self, name: &str) -> Result<Vec<f64>> {
        let idx = self
            .header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::InvalidArgument(format!("no column {name:?}")))?;
        self.rows
            .iter()
            .enumerate()
            .map(|(k, row)| {
                row[idx].parse::<f64>().map_err(|_| Error::Config {
                    line: k + 2,
                    msg: format!("{name}: not a number: {:?}", row[idx]),
                })
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        assert_eq!(CaseConfig::parse_str("").unwrap(), CaseConfig::default());
        assert_eq!(CaseConfig::parse_str("# only a comment\n\n").unwrap(), CaseConfig::default());
    }

    #[test]
    fn aliases_and_comments() {
        let cfg = CaseConfig::parse_str("kv = 0.0658  # damping\nKP=0.0584\n").unwrap();
        assert_eq!(cfg.control.k_v, 0.0658);
        assert_eq!(cfg.control.k_p, 0.0584);
        assert!(!cfg.omega_v_explicit);
        assert_eq!(cfg.simulation_control().omega_v, 0.1);
        assert_eq!(cfg.analysis_control().omega_v, 0.0);
    }

    #[test]
    fn diagnostics_carry_line_numbers() {
        let err = |text: &str| match CaseConfig::parse_str(text) {
            Err(Error::Config { line, msg }) => (line, msg),
            other => panic!("expected a config error, got {other:?}"),
        };
        assert_eq!(err("\n\nl_c = -1\n").0, 3);
        assert_eq!(err("k_p = 0.1\nbogus = 2\n").0, 2);
        assert_eq!(err("k_p = abc\n").0, 1);
        assert_eq!(err("points = 1.5\n").0, 1);
        assert_eq!(err("model = phasor\n").0, 1);
        assert_eq!(err("k_p = 1\nkp = 2\n").0, 2);
        assert_eq!(err("no equals sign\n").0, 1);
        let (line, msg) = err("k_p = 0.1\nmodel = emt\ndt = 0.01\n");
        assert_eq!(line, 2);
        assert!(msg.contains("dt"), "{msg}");
        assert_eq!(err("p_ref = 9\n").0, 1);
    }

    #[test]
    fn serialization_round_trips() {
        let text = "l_c = 0.15\nk_p = 0.0584\nk_v = 0.0658\nomega_v = 0.05\np_ref = 0.3\nv_g = 1.01\nmodel = rms\ndt = 0.0005\npoints = 100\n";
        let cfg = CaseConfig::parse_str(text).unwrap();
        assert_eq!(CaseConfig::parse_str(&cfg.to_config_string()).unwrap(), cfg);
        let d = CaseConfig::default();
        assert_eq!(CaseConfig::parse_str(&d.to_config_string()).unwrap(), d);
    }

    #[test]
    fn ranges() {
        let r: Range = "0:0.01:11".parse().unwrap();
        assert_eq!(r.linspace().len(), 11);
        assert_eq!(r.linspace()[10], 0.01);
        assert!("1:0:3".parse::<Range>().is_err());
        assert!("0:1".parse::<Range>().is_err());
        assert!("0:1:0".parse::<Range>().is_err());
    }

    #[test]
    fn report_json_section_parses_back() {
        let r = Report {
            text: "hello\n".into(),
            json: json!({"command": "x", "v": 1.5}),
        };
        let v = Report::parse_json_section(&r.render()).unwrap();
        assert_eq!(v["v"], 1.5);
    }

    #[test]
    fn csv_cells_round_trip_bit_exact() {
        let vals = [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, f64::MIN_POSITIVE, 0.0];
        let mut t = CsvTable::new(&["x"]);
        vals.iter().for_each(|&v| t.push(vec![Cell::Real(v)]));
        let back = CsvData::parse_str(&t.to_csv_string().unwrap()).unwrap();
        let got = back.column_f64("x").unwrap();
        for (a, b) in vals.iter().zip(&got) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }
}
