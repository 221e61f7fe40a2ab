//! Nonlinear time-domain simulation of one grid-forming converter on an
//! infinite bus, plus the linear step response used as its oracle.
//!
//! Time is in seconds; electrical quantities are per unit. The grid frequency
//! is pinned at `ω_1` and only the power reference steps.

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::plant::{closed_loop_tf, ControlParams, ConverterParams, ModelKind, OperatingPoint};
use crate::ratfun::{Polynomial, RationalTf};

/// State magnitude treated as divergence.
pub const DIVERGENCE_LIMIT: f64 = 1e3;
pub const EMT_MAX_DT: f64 = 1e-4;
pub const RMS_MAX_DT: f64 = 1e-3;
/// Fraction of the step inside which the response counts as settled.
pub const SETTLING_BAND: f64 = 0.02;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimConfig {
    pub model: ModelKind,
    pub t_end: f64,
    pub dt: f64,
    pub step_time: f64,
    pub step_size: f64,
    pub record_decimation: usize,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            model: ModelKind::Emt,
            t_end: 1.0,
            dt: 1e-4,
            step_time: 0.1,
            step_size: 0.2,
            record_decimation: 1,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        let max_dt = match self.model {
            ModelKind::Emt => EMT_MAX_DT,
            ModelKind::Rms => RMS_MAX_DT,
        };
        let bad = |msg: String| Err(Error::InvalidSimConfig(msg));
        if !(self.dt > 0.0) {
            return bad(format!("dt = {} must be positive", self.dt));
        }
        if self.dt > max_dt * (1.0 + 1e-12) {
            return bad(format!("dt = {} exceeds {max_dt} for the {} model", self.dt, self.model));
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return bad(format!("t_end = {} must be positive", self.t_end));
        }
        if !(self.step_time >= 0.0 && self.step_time < self.t_end) {
            return bad(format!("step_time = {} must lie in [0, t_end)", self.step_time));
        }
        if !self.step_size.is_finite() {
            return bad("step_size must be finite".into());
        }
        if self.record_decimation == 0 {
            return bad("record_decimation must be at least 1".into());
        }
        Ok(())
    }

    pub fn with_model(&self, model: ModelKind) -> Self {
        SimConfig { model, ..self.clone() }
    }

    fn n_steps(&self) -> usize {
        (self.t_end / self.dt).round() as usize
    }

    /// Index of the first integration step that sees the stepped reference.
    fn step_index(&self) -> usize {
        (self.step_time / self.dt).round() as usize
    }
}

/// Integrated state. EMT: `[i_d, i_q, z_d, z_q, Δθ]`. RMS: `[z_d, z_q, Δθ]`.
#[derive(Clone, Debug, PartialEq)]
pub enum SimState {
    Emt([f64; 5]),
    Rms([f64; 3]),
}

impl SimState {
    pub fn initial(kind: ModelKind, op: &OperatingPoint) -> Self {
        match kind {
            ModelKind::Emt => SimState::Emt([op.i_d0, op.i_q0, op.i_d0, op.i_q0, 0.0]),
            ModelKind::Rms => SimState::Rms([op.i_d0, op.i_q0, 0.0]),
        }
    }

    pub fn as_slice(&self) -> &[f64] {
        match self {
            SimState::Emt(x) => x,
            SimState::Rms(x) => x,
        }
    }
}

/// Parallel per-sample channels of one run.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TimeSeries {
    pub model: ModelKind,
    pub t: Vec<f64>,
    pub p: Vec<f64>,
    pub omega_i: Vec<f64>,
    pub i_d: Vec<f64>,
    pub i_q: Vec<f64>,
    pub v_mag: Vec<f64>,
    pub delta_theta: Vec<f64>,
    pub step_time: f64,
    pub step_size: f64,
    pub p0: f64,
    /// Time at which a state left the divergence limit; the trace stops there.
    pub diverged_at: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Channel {
    P,
    OmegaI,
    Id,
    Iq,
    VMag,
    DeltaTheta,
}

impl TimeSeries {
    fn empty(model: ModelKind, cfg: &SimConfig, p0: f64) -> Self {
        TimeSeries {
            model,
            t: Vec::new(),
            p: Vec::new(),
            omega_i: Vec::new(),
            i_d: Vec::new(),
            i_q: Vec::new(),
            v_mag: Vec::new(),
            delta_theta: Vec::new(),
            step_time: cfg.step_time,
            step_size: cfg.step_size,
            p0,
            diverged_at: None,
        }
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn channel(&self, ch: Channel) -> &[f64] {
        match ch {
            Channel::P => &self.p,
            Channel::OmegaI => &self.omega_i,
            Channel::Id => &self.i_d,
            Channel::Iq => &self.i_q,
            Channel::VMag => &self.v_mag,
            Channel::DeltaTheta => &self.delta_theta,
        }
    }

    pub fn diverged(&self) -> bool {
        self.diverged_at.is_some()
    }

    fn push(&mut self, t: f64, o: &Outputs, delta_theta: f64) {
        self.t.push(t);
        self.p.push(o.p);
        self.omega_i.push(o.omega_i);
        self.i_d.push(o.i.re);
        self.i_q.push(o.i.im);
        self.v_mag.push(o.v.norm());
        self.delta_theta.push(delta_theta);
    }

    /// Linear interpolation of `ch` at `t`, clamped to the recorded range.
    pub fn interpolate(&self, ch: Channel, t: f64) -> f64 {
        let x = self.channel(ch);
        let k = self.t.partition_point(|&s| s < t);
        if k == 0 {
            return x[0];
        }
        if k >= self.t.len() {
            return x[self.t.len() - 1];
        }
        let (t0, t1) = (self.t[k - 1], self.t[k]);
        let w = (t - t0) / (t1 - t0);
        x[k - 1] + w * (x[k] - x[k - 1])
    }

    /// Time after the step from which `P` stays within the settling band of
    /// `P_0 + step`. `None` for zero steps, diverged runs, or runs that end
    /// outside the band.
    pub fn settling_time(&self) -> Option<f64> {
        if self.step_size == 0.0 || self.diverged() || self.is_empty() {
            return None;
        }
        let target = self.p0 + self.step_size;
        let band = SETTLING_BAND * self.step_size.abs();
        let outside = |k: usize| (self.p[k] - target).abs() > band;
        if outside(self.len() - 1) {
            return None;
        }
        let last_out = (0..self.len()).rev().find(|&k| outside(k))?;
        Some((self.t[last_out + 1] - self.step_time).max(0.0))
    }
}

struct Outputs {
    i: Complex64,
    v: Complex64,
    p: f64,
    omega_i: f64,
}

struct Model<'a> {
    params: &'a ConverterParams,
    ctrl: &'a ControlParams,
    op: &'a OperatingPoint,
}

impl Model<'_> {
    fn grid_voltage(&self, delta_theta: f64) -> Complex64 {
        Complex64::from_polar(self.op.v_g, -(self.op.theta_0 + delta_theta))
    }

    fn outputs_from_current(&self, i: Complex64, z: Complex64, p_ref: f64) -> Outputs {
        let v = self.params.v_set - self.ctrl.k_v * (i - z);
        let p = (v * i.conj()).re;
        Outputs {
            i,
            v,
            p,
            omega_i: self.params.omega_1 + self.ctrl.k_p * (p_ref - p),
        }
    }

    fn emt_outputs(&self, x: &[f64; 5], p_ref: f64) -> Outputs {
        self.outputs_from_current(Complex64::new(x[0], x[1]), Complex64::new(x[2], x[3]), p_ref)
    }

    fn emt_rhs(&self, x: &[f64; 5], p_ref: f64) -> [f64; 5] {
        let (pr, c) = (self.params, self.ctrl);
        let o = self.emt_outputs(x, p_ref);
        let z = Complex64::new(x[2], x[3]);
        let di = pr.omega_b / pr.l_c
            * (o.v - self.grid_voltage(x[4]) - Complex64::new(pr.r_c, o.omega_i * pr.l_c) * o.i);
        let dz = c.omega_v * pr.omega_b * (o.i - z);
        [di.re, di.im, dz.re, dz.im, (o.omega_i - pr.omega_1) * pr.omega_b]
    }

    /// Solves `i (R_c + jω_i L_c + k_v) = V_set + k_v z - V_g e^{-j(θ_0+Δθ)}`
    /// together with the droop law by fixed-point iteration on `ω_i`.
    fn rms_outputs(&self, x: &[f64; 3], p_ref: f64) -> Result<Outputs> {
        let (pr, c) = (self.params, self.ctrl);
        let z = Complex64::new(x[0], x[1]);
        let rhs = pr.v_set + c.k_v * z - self.grid_voltage(x[2]);
        let mut omega = pr.omega_1;
        for _ in 0..200 {
            let i = rhs / Complex64::new(pr.r_c + c.k_v, omega * pr.l_c);
            let o = self.outputs_from_current(i, z, p_ref);
            if !o.omega_i.is_finite() {
                break;
            }
            if (o.omega_i - omega).abs() <= 1e-15 * omega.abs().max(1.0) {
                return Ok(o);
            }
            omega = o.omega_i;
        }
        Err(Error::Numerical {
            what: "algebraic current solve".into(),
            residual: f64::NAN,
        })
    }

    fn rms_rhs(&self, x: &[f64; 3], p_ref: f64) -> Result<[f64; 3]> {
        let (pr, c) = (self.params, self.ctrl);
        let o = self.rms_outputs(x, p_ref)?;
        let dz = c.omega_v * pr.omega_b * (o.i - Complex64::new(x[0], x[1]));
        Ok([dz.re, dz.im, (o.omega_i - pr.omega_1) * pr.omega_b])
    }
}

fn axpy<const N: usize>(x: &[f64; N], h: f64, k: &[f64; N]) -> [f64; N] {
    std::array::from_fn(|n| x[n] + h * k[n])
}

fn rk4<const N: usize>(
    x: &[f64; N],
    dt: f64,
    f: impl Fn(&[f64; N]) -> Result<[f64; N]>,
) -> Result<[f64; N]> {
    let k1 = f(x)?;
    let k2 = f(&axpy(x, 0.5 * dt, &k1))?;
    let k3 = f(&axpy(x, 0.5 * dt, &k2))?;
    let k4 = f(&axpy(x, dt, &k3))?;
    Ok(std::array::from_fn(|n| {
        x[n] + dt / 6.0 * (k1[n] + 2.0 * k2[n] + 2.0 * k3[n] + k4[n])
    }))
}

fn out_of_bounds(x: &[f64]) -> bool {
    x.iter().any(|v| !(v.abs() <= DIVERGENCE_LIMIT))
}

/// Time derivative of the initial state, for checking initialization.
pub fn initial_derivative(
    params: &ConverterParams,
    ctrl: &ControlParams,
    op: &OperatingPoint,
    kind: ModelKind,
) -> Result<Vec<f64>> {
    let m = Model { params, ctrl, op };
    Ok(match SimState::initial(kind, op) {
        SimState::Emt(x) => m.emt_rhs(&x, op.p_0).to_vec(),
        SimState::Rms(x) => m.rms_rhs(&x, op.p_0)?.to_vec(),
    })
}

/// Fixed-step RK4 run from the operating point with a step of `P_ref` at
/// `cfg.step_time`. Divergence truncates the trace instead of failing.
pub fn simulate(
    params: &ConverterParams,
    ctrl: &ControlParams,
    op: &OperatingPoint,
    cfg: &SimConfig,
) -> Result<TimeSeries> {
    params.validate()?;
    ctrl.validate()?;
    cfg.validate()?;
    op.check(params)?;

    let m = Model { params, ctrl, op };
    let n_steps = cfg.n_steps();
    let k_step = cfg.step_index();
    let p_ref_at = |n: usize| if n >= k_step { op.p_0 + cfg.step_size } else { op.p_0 };
    let mut ts = TimeSeries::empty(cfg.model, cfg, op.p_0);
    let mut state = SimState::initial(cfg.model, op);

    for n in 0..=n_steps {
        let t = n as f64 * cfg.dt;
        let p_ref = p_ref_at(n);
        let record = n % cfg.record_decimation == 0 || n == n_steps;
        if record {
            let (o, dtheta) = match &state {
                SimState::Emt(x) => (m.emt_outputs(x, p_ref), x[4]),
                SimState::Rms(x) => match m.rms_outputs(x, p_ref) {
                    Ok(o) => (o, x[2]),
                    Err(_) => {
                        ts.diverged_at = Some(t);
                        break;
                    }
                },
            };
            ts.push(t, &o, dtheta);
        }
        if n == n_steps {
            break;
        }
        let next = match &state {
            SimState::Emt(x) => rk4(x, cfg.dt, |y| Ok(m.emt_rhs(y, p_ref))).map(SimState::Emt),
            SimState::Rms(x) => rk4(x, cfg.dt, |y| m.rms_rhs(y, p_ref)).map(SimState::Rms),
        };
        match next {
            Ok(s) if !out_of_bounds(s.as_slice()) => state = s,
            _ => {
                ts.diverged_at = Some(t + cfg.dt);
                break;
            }
        }
    }
    log::debug!(
        "{} run: {} samples, diverged_at = {:?}",
        cfg.model,
        ts.len(),
        ts.diverged_at
    );
    Ok(ts)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MismatchMetrics {
    pub max_abs_dp: f64,
    pub rms_dp: f64,
    pub settling_time_a: Option<f64>,
    pub settling_time_b: Option<f64>,
}

/// Power mismatch over the whole post-step window of `a`.
pub fn compare_runs(a: &TimeSeries, b: &TimeSeries) -> Result<MismatchMetrics> {
    compare_runs_within(a, b, f64::INFINITY)
}

/// Power mismatch over `[step_time, step_time + window]`, with `b` linearly
/// interpolated onto the time grid of `a`.
pub fn compare_runs_within(a: &TimeSeries, b: &TimeSeries, window: f64) -> Result<MismatchMetrics> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::IncomparableRuns);
    }
    let (lo, hi) = (
        a.step_time.max(b.t[0]),
        (a.step_time + window).min(b.t[b.len() - 1]),
    );
    let same_grid = a.t == b.t;
    let diffs: Vec<f64> = a
        .t
        .iter()
        .enumerate()
        .filter(|(_, &t)| t >= lo && t <= hi)
        .map(|(k, &t)| {
            let pb = if same_grid { b.p[k] } else { b.interpolate(Channel::P, t) };
            a.p[k] - pb
        })
        .collect();
    if diffs.is_empty() {
        return Err(Error::IncomparableRuns);
    }
    let max_abs_dp = diffs.iter().fold(0.0_f64, |m, d| m.max(d.abs()));
    let rms_dp = (diffs.iter().map(|d| d * d).sum::<f64>() / diffs.len() as f64).sqrt();
    Ok(MismatchMetrics {
        max_abs_dp,
        rms_dp,
        settling_time_a: a.settling_time(),
        settling_time_b: b.settling_time(),
    })
}

/// Peak-to-trough amplitude below which a channel counts as flat.
pub const MIN_OSCILLATION_AMPLITUDE: f64 = 1e-6;

/// Dominant oscillation frequency in Hz of `ch` after the power step.
pub fn dominant_frequency(series: &TimeSeries, ch: Channel) -> Option<f64> {
    let start = series.t.partition_point(|&t| t <= series.step_time);
    let start = if series.len() - start >= 16 { start } else { 0 };
    dominant_frequency_of(&series.t[start..], &series.channel(ch)[start..])
}

/// Zero-crossing count of the detrended signal, cross-checked against the
/// largest FFT bin. Samples must be uniformly spaced.
pub fn dominant_frequency_of(t: &[f64], x: &[f64]) -> Option<f64> {
    if t.len() < 8 || t.len() != x.len() {
        return None;
    }
    let y = detrend(t, x);
    let (lo, hi) = y
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    if !(hi - lo >= MIN_OSCILLATION_AMPLITUDE) {
        return None;
    }
    let dt = (t[t.len() - 1] - t[0]) / (t.len() - 1) as f64;
    let fft = fft_peak(&y, dt)?;
    let Some(zc) = zero_crossing_frequency(t, &y) else {
        return Some(fft);
    };
    let bin = 1.0 / (dt * y.len() as f64);
    if (zc - fft).abs() <= (0.1 * fft).max(2.0 * bin) {
        Some(zc)
    } else {
        log::warn!("zero-crossing estimate {zc} Hz disagrees with spectral peak {fft} Hz");
        Some(fft)
    }
}

/// Removes the least-squares line.
fn detrend(t: &[f64], x: &[f64]) -> Vec<f64> {
    let n = t.len() as f64;
    let tm = t.iter().sum::<f64>() / n;
    let xm = x.iter().sum::<f64>() / n;
    let stt: f64 = t.iter().map(|&ti| (ti - tm) * (ti - tm)).sum();
    let stx: f64 = t.iter().zip(x).map(|(&ti, &xi)| (ti - tm) * (xi - xm)).sum();
    let slope = if stt > 0.0 { stx / stt } else { 0.0 };
    t.iter()
        .zip(x)
        .map(|(&ti, &xi)| xi - xm - slope * (ti - tm))
        .collect()
}

fn fft_peak(y: &[f64], dt: f64) -> Option<f64> {
    let n = y.len();
    let mut buf: Vec<Complex64> = y.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let mags: Vec<f64> = buf[..n / 2 + 1].iter().map(|c| c.norm()).collect();
    let k = (1..mags.len()).max_by(|&a, &b| mags[a].total_cmp(&mags[b]))?;
    // parabolic refinement on log magnitude
    let offset = if k + 1 < mags.len() && mags[k - 1] > 0.0 && mags[k + 1] > 0.0 {
        let (a, b, c) = (mags[k - 1].ln(), mags[k].ln(), mags[k + 1].ln());
        let den = a - 2.0 * b + c;
        if den != 0.0 {
            (0.5 * (a - c) / den).clamp(-0.5, 0.5)
        } else {
            0.0
        }
    } else {
        0.0
    };
    Some((k as f64 + offset) / (n as f64 * dt))
}

/// Half-cycles between the first and last sign change, with linear
/// interpolation of each crossing instant.
fn zero_crossing_frequency(t: &[f64], y: &[f64]) -> Option<f64> {
    let crossings: Vec<f64> = (1..y.len())
        .filter(|&k| (y[k - 1] < 0.0) != (y[k] < 0.0))
        .map(|k| t[k - 1] + (t[k] - t[k - 1]) * y[k - 1] / (y[k - 1] - y[k]))
        .collect();
    if crossings.len() < 3 {
        return None;
    }
    let span = crossings[crossings.len() - 1] - crossings[0];
    Some((crossings.len() - 1) as f64 / (2.0 * span))
}

/// Exponential growth rate in 1/s of the oscillation envelope in `ch` after
/// the step: the log ratio of the largest first difference in the last
/// quarter of the window to that in the second quarter. The first quarter
/// is skipped because it holds the step transient. First differences
/// suppress the slow step trend. Negative for decaying oscillations.
pub fn oscillation_growth_rate(series: &TimeSeries, ch: Channel) -> Option<f64> {
    let start = series.t.partition_point(|&t| t <= series.step_time);
    let t = &series.t[start..];
    let x = &series.channel(ch)[start..];
    if x.len() < 16 {
        return None;
    }
    let d: Vec<f64> = x.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    let q = d.len() / 4;
    let envelope = |r: std::ops::Range<usize>| {
        let a = d[r.clone()].iter().fold(0.0_f64, |m, &v| m.max(v));
        (a, 0.5 * (t[r.start] + t[r.end]))
    };
    let (a2, t2) = envelope(q..2 * q);
    let (a4, t4) = envelope(3 * q..d.len());
    if a2 == 0.0 && a4 == 0.0 {
        return None;
    }
    Some((a4 / a2).ln() / (t4 - t2))
}

/// Growth rate above which a run that stayed inside the divergence limit
/// still counts as unstable, 1/s.
pub const GROWTH_RATE_FLOOR: f64 = 0.05;

impl TimeSeries {
    /// Peak-to-trough of `ch` over the last quarter of the trace.
    pub fn late_swing(&self, ch: Channel) -> f64 {
        let x = &self.channel(ch)[3 * self.len() / 4..];
        let (lo, hi) = x
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
        if x.is_empty() {
            0.0
        } else {
            hi - lo
        }
    }

    /// Unstable trace: it hit the divergence limit, its oscillation envelope
    /// grows, or `P` still swings by more than the step over the last quarter.
    /// Unstable runs often end in a bounded nonlinear oscillation or pole
    /// slipping rather than a blow-up, hence the last two tests.
    pub fn is_diverging(&self) -> bool {
        self.diverged()
            || oscillation_growth_rate(self, Channel::P).is_some_and(|g| g > GROWTH_RATE_FLOOR)
            || (self.step_size != 0.0 && self.late_swing(Channel::P) > self.step_size.abs())
    }
}

/// Power step response of the linearized closed loop on the given time grid
/// (seconds), by partial fractions over its poles.
///
/// `p` and `omega_i` are filled; `omega_i` follows from the droop law. The
/// current and voltage channels are not part of the linear model and hold NaN.
pub fn linearized_step_response(
    params: &ConverterParams,
    ctrl: &ControlParams,
    op: &OperatingPoint,
    kind: ModelKind,
    step_size: f64,
    step_time: f64,
    times: &[f64],
) -> Result<TimeSeries> {
    let cl = closed_loop_tf(params, ctrl, op, kind);
    let poles = cl.poles()?;
    if poles.iter().any(|p| p.re >= 0.0) {
        return Err(Error::UnstableLoop {
            poles: format_poles(&poles),
        });
    }
    let terms = step_residues(&cl, &poles)?;

    let mut ts = TimeSeries {
        model: kind,
        t: times.to_vec(),
        p: Vec::with_capacity(times.len()),
        omega_i: Vec::with_capacity(times.len()),
        i_d: vec![f64::NAN; times.len()],
        i_q: vec![f64::NAN; times.len()],
        v_mag: vec![f64::NAN; times.len()],
        delta_theta: vec![f64::NAN; times.len()],
        step_time,
        step_size,
        p0: op.p_0,
        diverged_at: None,
    };
    for &t in times {
        let tau = (t - step_time) * params.omega_b;
        let y = if tau < 0.0 {
            0.0
        } else {
            let sum: Complex64 = terms.iter().map(|(p, r)| r * (p * tau).exp()).sum();
            cl.dc_gain() + sum.re
        };
        let p = op.p_0 + step_size * y;
        let p_ref = op.p_0 + if tau < 0.0 { 0.0 } else { step_size };
        ts.p.push(p);
        ts.omega_i.push(params.omega_1 + ctrl.k_p * (p_ref - p));
    }
    Ok(ts)
}

/// Residues of `cl(s)/s` at the poles of `cl`, which must be simple.
fn step_residues(cl: &RationalTf, poles: &[Complex64]) -> Result<Vec<(Complex64, Complex64)>> {
    let scale = poles.iter().fold(1.0_f64, |m, p| m.max(p.norm()));
    for (i, a) in poles.iter().enumerate() {
        for b in &poles[i + 1..] {
            if (a - b).norm() <= 1e-7 * scale {
                return Err(Error::Numerical {
                    what: "partial fractions need simple poles".into(),
                    residual: (a - b).norm(),
                });
            }
        }
    }
    let den: &Polynomial = cl.den();
    let dden = den.derivative();
    Ok(poles
        .iter()
        .map(|&p| (p, cl.num().eval(p) / (p * dden.eval(p))))
        .collect())
}

pub fn format_poles(poles: &[Complex64]) -> String {
    poles
        .iter()
        .map(|p| format!("{:.6}{:+.6}j", p.re, p.im))
        .collect::<Vec<_>>()
        .join(", ")
}
