//! Gain and phase margins, crossover frequencies, the droop and damping tuning
//! rules, and the EMT/RMS mismatch profile.
//!
//! Closed-form routines assume static-gain mode and `i_q0 = 0`. The numeric
//! margin routines work on any loop transfer function.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::plant::{loop_tf, mismatch_tf, ControlParams, ConverterParams, ModelKind, OperatingPoint};
use crate::ratfun::{logspace, Polynomial, RationalTf};

/// Relative tolerance in frequency for the crossover bisection.
pub const CROSSOVER_REL_TOL: f64 = 1e-10;

/// Logarithmic frequency scan used to bracket crossovers.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScanGrid {
    pub omega_min: f64,
    pub omega_max: f64,
    pub points: usize,
}

impl Default for ScanGrid {
    fn default() -> Self {
        ScanGrid {
            omega_min: 1e-4,
            omega_max: 1e3,
            points: 400,
        }
    }
}

impl ScanGrid {
    /// Same band with the log step halved.
    pub fn refined(&self) -> Self {
        ScanGrid {
            points: 2 * self.points - 1,
            ..*self
        }
    }

    fn omegas(&self) -> Vec<f64> {
        logspace(self.omega_min, self.omega_max, self.points)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GainMargin {
    /// `1/|L(jω_180)|`; infinite when the Nyquist plot never meets the
    /// negative real axis.
    pub value: f64,
    pub omega_180: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PhaseMargin {
    pub degrees: f64,
    pub omega_c: f64,
}

/// Gain margin with the default scan.
pub fn gain_margin(l: &RationalTf) -> Result<GainMargin> {
    gain_margin_on(l, &ScanGrid::default())
}

/// Lowest `ω > 0` in the scan band where `Im L(jω) = 0` and `Re L(jω) < 0`.
///
/// An undamped imaginary-axis loop pole inside the band drives `|L|` to
/// infinity with a phase jump through -180°, so it yields a zero margin.
pub fn gain_margin_on(l: &RationalTf, grid: &ScanGrid) -> Result<GainMargin> {
    if l.is_zero() {
        return Ok(GainMargin {
            value: f64::INFINITY,
            omega_180: None,
        });
    }
    let axis_pole = imaginary_axis_poles(l)?
        .into_iter()
        .filter(|&w| w >= grid.omega_min && w <= grid.omega_max)
        .fold(None, |m: Option<f64>, w| Some(m.map_or(w, |m| m.min(w))));

    let omegas = grid.omegas();
    let mut prev: Option<(f64, Complex64)> = None;
    for &w in &omegas {
        if axis_pole.is_some_and(|p| w >= p) {
            break;
        }
        let h = match l.response_at(w) {
            Ok(h) => h,
            Err(Error::PoleOnGrid { .. }) => {
                prev = None;
                continue;
            }
            Err(e) => return Err(e),
        };
        if let Some((w0, h0)) = prev {
            if h0.im == 0.0 || h0.im.signum() != h.im.signum() {
                let w180 = bisect_log(w0, w, |x| Ok(l.response_at(x)?.im))?;
                let h180 = l.response_at(w180)?;
                if h180.re < 0.0 {
                    return Ok(GainMargin {
                        value: 1.0 / h180.norm(),
                        omega_180: Some(w180),
                    });
                }
            }
        }
        prev = Some((w, h));
    }
    Ok(match axis_pole {
        Some(p) => GainMargin {
            value: 0.0,
            omega_180: Some(p),
        },
        None => GainMargin {
            value: f64::INFINITY,
            omega_180: None,
        },
    })
}

/// Phase margin with the default scan.
pub fn phase_margin(l: &RationalTf) -> Result<PhaseMargin> {
    phase_margin_on(l, &ScanGrid::default())
}

/// `180° + arg L(jω_c)` at the lowest unit-magnitude frequency. The phase is
/// unwrapped from the low end of the scan band.
pub fn phase_margin_on(l: &RationalTf, grid: &ScanGrid) -> Result<PhaseMargin> {
    let mut prev: Option<(f64, Complex64, f64)> = None;
    for &w in &grid.omegas() {
        let h = match l.response_at(w) {
            Ok(h) => h,
            Err(Error::PoleOnGrid { .. }) => continue,
            Err(e) => return Err(e),
        };
        let phase = match prev {
            Some((_, _, p0)) => p0 + wrap_pi(h.arg() - p0),
            None => h.arg(),
        };
        if let Some((w0, h0, p0)) = prev {
            if (h0.norm() - 1.0) * (h.norm() - 1.0) <= 0.0 {
                let wc = bisect_log(w0, w, |x| Ok(l.response_at(x)?.norm() - 1.0))?;
                let hc = l.response_at(wc)?;
                let unwrapped = p0 + wrap_pi(hc.arg() - p0);
                return Ok(PhaseMargin {
                    degrees: 180.0 + unwrapped.to_degrees(),
                    omega_c: wc,
                });
            }
        }
        prev = Some((w, h, phase));
    }
    Err(Error::NoCrossover)
}

fn wrap_pi(x: f64) -> f64 {
    let y = (x + PI).rem_euclid(2.0 * PI) - PI;
    if y == -PI {
        PI
    } else {
        y
    }
}

/// Bisection in `ln ω` on a sign change of `f` over `[lo, hi]`.
fn bisect_log(mut lo: f64, mut hi: f64, f: impl Fn(f64) -> Result<f64>) -> Result<f64> {
    let mut f_lo = f(lo)?;
    if f_lo == 0.0 {
        return Ok(lo);
    }
    while hi - lo > CROSSOVER_REL_TOL * hi {
        let mid = (lo * hi).sqrt();
        let f_mid = f(mid)?;
        if f_mid == 0.0 {
            return Ok(mid);
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Ok((lo * hi).sqrt())
}

/// Positive frequencies of undamped loop poles.
fn imaginary_axis_poles(l: &RationalTf) -> Result<Vec<f64>> {
    Ok(l.poles()?
        .into_iter()
        .filter(|p| p.im > 0.0 && p.re.abs() <= 1e-9 * p.norm())
        .map(|p| p.im)
        .collect())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MarginReport {
    pub model: ModelKind,
    /// Infinite (serialized as `null`) when there is no phase crossover.
    pub gain_margin: f64,
    pub omega_180: Option<f64>,
    /// `None` when `|L(jω)|` never reaches one in the scan band.
    pub phase_margin_deg: Option<f64>,
    pub omega_c: Option<f64>,
}

impl MarginReport {
    pub fn from_loop(l: &RationalTf, model: ModelKind) -> Result<Self> {
        let gm = gain_margin(l)?;
        let pm = match phase_margin(l) {
            Ok(pm) => Some(pm),
            Err(Error::NoCrossover) => None,
            Err(e) => return Err(e),
        };
        Ok(MarginReport {
            model,
            gain_margin: gm.value,
            omega_180: gm.omega_180,
            phase_margin_deg: pm.as_ref().map(|p| p.degrees),
            omega_c: pm.map(|p| p.omega_c),
        })
    }
}

/// Margins of the droop loop for one model, with the filter as configured.
pub fn margin_report(
    params: &ConverterParams,
    ctrl: &ControlParams,
    op: &OperatingPoint,
    kind: ModelKind,
) -> Result<MarginReport> {
    MarginReport::from_loop(&loop_tf(params, ctrl, op, kind), kind)
}

/// `sqrt(k_v^2 + L_c^2 ω_1^2) / L_c`
pub fn omega_180_emt(params: &ConverterParams, ctrl: &ControlParams) -> f64 {
    let (l, w1, kv) = (params.l_c, params.omega_1, ctrl.k_v);
    (kv * kv + l * l * w1 * w1).sqrt() / l
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CrossoverMethod {
    /// Integrator crossover of the RMS loop.
    ClosedForm,
    /// Smallest positive root of the EMT unit-gain cubic in `ω^2`.
    CubicExact,
    /// First-order expansion of the EMT cubic around zero.
    Taylor,
}

fn require_unloaded_q(op: &OperatingPoint) -> Result<()> {
    if op.i_q0 != 0.0 {
        return Err(Error::InvalidOperatingPoint(format!(
            "closed-form crossovers need i_q0 = 0, got {}",
            op.i_q0
        )));
    }
    Ok(())
}

/// `V_set^2 - k_v^2 i_0^2`
fn effective_voltage_sq(params: &ConverterParams, ctrl: &ControlParams, op: &OperatingPoint) -> f64 {
    params.v_set * params.v_set - ctrl.k_v * ctrl.k_v * op.current_sq()
}

/// Gain crossover frequency in p.u. The RMS loop is a pure integrator, so every
/// method returns its closed form there.
pub fn omega_c(
    params: &ConverterParams,
    ctrl: &ControlParams,
    op: &OperatingPoint,
    kind: ModelKind,
    method: CrossoverMethod,
) -> Result<f64> {
    require_unloaded_q(op)?;
    if !(ctrl.k_p > 0.0) {
        return Err(Error::InvalidArgument("crossover needs K_p > 0".into()));
    }
    let (l, w1, kv, kp) = (params.l_c, params.omega_1, ctrl.k_v, ctrl.k_p);
    let veff = effective_voltage_sq(params, ctrl, op);
    let a = kv * kv + l * l * w1 * w1;
    if kind == ModelKind::Rms || method != CrossoverMethod::CubicExact {
        return Ok(kp * l * w1 * veff / a);
    }
    let l2 = l * l;
    let f = Polynomial::new(vec![
        (kp * w1 * l * veff).powi(2),
        -a * a,
        2.0 * l2 * (l2 * w1 * w1 - kv * kv),
        -l2 * l2,
    ]);
    f.roots()?
        .into_iter()
        .filter(|x| x.im.abs() <= 1e-9 * x.norm() && x.re > 0.0)
        .map(|x| x.re)
        .min_by(f64::total_cmp)
        .map(f64::sqrt)
        .ok_or(Error::NoCrossover)
}

/// Droop that places the EMT gain margin at `target_gm`:
/// `2 k_v (k_v^2 + L_c^2 ω_1^2) / (g_m ω_1 L_c^2 (V_set^2 - i_0^2 k_v^2))`.
pub fn kp_max_for_gain_margin(
    params: &ConverterParams,
    ctrl: &ControlParams,
    op: &OperatingPoint,
    target_gm: f64,
) -> Result<f64> {
    if !(target_gm > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "target gain margin must be positive, got {target_gm}"
        )));
    }
    let veff = effective_voltage_sq(params, ctrl, op);
    if !(veff > 0.0) {
        return Err(Error::InvalidOperatingPoint(format!(
            "V_set^2 - i_0^2 k_v^2 = {veff} must be positive"
        )));
    }
    let (l, w1, kv) = (params.l_c, params.omega_1, ctrl.k_v);
    Ok(2.0 * kv * (kv * kv + l * l * w1 * w1) / (target_gm * w1 * l * l * veff))
}

/// Phase-margin floor supported by the damping rule.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum PhaseFloor {
    #[serde(rename = "80")]
    Deg80,
    #[serde(rename = "45")]
    Deg45,
}

impl PhaseFloor {
    pub fn degrees(self) -> f64 {
        match self {
            PhaseFloor::Deg80 => 80.0,
            PhaseFloor::Deg45 => 45.0,
        }
    }

    /// Open interval of admissible gain margins.
    pub fn gm_interval(self) -> (f64, f64) {
        match self {
            PhaseFloor::Deg80 => (2.0, 12.0 + 148f64.sqrt()),
            PhaseFloor::Deg45 => (0.0, 2.0 + 8f64.sqrt()),
        }
    }

    /// Linear coefficient `c` of `g^2 - c g - 4`.
    fn linear_coeff(self) -> f64 {
        match self {
            PhaseFloor::Deg80 => 24.0,
            PhaseFloor::Deg45 => 4.0,
        }
    }
}

impl TryFrom<f64> for PhaseFloor {
    type Error = Error;
    fn try_from(deg: f64) -> Result<Self> {
        if deg == 80.0 {
            Ok(PhaseFloor::Deg80)
        } else if deg == 45.0 {
            Ok(PhaseFloor::Deg45)
        } else {
            Err(Error::InvalidArgument(format!("phase floor must be 80 or 45, got {deg}")))
        }
    }
}

impl FromStr for PhaseFloor {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let deg: f64 = s
            .trim()
            .parse()
            .map_err(|_| Error::InvalidArgument(format!("phase floor must be 80 or 45, got {s:?}")))?;
        PhaseFloor::try_from(deg)
    }
}

impl fmt::Display for PhaseFloor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.degrees())
    }
}

/// Damping at the edge of the phase-margin rule:
/// `k_v = g_m L_c ω_1 / sqrt(-(g_m^2 - c g_m - 4))` with `c = 24` for the 80°
/// floor and `c = 4` for 45°.
pub fn kv_for_phase_margin(params: &ConverterParams, target_gm: f64, floor: PhaseFloor) -> Result<f64> {
    let (lo, hi) = floor.gm_interval();
    if !(target_gm > lo && target_gm < hi) {
        return Err(Error::InfeasibleMargin {
            target_gm,
            floor_deg: floor.degrees(),
            lo,
            hi,
        });
    }
    let g = target_gm;
    let q = g * g - floor.linear_coeff() * g - 4.0;
    Ok((-(g * g) * params.l_c * params.l_c * params.omega_1 * params.omega_1 / q).sqrt())
}

/// Relative tolerance of the gain-margin verification in [`tune`].
pub const TUNE_GM_TOL: f64 = 0.02;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TuningResult {
    pub k_v: f64,
    pub k_p: f64,
    pub target_gm: f64,
    pub phase_margin_floor_deg: f64,
    pub measured_gm: f64,
    pub measured_pm_deg: f64,
    /// Both targets verified on the constructed EMT loop.
    pub feasible: bool,
}

/// Damping from the phase rule, then droop from the gain rule, then a numeric
/// check on the static-gain EMT loop.
///
/// A gain-margin miss beyond [`TUNE_GM_TOL`] is an error. A phase margin below
/// the floor is reported through `feasible` because the damping rule rests on
/// the approximate crossover and can land a fraction of a degree short.
pub fn tune(
    params: &ConverterParams,
    op: &OperatingPoint,
    target_gm: f64,
    floor: PhaseFloor,
) -> Result<TuningResult> {
    let k_v = kv_for_phase_margin(params, target_gm, floor)?;
    let k_p = kp_max_for_gain_margin(params, &ControlParams::new(0.0, k_v, 0.0), op, target_gm)?;
    let ctrl = ControlParams::new(k_p, k_v, 0.0);
    let l = loop_tf(params, &ctrl, op, ModelKind::Emt);
    let measured_gm = gain_margin(&l)?.value;
    if !((measured_gm / target_gm - 1.0).abs() <= TUNE_GM_TOL) {
        return Err(Error::SelfCheck {
            measured_gm,
            target_gm,
        });
    }
    let measured_pm_deg = phase_margin(&l)?.degrees;
    Ok(TuningResult {
        k_v,
        k_p,
        target_gm,
        phase_margin_floor_deg: floor.degrees(),
        measured_gm,
        measured_pm_deg,
        feasible: measured_pm_deg >= floor.degrees(),
    })
}

/// `(ω, |e(jω)|)` where `e` is the EMT minus RMS closed loop.
pub fn mismatch_profile(
    params: &ConverterParams,
    ctrl: &ControlParams,
    op: &OperatingPoint,
    omega_grid: &[f64],
) -> Result<Vec<(f64, f64)>> {
    let e = mismatch_tf(params, ctrl, op);
    omega_grid
        .iter()
        .map(|&w| Ok((w, e.response_at(w)?.norm())))
        .collect()
}

/// Largest `|e(jω)|` on the grid.
pub fn mismatch_peak(profile: &[(f64, f64)]) -> Option<(f64, f64)> {
    profile.iter().copied().max_by(|a, b| a.1.total_cmp(&b.1))
}
