//! Single grid-forming converter behind a phase reactor, connected to an
//! infinite bus.
//!
//! The converter dq frame is aligned so that the terminal voltage is
//! `V_set + j0` at steady state and `theta_0` is the lead of the converter frame
//! over the grid frame. Active power is measured at the converter terminal,
//! `P = Re(v conj(i))`. The phase-reactor resistance is carried in
//! [`ConverterParams`] but neglected by every transfer-function builder; only
//! the time-domain simulators use it.
//!
//! The virtual impedance is the high-pass filter `H(s) = k_v s / (s + ω_v)`.
//! With `ω_v = 0` it degenerates to the static gain `k_v`, which is the mode in
//! which all closed-form stability and margin results hold.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ratfun::{Polynomial, RationalTf};

/// Circuit constants, all per-unit except `omega_b` (rad/s).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConverterParams {
    /// Phase reactor plus transformer inductance.
    pub l_c: f64,
    /// Phase reactor plus transformer resistance.
    pub r_c: f64,
    pub v_set: f64,
    /// Reference angular speed, 1.0 p.u. at nominal frequency.
    pub omega_1: f64,
    /// Base angular speed in rad/s.
    pub omega_b: f64,
}

impl Default for ConverterParams {
    fn default() -> Self {
        ConverterParams {
            l_c: 0.2,
            r_c: 0.0,
            v_set: 1.0,
            omega_1: 1.0,
            omega_b: 100.0 * PI,
        }
    }
}

impl ConverterParams {
    pub fn validate(&self) -> Result<()> {
        let checks = [
            (self.l_c > 0.0, "l_c must be > 0"),
            (self.r_c >= 0.0, "r_c must be >= 0"),
            (self.v_set > 0.0, "v_set must be > 0"),
            (self.omega_1 > 0.0, "omega_1 must be > 0"),
            (self.omega_b > 0.0, "omega_b must be > 0"),
        ];
        first_violation(&checks)
    }

    /// Reactance at the reference speed, `ω_1 L_c`.
    pub fn x_c(&self) -> f64 {
        self.omega_1 * self.l_c
    }
}

/// Droop and virtual-impedance gains.
#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct ControlParams {
    /// Frequency droop, p.u. frequency per p.u. power.
    pub k_p: f64,
    /// Virtual-impedance damping coefficient.
    pub k_v: f64,
    /// High-pass cut-off; 0 selects the static-gain mode.
    pub omega_v: f64,
}

impl ControlParams {
    pub fn new(k_p: f64, k_v: f64, omega_v: f64) -> Self {
        ControlParams { k_p, k_v, omega_v }
    }

    pub fn validate(&self) -> Result<()> {
        let checks = [
            (self.k_p >= 0.0, "k_p must be >= 0"),
            (self.k_v >= 0.0, "k_v must be >= 0"),
            (self.omega_v >= 0.0, "omega_v must be >= 0"),
        ];
        first_violation(&checks)
    }

    /// Same gains with the filter cut-off forced to zero.
    pub fn static_gain(&self) -> Self {
        ControlParams {
            omega_v: 0.0,
            ..*self
        }
    }

    pub fn with_k_p(&self, k_p: f64) -> Self {
        ControlParams { k_p, ..*self }
    }

    pub fn with_k_v(&self, k_v: f64) -> Self {
        ControlParams { k_v, ..*self }
    }
}

fn first_violation(checks: &[(bool, &str)]) -> Result<()> {
    match checks.iter().find(|(ok, _)| !ok) {
        Some((_, msg)) => Err(Error::InvalidArgument((*msg).to_string())),
        None => Ok(()),
    }
}

/// Steady-state phasor solution around which everything is linearized.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OperatingPoint {
    pub i_d0: f64,
    pub i_q0: f64,
    /// Lead of the converter frame over the grid frame, rad.
    pub theta_0: f64,
    pub v_g: f64,
    pub p_0: f64,
}

impl OperatingPoint {
    /// No-load point with the grid voltage equal to the set-point.
    pub fn unloaded(params: &ConverterParams) -> Self {
        OperatingPoint {
            i_d0: 0.0,
            i_q0: 0.0,
            theta_0: 0.0,
            v_g: params.v_set,
            p_0: 0.0,
        }
    }

    pub fn current(&self) -> Complex64 {
        Complex64::new(self.i_d0, self.i_q0)
    }

    /// `|i_0|^2 = i_d0^2 + i_q0^2`
    pub fn current_sq(&self) -> f64 {
        self.i_d0 * self.i_d0 + self.i_q0 * self.i_q0
    }

    /// Magnitude of `V_set - (R_c + jω_1 L_c) i_0 - V_g e^{-jθ_0}`.
    pub fn residual(&self, params: &ConverterParams) -> f64 {
        let lhs = Complex64::new(params.v_set, 0.0)
            - Complex64::new(params.r_c, params.x_c()) * self.current();
        (lhs - Complex64::from_polar(self.v_g, -self.theta_0)).norm()
    }

    pub fn check(&self, params: &ConverterParams) -> Result<()> {
        let r = self.residual(params);
        if r >= 1e-8 {
            return Err(Error::InvalidOperatingPoint(format!(
                "steady-state residual {r:e}"
            )));
        }
        let p = params.v_set * self.i_d0;
        if (p - self.p_0).abs() >= 1e-8 {
            return Err(Error::InvalidOperatingPoint(format!(
                "p_0 = {} but V_set i_d0 = {p}",
                self.p_0
            )));
        }
        Ok(())
    }
}

/// Solves the steady state for a power reference and grid voltage, with the
/// droop at nominal frequency so that `P_0 = P_ref` at the terminal.
pub fn solve_operating_point(
    params: &ConverterParams,
    p_ref: f64,
    v_g: f64,
) -> Result<OperatingPoint> {
    params.validate()?;
    if v_g <= 0.0 {
        return Err(Error::InvalidArgument("v_g must be > 0".into()));
    }
    let v = params.v_set;
    let z = Complex64::new(params.r_c, params.x_c());
    let phi = z.arg();
    // Re[(V - V_g e^{-jθ}) / Z] = P/V  <=>  |Z| cos(θ + φ) = (V R - P |Z|^2 / V) / V_g
    let cos_arg = (v * params.r_c - p_ref * z.norm_sqr() / v) / (v_g * z.norm());
    if !(cos_arg.abs() <= 1.0 + 1e-12) {
        return Err(Error::PowerAngleLimit {
            p_ref,
            sin_theta: -cos_arg,
        });
    }
    let theta_0 = cos_arg.clamp(-1.0, 1.0).acos() - phi;
    let i0 = (Complex64::new(v, 0.0) - Complex64::from_polar(v_g, -theta_0)) / z;
    let op = OperatingPoint {
        i_d0: i0.re,
        i_q0: i0.im,
        theta_0,
        v_g,
        p_0: p_ref,
    };
    let residual = op.residual(params);
    if residual >= 1e-8 {
        return Err(Error::Numerical {
            what: "steady-state solve".into(),
            residual,
        });
    }
    Ok(op)
}

/// Which network representation a result refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    /// Dynamic phase-reactor currents.
    Emt,
    /// Algebraic (phasor) network.
    Rms,
}

impl ModelKind {
    pub const ALL: [ModelKind; 2] = [ModelKind::Emt, ModelKind::Rms];
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModelKind::Emt => "emt",
            ModelKind::Rms => "rms",
        })
    }
}

impl std::str::FromStr for ModelKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "emt" => Ok(ModelKind::Emt),
            "rms" => Ok(ModelKind::Rms),
            other => Err(Error::InvalidArgument(format!(
                "unknown model '{other}', expected emt or rms"
            ))),
        }
    }
}

/// Numerator and denominator of `H(s)` as separate polynomials.
#[derive(Clone, Debug)]
struct HighPass {
    num: Polynomial,
    den: Polynomial,
}

impl HighPass {
    fn new(ctrl: &ControlParams) -> Self {
        if ctrl.omega_v == 0.0 {
            HighPass {
                num: Polynomial::constant(ctrl.k_v),
                den: Polynomial::constant(1.0),
            }
        } else {
            HighPass {
                num: Polynomial::new(vec![0.0, ctrl.k_v]),
                den: Polynomial::new(vec![ctrl.omega_v, 1.0]),
            }
        }
    }
}

/// `H(s) = k_v s / (s + ω_v)`, or the constant `k_v` when `ω_v = 0`.
pub fn hp_filter(ctrl: &ControlParams) -> RationalTf {
    let h = HighPass::new(ctrl);
    RationalTf::new(h.num, h.den).expect("filter denominator is nonzero")
}

/// Load-dependent constants of the power-angle linearization.
///
/// `b(s) = -beta * H(s)^2` with
/// `beta = (i_q0 / (ω_1 L_c) + |i_0|^2 / V_set) / V_set`.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearizationConstants {
    pub a: f64,
    pub beta: f64,
    pub b_tf: RationalTf,
}

impl LinearizationConstants {
    pub fn new(params: &ConverterParams, ctrl: &ControlParams, op: &OperatingPoint) -> Self {
        let a = params.x_c() * op.i_q0 / params.v_set;
        let beta = (op.i_q0 / params.x_c() + op.current_sq() / params.v_set) / params.v_set;
        let h = hp_filter(ctrl);
        let b_tf = (&h * &h).scale(-beta);
        LinearizationConstants { a, beta, b_tf }
    }

    /// `b` in the static-gain mode, `-beta k_v^2`.
    pub fn b_static(&self, ctrl: &ControlParams) -> f64 {
        -self.beta * ctrl.k_v * ctrl.k_v
    }
}

/// Numerator and denominator of `G_θP` with the filter denominator cleared,
/// so both are plain polynomials.
fn plant_polys(
    params: &ConverterParams,
    ctrl: &ControlParams,
    op: &OperatingPoint,
    kind: ModelKind,
) -> (Polynomial, Polynomial) {
    let lin = LinearizationConstants::new(params, ctrl, op);
    let h = HighPass::new(ctrl);
    let (l, v, w1) = (params.l_c, params.v_set, params.omega_1);
    let hd2 = h.den.powi(2);
    let hn2 = h.num.powi(2);
    let s = Polynomial::s();
    let s2 = s.powi(2);

    // (1 + a + b(s)) h_d^2
    let load = &hd2.scale(1.0 + lin.a) - &hn2.scale(lin.beta);
    // ω_1^2 h_d^2 + h_n^2 / L^2
    let static_den = &hd2.scale(w1 * w1) + &hn2.scale(1.0 / (l * l));

    match kind {
        ModelKind::Emt => {
            let num = (&(&s2 * &hd2).scale(lin.a) + &load.scale(w1 * w1))
                .scale(v * v / (w1 * l));
            let damping = (&(&s * &h.num) * &h.den).scale(2.0 / l);
            let den = &(&(&s2 * &hd2) + &damping) + &static_den;
            (num, den)
        }
        ModelKind::Rms => (load.scale(v * v * w1 / l), static_den),
    }
}

/// Power-angle transfer function `ΔP/Δθ` for the requested model.
pub fn open_loop_tf(
    params: &ConverterParams,
    ctrl: &ControlParams,
    op: &OperatingPoint,
    kind: ModelKind,
) -> RationalTf {
    let (num, den) = plant_polys(params, ctrl, op, kind);
    RationalTf::new(num, den).expect("plant denominator is nonzero for L_c > 0")
}

/// Loop transfer function `(K_p / s) G_θP(s)`.
pub fn loop_tf(
    params: &ConverterParams,
    ctrl: &ControlParams,
    op: &OperatingPoint,
    kind: ModelKind,
) -> RationalTf {
    &RationalTf::integrator(ctrl.k_p) * &open_loop_tf(params, ctrl, op, kind)
}

/// Closed loop `ΔP/ΔP_ref`, expanded directly as
/// `K_p N(s) / (s D(s) + K_p N(s))` from the plant polynomials.
///
/// With `K_p = 0` the loop is open: the numerator is zero and the denominator
/// still carries the open-loop poles plus the integrator pole.
pub fn closed_loop_tf(
    params: &ConverterParams,
    ctrl: &ControlParams,
    op: &OperatingPoint,
    kind: ModelKind,
) -> RationalTf {
    if ctrl.k_p == 0.0 {
        log::warn!("K_p = 0: droop loop is open, closed loop is the zero transfer function");
    }
    let (num, den) = plant_polys(params, ctrl, op, kind);
    let kn = num.scale(ctrl.k_p);
    let cl_den = &(&Polynomial::s() * &den) + &kn;
    RationalTf::new(kn, cl_den).expect("closed-loop denominator has an s factor")
}

/// Estimation error of the phasor model, `G_cl^EMT(s) - G_cl^RMS(s)`.
pub fn mismatch_tf(
    params: &ConverterParams,
    ctrl: &ControlParams,
    op: &OperatingPoint,
) -> RationalTf {
    let emt = closed_loop_tf(params, ctrl, op, ModelKind::Emt);
    let rms = closed_loop_tf(params, ctrl, op, ModelKind::Rms);
    &emt - &rms
}
