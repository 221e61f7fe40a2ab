//! Routh-Hurwitz conditions, closed-loop eigenvalues and root-locus sweeps.
//!
//! The closed-form conditions here are evaluated in static-gain mode: the
//! virtual impedance is the constant `k_v` and `ctrl.omega_v` is ignored.
//! [`closed_loop_poles`] and [`root_locus`] use the full filter.

use itertools::Itertools;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::plant::{
    closed_loop_tf, ControlParams, ConverterParams, LinearizationConstants, ModelKind,
    OperatingPoint,
};

/// Relative band around zero in which a Routh margin counts as marginal.
pub const MARGINAL_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Stability {
    Stable,
    Marginal,
    Unstable,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StabilityVerdict {
    pub status: Stability,
    /// `a1 a2 - a0 a3` after normalizing `a0 > 0`.
    pub margin: f64,
    /// The inequality that decided the verdict.
    pub binding_condition: &'static str,
}

impl StabilityVerdict {
    pub fn is_stable(&self) -> bool {
        self.status == Stability::Stable
    }
}

/// Routh-Hurwitz test for `a0 s^3 + a1 s^2 + a2 s + a3`.
///
/// A negative `a0` is normalized away by flipping every sign.
pub fn routh_cubic(a0: f64, a1: f64, a2: f64, a3: f64) -> Result<StabilityVerdict> {
    if a0 == 0.0 {
        return Err(Error::DegenerateOrder);
    }
    let (a0, a1, a2, a3) = if a0 < 0.0 {
        (-a0, -a1, -a2, -a3)
    } else {
        (a0, a1, a2, a3)
    };
    let lhs = a1 * a2;
    let rhs = a0 * a3;
    let margin = lhs - rhs;
    let on_boundary = margin.abs() <= MARGINAL_TOL * lhs.abs().max(rhs.abs());

    let verdict = |status, binding_condition| StabilityVerdict {
        status,
        margin,
        binding_condition,
    };

    if a1 > 0.0 && a3 > 0.0 && margin > 0.0 && !on_boundary {
        return Ok(verdict(Stability::Stable, "a1*a2 > a0*a3"));
    }
    // root at the origin with the remaining quadratic on or left of the axis
    if a3 == 0.0 && a1 >= 0.0 && a2 > 0.0 {
        return Ok(verdict(Stability::Marginal, "a3 = 0"));
    }
    // (s + a1)(s^2 + a2): imaginary pair at ±j sqrt(a2)
    if on_boundary && a1 > 0.0 && a2 > 0.0 && a3 > 0.0 {
        return Ok(verdict(Stability::Marginal, "a1*a2 = a0*a3"));
    }
    let binding = if a1 <= 0.0 {
        "a1 > 0"
    } else if a3 <= 0.0 {
        "a3 > 0"
    } else {
        "a1*a2 > a0*a3"
    };
    Ok(verdict(Stability::Unstable, binding))
}

/// EMT characteristic cubic `[a0, a1, a2, a3]` with the virtual impedance as
/// the static gain `k_v`.
pub fn emt_characteristic_cubic(
    params: &ConverterParams,
    ctrl: &ControlParams,
    op: &OperatingPoint,
) -> [f64; 4] {
    let lin = LinearizationConstants::new(params, ctrl, op);
    let b = lin.b_static(ctrl);
    let (l, v, w1, kp, kv) = (params.l_c, params.v_set, params.omega_1, ctrl.k_p, ctrl.k_v);
    let droop = v * v * kp / (w1 * l);
    [
        1.0,
        droop * lin.a + 2.0 * kv / l,
        w1 * w1 + (kv / l) * (kv / l),
        w1 * w1 * droop * (1.0 + lin.a + b),
    ]
}

/// EMT stability without virtual impedance: unstable for every `K_p > 0`,
/// marginal at `K_p = 0` with poles at `±jω_1`.
pub fn condition_no_virtual_impedance(
    params: &ConverterParams,
    ctrl: &ControlParams,
) -> Result<StabilityVerdict> {
    if ctrl.k_v != 0.0 {
        return Err(Error::WrongRegime(format!(
            "k_v = {} but this condition requires k_v = 0",
            ctrl.k_v
        )));
    }
    let [a0, a1, a2, a3] =
        emt_characteristic_cubic(params, ctrl, &OperatingPoint::unloaded(params));
    routh_cubic(a0, a1, a2, a3)
}

/// Result of the virtual-impedance stability condition.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VirtualImpedanceCondition {
    pub verdict: StabilityVerdict,
    /// Left-hand side of the load-dependent inequality, written out term by
    /// term; positive means stable.
    pub condition_lhs: f64,
    /// Largest stable droop, reported only for `i_0 = 0`.
    pub kp_bound: Option<f64>,
}

/// Routh condition for the EMT loop with the virtual impedance as a static
/// gain.
pub fn condition_with_virtual_impedance(
    params: &ConverterParams,
    ctrl: &ControlParams,
    op: &OperatingPoint,
) -> Result<VirtualImpedanceCondition> {
    let [a0, a1, a2, a3] = emt_characteristic_cubic(params, ctrl, op);
    let verdict = routh_cubic(a0, a1, a2, a3)?;

    let (l, v, w1, kp, kv) = (params.l_c, params.v_set, params.omega_1, ctrl.k_p, ctrl.k_v);
    let (iq, i0sq) = (op.i_q0, op.current_sq());
    let condition_lhs = (kv * kv / (l * l) + w1 * w1) * (iq * kp * v + 2.0 * kv / l)
        - kp * v * v * w1
            * (-kv * kv * (i0sq / v + iq / (l * w1)) / v + iq * l * w1 / v + 1.0)
            / l;

    let kp_bound = (op.i_d0 == 0.0 && op.i_q0 == 0.0).then(|| kp_stability_bound(params, kv));
    Ok(VirtualImpedanceCondition {
        verdict,
        condition_lhs,
        kp_bound,
    })
}

/// `2 k_v (k_v^2 + L_c^2 ω_1^2) / (L_c^2 V_set^2 ω_1)`: the droop at which the
/// unloaded EMT loop loses stability.
pub fn kp_stability_bound(params: &ConverterParams, k_v: f64) -> f64 {
    let (l, v, w1) = (params.l_c, params.v_set, params.omega_1);
    2.0 * k_v * (k_v * k_v + l * l * w1 * w1) / (l * l * v * v * w1)
}

/// The single real pole of the static-gain RMS closed loop, in p.u.
pub fn rms_closed_loop_pole(
    params: &ConverterParams,
    ctrl: &ControlParams,
    op: &OperatingPoint,
) -> f64 {
    let lin = LinearizationConstants::new(params, ctrl, op);
    let b = lin.b_static(ctrl);
    let (l, v, w1, kp, kv) = (params.l_c, params.v_set, params.omega_1, ctrl.k_p, ctrl.k_v);
    -kp * l * v * v * w1 * (1.0 + lin.a + b) / (kv * kv + l * l * w1 * w1)
}

/// Roots of the closed-loop denominator, including the filter states when
/// `ω_v > 0`.
pub fn closed_loop_poles(
    params: &ConverterParams,
    ctrl: &ControlParams,
    op: &OperatingPoint,
    kind: ModelKind,
) -> Result<Vec<Complex64>> {
    closed_loop_tf(params, ctrl, op, kind).poles()
}

/// Verdict of the static-gain RMS loop from the sign of its single pole.
pub fn rms_verdict(params: &ConverterParams, ctrl: &ControlParams, op: &OperatingPoint) -> StabilityVerdict {
    let pole = rms_closed_loop_pole(params, ctrl, op);
    let status = if pole < 0.0 {
        Stability::Stable
    } else if pole == 0.0 {
        Stability::Marginal
    } else {
        Stability::Unstable
    };
    StabilityVerdict {
        status,
        margin: -pole,
        binding_condition: "rms pole < 0",
    }
}

/// Relative band around the imaginary axis in which a pole counts as marginal.
pub const AXIS_TOL: f64 = 1e-9;

/// Stability from pole locations: any pole right of the axis band is
/// unstable, any pole inside it marginal.
pub fn classify_poles(poles: &[Complex64]) -> Stability {
    let scale = poles.iter().fold(1.0_f64, |m, p| m.max(p.norm()));
    let max_re = max_real_part(poles);
    if poles.is_empty() || max_re < -AXIS_TOL * scale {
        Stability::Stable
    } else if max_re <= AXIS_TOL * scale {
        Stability::Marginal
    } else {
        Stability::Unstable
    }
}

pub fn max_real_part(poles: &[Complex64]) -> f64 {
    poles.iter().map(|p| p.re).fold(f64::NEG_INFINITY, f64::max)
}

/// Closed-loop poles over a droop sweep. `branches[i]` holds the poles for
/// `gains[i]`, ordered so that index `k` follows one continuous branch.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RootLocus {
    pub model: ModelKind,
    pub gains: Vec<f64>,
    pub branches: Vec<Vec<Complex64>>,
}

impl RootLocus {
    pub fn branch(&self, k: usize) -> impl Iterator<Item = Complex64> + '_ {
        self.branches.iter().map(move |poles| poles[k])
    }
}

pub fn root_locus(
    params: &ConverterParams,
    ctrl: &ControlParams,
    op: &OperatingPoint,
    kind: ModelKind,
    kp_grid: &[f64],
) -> Result<RootLocus> {
    if kp_grid.is_empty() {
        return Err(Error::InvalidArgument("empty K_p grid".into()));
    }
    if kp_grid.iter().any(|&k| !(k >= 0.0)) {
        return Err(Error::InvalidArgument("K_p grid must be nonnegative".into()));
    }
    if kp_grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidArgument("K_p grid must be sorted".into()));
    }

    let mut branches: Vec<Vec<Complex64>> = Vec::with_capacity(kp_grid.len());
    for &kp in kp_grid {
        let mut poles = closed_loop_poles(params, &ctrl.with_k_p(kp), op, kind)?;
        match branches.last() {
            Some(prev) => poles = match_branches(prev, poles),
            None => poles.sort_by(|a, b| b.im.total_cmp(&a.im).then(a.re.total_cmp(&b.re))),
        }
        branches.push(poles);
    }
    Ok(RootLocus {
        model: kind,
        gains: kp_grid.to_vec(),
        branches,
    })
}

/// Reorders `next` so that `next[k]` continues `prev[k]`, minimizing the total
/// displacement. Exhaustive for small orders, greedy otherwise.
fn match_branches(prev: &[Complex64], next: Vec<Complex64>) -> Vec<Complex64> {
    let n = next.len();
    if n != prev.len() || n == 0 {
        return next;
    }
    let cost = |k: usize, z: &Complex64| {
        // ties go to the candidate on the same side of the real axis
        let side = if (prev[k].im >= 0.0) == (z.im >= 0.0) { 0.0 } else { 1e-15 };
        (prev[k] - z).norm() + side
    };
    if n <= 7 {
        let best = (0..n)
            .permutations(n)
            .min_by(|p, q| {
                let cp: f64 = p.iter().enumerate().map(|(k, &j)| cost(k, &next[j])).sum();
                let cq: f64 = q.iter().enumerate().map(|(k, &j)| cost(k, &next[j])).sum();
                cp.total_cmp(&cq)
            })
            .expect("at least one permutation");
        return best.into_iter().map(|j| next[j]).collect();
    }
    let mut pool = next;
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        let (j, _) = pool
            .iter()
            .enumerate()
            .min_by(|(_, a), (_, b)| cost(k, a).total_cmp(&cost(k, b)))
            .expect("pool is not empty");
        out.push(pool.swap_remove(j));
    }
    out
}
