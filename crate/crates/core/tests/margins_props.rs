mod common;

use common::*;
use gfpc::margins::{self, CrossoverMethod, PhaseFloor, ScanGrid, TUNE_GM_TOL};
use gfpc::plant::{self, ControlParams, ConverterParams};
use gfpc::{Error, ModelKind};
use proptest::prelude::*;
use rand::Rng;

#[test]
fn case1_margins_frozen() {
    let l = plant::loop_tf(&params(), &case1(), &unloaded(), ModelKind::Emt);
    let gm = margins::gain_margin(&l).unwrap();
    let pm = margins::phase_margin(&l).unwrap();
    assert!((gm.value - 2.497338).abs() < 1e-5, "{gm:?}");
    assert!((gm.omega_180.unwrap() - 1.052730).abs() < 1e-6);
    assert!((pm.degrees - 79.898).abs() < 1e-3, "{pm:?}");
}

#[test]
fn case3_axis_pole_gives_zero_gain_margin() {
    let l = plant::loop_tf(&params(), &case3(), &unloaded(), ModelKind::Emt);
    let gm = margins::gain_margin(&l).unwrap();
    assert_eq!(gm.value, 0.0);
    assert!((gm.omega_180.unwrap() - 1.0).abs() < 1e-9);
}

#[test]
fn crossover_matches_independent_bisection() {
    let (p, op) = (params(), unloaded());
    let oracle = emt_crossover_oracle(&p, &case1());
    assert!((oracle - 0.278990574).abs() < 1e-9, "{oracle}");
    let cubic = margins::omega_c(&p, &case1(), &op, ModelKind::Emt, CrossoverMethod::CubicExact).unwrap();
    let scan = margins::phase_margin(&plant::loop_tf(&p, &case1(), &op, ModelKind::Emt)).unwrap().omega_c;
    assert!((cubic / oracle - 1.0).abs() < 1e-9, "{cubic}");
    assert!((scan / oracle - 1.0).abs() < 1e-9, "{scan}");
    let taylor = margins::omega_c(&p, &case1(), &op, ModelKind::Emt, CrossoverMethod::Taylor).unwrap();
    assert!((taylor - 0.263481).abs() < 1e-6);
}

#[test]
fn taylor_crossover_converges_for_small_droop() {
    let (p, op) = (params(), unloaded());
    let mut r = rng(31);
    for _ in 0..100 {
        let ctrl = ControlParams::new(r.random_range(1e-4..0.01), r.random_range(0.02..0.3), 0.0);
        let exact = margins::omega_c(&p, &ctrl, &op, ModelKind::Emt, CrossoverMethod::CubicExact).unwrap();
        let taylor = margins::omega_c(&p, &ctrl, &op, ModelKind::Emt, CrossoverMethod::Taylor).unwrap();
        assert!((taylor / exact - 1.0).abs() < 0.01, "{ctrl:?}: {exact} vs {taylor}");
    }
}

#[test]
fn rms_crossover_is_closed_form() {
    let (p, op) = (params(), unloaded());
    for ctrl in [case1(), case2(), case3()] {
        let m = margins::margin_report(&p, &ctrl, &op, ModelKind::Rms).unwrap();
        let cf = margins::omega_c(&p, &ctrl, &op, ModelKind::Rms, CrossoverMethod::ClosedForm).unwrap();
        assert!((m.omega_c.unwrap() / cf - 1.0).abs() < 1e-9);
        assert_eq!(m.gain_margin, f64::INFINITY);
        assert_eq!(m.phase_margin_deg, Some(90.0));
    }
}

#[test]
fn omega_c_requires_unloaded_q_axis_and_positive_droop() {
    let p = params();
    let loaded = gfpc::plant::solve_operating_point(&p, 0.5, 1.0).unwrap();
    assert!(matches!(
        margins::omega_c(&p, &case1(), &loaded, ModelKind::Emt, CrossoverMethod::Taylor),
        Err(Error::InvalidOperatingPoint(_))
    ));
    assert!(margins::omega_c(&p, &case1().with_k_p(0.0), &unloaded(), ModelKind::Emt, CrossoverMethod::Taylor).is_err());
}

#[test]
fn tune_round_trip() {
    let op = unloaded();
    let mut r = rng(32);
    for _ in 0..50 {
        let p = ConverterParams { l_c: r.random_range(0.1..0.3), ..params() };
        let (floor, g) = if r.random_bool(0.5) {
            (PhaseFloor::Deg80, r.random_range(2.01..24.1))
        } else {
            (PhaseFloor::Deg45, r.random_range(2.5..4.8))
        };
        let t = margins::tune(&p, &op, g, floor).unwrap();
        assert!((t.measured_gm / g - 1.0).abs() <= TUNE_GM_TOL, "{t:?}");
        let l = plant::loop_tf(&p, &ControlParams::new(t.k_p, t.k_v, 0.0), &op, ModelKind::Emt);
        assert!((margins::gain_margin(&l).unwrap().value - t.measured_gm).abs() < 1e-12);
        // the damping rule uses the first-order crossover, so it lands within a degree
        assert!(t.measured_pm_deg > floor.degrees() - 1.0, "{t:?}");
    }
}

#[test]
fn low_gain_margin_45_degree_tunings_are_flagged() {
    let (p, op) = (params(), unloaded());
    for g in [0.5, 0.9, 1.0, 1.5, 2.0] {
        let t = margins::tune(&p, &op, g, PhaseFloor::Deg45).unwrap();
        assert!(!t.feasible, "{t:?}");
        if g <= 1.0 {
            assert!(t.measured_pm_deg <= 1e-6, "{t:?}");
        }
    }
}

#[test]
fn tune_rejects_targets_outside_the_feasible_interval() {
    let (p, op) = (params(), unloaded());
    for (g, floor) in [(25.0, PhaseFloor::Deg80), (24.18, PhaseFloor::Deg80), (1.5, PhaseFloor::Deg80), (5.0, PhaseFloor::Deg45)] {
        assert!(matches!(margins::tune(&p, &op, g, floor), Err(Error::InfeasibleMargin { .. })), "{g}");
    }
    assert!(margins::tune(&p, &op, 24.1, PhaseFloor::Deg80).is_ok());
}

#[test]
fn kv_rule_frozen_values() {
    let p = params();
    let k1 = margins::kv_for_phase_margin(&p, 2.5, PhaseFloor::Deg80).unwrap();
    let k2 = margins::kv_for_phase_margin(&p, 10.0, PhaseFloor::Deg80).unwrap();
    // 0.5/sqrt(57.75) and 2/12
    assert!((k1 - 0.5 / 57.75f64.sqrt()).abs() < 1e-12);
    assert!((k2 - 2.0 / 12.0).abs() < 1e-12);
}

#[test]
fn mismatch_has_a_dc_zero_and_peaks_near_the_line_resonance() {
    let (p, op) = (params(), unloaded());
    for ctrl in [case1(), case2()] {
        let e = plant::mismatch_tf(&p, &ctrl, &op);
        assert!(e.response_at(1e-6).unwrap().norm() < 1e-6);
        let grid = gfpc::ratfun::logspace(0.1, 10.0, 1001);
        let (w, _) = margins::mismatch_peak(&margins::mismatch_profile(&p, &ctrl, &op, &grid).unwrap()).unwrap();
        assert!(w > 0.5 && w < 2.0, "{w}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn refining_the_scan_keeps_the_margins(kp in 0.005..0.2f64, kv in 0.02..0.3f64, l_c in 0.1..0.3f64) {
        let p = ConverterParams { l_c, ..ConverterParams::default() };
        let l = plant::loop_tf(&p, &ControlParams::new(kp, kv, 0.0), &unloaded(), ModelKind::Emt);
        let g = ScanGrid::default();
        let (a, b) = (margins::gain_margin_on(&l, &g).unwrap(), margins::gain_margin_on(&l, &g.refined()).unwrap());
        prop_assert!((a.value / b.value - 1.0).abs() < 1e-9);
        let (a, b) = (margins::phase_margin_on(&l, &g).unwrap(), margins::phase_margin_on(&l, &g.refined()).unwrap());
        prop_assert!((a.degrees - b.degrees).abs() < 1e-9);
    }

    #[test]
    fn omega_180_matches_closed_form(kp in 0.001..0.2f64, kv in 0.001..0.4f64, l_c in 0.05..0.5f64) {
        let p = ConverterParams { l_c, ..ConverterParams::default() };
        let ctrl = ControlParams::new(kp, kv, 0.0);
        let gm = margins::gain_margin(&plant::loop_tf(&p, &ctrl, &unloaded(), ModelKind::Emt)).unwrap();
        let cf = margins::omega_180_emt(&p, &ctrl);
        prop_assert!((gm.omega_180.unwrap() / cf - 1.0).abs() < 1e-9);
        let direct = 1.0 / emt_loop_magnitude(&p, &ctrl, cf);
        prop_assert!((gm.value / direct - 1.0).abs() < 1e-9);
    }

    #[test]
    fn kp_for_gain_margin_hits_target(g in 1.1..30.0f64, kv in 0.02..0.3f64) {
        let (p, op) = (params(), unloaded());
        let kp = margins::kp_max_for_gain_margin(&p, &ControlParams::new(0.0, kv, 0.0), &op, g).unwrap();
        let l = plant::loop_tf(&p, &ControlParams::new(kp, kv, 0.0), &op, ModelKind::Emt);
        prop_assert!((margins::gain_margin(&l).unwrap().value / g - 1.0).abs() < 1e-9);
    }
}
