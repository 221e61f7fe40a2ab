//! Tunes damping and droop for target gain margins, then measures the
//! margins of the resulting loops.

use gfpc::margins::{self, CrossoverMethod, PhaseFloor};
use gfpc::plant::{ControlParams, ConverterParams, OperatingPoint};
use gfpc::ModelKind;

fn main() -> gfpc::Result<()> {
    let params = ConverterParams::default();
    let op = OperatingPoint::unloaded(&params);

    for (gm, floor) in [(2.5, PhaseFloor::Deg80), (10.0, PhaseFloor::Deg80), (3.0, PhaseFloor::Deg45)] {
        let t = margins::tune(&params, &op, gm, floor)?;
        println!(
            "g_m = {gm}, floor {floor}: k_v = {:.5}, K_p = {:.5}, measured g_m = {:.4}, phase margin = {:.3} deg{}",
            t.k_v,
            t.k_p,
            t.measured_gm,
            t.measured_pm_deg,
            if t.feasible { "" } else { " (below floor)" }
        );
    }

    let ctrl = ControlParams::new(0.0584, 0.0658, 0.0);
    for kind in ModelKind::ALL {
        let m = margins::margin_report(&params, &ctrl, &op, kind)?;
        println!("{kind}: {m:?}");
    }
    for method in [CrossoverMethod::CubicExact, CrossoverMethod::Taylor] {
        let w = margins::omega_c(&params, &ctrl, &op, ModelKind::Emt, method)?;
        println!("EMT crossover ({method:?}): {w:.6} p.u.");
    }
    println!("EMT omega_180: {:.6} p.u.", margins::omega_180_emt(&params, &ctrl));

    match margins::tune(&params, &op, 25.0, PhaseFloor::Deg80) {
        Err(e) => println!("g_m = 25: {e}"),
        Ok(t) => println!("g_m = 25: unexpectedly tuned {t:?}"),
    }
    Ok(())
}
