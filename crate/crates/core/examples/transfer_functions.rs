//! Builds the droop loop for both models and evaluates it on a few
//! frequencies.

use gfpc::plant::{self, ControlParams, ConverterParams, OperatingPoint};
use gfpc::ModelKind;

fn main() -> gfpc::Result<()> {
    let params = ConverterParams::default();
    let op = OperatingPoint::unloaded(&params);
    let ctrl = ControlParams::new(0.0584, 0.0658, 0.0);

    for kind in ModelKind::ALL {
        let l = plant::loop_tf(&params, &ctrl, &op, kind);
        let t = plant::closed_loop_tf(&params, &ctrl, &op, kind);
        println!("{kind} loop:        {l}");
        println!("{kind} closed loop: {t}");
        println!("{kind} poles:       {:?}", t.poles()?);
        for w in [0.1, 1.0, 10.0] {
            let h = l.response_at(w)?;
            println!("  |L(j{w})| = {:.5}, arg = {:.2} deg", h.norm(), h.arg().to_degrees());
        }
    }

    let e = plant::mismatch_tf(&params, &ctrl, &op);
    println!("EMT - RMS closed loop at dc: {:.3e}", e.response_at(1e-6)?.norm());
    Ok(())
}
