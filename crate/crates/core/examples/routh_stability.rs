//! Routh verdicts for the EMT and RMS loops, with and without virtual
//! impedance, and the droop bound.

use gfpc::plant::{ControlParams, ConverterParams, OperatingPoint};
use gfpc::stability;

fn main() -> gfpc::Result<()> {
    let params = ConverterParams::default();
    let op = OperatingPoint::unloaded(&params);

    for kp in [0.0, 1e-3, 0.01] {
        let ctrl = ControlParams::new(kp, 0.0, 0.0);
        let emt = stability::condition_no_virtual_impedance(&params, &ctrl)?;
        let rms = stability::rms_verdict(&params, &ctrl, &op);
        println!("k_v = 0, K_p = {kp}: EMT {:?}, RMS {:?}", emt.status, rms.status);
    }

    let kv = 0.0658;
    let bound = stability::kp_stability_bound(&params, kv);
    println!("k_v = {kv}: EMT stable for K_p < {bound:.6}");
    for f in [0.5, 0.99, 1.01, 2.0] {
        let ctrl = ControlParams::new(f * bound, kv, 0.0);
        let c = stability::condition_with_virtual_impedance(&params, &ctrl, &op)?;
        println!(
            "  K_p = {:.4}: {:?} (a1 a2 - a0 a3 = {:+.3e}, binding test: {})",
            ctrl.k_p, c.verdict.status, c.verdict.margin, c.verdict.binding_condition
        );
    }

    // loaded point: the condition carries the operating current
    let loaded = gfpc::plant::solve_operating_point(&params, 0.8, 1.0)?;
    let c = stability::condition_with_virtual_impedance(&params, &ControlParams::new(0.0584, kv, 0.0), &loaded)?;
    println!("P = 0.8: {:?}, condition value {:.4e}", c.verdict.status, c.condition_lhs);
    Ok(())
}
