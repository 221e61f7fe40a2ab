//! Closed-loop poles over a droop sweep, showing the EMT branch crossing
//! into the right half plane while the RMS pole only moves left.

use gfpc::plant::{ControlParams, ConverterParams, OperatingPoint};
use gfpc::stability;
use gfpc::ModelKind;

fn main() -> gfpc::Result<()> {
    let params = ConverterParams::default();
    let op = OperatingPoint::unloaded(&params);
    let ctrl = ControlParams::new(0.0, 0.0658, 0.0);
    let gains: Vec<f64> = (0..=8).map(|k| 0.04 * k as f64).collect();

    for kind in ModelKind::ALL {
        let rl = stability::root_locus(&params, &ctrl, &op, kind, &gains)?;
        println!("{kind}");
        for (kp, poles) in rl.gains.iter().zip(&rl.branches) {
            let s: Vec<String> = poles.iter().map(|z| format!("{:+.4}{:+.4}j", z.re, z.im)).collect();
            println!("  K_p = {kp:.2}: {}", s.join("  "));
        }
    }
    println!("EMT bound: {:.4}", stability::kp_stability_bound(&params, ctrl.k_v));
    Ok(())
}
