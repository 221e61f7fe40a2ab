//! Magnitude of the EMT minus RMS closed loop for two tunings, with the
//! frequency where the models disagree most.

use gfpc::margins;
use gfpc::plant::{ControlParams, ConverterParams, OperatingPoint};
use gfpc::ratfun::logspace;

fn main() -> gfpc::Result<()> {
    let params = ConverterParams::default();
    let op = OperatingPoint::unloaded(&params);
    let grid = logspace(1e-2, 1e2, 41);

    for (name, ctrl) in [
        ("low g_m", ControlParams::new(0.0584, 0.0658, 0.0)),
        ("high g_m", ControlParams::new(0.0565, 0.1667, 0.0)),
    ] {
        let profile = margins::mismatch_profile(&params, &ctrl, &op, &grid)?;
        println!("{name}");
        for (w, m) in profile.iter().step_by(4) {
            println!("  omega = {w:9.4}  |e| = {:8.3} dB", 20.0 * m.log10());
        }
        let (w, m) = margins::mismatch_peak(&profile).expect("nonempty grid");
        println!("  peak {m:.4} at omega = {w:.4}");
    }
    Ok(())
}
