//! Without virtual impedance the EMT model oscillates at line frequency and
//! grows, while the RMS model settles.

use gfpc::plant::{ControlParams, ConverterParams, OperatingPoint};
use gfpc::simulate::{self, Channel, SimConfig};
use gfpc::ModelKind;

fn main() -> gfpc::Result<()> {
    let params = ConverterParams::default();
    let op = OperatingPoint::unloaded(&params);
    let ctrl = ControlParams::new(0.01, 0.0, 0.0);

    for kind in ModelKind::ALL {
        let ts = simulate::simulate(&params, &ctrl, &op, &SimConfig::default().with_model(kind))?;
        let p_max = ts.p.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        println!("{kind}: diverging = {}, max |P| = {p_max:.3}", ts.is_diverging());
        if ts.is_diverging() {
            if let Some(f) = simulate::dominant_frequency(&ts, Channel::P) {
                println!("  dominant frequency {f:.3} Hz");
            }
            if let Some(g) = simulate::oscillation_growth_rate(&ts, Channel::P) {
                println!("  envelope growth {g:.3} 1/s");
            }
        } else if let Some(s) = ts.settling_time() {
            println!("  settles in {:.1} ms", s * 1e3);
        }
    }
    Ok(())
}
