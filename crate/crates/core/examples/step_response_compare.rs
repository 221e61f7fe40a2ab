//! Nonlinear EMT and RMS runs of a 0.2 p.u. power step, compared with each
//! other and with the linear step response.

use gfpc::plant::{ControlParams, ConverterParams, OperatingPoint};
use gfpc::simulate::{self, SimConfig};
use gfpc::ModelKind;

fn main() -> gfpc::Result<()> {
    let params = ConverterParams::default();
    let op = OperatingPoint::unloaded(&params);
    let ctrl = ControlParams::new(0.0565, 0.1667, 0.1);
    let cfg = SimConfig::default();

    let emt = simulate::simulate(&params, &ctrl, &op, &cfg.with_model(ModelKind::Emt))?;
    let rms = simulate::simulate(&params, &ctrl, &op, &cfg.with_model(ModelKind::Rms))?;
    let m = simulate::compare_runs(&emt, &rms)?;
    println!(
        "settling: EMT {:?} s, RMS {:?} s; max |dP| = {:.4}, rms |dP| = {:.4}",
        emt.settling_time(),
        rms.settling_time(),
        m.max_abs_dp,
        m.rms_dp
    );

    let lin = simulate::linearized_step_response(&params, &ctrl, &op, ModelKind::Emt, cfg.step_size, cfg.step_time, &emt.t)?;
    for t in [0.1, 0.12, 0.15, 0.2, 0.3, 0.5, 1.0] {
        let k = emt.t.iter().position(|&s| s >= t - 1e-12).unwrap_or(emt.len() - 1);
        println!(
            "t = {:.2} s: P_emt = {:.5}, P_rms = {:.5}, P_linear = {:.5}",
            emt.t[k],
            emt.p[k],
            rms.interpolate(simulate::Channel::P, emt.t[k]),
            lin.p[k]
        );
    }
    Ok(())
}
