use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use gfpc::cli::{self, BodeWhich, CaseConfig, CsvTable, Range};
use gfpc::margins::PhaseFloor;
use gfpc::{Error, ModelKind};

#[derive(Parser)]
#[command(name = "gfpc", version, about = "EMT vs RMS stability checks for droop-controlled grid-forming converters")]
struct Args {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(clap::Args)]
struct Common {
    /// Case file; defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// CSV output path.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Routh verdicts, poles and margins for both models.
    Analyze {
        #[command(flatten)]
        common: Common,
    },
    /// Damping and droop for a target gain margin and phase floor.
    Tune {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        gm: f64,
        #[arg(long, default_value = "80")]
        phase_floor: PhaseFloor,
    },
    /// Nonlinear step-response run.
    Simulate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        model: Option<ModelKind>,
    },
    /// EMT and RMS runs side by side with mismatch metrics.
    Compare {
        #[command(flatten)]
        common: Common,
    },
    /// Closed-loop poles over a droop sweep.
    Rootlocus {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "0:0.01:101")]
        kp_range: Range,
        #[arg(long)]
        model: Option<ModelKind>,
    },
    /// Frequency response of the open loop, closed loop or EMT/RMS mismatch.
    Bode {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "mismatch")]
        which: BodeWhich,
        #[arg(long)]
        omega_range: Option<Range>,
        #[arg(long)]
        model: Option<ModelKind>,
    },
}

fn load(common: &Common) -> Result<CaseConfig, Error> {
    match &common.config {
        Some(p) => cli::parse_config(p),
        None => Ok(CaseConfig::default()),
    }
}

fn emit(report: &cli::Report, table: Option<&CsvTable>, out: Option<&PathBuf>) -> Result<(), Error> {
    if let (Some(t), Some(path)) = (table, out) {
        t.write_atomic(path)?;
        log::info!("wrote {}", path.display());
    }
    print!("{}", report.render());
    Ok(())
}

fn run(args: Args) -> Result<(), Error> {
    match args.cmd {
        Cmd::Analyze { common } => {
            let (report, a) = cli::cmd_analyze(&load(&common)?)?;
            let mut poles = CsvTable::new(&["model", "re", "im"]);
            for m in &a.models {
                for p in &m.poles {
                    poles.push(vec![
                        cli::Cell::Text(m.model.to_string()),
                        cli::Cell::Real(p.re),
                        cli::Cell::Real(p.im),
                    ]);
                }
            }
            emit(&report, Some(&poles), common.out.as_ref())
        }
        Cmd::Tune { common, gm, phase_floor } => {
            emit(&cli::cmd_tune(&load(&common)?, gm, phase_floor)?, None, None)
        }
        Cmd::Simulate { common, model } => {
            let (report, ts) = cli::cmd_simulate(&load(&common)?, model)?;
            emit(&report, Some(&CsvTable::from_timeseries(&ts)), common.out.as_ref())
        }
        Cmd::Compare { common } => {
            let (report, c) = cli::cmd_compare(&load(&common)?)?;
            let mut t = CsvTable::new(&["t_s", "p_emt_pu", "p_rms_pu"]);
            for k in 0..c.emt.len().min(c.rms.len()) {
                t.push(vec![cli::Cell::Real(c.emt.t[k]), cli::Cell::Real(c.emt.p[k]), cli::Cell::Real(c.rms.p[k])]);
            }
            emit(&report, Some(&t), common.out.as_ref())
        }
        Cmd::Rootlocus { common, kp_range, model } => {
            let (report, t) = cli::cmd_rootlocus(&load(&common)?, kp_range, model)?;
            emit(&report, Some(&t), common.out.as_ref())
        }
        Cmd::Bode { common, which, omega_range, model } => {
            let (report, t) = cli::cmd_bode(&load(&common)?, which, omega_range, model)?;
            emit(&report, Some(&t), common.out.as_ref())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("GFPC_LOG", "warn")).init();
    match run(Args::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("gfpc: {e}");
            match e {
                Error::Numerical { .. } | Error::DegenerateLoop | Error::SelfCheck { .. } => ExitCode::from(3),
                Error::Io(_) => ExitCode::from(4),
                _ => ExitCode::from(2),
            }
        }
    }
}
