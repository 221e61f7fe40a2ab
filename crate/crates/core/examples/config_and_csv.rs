//! Reads a case file, runs the analysis and a simulation, and writes the
//! trace to CSV.

use gfpc::cli::{self, CaseConfig, CsvData, CsvTable};

fn main() -> gfpc::Result<()> {
    let text = "\
# high gain margin tuning
l_c = 0.2
k_v = 0.1667
k_p = 0.0565
omega_v = 0.1
model = rms
t_end = 0.5
";
    let cfg = CaseConfig::parse_str(text)?;
    println!("canonical form:\n{}", cfg.to_config_string());

    let (report, _) = cli::cmd_analyze(&cfg)?;
    print!("{}", report.text);

    let (_, ts) = cli::cmd_simulate(&cfg, None)?;
    let dir = std::env::temp_dir().join("gfpc-example");
    std::fs::create_dir_all(&dir)?;
    let path = dir.join("rms.csv");
    CsvTable::from_timeseries(&ts).write_atomic(&path)?;
    let back = CsvData::read(&path)?;
    let p = back.column_f64("p_pu")?;
    println!("wrote {} rows to {}, final P = {:.5}", p.len(), path.display(), p.last().unwrap());

    match CaseConfig::parse_str("k_p = 0.05\nk_p = 0.06\n") {
        Err(e) => println!("duplicate key: {e}"),
        Ok(_) => println!("duplicate key accepted"),
    }
    Ok(())
}
