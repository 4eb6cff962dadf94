//! Loads a TOML run configuration and runs it through the same command
//! functions as the `oldroyd` binary, without going through clap.
//!
//! cargo run --example run_config -- configs/relaxation.toml [simulate|energy-check|stability|ladyzhenskaya|converge]

use oldroyd_galerkin::cli::{
    cmd_converge, cmd_energy_check, cmd_ladyzhenskaya, cmd_simulate, cmd_stability, parse_config,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let path = args.next().unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/configs/relaxation.toml").into());
    let command = args.next().unwrap_or_else(|| "simulate".into());
    let mut cfg = parse_config(&std::fs::read_to_string(&path)?)?;
    cfg.output.dir = std::env::temp_dir().join("oldroyd-example").join(&command);
    let summary = match command.as_str() {
        "simulate" => cmd_simulate(&cfg)?,
        "energy-check" => cmd_energy_check(&cfg)?,
        "stability" => cmd_stability(&cfg)?,
        "ladyzhenskaya" => cmd_ladyzhenskaya(&cfg)?,
        "converge" => cmd_converge(&cfg)?,
        other => return Err(format!("unknown command {other}").into()),
    };
    println!("{} finished in {:.2} s, output in {}", summary.command, summary.wall_time_s, cfg.output.dir.display());
    println!("final energies {:?}", summary.final_energies);
    for (name, status) in &summary.checks {
        println!("  {name}: {status:?}");
    }
    Ok(())
}
