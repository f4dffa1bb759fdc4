// Write the per-trial, aggregate and linearization-map CSVs consumed by the
// plotting scripts. The output directory is the first argument
// (default `results`).

use std::path::{Path, PathBuf};

use eqfkit::bearing::BearingConfig;
use eqfkit::sim::{
    linearization_error_map, run_monte_carlo, write_aggregate_csv, write_linmap_csv, write_trial_csv, SimConfig,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run(&PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "results".into())))
}

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let dir = tempfile::tempdir()?;
    run(dir.path())?;
    for name in ["aggregate.csv", "linmap.csv", "trial_0000.csv", "trial_0009.csv"] {
        if !dir.path().join(name).exists() {
            return Err(format!("{name} was not written").into());
        }
    }
    Ok(())
}

fn run(out: &Path) -> Result<(), Box<dyn std::error::Error>> {
    std::fs::create_dir_all(out)?;
    let cfg = SimConfig { trials: 10, seed: 42, ..SimConfig::default() };
    let mc = run_monte_carlo(&cfg)?;
    for (i, rec) in &mc.trials {
        write_trial_csv(&out.join(format!("trial_{i:04}.csv")), rec)?;
    }
    write_aggregate_csv(&out.join("aggregate.csv"), &mc.aggregate)?;
    write_linmap_csv(&out.join("linmap.csv"), &linearization_error_map(&BearingConfig::default(), 50)?)?;
    println!("wrote {} trial files, aggregate.csv and linmap.csv to {}", mc.trials.len(), out.display());
    Ok(())
}
