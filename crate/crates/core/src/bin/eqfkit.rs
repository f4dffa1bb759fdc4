use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use eqfkit::bearing::BearingConfig;
use eqfkit::selftest::run_selftest;
use eqfkit::sim::{
    linearization_error_map, noiseless_start, noiseless_trial, run_monte_carlo, run_trial, write_aggregate_csv,
    write_linmap_csv, write_trial_csv, ConfigFile, FilterKind, SimConfig, SimError, NOISELESS_OFFSET,
};

#[derive(Parser)]
#[command(name = "eqfkit", version, about = "Equivariant filter experiments on the bearing problem")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Single noise-free run from a 0.3 rad initial offset.
    Noiseless(Common),
    /// Seeded Monte Carlo batch with per-trial and aggregate CSVs.
    Montecarlo(Common),
    /// Output linearization error over a spherical grid.
    Linmap {
        #[command(flatten)]
        common: Common,
        /// Grid resolution per angle.
        #[arg(long, default_value_t = 50, value_parser = clap::value_parser!(u32).range(2..))]
        grid: u32,
    },
    /// Run the built-in invariant and agreement checks.
    Selftest(Common),
}

#[derive(Args, Clone, Default)]
struct Common {
    /// Integration step in seconds.
    #[arg(long)]
    dt: Option<f64>,
    /// Simulated time in seconds.
    #[arg(long)]
    duration: Option<f64>,
    /// Number of Monte Carlo trials.
    #[arg(long)]
    trials: Option<usize>,
    /// Master RNG seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Standard deviation of the initial bearing error (rad).
    #[arg(long)]
    sigma0: Option<f64>,
    /// Gyroscope noise standard deviation.
    #[arg(long)]
    sigma_u: Option<f64>,
    /// Magnetometer noise standard deviation.
    #[arg(long)]
    sigma_y: Option<f64>,
    /// Magnetic field strength.
    #[arg(long)]
    c_m: Option<f64>,
    /// EKF unit-norm pseudo-measurement variance.
    #[arg(long)]
    ekf_r_virtual: Option<f64>,
    /// EKF magnetometer variance (default sigma-y squared).
    #[arg(long)]
    ekf_r_meas: Option<f64>,
    /// EqF state gain offset M_ε (scalar times identity).
    #[arg(long)]
    m_eps: Option<f64>,
    /// EqF output gain offset N_ε (scalar times identity).
    #[arg(long)]
    n_eps: Option<f64>,
    /// EqF initial Riccati term Σ₀ (scalar times identity).
    #[arg(long)]
    sigma0_gain: Option<f64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// TOML file with any of the flags above; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
}

impl Common {
    fn resolve(&self) -> Result<(SimConfig, PathBuf), SimError> {
        let mut cfg = SimConfig::default();
        let mut out = None;
        if let Some(path) = &self.config {
            let file = ConfigFile::load(path)?;
            file.apply(&mut cfg);
            out = file.out.map(PathBuf::from);
        }
        let cli = ConfigFile {
            dt: self.dt,
            duration: self.duration,
            trials: self.trials,
            seed: self.seed,
            sigma0: self.sigma0,
            sigma_u: self.sigma_u,
            sigma_y: self.sigma_y,
            c_m: self.c_m,
            ekf_r_virtual: self.ekf_r_virtual,
            ekf_r_meas: self.ekf_r_meas,
            m_eps: self.m_eps,
            n_eps: self.n_eps,
            sigma0_gain: self.sigma0_gain,
            out: None,
        };
        cli.apply(&mut cfg);
        cfg.validate()?;
        let out = self.out.clone().or(out).unwrap_or_else(|| PathBuf::from("results"));
        Ok((cfg, out))
    }
}

fn prepare(dir: &Path) -> Result<(), SimError> {
    std::fs::create_dir_all(dir)?;
    Ok(())
}

fn noiseless(common: &Common) -> Result<(), SimError> {
    let (cfg, out) = common.resolve()?;
    prepare(&out)?;
    let data = noiseless_trial(&cfg.without_noise(), noiseless_start(NOISELESS_OFFSET));
    let rec = run_trial(&cfg, &data, 0)?;
    let path = out.join("noiseless.csv");
    write_trial_csv(&path, &rec)?;
    for f in FilterKind::ALL {
        println!("{f:>8}: final angle error {:.3e} rad", rec.angle_of(f).last().copied().unwrap_or(f64::NAN));
    }
    println!("wrote {}", path.display());
    Ok(())
}

fn montecarlo(common: &Common) -> Result<(), SimError> {
    let (cfg, out) = common.resolve()?;
    prepare(&out)?;
    let result = run_monte_carlo(&cfg)?;
    for (i, rec) in &result.trials {
        write_trial_csv(&out.join(format!("trial_{i:04}.csv")), rec)?;
    }
    write_aggregate_csv(&out.join("aggregate.csv"), &result.aggregate)?;
    let t_end = cfg.steps() as f64 * cfg.dt;
    for f in FilterKind::ALL {
        println!(
            "{f:>8}: median angle error over the last second {:.3e} rad",
            result.aggregate.mean_median_angle(f, (t_end - 1.0).max(0.0), t_end)
        );
    }
    for fail in &result.failures {
        eprintln!("trial {} failed: {}", fail.trial, fail.message);
    }
    println!("{} of {} trials written to {}", result.trials.len(), cfg.trials, out.display());
    Ok(())
}

fn linmap(common: &Common, grid: u32) -> Result<(), SimError> {
    let (cfg, out) = common.resolve()?;
    prepare(&out)?;
    let rows = linearization_error_map(&BearingConfig::new(cfg.c_m)?, grid as usize)?;
    let path = out.join("linmap.csv");
    write_linmap_csv(&path, &rows)?;
    println!("wrote {} grid points to {}", rows.len(), path.display());
    Ok(())
}

fn selftest(common: &Common) -> Result<bool, SimError> {
    let seed = common.seed.unwrap_or(0);
    let mut ok = true;
    for r in run_selftest(seed) {
        let status = if r.passed() { "ok  " } else { "FAIL" };
        ok &= r.passed();
        println!("{status} {:<60} max {:.2e} (tol {:.1e}, n = {})", r.name, r.max_error, r.tolerance, r.samples);
    }
    Ok(ok)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match &cli.command {
        Command::Noiseless(c) => noiseless(c).map(|_| true),
        Command::Montecarlo(c) => montecarlo(c).map(|_| true),
        Command::Linmap { common, grid } => linmap(common, *grid).map(|_| true),
        Command::Selftest(c) => selftest(c),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("selftest: one or more checks failed");
            ExitCode::from(2)
        }
        Err(e @ SimError::InvalidConfig(_)) | Err(e @ SimError::ConfigParse(_)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
