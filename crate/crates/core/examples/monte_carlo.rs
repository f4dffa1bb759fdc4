// Seeded Monte Carlo batch: median angle error of each filter over the last
// second. Pass the trial count as the first argument (default 100).

use eqfkit::sim::{run_monte_carlo, FilterKind, SimConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let trials = match std::env::args().nth(1) {
        Some(s) => s.parse()?,
        None => 100,
    };
    run(trials)
}

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    run(20)
}

fn run(trials: usize) -> Result<(), Box<dyn std::error::Error>> {
    let cfg = SimConfig { trials, ..SimConfig::default() };
    let result = run_monte_carlo(&cfg)?;
    println!("{} trials, {} failed", cfg.trials, result.failures.len());
    for f in FilterKind::ALL {
        let p = result.aggregate.angle_of(f);
        let last = p.p50.len() - 1;
        println!(
            "{:>8}: mean median error on [4, 5] s = {:.4e} rad, final quartiles [{:.2e}, {:.2e}, {:.2e}]",
            f.label(),
            result.aggregate.mean_median_angle(f, 4.0, 5.0),
            p.p25[last],
            p.p50[last],
            p.p75[last],
        );
    }
    Ok(())
}
