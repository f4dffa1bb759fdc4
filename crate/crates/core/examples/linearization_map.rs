// Output linearization error of the EKF, EqF and EqF* models over the
// sphere, summarised by polar band.

use eqfkit::bearing::BearingConfig;
use eqfkit::sim::linearization_error_map;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let n = 50;
    let rows = linearization_error_map(&BearingConfig::default(), n)?;
    println!("{:>8} {:>10} {:>10} {:>10}", "theta", "ekf max", "eqf max", "eqf* max");
    for band in rows.chunks(n).step_by(7) {
        let max = |f: fn(&eqfkit::sim::LinmapRow) -> f64| band.iter().map(f).fold(0.0, f64::max);
        println!(
            "{:>8.3} {:>10.4} {:>10.4} {:>10.4}",
            band[0].theta,
            max(|r| r.ekf_err),
            max(|r| r.eqf_err),
            max(|r| r.eqfstar_err)
        );
    }
    let better = rows.iter().filter(|r| r.eqfstar_err <= r.eqf_err).count();
    println!("EqF* at most EqF at {better} of {} grid points", rows.len());
    Ok(())
}
