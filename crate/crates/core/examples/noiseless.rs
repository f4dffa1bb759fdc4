// Noise-free run from a 0.3 rad initial offset: all three filters converge,
// the EqFs exponentially.

use eqfkit::sim::{
    exponential_decay_rate, halving_time, noiseless_start, noiseless_trial, run_trial, FilterKind, SimConfig,
    NOISELESS_OFFSET,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = SimConfig::default();
    let data = noiseless_trial(&cfg.without_noise(), noiseless_start(NOISELESS_OFFSET));
    let rec = run_trial(&cfg, &data, 0)?;

    println!("{:>6} {:>12} {:>12} {:>12}", "t", "ekf", "eqf", "eqfstar");
    for k in (0..rec.t.len()).step_by(50) {
        let [a, b, c] = FilterKind::ALL.map(|f| rec.angle_of(f)[k]);
        println!("{:>6.2} {a:>12.3e} {b:>12.3e} {c:>12.3e}", rec.t[k]);
    }
    for f in FilterKind::ALL {
        let e = rec.angle_of(f);
        println!(
            "{:>8}: decay rate on [0.5, 3] s = {:.3}/s, halving time = {:.3} s",
            f.label(),
            exponential_decay_rate(&rec.t, e, 0.5, 3.0).unwrap_or(f64::NAN),
            halving_time(&rec.t, e).unwrap_or(f64::NAN),
        );
    }
    Ok(())
}
