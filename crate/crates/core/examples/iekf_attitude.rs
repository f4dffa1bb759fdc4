// Exactness of the linearized error dynamics on a group-affine system: the
// SO(3) attitude torsor with a body rate and a spatial rate.

use eqfkit::attitude::{self, AttitudeSystem};
use eqfkit::eqf::{iekf_specialization_check, IekfCheckConfig, IekfReport};
use nalgebra::Vector3;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let sys = AttitudeSystem::default();
    let u = attitude::input(&Vector3::new(0.3, -0.2, 0.5), &Vector3::new(0.4, 0.1, -0.3));
    let cfg = IekfCheckConfig::new(u);
    let report = iekf_specialization_check(&sys, &cfg)?;
    match &report {
        IekfReport::NotApplicable { reason } => println!("not applicable: {reason}"),
        IekfReport::Checked { fixed_point_max, trials } => {
            println!("error started at the identity stays within {fixed_point_max:.1e}");
            println!("dt = {:?}", cfg.dts);
            for t in trials {
                let dev: Vec<String> = t.deviations.iter().map(|d| format!("{d:.3e}")).collect();
                let ratios: Vec<String> = t.ratios.iter().map(|r| format!("{r:.3}")).collect();
                println!("|ε₀| = {:.3}: deviations [{}], ratios [{}]", t.initial_error.norm(), dev.join(", "), ratios.join(", "));
            }
            println!("all ratios within 2 ± 0.3: {}", report.ratios_within(1.7, 2.3));
        }
    }
    Ok(())
}
