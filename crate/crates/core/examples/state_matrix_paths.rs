// The linearized state matrix computed two ways: through the velocity of the
// origin under ψ, and from the measured input alone. No ψ is needed for the
// second path.

use eqfkit::attitude::AttitudeSystem;
use eqfkit::bearing::BearingSystem;
use eqfkit::eqf::{state_matrix_via, EquivariantSystem, StateMatrixPath, SystemSampler};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn compare<S: SystemSampler>(name: &str, sys: &S, rng: &mut ChaCha8Rng) -> Result<(), Box<dyn std::error::Error>> {
    let x = sys.sample_group(rng);
    let u = sys.sample_input(rng);
    let a1 = state_matrix_via(sys, &x, &u, StateMatrixPath::OriginVelocity)?;
    let a2 = state_matrix_via(sys, &x, &u, StateMatrixPath::MeasuredInput)?;
    println!("{name} ({} × {}): largest difference {:.2e}", a1.nrows(), a1.ncols(), (&a1 - &a2).amax());
    println!("A° via measured input:{a2:.6}");
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let bearing = BearingSystem::default();
    compare("bearing", &bearing, &mut rng)?;
    let attitude = AttitudeSystem::default();
    compare("attitude", &attitude, &mut rng)?;
    println!("attitude state dimension {}", attitude.dims().state);
    Ok(())
}
