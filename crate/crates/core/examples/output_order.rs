// Order of the output linearization error: O(|ε|²) for the standard
// output matrix and O(|ε|³) for the equivariant one.

use eqfkit::bearing::BearingConfig;
use eqfkit::sim::linearization_order;
use nalgebra::Vector2;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = BearingConfig::default();
    println!("{:>10} {:>10} {:>10}", "direction", "C slope", "C* slope");
    for i in 0..8 {
        let a = std::f64::consts::TAU * i as f64 / 8.0;
        let [std, star] = linearization_order(&cfg, &Vector2::new(a.cos(), a.sin()), 0.5, 7)?;
        println!("{a:>10.3} {std:>10.3} {star:>10.3}");
    }
    Ok(())
}
