use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Standard normal draws by Box–Muller on ChaCha8 uniforms.
///
/// Each trial owns stream `trial` of the generator seeded with the run seed,
/// so trials are independent and reproducible regardless of scheduling.
/// Uniforms are consumed in pairs `(u₁, u₂)`; both outputs of each pair are
/// used, cosine branch first.
#[derive(Debug, Clone)]
pub struct GaussianStream {
    rng: ChaCha8Rng,
    spare: Option<f64>,
}

impl GaussianStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        GaussianStream { rng, spare: None }
    }

    pub fn standard(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        // u₁ ∈ (0, 1] keeps the logarithm finite
        let u1 = 1.0 - self.rng.random::<f64>();
        let u2 = self.rng.random::<f64>();
        let r = (-2.0 * u1.ln()).sqrt();
        let a = std::f64::consts::TAU * u2;
        self.spare = Some(r * a.sin());
        r * a.cos()
    }

    /// Three independent draws scaled by `sigma`.
    pub fn vector3(&mut self, sigma: f64) -> Vector3<f64> {
        let x = self.standard();
        let y = self.standard();
        let z = self.standard();
        Vector3::new(x, y, z) * sigma
    }
}
