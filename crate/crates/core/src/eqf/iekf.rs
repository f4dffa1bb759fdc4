//! Exactness check for group-affine systems on a group torsor.
//!
//! For such systems the pre-observer (Δ = 0) log-coordinate error obeys
//! `ε̇ = A°ε` exactly. The check integrates the truth and the pre-observer
//! with explicit Euler steps, integrates the linear ODE alongside with
//! per-step matrix exponentials, and measures the deviation at the final
//! time for a sequence of step sizes. If the linearization is exact the
//! deviation is pure integration error and halves with the step size.

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{state_matrix, EqfError, EquivariantSystem, LieGroup};

#[derive(Debug, Clone)]
pub struct IekfCheckConfig {
    pub trials: usize,
    pub t_final: f64,
    /// Step sizes, each half the previous one.
    pub dts: Vec<f64>,
    /// Constant input applied during every trial.
    pub input: DVector<f64>,
    /// Largest norm of the random initial error in algebra coordinates.
    pub max_initial_error: f64,
    pub seed: u64,
}

impl IekfCheckConfig {
    pub fn new(input: DVector<f64>) -> Self {
        IekfCheckConfig {
            trials: 5,
            t_final: 1.0,
            dts: vec![1e-2, 5e-3, 2.5e-3],
            input,
            max_initial_error: 0.5,
            seed: 7,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IekfTrial {
    pub initial_error: DVector<f64>,
    /// Deviation `|ε(t_final) − ε_lin(t_final)|` per step size.
    pub deviations: Vec<f64>,
    /// `deviations[i] / deviations[i + 1]`.
    pub ratios: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum IekfReport {
    NotApplicable { reason: String },
    Checked {
        /// Largest `|ε(t)|` over a run started at `E(0) = I`.
        fixed_point_max: f64,
        trials: Vec<IekfTrial>,
    },
}

impl IekfReport {
    /// Every step-halving ratio lies in `[lo, hi]` and the fixed point is kept.
    pub fn ratios_within(&self, lo: f64, hi: f64) -> bool {
        match self {
            IekfReport::NotApplicable { .. } => false,
            IekfReport::Checked { fixed_point_max, trials } => {
                *fixed_point_max <= 1e-12
                    && trials.iter().all(|t| t.ratios.iter().all(|r| (lo..=hi).contains(r)))
            }
        }
    }
}

fn run_once<S: EquivariantSystem>(
    sys: &S,
    initial: &DVector<f64>,
    u: &DVector<f64>,
    dt: f64,
    t_final: f64,
) -> Result<(f64, f64), EqfError> {
    let origin = sys.origin();
    let zero = DVector::zeros(sys.dims().group);
    let mut truth = S::Group::exp(initial);
    let mut xhat = S::Group::identity();
    let error_coords = |truth: &S::Group, xhat: &S::Group| {
        sys.chart(&sys.phi(&xhat.inverse(), &sys.phi(truth, &origin)))
    };
    let mut eps_lin = error_coords(&truth, &xhat)?;
    let mut max_norm = eps_lin.norm();

    let steps = (t_final / dt).round() as usize;
    for _ in 0..steps {
        let a = state_matrix(sys, &xhat, u)?;
        eps_lin = (a * dt).exp() * eps_lin;

        let lam_true = sys.lift(&sys.phi(&truth, &origin), u);
        let lam_hat = sys.lift(&sys.phi(&xhat, &origin), u);
        truth = truth.integrate(&lam_true, &zero, dt)?;
        xhat = xhat.integrate(&lam_hat, &zero, dt)?;
        max_norm = max_norm.max(error_coords(&truth, &xhat)?.norm());
    }
    let eps = error_coords(&truth, &xhat)?;
    Ok(((eps - eps_lin).norm(), max_norm))
}

pub fn iekf_specialization_check<S: EquivariantSystem>(
    sys: &S,
    cfg: &IekfCheckConfig,
) -> Result<IekfReport, EqfError> {
    if !sys.is_group_affine_torsor() {
        return Ok(IekfReport::NotApplicable {
            reason: "system is not group affine on a group torsor; no exactness claim".to_string(),
        });
    }
    let g = sys.dims().group;
    let coarsest = cfg.dts.first().copied().unwrap_or(1e-2);
    let (_, fixed_point_max) = run_once(sys, &DVector::zeros(g), &cfg.input, coarsest, cfg.t_final)?;

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut trials = Vec::with_capacity(cfg.trials);
    for _ in 0..cfg.trials {
        let dir = DVector::from_fn(g, |_, _| rng.random_range(-1.0..1.0));
        let mag = rng.random_range(0.2..1.0) * cfg.max_initial_error;
        let initial = dir.normalize() * mag;
        let deviations = cfg
            .dts
            .iter()
            .map(|&dt| run_once(sys, &initial, &cfg.input, dt, cfg.t_final).map(|(d, _)| d))
            .collect::<Result<Vec<_>, _>>()?;
        let ratios = deviations.windows(2).map(|w| w[0] / w[1]).collect();
        trials.push(IekfTrial { initial_error: initial, deviations, ratios });
    }
    Ok(IekfReport::Checked { fixed_point_max, trials })
}
