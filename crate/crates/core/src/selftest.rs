//! Built-in verification suite: invariants of both bundled systems, group
//! axioms, finite-difference agreement of every closed-form matrix,
//! positive definiteness along reference runs and the exactness check on
//! the attitude torsor.

use nalgebra::{DMatrix, DVector, Vector3};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::attitude::{self, AttitudeSystem};
use crate::bearing::{self, BearingConfig, BearingSystem};
use crate::eqf::{
    correction_map, iekf_specialization_check, input_matrix, output_matrix_equivariant, output_matrix_standard,
    run_invariant_checks, state_matrix, state_matrix_via, CheckResult, EquivariantSystem, IekfCheckConfig, IekfReport,
    LieGroup, StateMatrixPath, SystemSampler,
};
use crate::lie::Rotation;
use crate::numeric::{numeric_jacobian, pseudo_inverse};
use crate::sim::{generate_trial, noiseless_start, noiseless_trial, run_trial, SimConfig};

const SAMPLES: usize = 100;

struct Max {
    name: String,
    tol: f64,
    max: f64,
    n: usize,
}

impl Max {
    fn new(name: impl Into<String>, tol: f64) -> Self {
        Max { name: name.into(), tol, max: 0.0, n: 0 }
    }

    fn add(&mut self, e: f64) {
        self.max = if e.is_nan() { f64::INFINITY } else { self.max.max(e) };
        self.n += 1;
    }

    fn done(self) -> CheckResult {
        CheckResult { name: self.name, max_error: self.max, tolerance: self.tol, samples: self.n }
    }
}

fn amax(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    if a.shape() != b.shape() {
        return f64::INFINITY;
    }
    (a - b).amax()
}

fn fixed<R: nalgebra::Dim, C: nalgebra::Dim, S: nalgebra::RawStorage<f64, R, C>>(
    m: &nalgebra::Matrix<f64, R, C, S>,
) -> DMatrix<f64> {
    DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

fn prefixed(prefix: &str, mut v: Vec<CheckResult>) -> Vec<CheckResult> {
    for r in &mut v {
        r.name = format!("{prefix}: {}", r.name);
    }
    v
}

fn group_axioms(rng: &mut ChaCha8Rng) -> CheckResult {
    let sys = BearingSystem::default();
    let mut m = Max::new("SO(3) group axioms", 1e-12);
    for _ in 0..SAMPLES {
        let a = sys.sample_group(rng);
        let b = sys.sample_group(rng);
        let c = sys.sample_group(rng);
        let l = a.compose(&b).compose(&c);
        let r = a.compose(&b.compose(&c));
        m.add((l.matrix() - r.matrix()).amax());
        m.add((a.compose(&Rotation::identity()).matrix() - a.matrix()).amax());
        m.add((a.compose(&a.inverse()).matrix() - nalgebra::Matrix3::identity()).amax());
    }
    m.done()
}

/// Closed-form A°, B, C, C* of the bearing system against the generic
/// finite-difference construction.
fn bearing_closed_forms(rng: &mut ChaCha8Rng) -> Vec<CheckResult> {
    let cfg = BearingConfig::new(1.3).expect("positive field strength");
    let sys = BearingSystem::new(cfg);
    let mut a_zero = Max::new("bearing A° is zero", 1e-8);
    let mut dual = Max::new("bearing dual-path A°", 1e-6);
    let mut b_fd = Max::new("bearing B closed form vs finite differences", 1e-5);
    let mut c_fd = Max::new("bearing C closed form vs finite differences", 1e-5);
    let mut cs_fd = Max::new("bearing C* closed form vs finite differences", 1e-5);
    let mut cs_eq = Max::new("C* equals C when y = ŷ", 1e-9);
    let mut corr = Max::new("bearing correction map vs pseudo-inverse", 1e-6);

    for _ in 0..SAMPLES {
        let x = sys.sample_group(rng);
        let u = sys.sample_input(rng);
        let yhat = bearing::output(&bearing::phi(&x, &crate::lie::UnitVector::e1()), &cfg);
        let y = bearing::output(&sys.sample_state(rng), &cfg);
        let closed = bearing::closed_form_matrices(&x, &y, &yhat, &cfg);

        let results = (
            state_matrix_via(&sys, &x, &u, StateMatrixPath::OriginVelocity),
            state_matrix_via(&sys, &x, &u, StateMatrixPath::MeasuredInput),
            input_matrix(&sys, &x, &u),
            output_matrix_standard(&sys, &x),
            output_matrix_equivariant(&sys, &x, &DVector::from_column_slice(y.as_slice()), &DVector::from_column_slice(yhat.as_slice())),
            output_matrix_equivariant(
                &sys,
                &x,
                &DVector::from_column_slice(yhat.as_slice()),
                &DVector::from_column_slice(yhat.as_slice()),
            ),
        );
        match results {
            (Ok(a1), Ok(a2), Ok(b), Ok(c), Ok(cs), Ok(cs_same)) => {
                a_zero.add(a1.amax().max(a2.amax()));
                dual.add(amax(&a1, &a2));
                b_fd.add(amax(&b, &fixed(&closed.b)));
                c_fd.add(amax(&c, &fixed(&closed.c)));
                cs_fd.add(amax(&cs, &fixed(&closed.c_star)));
                cs_eq.add(amax(&cs_same, &c));
            }
            _ => {
                for m in [&mut a_zero, &mut dual, &mut b_fd, &mut c_fd, &mut cs_fd, &mut cs_eq] {
                    m.add(f64::NAN);
                }
            }
        }
    }

    let numeric = numeric_jacobian(
        |a| sys.embed(&sys.phi(&Rotation::exp(&Vector3::new(a[0], a[1], a[2])), &sys.origin())),
        &DVector::zeros(3),
        None,
    )
    .and_then(|d| {
        numeric_jacobian(|e| sys.embed(&sys.chart_inverse(e)), &DVector::zeros(2), None).map(|c| pseudo_inverse(&d) * c)
    });
    match (numeric, correction_map(&sys)) {
        (Ok(n), Ok(c)) => corr.add(amax(&n, &c)),
        _ => corr.add(f64::NAN),
    }

    vec![a_zero.done(), dual.done(), b_fd.done(), c_fd.done(), cs_fd.done(), cs_eq.done(), corr.done()]
}

fn attitude_closed_forms(rng: &mut ChaCha8Rng) -> Vec<CheckResult> {
    let sys = AttitudeSystem::default();
    let mut a = Max::new("attitude A° equals W^×", 1e-6);
    for _ in 0..SAMPLES {
        let x = sys.sample_group(rng);
        let u = sys.sample_input(rng);
        let w = Vector3::new(u[3], u[4], u[5]);
        match state_matrix(&sys, &x, &u) {
            Ok(m) => a.add(amax(&m, &fixed(&crate::lie::hat3(&w)))),
            Err(_) => a.add(f64::NAN),
        }
    }
    vec![a.done()]
}

/// Runs that must keep Σ and P positive definite at every step.
fn positivity_along_runs() -> CheckResult {
    let cfg = SimConfig::default();
    let mut m = Max::new("Σ and P positive definite along reference runs", 0.0);
    let noiseless = noiseless_trial(&cfg.without_noise(), noiseless_start(0.3));
    m.add(if run_trial(&cfg, &noiseless, 0).is_ok() { 0.0 } else { 1.0 });
    for i in 0..20 {
        m.add(if run_trial(&cfg, &generate_trial(&cfg, i), i).is_ok() { 0.0 } else { 1.0 });
    }
    m.done()
}

fn iekf_exactness() -> CheckResult {
    let sys = AttitudeSystem::default();
    let u = attitude::input(&Vector3::new(0.3, -0.2, 0.5), &Vector3::new(0.4, 0.1, -0.3));
    let mut m = Max::new("attitude torsor step-halving ratio within 2 ± 0.3", 0.3);
    match iekf_specialization_check(&sys, &IekfCheckConfig::new(u)) {
        Ok(IekfReport::Checked { fixed_point_max, trials }) => {
            m.add(if fixed_point_max <= 1e-12 { 0.0 } else { f64::INFINITY });
            for t in &trials {
                for r in &t.ratios {
                    m.add((r - 2.0).abs());
                }
            }
        }
        _ => m.add(f64::NAN),
    }
    m.done()
}

/// Run every check. The vector is in a fixed order; all must pass.
pub fn run_selftest(seed: u64) -> Vec<CheckResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = vec![group_axioms(&mut rng)];
    out.extend(prefixed("bearing", run_invariant_checks(&BearingSystem::default(), &mut rng, SAMPLES)));
    out.extend(prefixed("attitude", run_invariant_checks(&AttitudeSystem::default(), &mut rng, SAMPLES)));
    out.extend(bearing_closed_forms(&mut rng));
    out.extend(attitude_closed_forms(&mut rng));
    out.push(positivity_along_runs());
    out.push(iekf_exactness());
    out
}
