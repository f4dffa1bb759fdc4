//! Generic invariant checks for an [`EquivariantSystem`]: action axioms,
//! lift condition, equivariance identities, chart roundtrip and the right
//! inverse of the origin differential.

use nalgebra::DVector;
use rand::RngCore;

use super::{correction_map, EquivariantSystem, LieGroup, StateMatrixPath};
use crate::numeric::numeric_jacobian;

/// Random samples for checking a system.
pub trait SystemSampler: EquivariantSystem {
    fn sample_group(&self, rng: &mut dyn RngCore) -> Self::Group;
    fn sample_state(&self, rng: &mut dyn RngCore) -> Self::State;
    fn sample_input(&self, rng: &mut dyn RngCore) -> DVector<f64>;
    /// Chart coordinates strictly inside the chart domain.
    fn sample_chart_vector(&self, rng: &mut dyn RngCore) -> DVector<f64>;
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: String,
    pub max_error: f64,
    pub tolerance: f64,
    pub samples: usize,
}

impl CheckResult {
    pub fn passed(&self) -> bool {
        self.max_error <= self.tolerance
    }
}

struct Tracker {
    name: &'static str,
    tolerance: f64,
    max: f64,
    samples: usize,
}

impl Tracker {
    fn new(name: &'static str, tolerance: f64) -> Self {
        Tracker { name, tolerance, max: 0.0, samples: 0 }
    }

    fn record(&mut self, err: f64) {
        // NaN must fail the check
        self.max = if err.is_nan() { f64::INFINITY } else { self.max.max(err) };
        self.samples += 1;
    }

    fn finish(self) -> CheckResult {
        CheckResult { name: self.name.to_string(), max_error: self.max, tolerance: self.tolerance, samples: self.samples }
    }
}

fn dist(a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    (a - b).amax()
}

/// Run every applicable check on `samples` random draws.
pub fn run_invariant_checks<S: SystemSampler>(sys: &S, rng: &mut dyn RngCore, samples: usize) -> Vec<CheckResult> {
    let dims = sys.dims();
    let mut phi_axioms = Tracker::new("state action axioms", 1e-12);
    let mut psi_axioms = Tracker::new("input action axioms", 1e-12);
    let mut rho_axioms = Tracker::new("output action axioms", 1e-12);
    let mut lift_cond = Tracker::new("lift condition", 1e-6);
    let mut lift_equi = Tracker::new("lift equivariance", 1e-6);
    let mut sys_equi = Tracker::new("system equivariance", 1e-6);
    let mut out_equi = Tracker::new("output equivariance", 1e-9);
    let mut chart_rt = Tracker::new("chart roundtrip", 1e-9);
    let mut right_inv = Tracker::new("right inverse of origin differential", 1e-8);
    let mut dual_path = Tracker::new("state matrix dual path", 1e-6);

    let has_psi = sys.psi(&S::Group::identity(), &DVector::zeros(dims.input)).is_some();
    let has_rho = sys.rho(&S::Group::identity(), &DVector::zeros(dims.output)).is_some();

    let origin = sys.origin();
    let dphi_origin = numeric_jacobian(
        |a| sys.embed(&sys.phi(&S::Group::exp(a), &origin)),
        &DVector::zeros(dims.group),
        None,
    );
    let corr = correction_map(sys);

    for _ in 0..samples {
        let x = sys.sample_group(rng);
        let z = sys.sample_group(rng);
        let xi = sys.sample_state(rng);
        let u = sys.sample_input(rng);

        let xz = x.compose(&z);
        phi_axioms.record(dist(&sys.embed(&sys.phi(&z, &sys.phi(&x, &xi))), &sys.embed(&sys.phi(&xz, &xi))));
        phi_axioms.record(dist(&sys.embed(&sys.phi(&S::Group::identity(), &xi)), &sys.embed(&xi)));

        // f_u(ξ) = D_E|id φ_ξ(E)[Λ(ξ, u)]
        let lam = sys.lift(&xi, &u);
        let flow = |t: &DVector<f64>| sys.embed(&sys.phi(&S::Group::exp(&(&lam * t[0])), &xi));
        match numeric_jacobian(flow, &DVector::zeros(1), None) {
            Ok(d) => lift_cond.record(dist(&d.column(0).into_owned(), &sys.vector_field(&xi, &u))),
            Err(_) => lift_cond.record(f64::NAN),
        }

        if has_psi {
            let psi = |g: &S::Group, v: &DVector<f64>| sys.psi(g, v).expect("psi present");
            psi_axioms.record(dist(&psi(&z, &psi(&x, &u)), &psi(&xz, &u)));
            psi_axioms.record(dist(&psi(&S::Group::identity(), &u), &u));

            let lhs = sys.lift(&sys.phi(&x, &xi), &psi(&x, &u));
            let rhs = x.inverse().adjoint(&lam);
            lift_equi.record(dist(&lhs, &rhs));

            // Dφ_X f_u(ξ) = f_{ψ(X,u)}(φ(X, ξ)), differentiating along the lifted flow
            let pushed = |t: &DVector<f64>| sys.embed(&sys.phi(&x, &sys.phi(&S::Group::exp(&(&lam * t[0])), &xi)));
            match numeric_jacobian(pushed, &DVector::zeros(1), None) {
                Ok(d) => {
                    let f = sys.vector_field(&sys.phi(&x, &xi), &psi(&x, &u));
                    sys_equi.record(dist(&d.column(0).into_owned(), &f));
                }
                Err(_) => sys_equi.record(f64::NAN),
            }

            let a19 = super::state_matrix_via(sys, &x, &u, StateMatrixPath::OriginVelocity);
            let a34 = super::state_matrix_via(sys, &x, &u, StateMatrixPath::MeasuredInput);
            match (a19, a34) {
                (Ok(a), Ok(b)) => dual_path.record((a - b).amax()),
                _ => dual_path.record(f64::NAN),
            }
        }

        if has_rho {
            let y = sys.output(&xi);
            let rho = |g: &S::Group, v: &DVector<f64>| sys.rho(g, v).expect("rho present");
            out_equi.record(dist(&rho(&x, &y), &sys.output(&sys.phi(&x, &xi))));
            rho_axioms.record(dist(&rho(&z, &rho(&x, &y)), &rho(&xz, &y)));
            rho_axioms.record(dist(&rho(&S::Group::identity(), &y), &y));
        }

        let eps = sys.sample_chart_vector(rng);
        match sys.chart(&sys.chart_inverse(&eps)) {
            Ok(back) => chart_rt.record(dist(&back, &eps)),
            Err(_) => chart_rt.record(f64::NAN),
        }

        // Dφ_ξ° · D† acts as the identity on tangent vectors at the origin.
        if let (Ok(dphi), Ok(corr)) = (&dphi_origin, &corr) {
            let tangent = numeric_jacobian(|e| sys.embed(&sys.chart_inverse(e)), &DVector::zeros(dims.state), None)
                .map(|d| d * &eps);
            match tangent {
                Ok(v) => {
                    // corr = D† · Dϑ⁻¹, so dphi · corr · ε should equal Dϑ⁻¹ ε
                    let back: DVector<f64> = dphi * (corr * &eps);
                    right_inv.record(dist(&back, &v));
                }
                Err(_) => right_inv.record(f64::NAN),
            }
        } else {
            right_inv.record(f64::NAN);
        }
    }

    let mut out = vec![phi_axioms.finish(), lift_cond.finish(), chart_rt.finish(), right_inv.finish()];
    if has_psi {
        out.extend([psi_axioms.finish(), lift_equi.finish(), sys_equi.finish(), dual_path.finish()]);
    }
    if has_rho {
        out.extend([rho_axioms.finish(), out_equi.finish()]);
    }
    out
}
