//! Generic framework operations against the bearing closed forms, plus the
//! behaviour of systems that omit the optional maps.

use approx::assert_relative_eq;
use nalgebra::{DMatrix, DVector, Matrix3, Vector2, Vector3};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use eqfkit::bearing::{self, BearingConfig, BearingSystem};
use eqfkit::eqf::{
    correction, correction_map, eqf_step, input_matrix, lyapunov_value, output_matrix_equivariant,
    output_matrix_standard, state_matrix_via, Dims, EqfError, EqfState, EquivariantSystem, GainSchedule, OutputMode,
    StateMatrixPath, SystemSampler,
};
use eqfkit::lie::{hat3, Rotation, SymPosDef, UnitVector};
use eqfkit::sim::linearization_order;

fn dv(v: &[f64]) -> DVector<f64> {
    DVector::from_column_slice(v)
}

fn to_dyn<const R: usize, const C: usize>(m: &nalgebra::SMatrix<f64, R, C>) -> DMatrix<f64> {
    DMatrix::from_column_slice(R, C, m.as_slice())
}

/// The bearing system with only the mandatory maps: no ψ, no ρ, no wedge and
/// no closed-form differentials.
struct Bare(BearingSystem);

impl EquivariantSystem for Bare {
    type Group = Rotation;
    type State = UnitVector;

    fn dims(&self) -> Dims {
        self.0.dims()
    }
    fn phi(&self, x: &Rotation, xi: &UnitVector) -> UnitVector {
        self.0.phi(x, xi)
    }
    fn lift(&self, xi: &UnitVector, u: &DVector<f64>) -> DVector<f64> {
        self.0.lift(xi, u)
    }
    fn output(&self, xi: &UnitVector) -> DVector<f64> {
        self.0.output(xi)
    }
    fn origin(&self) -> UnitVector {
        self.0.origin()
    }
    fn chart(&self, xi: &UnitVector) -> Result<DVector<f64>, EqfError> {
        self.0.chart(xi)
    }
    fn chart_inverse(&self, eps: &DVector<f64>) -> UnitVector {
        self.0.chart_inverse(eps)
    }
    fn embed(&self, xi: &UnitVector) -> DVector<f64> {
        self.0.embed(xi)
    }
    fn vector_field(&self, xi: &UnitVector, u: &DVector<f64>) -> DVector<f64> {
        self.0.vector_field(xi, u)
    }
}

fn gains(sigma: f64) -> GainSchedule {
    GainSchedule {
        sigma0: SymPosDef::scaled_identity(2, sigma),
        m_eps: DMatrix::identity(2, 2) * 1e-3,
        n_eps: DMatrix::zeros(3, 3),
        m_input: DMatrix::identity(3, 3) * 1e-4,
        n_meas: DMatrix::identity(3, 3) * 1e-2,
    }
}

#[test]
fn matrices_at_identity() {
    let sys = BearingSystem::default();
    let x = Rotation::identity();
    let u = dv(&[0.1, 0.2, 0.0]);
    let b = input_matrix(&sys, &x, &u).unwrap();
    assert_relative_eq!(b, DMatrix::from_row_slice(2, 3, &[0.0, 1.0, 0.0, 0.0, 0.0, 1.0]), epsilon = 1e-6);
    let c = output_matrix_standard(&sys, &x).unwrap();
    assert_relative_eq!(c, DMatrix::from_row_slice(3, 2, &[0.0, 0.0, 0.0, -1.0, 1.0, 0.0]), epsilon = 1e-6);
}

#[test]
fn generic_matrices_match_closed_forms() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for c_m in [0.5, 1.0, 2.5] {
        let cfg = BearingConfig::new(c_m).unwrap();
        let sys = BearingSystem::new(cfg);
        let bare = Bare(sys);
        for _ in 0..20 {
            let x = sys.sample_group(&mut rng);
            let u = sys.sample_input(&mut rng);
            let xi_hat = bearing::phi(&x, &UnitVector::e1());
            let yhat = bearing::output(&xi_hat, &cfg);
            let y = bearing::output(&sys.sample_state(&mut rng), &cfg) + Vector3::new(0.01, -0.02, 0.005);
            let closed = bearing::closed_form_matrices(&x, &y, &yhat, &cfg);

            let a = state_matrix_via(&bare, &x, &u, StateMatrixPath::MeasuredInput).unwrap();
            assert!(a.amax() < 1e-8);
            assert_relative_eq!(input_matrix(&bare, &x, &u).unwrap(), to_dyn(&closed.b), epsilon = 1e-5);
            assert_relative_eq!(output_matrix_standard(&bare, &x).unwrap(), to_dyn(&closed.c), epsilon = 1e-5);
            let cs = output_matrix_equivariant(&sys, &x, &dv(y.as_slice()), &dv(yhat.as_slice())).unwrap();
            assert_relative_eq!(cs, to_dyn(&closed.c_star), epsilon = 1e-5);
        }
    }
}

#[test]
fn equivariant_matrix_reduces_to_standard_at_zero_residual() {
    let sys = BearingSystem::default();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..20 {
        let x = sys.sample_group(&mut rng);
        let yhat = sys.output(&sys.phi(&x, &sys.origin()));
        let cs = output_matrix_equivariant(&sys, &x, &yhat, &yhat).unwrap();
        let c = output_matrix_standard(&sys, &x).unwrap();
        assert!((cs - c).amax() <= 1e-9);
    }
}

#[test]
fn optional_maps_are_reported_when_missing() {
    let bare = Bare(BearingSystem::default());
    let x = Rotation::identity();
    let u = dv(&[0.1, 0.0, 0.2]);
    assert_eq!(state_matrix_via(&bare, &x, &u, StateMatrixPath::OriginVelocity), Err(EqfError::MissingPsi));
    let y = dv(&[1.0, 0.0, 0.0]);
    assert_eq!(output_matrix_equivariant(&bare, &x, &y, &y), Err(EqfError::MissingRho));
}

#[test]
fn correction_map_is_the_wedge() {
    let sys = BearingSystem::default();
    let expected = DMatrix::from_row_slice(3, 2, &[0.0, 0.0, 1.0, 0.0, 0.0, 1.0]);
    assert_relative_eq!(correction_map(&sys).unwrap(), expected, epsilon = 1e-12);
    assert_relative_eq!(correction_map(&Bare(sys)).unwrap(), expected, epsilon = 1e-6);
}

#[test]
fn correction_examples() {
    let sys = BearingSystem::default();
    let state = EqfState::<Rotation>::new(SymPosDef::identity(2));
    let c = output_matrix_standard(&sys, &Rotation::identity()).unwrap();
    let n = SymPosDef::identity(3);

    let zero = correction(&sys, &state, &c, &n, &DVector::zeros(3)).unwrap();
    assert_eq!(zero, DVector::zeros(3));

    // A residual along e₂ pulls the estimate towards e₂: rotation about −e₃.
    let delta = correction(&sys, &state, &c, &n, &dv(&[0.0, 1.0, 0.0])).unwrap();
    assert_relative_eq!(delta, dv(&[0.0, 0.0, -1.0]), epsilon = 1e-12);

    // Linear in Σ.
    let small = EqfState::<Rotation>::new(SymPosDef::scaled_identity(2, 1e-3));
    let r = dv(&[0.1, 0.3, -0.2]);
    let d_small = correction(&sys, &small, &c, &n, &r).unwrap();
    let d_unit = correction(&sys, &state, &c, &n, &r).unwrap();
    assert_relative_eq!(d_small * 1e3, d_unit, epsilon = 1e-12);
}

#[test]
fn eqf_step_without_measurement_follows_the_input() {
    let sys = BearingSystem::default();
    let state = EqfState::<Rotation>::new(SymPosDef::scaled_identity(2, 0.1));
    let omega = Vector3::new(0.1, 0.2, -0.3);
    let dt = 0.01;
    let next = eqf_step(&sys, &state, &dv(omega.as_slice()), None, &gains(0.1), OutputMode::Standard, dt).unwrap();
    let expected = eqfkit::lie::project_so3(&(Matrix3::identity() + hat3(&omega) * dt)).unwrap();
    assert_relative_eq!(next.xhat.matrix(), expected.matrix(), epsilon = 1e-12);
    assert_relative_eq!(next.t, dt);
    // Σ only grows without information.
    assert!(next.sigma.matrix()[(0, 0)] > 0.1 && next.sigma.matrix()[(1, 1)] > 0.1);
}

#[test]
fn eqf_step_with_consistent_measurement_matches_prediction() {
    let sys = BearingSystem::default();
    let state = EqfState::<Rotation>::new(SymPosDef::scaled_identity(2, 0.1));
    let u = dv(&[0.0, 0.1, 0.0]);
    let yhat = sys.output(&sys.origin());
    let g = gains(0.1);
    for mode in [OutputMode::Standard, OutputMode::EquivariantStar] {
        let with = eqf_step(&sys, &state, &u, Some(&yhat), &g, mode, 0.01).unwrap();
        let without = eqf_step(&sys, &state, &u, None, &g, mode, 0.01).unwrap();
        assert_relative_eq!(with.xhat.matrix(), without.xhat.matrix(), epsilon = 1e-12);
        // The information term only shrinks Σ.
        assert!(with.sigma.matrix().trace() < without.sigma.matrix().trace());
    }
}

#[test]
fn eqf_step_reduces_the_error() {
    let sys = BearingSystem::default();
    let truth = bearing::chart_inverse(&Vector2::new(0.2, -0.1));
    let y = sys.output(&truth);
    let g = gains(0.5);
    for mode in [OutputMode::Standard, OutputMode::EquivariantStar] {
        let mut state = EqfState::<Rotation>::new(g.sigma0.clone());
        let before = lyapunov_value(&sys.chart(&truth).unwrap(), &state.sigma);
        for _ in 0..50 {
            state = eqf_step(&sys, &state, &DVector::zeros(3), Some(&y), &g, mode, 0.01).unwrap();
        }
        let estimate = bearing::phi(&state.xhat, &UnitVector::e1());
        assert!(estimate.angle_to(&truth) < 0.5 * UnitVector::e1().angle_to(&truth));
        assert!(before > 0.0);
    }
}

#[test]
fn singular_output_gain_is_rejected() {
    let sys = BearingSystem::default();
    let state = EqfState::<Rotation>::new(SymPosDef::identity(2));
    let mut g = gains(1.0);
    g.n_meas = DMatrix::zeros(3, 3);
    let y = sys.output(&sys.origin());
    let err = eqf_step(&sys, &state, &DVector::zeros(3), Some(&y), &g, OutputMode::Standard, 0.01).unwrap_err();
    assert!(matches!(err, EqfError::SingularN(_)));
}

#[test]
fn output_linearization_orders() {
    let cfg = BearingConfig::default();
    for i in 0..20 {
        let a = 0.31 * i as f64;
        let [c, star] = linearization_order(&cfg, &Vector2::new(a.cos(), a.sin()), 0.5, 7).unwrap();
        assert!((c - 2.0).abs() <= 0.2, "standard slope {c}");
        assert!((star - 3.0).abs() <= 0.2, "equivariant slope {star}");
    }
}
