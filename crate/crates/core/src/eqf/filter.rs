use nalgebra::{DMatrix, DVector};

use super::matrices::{checked_inverse, correction_with_limit};
use super::{
    input_matrix, output_matrix_equivariant, output_matrix_standard, state_matrix, EqfError, EquivariantSystem,
    LieGroup,
};
use crate::lie::{symmetrize, SymPosDef};

/// Observer group element, Riccati term and time.
#[derive(Debug, Clone)]
pub struct EqfState<G> {
    pub xhat: G,
    pub sigma: SymPosDef,
    pub t: f64,
}

impl<G: LieGroup> EqfState<G> {
    /// `X̂(0) = id`, `Σ(0) = Σ₀`.
    pub fn new(sigma0: SymPosDef) -> Self {
        EqfState { xhat: G::identity(), sigma: sigma0, t: 0.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutputMode {
    /// Standard output matrix C.
    #[default]
    Standard,
    /// Equivariant output matrix C* (needs ρ and a normal chart).
    EquivariantStar,
}

/// Gain matrices. `M_t = M_ε + B M_input Bᵀ` and `N_t = N_ε + N_meas`.
///
/// The ε-terms and the noise intensities only need to be positive
/// semi-definite individually; the composed gains are checked.
#[derive(Debug, Clone)]
pub struct GainSchedule {
    pub sigma0: SymPosDef,
    pub m_eps: DMatrix<f64>,
    pub n_eps: DMatrix<f64>,
    pub m_input: DMatrix<f64>,
    pub n_meas: DMatrix<f64>,
}

impl GainSchedule {
    pub fn composed_m(&self, b: &DMatrix<f64>) -> DMatrix<f64> {
        symmetrize(&(&self.m_eps + b * &self.m_input * b.transpose()))
    }

    pub fn composed_n(&self) -> Result<SymPosDef, EqfError> {
        SymPosDef::new(symmetrize(&(&self.n_eps + &self.n_meas))).map_err(|_| EqfError::SingularN(f64::INFINITY))
    }
}

/// Overridable numerical guards.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Largest accepted condition number of `N_t`.
    pub max_condition: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { max_condition: 1e12 }
    }
}

/// One Euler step of `Σ̇ = AΣ + ΣAᵀ + M − Σ Cᵀ N⁻¹ C Σ`, symmetrized.
pub fn riccati_step(
    sigma: &SymPosDef,
    a: &DMatrix<f64>,
    c: &DMatrix<f64>,
    m: &DMatrix<f64>,
    n: &SymPosDef,
    dt: f64,
) -> Result<SymPosDef, EqfError> {
    let n_inv = checked_inverse(n, Tolerances::default().max_condition)?;
    riccati_euler(sigma, a, Some((c, &n_inv)), m, dt)
}

fn riccati_euler(
    sigma: &SymPosDef,
    a: &DMatrix<f64>,
    info: Option<(&DMatrix<f64>, &DMatrix<f64>)>,
    m: &DMatrix<f64>,
    dt: f64,
) -> Result<SymPosDef, EqfError> {
    assert!(dt > 0.0, "riccati step requires dt > 0");
    let s = sigma.matrix();
    let mut rate = a * s + s * a.transpose() + m;
    if let Some((c, n_inv)) = info {
        rate -= s * c.transpose() * n_inv * c * s;
    }
    let next = symmetrize(&(s + rate * dt));
    SymPosDef::new(next).map_err(|_| EqfError::LostPositivity)
}

/// `εᵀ Σ⁻¹ ε`.
pub fn lyapunov_value(eps: &DVector<f64>, sigma: &SymPosDef) -> f64 {
    sigma.inv_quadratic_form(eps)
}

/// Advance the filter by one Euler step.
///
/// `y = None` withholds the measurement: no correction and no information
/// term in the Riccati equation.
pub fn eqf_step<S: EquivariantSystem + ?Sized>(
    sys: &S,
    state: &EqfState<S::Group>,
    u: &DVector<f64>,
    y: Option<&DVector<f64>>,
    gains: &GainSchedule,
    mode: OutputMode,
    dt: f64,
) -> Result<EqfState<S::Group>, EqfError> {
    eqf_step_with(sys, state, u, y, gains, mode, dt, &Tolerances::default())
}

#[allow(clippy::too_many_arguments)]
pub fn eqf_step_with<S: EquivariantSystem + ?Sized>(
    sys: &S,
    state: &EqfState<S::Group>,
    u: &DVector<f64>,
    y: Option<&DVector<f64>>,
    gains: &GainSchedule,
    mode: OutputMode,
    dt: f64,
    tol: &Tolerances,
) -> Result<EqfState<S::Group>, EqfError> {
    let xhat = &state.xhat;
    let xi_hat = sys.phi(xhat, &sys.origin());

    let a = state_matrix(sys, xhat, u)?;
    let b = input_matrix(sys, xhat, u)?;
    let m = gains.composed_m(&b);

    let (delta, sigma) = match y {
        Some(y) => {
            let n = gains.composed_n()?;
            let yhat = sys.output(&xi_hat);
            let c = match mode {
                OutputMode::Standard => output_matrix_standard(sys, xhat)?,
                OutputMode::EquivariantStar => output_matrix_equivariant(sys, xhat, y, &yhat)?,
            };
            let residual = y - &yhat;
            let delta = correction_with_limit(sys, state, &c, &n, &residual, tol.max_condition)?;
            let n_inv = checked_inverse(&n, tol.max_condition)?;
            let sigma = riccati_euler(&state.sigma, &a, Some((&c, &n_inv)), &m, dt)?;
            (delta, sigma)
        }
        None => {
            let sigma = riccati_euler(&state.sigma, &a, None, &m, dt)?;
            (DVector::zeros(sys.dims().group), sigma)
        }
    };

    let lam = sys.lift(&xi_hat, u);
    let xhat = xhat.integrate(&lam, &delta, dt)?;
    Ok(EqfState { xhat, sigma, t: state.t + dt })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn spd(v: &[f64], n: usize) -> SymPosDef {
        SymPosDef::new(DMatrix::from_row_slice(n, n, v)).unwrap()
    }

    #[test]
    fn riccati_stationary_without_terms() {
        let s = spd(&[2.0, 0.3, 0.3, 1.0], 2);
        let z = DMatrix::zeros(2, 2);
        let c = DMatrix::zeros(3, 2);
        let next = riccati_step(&s, &z, &c, &z, &SymPosDef::identity(3), 0.01).unwrap();
        assert_eq!(next, s);
    }

    #[test]
    fn riccati_pure_diffusion() {
        let s = spd(&[2.0, 0.3, 0.3, 1.0], 2);
        let z = DMatrix::zeros(2, 2);
        let c = DMatrix::zeros(1, 2);
        let q = 0.7;
        let next = riccati_step(&s, &z, &c, &(DMatrix::identity(2, 2) * q), &SymPosDef::identity(1), 0.01).unwrap();
        assert_relative_eq!(*next.matrix(), s.matrix() + DMatrix::identity(2, 2) * (q * 0.01), epsilon = 1e-15);
    }

    #[test]
    fn riccati_scalar_matches_closed_form() {
        // Σ̇ = −Σ², Σ(0) = 1  ⇒  Σ(t) = 1/(1+t)
        let dt = 1e-4;
        let a = DMatrix::zeros(1, 1);
        let c = DMatrix::identity(1, 1);
        let m = DMatrix::zeros(1, 1);
        let n = SymPosDef::identity(1);
        let mut s = SymPosDef::identity(1);
        for _ in 0..10_000 {
            s = riccati_step(&s, &a, &c, &m, &n, dt).unwrap();
        }
        assert!((s.matrix()[(0, 0)] - 0.5).abs() < 1e-3);
    }

    #[test]
    fn riccati_reports_lost_positivity() {
        let s = SymPosDef::identity(1);
        let r = riccati_step(
            &s,
            &DMatrix::zeros(1, 1),
            &DMatrix::identity(1, 1),
            &DMatrix::zeros(1, 1),
            &SymPosDef::identity(1),
            2.0,
        );
        assert_eq!(r, Err(EqfError::LostPositivity));
    }

    #[test]
    fn riccati_rejects_singular_n() {
        let s = SymPosDef::identity(1);
        let n = SymPosDef::from_diagonal(&[1.0, 1e-14]).unwrap();
        let r = riccati_step(&s, &DMatrix::zeros(1, 1), &DMatrix::zeros(2, 1), &DMatrix::zeros(1, 1), &n, 0.1);
        assert!(matches!(r, Err(EqfError::SingularN(_))));
    }

    #[test]
    fn lyapunov_examples() {
        let eye = SymPosDef::identity(2);
        assert_eq!(lyapunov_value(&DVector::zeros(2), &eye), 0.0);
        let e = DVector::from_vec(vec![0.3, -0.4]);
        assert_relative_eq!(lyapunov_value(&e, &eye), 0.25, epsilon = 1e-15);
        let s = SymPosDef::from_diagonal(&[4.0, 1.0]).unwrap();
        assert_relative_eq!(lyapunov_value(&DVector::from_vec(vec![2.0, 0.0]), &s), 1.0, epsilon = 1e-15);
    }
}
