//! Linearization matrices A°, B, C, C* and the correction term Δ.

use nalgebra::{DMatrix, DVector};

use super::{EqfError, EqfState, EquivariantSystem, LieGroup};
use crate::lie::SymPosDef;
use crate::numeric::{numeric_jacobian, pseudo_inverse};

/// Which expression is used for the state matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StateMatrixPath {
    /// Origin-velocity form when ψ is available, measured-input form otherwise.
    Auto,
    /// Linearize the lift at the origin with `u° = ψ(X̂⁻¹, u)`. Requires ψ.
    OriginVelocity,
    /// Linearize the lift at ξ̂ with the measured input and transport the
    /// result back through φ. Does not need ψ.
    MeasuredInput,
}

fn jac<S, F>(sys: &S, f: F, x0: &DVector<f64>) -> Result<DMatrix<f64>, EqfError>
where
    S: EquivariantSystem + ?Sized,
    F: Fn(&DVector<f64>) -> DVector<f64>,
{
    Ok(numeric_jacobian(f, x0, sys.jacobian_step())?)
}

fn chart_or_nan<S: EquivariantSystem + ?Sized>(sys: &S, xi: &S::State) -> DVector<f64> {
    sys.chart(xi)
        .unwrap_or_else(|_| DVector::from_element(sys.dims().state, f64::NAN))
}

/// `D_e|ξ° ϑ(e) · D_E|id φ_ξ°(E)`, an m×g matrix.
pub fn origin_differential<S: EquivariantSystem + ?Sized>(sys: &S) -> Result<DMatrix<f64>, EqfError> {
    let origin = sys.origin();
    let g = sys.dims().group;
    jac(
        sys,
        |a| chart_or_nan(sys, &sys.phi(&S::Group::exp(a), &origin)),
        &DVector::zeros(g),
    )
}

pub fn state_matrix<S: EquivariantSystem + ?Sized>(
    sys: &S,
    xhat: &S::Group,
    u: &DVector<f64>,
) -> Result<DMatrix<f64>, EqfError> {
    state_matrix_via(sys, xhat, u, StateMatrixPath::Auto)
}

pub fn state_matrix_via<S: EquivariantSystem + ?Sized>(
    sys: &S,
    xhat: &S::Group,
    u: &DVector<f64>,
    path: StateMatrixPath,
) -> Result<DMatrix<f64>, EqfError> {
    let dims = sys.dims();
    let eps0 = DVector::zeros(dims.state);
    let origin_velocity = sys.psi(&xhat.inverse(), u);

    match (path, origin_velocity) {
        (StateMatrixPath::OriginVelocity, None) => Err(EqfError::MissingPsi),
        (StateMatrixPath::OriginVelocity | StateMatrixPath::Auto, Some(u0)) => {
            let left = origin_differential(sys)?;
            let right = jac(sys, |e| sys.lift(&sys.chart_inverse(e), &u0), &eps0)?;
            Ok(left * right)
        }
        (StateMatrixPath::MeasuredInput | StateMatrixPath::Auto, _) => {
            let origin = sys.origin();
            let xhat_inv = xhat.inverse();
            let xi_hat = sys.phi(xhat, &origin);
            let left = jac(
                sys,
                |a| chart_or_nan(sys, &sys.phi(&xhat_inv, &sys.phi(&S::Group::exp(a), &xi_hat))),
                &DVector::zeros(dims.group),
            )?;
            let right = jac(sys, |e| sys.lift(&sys.phi(xhat, &sys.chart_inverse(e)), u), &eps0)?;
            Ok(left * right)
        }
    }
}

/// `B = Dϑ · Dφ_ξ° · Ad_X̂ · D_u Λ(ξ̂, u)`, an m×l matrix.
pub fn input_matrix<S: EquivariantSystem + ?Sized>(
    sys: &S,
    xhat: &S::Group,
    u_measured: &DVector<f64>,
) -> Result<DMatrix<f64>, EqfError> {
    let xi_hat = sys.phi(xhat, &sys.origin());
    let dlift = jac(sys, |w| sys.lift(&xi_hat, w), u_measured)?;
    Ok(origin_differential(sys)? * xhat.adjoint_matrix() * dlift)
}

/// Standard output matrix: Jacobian of `ε ↦ h(φ(X̂, ϑ⁻¹(ε)))` at zero.
pub fn output_matrix_standard<S: EquivariantSystem + ?Sized>(
    sys: &S,
    xhat: &S::Group,
) -> Result<DMatrix<f64>, EqfError> {
    let m = sys.dims().state;
    jac(sys, |e| sys.output(&sys.phi(xhat, &sys.chart_inverse(e))), &DVector::zeros(m))
}

fn rho_differential<S: EquivariantSystem + ?Sized>(sys: &S, y: &DVector<f64>) -> Result<DMatrix<f64>, EqfError> {
    let dims = sys.dims();
    if sys.rho(&S::Group::identity(), y).is_none() {
        return Err(EqfError::MissingRho);
    }
    jac(
        sys,
        |a| {
            sys.rho(&S::Group::exp(a), y)
                .unwrap_or_else(|| DVector::from_element(dims.output, f64::NAN))
        },
        &DVector::zeros(dims.group),
    )
}

fn wedge_matrix<S: EquivariantSystem + ?Sized>(sys: &S) -> Result<DMatrix<f64>, EqfError> {
    let dims = sys.dims();
    let mut w = DMatrix::zeros(dims.group, dims.state);
    for j in 0..dims.state {
        let mut e = DVector::zeros(dims.state);
        e[j] = 1.0;
        let col = sys.wedge(&e).ok_or(EqfError::NotNormalChart)?;
        w.set_column(j, &col);
    }
    Ok(w)
}

/// Equivariant output matrix
/// `C* ε = ½(D_E ρ(E, y) + D_E ρ(E, ŷ)) · Ad_{X̂⁻¹} · ε^∧`.
pub fn output_matrix_equivariant<S: EquivariantSystem + ?Sized>(
    sys: &S,
    xhat: &S::Group,
    y: &DVector<f64>,
    yhat: &DVector<f64>,
) -> Result<DMatrix<f64>, EqfError> {
    let d_y = rho_differential(sys, y)?;
    let d_yhat = rho_differential(sys, yhat)?;
    let wedge = wedge_matrix(sys)?;
    Ok((d_y + d_yhat) * 0.5 * xhat.inverse().adjoint_matrix() * wedge)
}

/// `D†φ_ξ° · Dϑ⁻¹|₀`, the g×m map taking chart-space corrections to the
/// algebra. Closed forms from the system are used where provided; otherwise
/// central differences and a Moore–Penrose pseudoinverse.
pub fn correction_map<S: EquivariantSystem + ?Sized>(sys: &S) -> Result<DMatrix<f64>, EqfError> {
    let dims = sys.dims();
    let dchart_inv = match sys.chart_inverse_differential() {
        Some(d) => d,
        None => jac(sys, |e| sys.embed(&sys.chart_inverse(e)), &DVector::zeros(dims.state))?,
    };
    let pinv = match sys.dphi_origin_pinv() {
        Some(p) => p,
        None => {
            let origin = sys.origin();
            let dphi = jac(
                sys,
                |a| sys.embed(&sys.phi(&S::Group::exp(a), &origin)),
                &DVector::zeros(dims.group),
            )?;
            pseudo_inverse(&dphi)
        }
    };
    if pinv.ncols() != dchart_inv.nrows() {
        return Err(EqfError::Dimension(format!(
            "right inverse takes {} ambient coordinates, chart differential produces {}",
            pinv.ncols(),
            dchart_inv.nrows()
        )));
    }
    Ok(pinv * dchart_inv)
}

/// Correction term `Δ = D†φ_ξ° · Dϑ⁻¹ · Σ Cᵀ N⁻¹ (y − ŷ)`.
pub fn correction<S: EquivariantSystem + ?Sized>(
    sys: &S,
    state: &EqfState<S::Group>,
    c: &DMatrix<f64>,
    n: &SymPosDef,
    residual: &DVector<f64>,
) -> Result<DVector<f64>, EqfError> {
    correction_with_limit(sys, state, c, n, residual, super::Tolerances::default().max_condition)
}

pub(crate) fn correction_with_limit<S: EquivariantSystem + ?Sized>(
    sys: &S,
    state: &EqfState<S::Group>,
    c: &DMatrix<f64>,
    n: &SymPosDef,
    residual: &DVector<f64>,
    max_condition: f64,
) -> Result<DVector<f64>, EqfError> {
    let n_inv = checked_inverse(n, max_condition)?;
    let gain = state.sigma.matrix() * c.transpose() * n_inv;
    Ok(correction_map(sys)? * gain * residual)
}

pub(crate) fn checked_inverse(n: &SymPosDef, max_condition: f64) -> Result<DMatrix<f64>, EqfError> {
    let cond = n.condition_number();
    if cond.is_nan() || cond > max_condition {
        return Err(EqfError::SingularN(cond));
    }
    Ok(n.inverse())
}
