//! Extended Kalman filter for the bearing problem in embedding coordinates.
//!
//! The estimate is a free vector in R³. The unit-norm constraint is imposed
//! softly through a pseudo-measurement `‖η̂‖² = 1` with a small virtual
//! variance.

use nalgebra::{Matrix3, Vector3};
use thiserror::Error;

use crate::bearing::BearingConfig;
use crate::lie::hat3;

/// Smallest estimate norm the updates accept.
pub const MIN_NORM: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EkfError {
    #[error("covariance lost positive definiteness")]
    LostPositivity,
    #[error("innovation covariance is singular")]
    SingularInnovationCovariance,
    #[error("estimate norm {0:.3e} is too small to normalize")]
    DegenerateEstimate(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct EkfState {
    pub eta_hat: Vector3<f64>,
    pub p: Matrix3<f64>,
    pub t: f64,
}

impl EkfState {
    pub fn new(eta_hat: Vector3<f64>, p: Matrix3<f64>) -> Result<Self, EkfError> {
        check_spd(&p)?;
        Ok(EkfState { eta_hat, p, t: 0.0 })
    }
}

fn symmetrize(p: &Matrix3<f64>) -> Matrix3<f64> {
    (p + p.transpose()) * 0.5
}

fn check_spd(p: &Matrix3<f64>) -> Result<(), EkfError> {
    if p.iter().all(|v| v.is_finite()) && p.cholesky().is_some() {
        Ok(())
    } else {
        Err(EkfError::LostPositivity)
    }
}

fn norm_checked(v: &Vector3<f64>) -> Result<f64, EkfError> {
    let n = v.norm();
    if n > MIN_NORM {
        Ok(n)
    } else {
        Err(EkfError::DegenerateEstimate(n))
    }
}

/// Euler step of `η̇ = −Ω^× η` and `Ṗ = FP + PFᵀ + Q`, `F = −Ω^×`.
pub fn ekf_predict(state: &EkfState, omega: &Vector3<f64>, q: &Matrix3<f64>, dt: f64) -> Result<EkfState, EkfError> {
    assert!(dt > 0.0, "prediction requires dt > 0");
    let f = -hat3(omega);
    let eta_hat = state.eta_hat + f * state.eta_hat * dt;
    let p = symmetrize(&(state.p + (f * state.p + state.p * f.transpose() + q) * dt));
    check_spd(&p)?;
    Ok(EkfState { eta_hat, p, t: state.t + dt })
}

/// Output Jacobian `c_m (I − η̂η̂ᵀ / η̂ᵀη̂)`.
pub fn magnetometer_jacobian(eta_hat: &Vector3<f64>, cfg: &BearingConfig) -> Matrix3<f64> {
    let n2 = eta_hat.norm_squared();
    (Matrix3::identity() - eta_hat * eta_hat.transpose() / n2) * cfg.c_m()
}

fn joseph(p: &Matrix3<f64>, k: &Matrix3<f64>, h: &Matrix3<f64>, r: &Matrix3<f64>) -> Matrix3<f64> {
    let ikh = Matrix3::identity() - k * h;
    symmetrize(&(ikh * p * ikh.transpose() + k * r * k.transpose()))
}

pub fn ekf_update_magnetometer(
    state: &EkfState,
    y: &Vector3<f64>,
    r_meas: &Matrix3<f64>,
    cfg: &BearingConfig,
) -> Result<EkfState, EkfError> {
    let norm = norm_checked(&state.eta_hat)?;
    let h = magnetometer_jacobian(&state.eta_hat, cfg);
    let residual = y - state.eta_hat * (cfg.c_m() / norm);
    let s = h * state.p * h.transpose() + r_meas;
    let s_inv = s.cholesky().ok_or(EkfError::SingularInnovationCovariance)?.inverse();
    let k = state.p * h.transpose() * s_inv;
    let p = joseph(&state.p, &k, &h, r_meas);
    check_spd(&p)?;
    Ok(EkfState { eta_hat: state.eta_hat + k * residual, p, t: state.t })
}

/// Scalar pseudo-measurement `z = 1` of `g(η̂) = ‖η̂‖²`.
pub fn ekf_update_constraint(state: &EkfState, r_virtual: f64) -> Result<EkfState, EkfError> {
    norm_checked(&state.eta_hat)?;
    let h = state.eta_hat.transpose() * 2.0;
    let s = (h * state.p * h.transpose())[(0, 0)] + r_virtual;
    if s.is_nan() || s <= 0.0 {
        return Err(EkfError::SingularInnovationCovariance);
    }
    let k = state.p * h.transpose() / s;
    let residual = 1.0 - state.eta_hat.norm_squared();
    let ikh = Matrix3::identity() - k * h;
    let p = symmetrize(&(ikh * state.p * ikh.transpose() + k * k.transpose() * r_virtual));
    check_spd(&p)?;
    Ok(EkfState { eta_hat: state.eta_hat + k * residual, p, t: state.t })
}
