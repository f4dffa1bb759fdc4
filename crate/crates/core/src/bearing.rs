//! Single-bearing estimation on S² under SO(3).
//!
//! The body-frame direction η of a known field evolves as `η̇ = −Ω^× η` and is
//! observed by a magnetometer `y = c_m η`. SO(3) acts on the right by
//! `φ(R, η) = Rᵀη`, on the gyro input by `ψ(R, Ω) = RᵀΩ` and on the output by
//! `ρ(R, y) = Rᵀy`. The origin is `e₁` with normal coordinates through
//! `𝔪 = {(0, v₂, v₃)^×}`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, Matrix2, Matrix2x3, Matrix3, Matrix3x2, Vector2, Vector3};
use rand::{Rng, RngCore};
use thiserror::Error;

use crate::eqf::{Dims, EqfError, EquivariantSystem, SystemSampler};
use crate::lie::{exp_so3, hat3, sample_rotation, AlgebraVector3, Rotation, UnitVector};

/// Chart points closer than this (in angle) to the antipode `−e₁` are rejected.
pub const ANTIPODE_GUARD: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BearingError {
    #[error("direction is within {ANTIPODE_GUARD:e} rad of -e1, outside the chart (angle {0:.9})")]
    AntipodeOutOfChart(f64),
    #[error("vector is not tangent at e1 (first component {0:.3e})")]
    NotTangent(f64),
    #[error("magnetic field strength must be positive, got {0}")]
    InvalidFieldStrength(f64),
}

impl From<BearingError> for EqfError {
    fn from(e: BearingError) -> Self {
        match e {
            BearingError::NotTangent(_) => EqfError::NotTangent,
            other => EqfError::OutOfChart(other.to_string()),
        }
    }
}

/// Normal-chart coordinates about `e₁`, in radians along geodesics.
pub type ChartVector = Vector2<f64>;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BearingConfig {
    c_m: f64,
}

impl BearingConfig {
    pub fn new(c_m: f64) -> Result<Self, BearingError> {
        if !(c_m > 0.0 && c_m.is_finite()) {
            return Err(BearingError::InvalidFieldStrength(c_m));
        }
        Ok(BearingConfig { c_m })
    }

    /// Magnetic field strength.
    pub fn c_m(&self) -> f64 {
        self.c_m
    }
}

impl Default for BearingConfig {
    fn default() -> Self {
        BearingConfig { c_m: 1.0 }
    }
}

pub fn dynamics(eta: &UnitVector, omega: &AlgebraVector3) -> Vector3<f64> {
    -omega.cross(eta.as_vector())
}

pub fn output(eta: &UnitVector, cfg: &BearingConfig) -> Vector3<f64> {
    eta.as_vector() * cfg.c_m
}

pub fn phi(r: &Rotation, eta: &UnitVector) -> UnitVector {
    UnitVector::new_unchecked(r.matrix().transpose() * eta.as_vector())
}

pub fn psi(r: &Rotation, omega: &AlgebraVector3) -> AlgebraVector3 {
    r.matrix().transpose() * omega
}

/// `Λ(η, Ω) = Ω^×`, returned in vector coordinates.
pub fn lift(_eta: &UnitVector, omega: &AlgebraVector3) -> AlgebraVector3 {
    *omega
}

pub fn rho(r: &Rotation, y: &Vector3<f64>) -> Vector3<f64> {
    r.matrix().transpose() * y
}

/// `(v₂, v₃)^∧ = (0, v₂, v₃)`.
pub fn wedge2(v: &Vector2<f64>) -> AlgebraVector3 {
    Vector3::new(0.0, v.x, v.y)
}

/// Normal coordinates of `e` about `e₁`.
pub fn chart(e: &UnitVector) -> Result<ChartVector, BearingError> {
    let e = e.as_vector();
    let cross = Vector3::x().cross(e);
    let s = cross.norm();
    let angle = s.atan2(e.x);
    if angle > PI - ANTIPODE_GUARD {
        return Err(BearingError::AntipodeOutOfChart(angle));
    }
    if s == 0.0 {
        return Ok(Vector2::zeros());
    }
    // angle / s → 1/e.x as s → 0, which the quotient handles without loss.
    let scale = -angle / s;
    Ok(Vector2::new(cross.y, cross.z) * scale)
}

/// `ϑ⁻¹(ε) = φ(exp(ε^∧), e₁)`.
pub fn chart_inverse(eps: &ChartVector) -> UnitVector {
    phi(&exp_so3(&wedge2(eps)), &UnitVector::e1())
}

/// Right inverse of `D_E|id φ_{e₁}(E)`: `u ↦ (u₃, −u₂)` in 𝔪 coordinates.
pub fn dphi_origin_pinv(u: &Vector3<f64>) -> Result<Vector2<f64>, BearingError> {
    if u.x.abs() > 1e-9 {
        return Err(BearingError::NotTangent(u.x));
    }
    Ok(Vector2::new(u.z, -u.y))
}

/// `D_E|id φ_{e₁}(E)[ω] = e₁^× ω`.
pub fn dphi_origin(omega: &AlgebraVector3) -> Vector3<f64> {
    Vector3::x().cross(omega)
}

/// `[0_{1×2}; I₂]`, the injection of chart coordinates into so(3).
pub fn chart_injection() -> Matrix3x2<f64> {
    Matrix3x2::new(0.0, 0.0, 1.0, 0.0, 0.0, 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BearingMatrices {
    pub a: Matrix2<f64>,
    pub b: Matrix2x3<f64>,
    pub c: Matrix3x2<f64>,
    pub c_star: Matrix3x2<f64>,
}

/// Closed-form filter matrices for the bearing system.
///
/// `c_m` enters through `ŷ` and `y`; the configuration is accepted for
/// symmetry with the other output functions.
pub fn closed_form_matrices(
    xhat: &Rotation,
    y: &Vector3<f64>,
    yhat: &Vector3<f64>,
    _cfg: &BearingConfig,
) -> BearingMatrices {
    let r = xhat.matrix();
    let select = Matrix2x3::new(0.0, 1.0, 0.0, 0.0, 0.0, 1.0);
    let inj = chart_injection();
    BearingMatrices {
        a: Matrix2::zeros(),
        b: select * r,
        c: hat3(yhat) * r.transpose() * inj,
        c_star: (hat3(y) + hat3(yhat)) * 0.5 * r.transpose() * inj,
    }
}

/// The bearing problem as a generic equivariant system.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct BearingSystem {
    pub cfg: BearingConfig,
}

impl BearingSystem {
    pub fn new(cfg: BearingConfig) -> Self {
        BearingSystem { cfg }
    }
}

fn v3(v: &DVector<f64>) -> Vector3<f64> {
    Vector3::new(v[0], v[1], v[2])
}

fn dv(v: &[f64]) -> DVector<f64> {
    DVector::from_column_slice(v)
}

impl EquivariantSystem for BearingSystem {
    type Group = Rotation;
    type State = UnitVector;

    fn dims(&self) -> Dims {
        Dims { state: 2, output: 3, input: 3, group: 3, ambient: 3 }
    }

    fn phi(&self, x: &Rotation, xi: &UnitVector) -> UnitVector {
        phi(x, xi)
    }

    fn psi(&self, x: &Rotation, u: &DVector<f64>) -> Option<DVector<f64>> {
        Some(dv(psi(x, &v3(u)).as_slice()))
    }

    fn lift(&self, xi: &UnitVector, u: &DVector<f64>) -> DVector<f64> {
        dv(lift(xi, &v3(u)).as_slice())
    }

    fn output(&self, xi: &UnitVector) -> DVector<f64> {
        dv(output(xi, &self.cfg).as_slice())
    }

    fn rho(&self, x: &Rotation, y: &DVector<f64>) -> Option<DVector<f64>> {
        Some(dv(rho(x, &v3(y)).as_slice()))
    }

    fn origin(&self) -> UnitVector {
        UnitVector::e1()
    }

    fn chart(&self, xi: &UnitVector) -> Result<DVector<f64>, EqfError> {
        Ok(dv(chart(xi)?.as_slice()))
    }

    fn chart_inverse(&self, eps: &DVector<f64>) -> UnitVector {
        chart_inverse(&Vector2::new(eps[0], eps[1]))
    }

    fn wedge(&self, eps: &DVector<f64>) -> Option<DVector<f64>> {
        Some(dv(wedge2(&Vector2::new(eps[0], eps[1])).as_slice()))
    }

    fn embed(&self, xi: &UnitVector) -> DVector<f64> {
        dv(xi.as_vector().as_slice())
    }

    fn vector_field(&self, xi: &UnitVector, u: &DVector<f64>) -> DVector<f64> {
        dv(dynamics(xi, &v3(u)).as_slice())
    }

    fn dphi_origin_pinv(&self) -> Option<DMatrix<f64>> {
        // u ↦ wedge2((u₃, −u₂)) = (0, u₃, −u₂)
        Some(DMatrix::from_row_slice(3, 3, &[0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, -1.0, 0.0]))
    }

    fn chart_inverse_differential(&self) -> Option<DMatrix<f64>> {
        // ε ↦ e₁^× wedge2(ε) = (0, −ε₂, ε₁)
        let m: Matrix3<f64> = hat3(&Vector3::x());
        let inj = chart_injection();
        Some(DMatrix::from_column_slice(3, 2, (m * inj).as_slice()))
    }
}

impl SystemSampler for BearingSystem {
    fn sample_group(&self, rng: &mut dyn RngCore) -> Rotation {
        sample_rotation(rng, PI)
    }

    fn sample_state(&self, rng: &mut dyn RngCore) -> UnitVector {
        loop {
            let v = Vector3::new(
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
            );
            if let Ok(u) = UnitVector::new_normalize(v) {
                if v.norm() > 1e-2 {
                    return u;
                }
            }
        }
    }

    fn sample_input(&self, rng: &mut dyn RngCore) -> DVector<f64> {
        DVector::from_fn(3, |_, _| rng.random_range(-1.0..1.0))
    }

    fn sample_chart_vector(&self, rng: &mut dyn RngCore) -> DVector<f64> {
        let dir: f64 = rng.random_range(-PI..PI);
        let r = rng.random_range(0.0..PI - 1e-3);
        DVector::from_vec(vec![r * dir.cos(), r * dir.sin()])
    }
}
