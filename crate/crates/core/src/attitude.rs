//! Attitude kinematics with body and spatial angular velocity, posed on SO(3)
//! itself.
//!
//! The state is a rotation `P` with `Ṗ = P Ω^× + W^× P`, where `Ω` is a
//! body-frame rate and `W` a spatial one. The system is group affine and SO(3)
//! acts on itself by right translation, so the pre-observer error evolves
//! exactly linearly in logarithmic coordinates. This makes it the reference
//! case for the invariant-filter specialization check.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, Matrix3, Vector3};
use rand::{Rng, RngCore};

use crate::eqf::{Dims, EqfError, EquivariantSystem, SystemSampler};
use crate::lie::{exp_so3, hat3, log_so3, sample_rotation, Rotation};

/// Rotation `P` observed through a known reference direction `h(P) = Pᵀd`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AttitudeSystem {
    pub reference: Vector3<f64>,
}

impl Default for AttitudeSystem {
    fn default() -> Self {
        AttitudeSystem { reference: Vector3::z() }
    }
}

/// Split a 6-vector input into `(Ω, W)`.
fn split(u: &DVector<f64>) -> (Vector3<f64>, Vector3<f64>) {
    (Vector3::new(u[0], u[1], u[2]), Vector3::new(u[3], u[4], u[5]))
}

fn flatten(m: &Matrix3<f64>) -> DVector<f64> {
    DVector::from_column_slice(m.as_slice())
}

fn v3(v: &DVector<f64>) -> Vector3<f64> {
    Vector3::new(v[0], v[1], v[2])
}

/// Stack `(Ω, W)` into the 6-vector input layout.
pub fn input(omega: &Vector3<f64>, w: &Vector3<f64>) -> DVector<f64> {
    DVector::from_iterator(6, omega.iter().chain(w.iter()).copied())
}

impl EquivariantSystem for AttitudeSystem {
    type Group = Rotation;
    type State = Rotation;

    fn dims(&self) -> Dims {
        Dims { state: 3, output: 3, input: 6, group: 3, ambient: 9 }
    }

    fn phi(&self, x: &Rotation, p: &Rotation) -> Rotation {
        p * x
    }

    fn psi(&self, x: &Rotation, u: &DVector<f64>) -> Option<DVector<f64>> {
        let (omega, w) = split(u);
        Some(input(&(x.matrix().transpose() * omega), &w))
    }

    fn lift(&self, p: &Rotation, u: &DVector<f64>) -> DVector<f64> {
        let (omega, w) = split(u);
        let v = omega + p.matrix().transpose() * w;
        DVector::from_column_slice(v.as_slice())
    }

    fn output(&self, p: &Rotation) -> DVector<f64> {
        DVector::from_column_slice((p.matrix().transpose() * self.reference).as_slice())
    }

    fn rho(&self, x: &Rotation, y: &DVector<f64>) -> Option<DVector<f64>> {
        Some(DVector::from_column_slice((x.matrix().transpose() * v3(y)).as_slice()))
    }

    fn origin(&self) -> Rotation {
        Rotation::identity()
    }

    fn chart(&self, p: &Rotation) -> Result<DVector<f64>, EqfError> {
        Ok(DVector::from_column_slice(log_so3(p).as_slice()))
    }

    fn chart_inverse(&self, eps: &DVector<f64>) -> Rotation {
        exp_so3(&v3(eps))
    }

    fn wedge(&self, eps: &DVector<f64>) -> Option<DVector<f64>> {
        Some(eps.clone())
    }

    fn embed(&self, p: &Rotation) -> DVector<f64> {
        flatten(p.matrix())
    }

    fn vector_field(&self, p: &Rotation, u: &DVector<f64>) -> DVector<f64> {
        let (omega, w) = split(u);
        let m = p.matrix();
        flatten(&(m * hat3(&omega) + hat3(&w) * m))
    }

    fn dphi_origin_pinv(&self) -> Option<DMatrix<f64>> {
        // recovers a from the column-major entries of a^×
        let mut m = DMatrix::zeros(3, 9);
        m[(0, 5)] = 0.5;
        m[(0, 7)] = -0.5;
        m[(1, 6)] = 0.5;
        m[(1, 2)] = -0.5;
        m[(2, 1)] = 0.5;
        m[(2, 3)] = -0.5;
        Some(m)
    }

    fn chart_inverse_differential(&self) -> Option<DMatrix<f64>> {
        let mut m = DMatrix::zeros(9, 3);
        for j in 0..3 {
            m.set_column(j, &flatten(&hat3(&Vector3::ith(j, 1.0))));
        }
        Some(m)
    }

    fn is_group_affine_torsor(&self) -> bool {
        true
    }
}

impl SystemSampler for AttitudeSystem {
    fn sample_group(&self, rng: &mut dyn RngCore) -> Rotation {
        sample_rotation(rng, PI)
    }

    fn sample_state(&self, rng: &mut dyn RngCore) -> Rotation {
        sample_rotation(rng, PI)
    }

    fn sample_input(&self, rng: &mut dyn RngCore) -> DVector<f64> {
        DVector::from_fn(6, |_, _| rng.random_range(-1.0..1.0))
    }

    fn sample_chart_vector(&self, rng: &mut dyn RngCore) -> DVector<f64> {
        let dir = Vector3::new(
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        );
        let r = rng.random_range(0.0..PI - 0.1);
        let v = dir.try_normalize(1e-6).unwrap_or_else(Vector3::x) * r;
        DVector::from_column_slice(v.as_slice())
    }
}
