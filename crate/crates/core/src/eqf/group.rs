use std::fmt::Debug;

use nalgebra::{DMatrix, DVector, Vector3};

use super::EqfError;
use crate::lie::{exp_so3, hat3, project_so3, Rotation};

/// Matrix Lie group with algebra elements in vector coordinates.
pub trait LieGroup: Clone + Debug + Send + Sync {
    /// Dimension of the Lie algebra.
    const DIM: usize;

    fn identity() -> Self;
    fn compose(&self, rhs: &Self) -> Self;
    fn inverse(&self) -> Self;
    fn exp(v: &DVector<f64>) -> Self;
    fn adjoint(&self, v: &DVector<f64>) -> DVector<f64>;

    fn adjoint_matrix(&self) -> DMatrix<f64> {
        let g = Self::DIM;
        let mut m = DMatrix::zeros(g, g);
        for j in 0..g {
            let mut e = DVector::zeros(g);
            e[j] = 1.0;
            m.set_column(j, &self.adjoint(&e));
        }
        m
    }

    /// One explicit Euler step of `Ẋ = X·left^∧ + right^∧·X`, re-projected
    /// onto the group.
    fn integrate(&self, left: &DVector<f64>, right: &DVector<f64>, dt: f64) -> Result<Self, EqfError>;
}

fn vec3(v: &DVector<f64>) -> Vector3<f64> {
    Vector3::new(v[0], v[1], v[2])
}

impl LieGroup for Rotation {
    const DIM: usize = 3;

    fn identity() -> Self {
        Rotation::identity()
    }

    fn compose(&self, rhs: &Self) -> Self {
        self * rhs
    }

    fn inverse(&self) -> Self {
        self.transpose()
    }

    fn exp(v: &DVector<f64>) -> Self {
        exp_so3(&vec3(v))
    }

    fn adjoint(&self, v: &DVector<f64>) -> DVector<f64> {
        let w = self.matrix() * vec3(v);
        DVector::from_column_slice(w.as_slice())
    }

    fn adjoint_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_column_slice(3, 3, self.matrix().as_slice())
    }

    fn integrate(&self, left: &DVector<f64>, right: &DVector<f64>, dt: f64) -> Result<Self, EqfError> {
        let x = self.matrix();
        let step = x + (x * hat3(&vec3(left)) + hat3(&vec3(right)) * x) * dt;
        Ok(project_so3(&step)?)
    }
}
