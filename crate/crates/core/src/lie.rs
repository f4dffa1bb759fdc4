//! SO(3), so(3) and S² primitives plus a checked symmetric positive-definite
//! matrix type.
//!
//! Everything on the group side is fixed-size (`Matrix3`/`Vector3`) and
//! value-semantic. `SymPosDef` is dynamically sized because the filter
//! framework carries Riccati matrices of system-dependent dimension.

use std::f64::consts::PI;
use std::fmt;
use std::ops::Mul;

use nalgebra::{DMatrix, DVector, Matrix3, Vector3};
use rand::{Rng, RngCore};
use thiserror::Error;

/// Angles below this use the series branches of `exp_so3`/`log_so3`.
pub const SMALL_ANGLE: f64 = 1e-6;
/// `log_so3` switches to the axis-from-diagonal branch when the angle is
/// within this distance of π.
const NEAR_PI: f64 = 1e-3;

const ORTHO_TOL: f64 = 1e-9;
const SKEW_TOL: f64 = 1e-8;
const SYM_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LieError {
    #[error("matrix is not skew-symmetric (|S + Sᵀ|_F = {0:.3e})")]
    NonSkewInput(f64),
    #[error("matrix is singular or has non-positive determinant (det = {0:.3e})")]
    SingularInput(f64),
    #[error("matrix is not a rotation (|RᵀR - I|_F = {ortho:.3e}, det = {det:.6})")]
    NotARotation { ortho: f64, det: f64 },
    #[error("cannot normalize a vector of norm {0:.3e}")]
    DegenerateVector(f64),
    #[error("matrix is not symmetric (max asymmetry {0:.3e})")]
    NotSymmetric(f64),
    #[error("matrix is not positive definite")]
    NotPositiveDefinite,
}

/// Element of so(3) in vector coordinates (rad/s when used as a rate).
pub type AlgebraVector3 = Vector3<f64>;

/// Skew-symmetric matrix with `hat3(v) * w == v.cross(&w)`.
pub fn hat3(v: &Vector3<f64>) -> Matrix3<f64> {
    Matrix3::new(0.0, -v.z, v.y, v.z, 0.0, -v.x, -v.y, v.x, 0.0)
}

/// Inverse of [`hat3`]. Reads the three lower off-diagonal entries.
pub fn vee3(s: &Matrix3<f64>) -> Result<Vector3<f64>, LieError> {
    let asym = (s + s.transpose()).norm();
    if asym > SKEW_TOL {
        return Err(LieError::NonSkewInput(asym));
    }
    Ok(Vector3::new(s[(2, 1)], s[(0, 2)], s[(1, 0)]))
}

/// A 3×3 rotation matrix.
#[derive(Clone, Copy, PartialEq)]
pub struct Rotation(Matrix3<f64>);

impl fmt::Debug for Rotation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Rotation({:?})", self.0.as_slice())
    }
}

impl Default for Rotation {
    fn default() -> Self {
        Self::identity()
    }
}

impl Rotation {
    pub fn identity() -> Self {
        Rotation(Matrix3::identity())
    }

    /// Accepts `m` only if it is orthonormal with unit determinant to 1e-9.
    pub fn from_matrix(m: Matrix3<f64>) -> Result<Self, LieError> {
        let ortho = (m.transpose() * m - Matrix3::identity()).norm();
        let det = m.determinant();
        if ortho > ORTHO_TOL || (det - 1.0).abs() > ORTHO_TOL {
            return Err(LieError::NotARotation { ortho, det });
        }
        Ok(Rotation(m))
    }

    /// Wraps `m` without checking. Callers are responsible for orthonormality.
    pub fn from_matrix_unchecked(m: Matrix3<f64>) -> Self {
        Rotation(m)
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.0
    }

    pub fn transpose(&self) -> Self {
        Rotation(self.0.transpose())
    }

    pub fn inverse(&self) -> Self {
        self.transpose()
    }

    pub fn exp(omega: &AlgebraVector3) -> Self {
        exp_so3(omega)
    }

    pub fn log(&self) -> AlgebraVector3 {
        log_so3(self)
    }

    pub fn adjoint(&self, omega: &AlgebraVector3) -> AlgebraVector3 {
        adjoint(self, omega)
    }

    /// Geodesic distance to the identity, in radians.
    pub fn angle(&self) -> f64 {
        let c = ((self.0.trace() - 1.0) / 2.0).clamp(-1.0, 1.0);
        c.acos()
    }
}

impl Mul for Rotation {
    type Output = Rotation;
    fn mul(self, rhs: Rotation) -> Rotation {
        Rotation(self.0 * rhs.0)
    }
}

impl Mul<&Rotation> for &Rotation {
    type Output = Rotation;
    fn mul(self, rhs: &Rotation) -> Rotation {
        Rotation(self.0 * rhs.0)
    }
}

impl Mul<Vector3<f64>> for &Rotation {
    type Output = Vector3<f64>;
    fn mul(self, rhs: Vector3<f64>) -> Vector3<f64> {
        self.0 * rhs
    }
}

impl Mul<Vector3<f64>> for Rotation {
    type Output = Vector3<f64>;
    fn mul(self, rhs: Vector3<f64>) -> Vector3<f64> {
        self.0 * rhs
    }
}

/// Rodrigues formula.
pub fn exp_so3(omega: &AlgebraVector3) -> Rotation {
    let theta = omega.norm();
    let k = hat3(omega);
    let k2 = k * k;
    let (a, b) = if theta < SMALL_ANGLE {
        let t2 = theta * theta;
        (1.0 - t2 / 6.0, 0.5 - t2 / 24.0)
    } else {
        (theta.sin() / theta, (1.0 - theta.cos()) / (theta * theta))
    };
    Rotation(Matrix3::identity() + k * a + k2 * b)
}

/// Principal logarithm, `‖result‖ ≤ π`.
pub fn log_so3(r: &Rotation) -> AlgebraVector3 {
    let m = &r.0;
    let cos_theta = ((m.trace() - 1.0) / 2.0).clamp(-1.0, 1.0);
    let theta = cos_theta.acos();
    let axial = Vector3::new(m[(2, 1)] - m[(1, 2)], m[(0, 2)] - m[(2, 0)], m[(1, 0)] - m[(0, 1)]);

    if theta < SMALL_ANGLE {
        // θ/(2 sin θ) = 1/2 + θ²/12 + O(θ⁴)
        return axial * (0.5 + theta * theta / 12.0);
    }
    if PI - theta > NEAR_PI {
        return axial * (theta / (2.0 * theta.sin()));
    }

    // Near π: (R + Rᵀ)/2 = cos θ I + (1 - cos θ) a aᵀ. Take the column of the
    // outer product with the largest diagonal entry (largest diagonal of (R+I)/2).
    let sym = (m + m.transpose()) * 0.5;
    let outer = (sym - Matrix3::identity() * cos_theta) / (1.0 - cos_theta);
    let i = (0..3)
        .max_by(|&a, &b| outer[(a, a)].total_cmp(&outer[(b, b)]))
        .unwrap_or(0);
    let mut axis: Vector3<f64> = outer.column(i).into();
    axis /= axis.norm();
    if axis.dot(&axial) < 0.0 {
        axis = -axis;
    }
    axis * theta
}

/// `Ad_R ω`, which for SO(3) is `R ω`.
pub fn adjoint(r: &Rotation, omega: &AlgebraVector3) -> AlgebraVector3 {
    r.0 * omega
}

/// Rotation with a uniformly random axis and an angle uniform in
/// `[0, max_angle)`. Not Haar-distributed; meant for test sampling.
pub fn sample_rotation(rng: &mut dyn RngCore, max_angle: f64) -> Rotation {
    let axis = loop {
        let v = Vector3::new(
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        );
        let n = v.norm();
        if n > 1e-3 && n <= 1.0 {
            break v / n;
        }
    };
    exp_so3(&(axis * rng.random_range(0.0..max_angle)))
}

/// Frobenius-nearest rotation via the polar factor of `m`.
pub fn project_so3(m: &Matrix3<f64>) -> Result<Rotation, LieError> {
    let det = m.determinant();
    if det <= 1e-12 {
        return Err(LieError::SingularInput(det));
    }
    let svd = m.svd(true, true);
    let (u, v_t) = match (svd.u, svd.v_t) {
        (Some(u), Some(v_t)) => (u, v_t),
        _ => return Err(LieError::SingularInput(det)),
    };
    let d = (u * v_t).determinant().signum();
    let fix = Matrix3::from_diagonal(&Vector3::new(1.0, 1.0, d));
    Ok(Rotation(u * fix * v_t))
}

/// Unit 3-vector, a point on S².
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitVector(Vector3<f64>);

impl UnitVector {
    pub fn new_normalize(v: Vector3<f64>) -> Result<Self, LieError> {
        let n = v.norm();
        if n.is_nan() || n <= 1e-12 || !n.is_finite() {
            return Err(LieError::DegenerateVector(n));
        }
        Ok(UnitVector(v / n))
    }

    pub fn new_unchecked(v: Vector3<f64>) -> Self {
        UnitVector(v)
    }

    pub fn e1() -> Self {
        UnitVector(Vector3::x())
    }

    pub fn e2() -> Self {
        UnitVector(Vector3::y())
    }

    pub fn e3() -> Self {
        UnitVector(Vector3::z())
    }

    pub fn as_vector(&self) -> &Vector3<f64> {
        &self.0
    }

    pub fn into_inner(self) -> Vector3<f64> {
        self.0
    }

    /// Angle to `other` in `[0, π]`, clamped so it never produces NaN.
    pub fn angle_to(&self, other: &UnitVector) -> f64 {
        self.0.dot(&other.0).clamp(-1.0, 1.0).acos()
    }
}

/// Symmetric positive-definite matrix. Construction symmetrizes within
/// tolerance and verifies a Cholesky factorization exists.
#[derive(Debug, Clone, PartialEq)]
pub struct SymPosDef(DMatrix<f64>);

impl SymPosDef {
    pub fn new(m: DMatrix<f64>) -> Result<Self, LieError> {
        if !m.is_square() {
            return Err(LieError::NotPositiveDefinite);
        }
        let scale = m.amax().max(1.0);
        let asym = (&m - m.transpose()).amax();
        if asym > SYM_TOL * scale {
            return Err(LieError::NotSymmetric(asym));
        }
        let sym = symmetrize(&m);
        if sym.iter().any(|x| !x.is_finite()) || sym.clone().cholesky().is_none() {
            return Err(LieError::NotPositiveDefinite);
        }
        Ok(SymPosDef(sym))
    }

    pub fn identity(n: usize) -> Self {
        SymPosDef(DMatrix::identity(n, n))
    }

    /// `scale · I_n`; panics if `scale` is not strictly positive.
    pub fn scaled_identity(n: usize, scale: f64) -> Self {
        assert!(scale > 0.0, "scaled_identity requires a positive scale");
        SymPosDef(DMatrix::identity(n, n) * scale)
    }

    pub fn from_diagonal(diag: &[f64]) -> Result<Self, LieError> {
        Self::new(DMatrix::from_diagonal(&DVector::from_column_slice(diag)))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.0
    }

    pub fn inverse(&self) -> DMatrix<f64> {
        self.0
            .clone()
            .cholesky()
            .expect("SymPosDef invariant: Cholesky exists")
            .inverse()
    }

    /// `vᵀ M⁻¹ v` via a Cholesky solve.
    pub fn inv_quadratic_form(&self, v: &DVector<f64>) -> f64 {
        let chol = self
            .0
            .clone()
            .cholesky()
            .expect("SymPosDef invariant: Cholesky exists");
        let x = chol.solve(v);
        v.dot(&x).max(0.0)
    }

    /// Ratio of extreme eigenvalues.
    pub fn condition_number(&self) -> f64 {
        let eig = self.0.clone().symmetric_eigen().eigenvalues;
        let max = eig.max();
        let min = eig.min();
        if min <= 0.0 {
            f64::INFINITY
        } else {
            max / min
        }
    }
}

pub fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_vec(rng: &mut ChaCha8Rng, scale: f64) -> Vector3<f64> {
        Vector3::new(
            rng.random_range(-scale..scale),
            rng.random_range(-scale..scale),
            rng.random_range(-scale..scale),
        )
    }

    fn random_rotation(rng: &mut ChaCha8Rng) -> Rotation {
        sample_rotation(rng, PI - 1e-3)
    }

    #[test]
    fn hat_layout_and_cross_product() {
        assert_eq!(hat3(&Vector3::zeros()), Matrix3::zeros());
        let expected = Matrix3::new(0.0, -1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0);
        assert_eq!(hat3(&Vector3::z()), expected);

        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..200 {
            let v = random_vec(&mut rng, 3.0);
            let w = random_vec(&mut rng, 3.0);
            let s = hat3(&v);
            assert_eq!(s + s.transpose(), Matrix3::zeros());
            // componentwise cross product
            let cross = Vector3::new(
                v.y * w.z - v.z * w.y,
                v.z * w.x - v.x * w.z,
                v.x * w.y - v.y * w.x,
            );
            assert_relative_eq!(s * w, cross, epsilon = 1e-14);
        }
    }

    #[test]
    fn vee_inverts_hat() {
        assert_eq!(vee3(&Matrix3::zeros()).unwrap(), Vector3::zeros());
        assert_eq!(vee3(&hat3(&Vector3::new(1.0, 2.0, 3.0))).unwrap(), Vector3::new(1.0, 2.0, 3.0));
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..1000 {
            let v = random_vec(&mut rng, 10.0);
            assert_eq!(vee3(&hat3(&v)).unwrap(), v);
        }
    }

    #[test]
    fn vee_rejects_non_skew() {
        let m = Matrix3::identity();
        assert!(matches!(vee3(&m), Err(LieError::NonSkewInput(_))));
    }

    #[test]
    fn exp_known_values() {
        assert_eq!(exp_so3(&Vector3::zeros()), Rotation::identity());
        let r = exp_so3(&Vector3::new(0.0, 0.0, PI / 2.0));
        assert_relative_eq!(r * Vector3::x(), Vector3::y(), epsilon = 1e-15);
        assert_relative_eq!(r.matrix().column(0).into_owned(), Vector3::y(), epsilon = 1e-15);
    }

    #[test]
    fn exp_of_negated_is_inverse() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..500 {
            let w = random_vec(&mut rng, 2.0);
            let p = exp_so3(&w) * exp_so3(&-w);
            assert_relative_eq!(*p.matrix(), Matrix3::identity(), epsilon = 1e-10);
        }
    }

    #[test]
    fn log_inverts_exp() {
        assert_eq!(log_so3(&Rotation::identity()), Vector3::zeros());
        let w = Vector3::new(0.3, -0.2, 0.1);
        assert_relative_eq!(log_so3(&exp_so3(&w)), w, epsilon = 1e-10);

        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..1000 {
            let mut w = random_vec(&mut rng, 1.0);
            let n = w.norm().max(1e-9);
            w *= rng.random_range(0.0..PI - 1e-3) / n;
            assert!((log_so3(&exp_so3(&w)) - w).norm() <= 1e-8, "w = {w:?}");
        }
    }

    #[test]
    fn log_small_angles() {
        for &t in &[1e-12, 1e-9, 1e-7, 5e-7, 2e-6] {
            let w = Vector3::new(t, -2.0 * t, 0.5 * t);
            assert_relative_eq!(log_so3(&exp_so3(&w)), w, epsilon = 1e-18, max_relative = 1e-8);
        }
    }

    #[test]
    fn log_at_and_near_pi() {
        let r = exp_so3(&Vector3::new(PI, 0.0, 0.0));
        let w = log_so3(&r);
        assert_relative_eq!(w.x.abs(), PI, epsilon = 1e-12);
        assert_relative_eq!(w.y, 0.0, epsilon = 1e-12);
        assert_relative_eq!(w.z, 0.0, epsilon = 1e-12);

        let axis = Vector3::new(1.0, -2.0, 0.5).normalize();
        for &gap in &[1e-4, 1e-6, 1e-9] {
            let w = axis * (PI - gap);
            assert!((log_so3(&exp_so3(&w)) - w).norm() < 1e-7, "gap {gap}");
        }
    }

    #[test]
    fn adjoint_properties() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let w0 = random_vec(&mut rng, 1.0);
        assert_eq!(adjoint(&Rotation::identity(), &w0), w0);
        for _ in 0..200 {
            let r1 = random_rotation(&mut rng);
            let r2 = random_rotation(&mut rng);
            let w = random_vec(&mut rng, 2.0);
            let lhs = adjoint(&(r1 * r2), &w);
            let rhs = adjoint(&r1, &adjoint(&r2, &w));
            assert_relative_eq!(lhs, rhs, epsilon = 1e-12);

            let conj = r1.matrix() * hat3(&w) * r1.matrix().transpose();
            assert_relative_eq!(hat3(&adjoint(&r1, &w)), conj, epsilon = 1e-12);
            assert_relative_eq!(adjoint(&r1, &w).norm(), w.norm(), epsilon = 1e-12);
        }
    }

    #[test]
    fn group_axioms() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..1000 {
            let a = random_rotation(&mut rng);
            let b = random_rotation(&mut rng);
            let c = random_rotation(&mut rng);
            assert!(Rotation::from_matrix(*(a * b).matrix()).is_ok());
            assert_relative_eq!(*((a * b) * c).matrix(), *(a * (b * c)).matrix(), epsilon = 1e-12);
            assert_eq!(a * Rotation::identity(), a);
            assert_relative_eq!(*(a * a.inverse()).matrix(), Matrix3::identity(), epsilon = 1e-12);
        }
    }

    #[test]
    fn projection() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let r = random_rotation(&mut rng);
            assert_relative_eq!(*project_so3(r.matrix()).unwrap().matrix(), *r.matrix(), epsilon = 1e-12);
            assert_relative_eq!(
                *project_so3(&(r.matrix() * 1.5)).unwrap().matrix(),
                *r.matrix(),
                epsilon = 1e-12
            );

            let e = Matrix3::from_fn(|_, _| rng.random_range(-1.0..1.0));
            let p = project_so3(&(r.matrix() + e * 1e-4)).unwrap();
            assert!((p.matrix() - r.matrix()).amax() < 2e-4);
            let ortho = (p.matrix().transpose() * p.matrix() - Matrix3::identity()).norm();
            assert!(ortho < 1e-12);
            assert_relative_eq!(p.matrix().determinant(), 1.0, epsilon = 1e-12);
        }
        assert!(matches!(
            project_so3(&Matrix3::zeros()),
            Err(LieError::SingularInput(_))
        ));
        assert!(project_so3(&-Matrix3::identity()).is_err());
    }

    #[test]
    fn sym_pos_def_checks() {
        assert!(SymPosDef::new(DMatrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 1.0])).is_ok());
        assert!(matches!(
            SymPosDef::new(DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.0, 1.0])),
            Err(LieError::NotSymmetric(_))
        ));
        assert!(matches!(
            SymPosDef::new(DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0])),
            Err(LieError::NotPositiveDefinite)
        ));
        let s = SymPosDef::from_diagonal(&[4.0, 1.0]).unwrap();
        assert_relative_eq!(s.inv_quadratic_form(&DVector::from_vec(vec![2.0, 0.0])), 1.0);
    }

    #[test]
    fn unit_vector_angle_is_clamped() {
        let a = UnitVector::e1();
        let b = UnitVector::new_unchecked(Vector3::new(1.0 + 1e-15, 0.0, 0.0));
        assert_eq!(a.angle_to(&b), 0.0);
        assert!(UnitVector::new_normalize(Vector3::zeros()).is_err());
    }
}
