use std::f64::consts::{PI, TAU};

use nalgebra::{Vector2, Vector3};

use crate::bearing::{self, BearingConfig};
use crate::ekf::magnetometer_jacobian;
use crate::lie::{Rotation, UnitVector};

use super::loglog_slope;

/// Angular radius of the excluded cap around `−e₁`.
pub const CAP_RADIUS: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinmapRow {
    /// Polar angle from `e₁`.
    pub theta: f64,
    /// Azimuth about `e₁`, measured from `e₂` towards `e₃`.
    pub phi: f64,
    pub ekf_err: f64,
    pub eqf_err: f64,
    pub eqfstar_err: f64,
}

/// Output linearization errors `|ỹ − C·coords(η)|` at `X̂ = I`, `ŷ = h(e₁)`
/// for the EKF, EqF and EqF* models, in that order.
pub fn linearization_errors(eta: &UnitVector, cfg: &BearingConfig) -> Result<[f64; 3], bearing::BearingError> {
    let e1 = UnitVector::e1();
    let yhat = bearing::output(&e1, cfg);
    let y = bearing::output(eta, cfg);
    let residual = y - yhat;

    let h = magnetometer_jacobian(e1.as_vector(), cfg);
    let ekf = (residual - h * (eta.as_vector() - e1.as_vector())).norm();

    let eps = bearing::chart(eta)?;
    let m = bearing::closed_form_matrices(&Rotation::identity(), &y, &yhat, cfg);
    let eqf = (residual - m.c * eps).norm();
    let eqfstar = (residual - m.c_star * eps).norm();
    Ok([ekf, eqf, eqfstar])
}

/// Log-log slopes of the EqF and EqF* output residuals against `|ε|` for
/// `ε = ε₀/2ᵏ`, `k = 0..levels`, with `ε₀ = eps0 · direction/|direction|`.
/// Returns `[standard, equivariant]`, or NaN for a zero direction.
pub fn linearization_order(
    cfg: &BearingConfig,
    direction: &Vector2<f64>,
    eps0: f64,
    levels: usize,
) -> Result<[f64; 2], bearing::BearingError> {
    let Some(dir) = direction.try_normalize(1e-12) else {
        return Ok([f64::NAN; 2]);
    };
    let mut norms = Vec::with_capacity(levels);
    let mut std_res = Vec::with_capacity(levels);
    let mut star_res = Vec::with_capacity(levels);
    for k in 0..levels {
        let r = eps0 / 2f64.powi(k as i32);
        let [_, eqf, eqfstar] = linearization_errors(&bearing::chart_inverse(&(dir * r)), cfg)?;
        norms.push(r);
        std_res.push(eqf);
        star_res.push(eqfstar);
    }
    let slope = |res: &[f64]| loglog_slope(&norms, res).unwrap_or(f64::NAN);
    Ok([slope(&std_res), slope(&star_res)])
}

/// Errors on an `n × n` spherical grid: `n` polar angles from 0 to
/// `π − CAP_RADIUS` inclusive and `n` azimuths over a full turn.
pub fn linearization_error_map(cfg: &BearingConfig, n: usize) -> Result<Vec<LinmapRow>, bearing::BearingError> {
    let mut rows = Vec::with_capacity(n * n);
    let theta_max = PI - CAP_RADIUS;
    for i in 0..n {
        let theta = if n > 1 { theta_max * i as f64 / (n - 1) as f64 } else { 0.0 };
        for j in 0..n {
            let phi = TAU * j as f64 / n as f64;
            let eta = UnitVector::new_unchecked(Vector3::new(
                theta.cos(),
                theta.sin() * phi.cos(),
                theta.sin() * phi.sin(),
            ));
            let [ekf_err, eqf_err, eqfstar_err] = linearization_errors(&eta, cfg)?;
            rows.push(LinmapRow { theta, phi, ekf_err, eqf_err, eqfstar_err });
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn zero_at_linearization_point() {
        let e = linearization_errors(&UnitVector::e1(), &BearingConfig::default()).unwrap();
        assert_eq!(e, [0.0, 0.0, 0.0]);
    }

    #[test]
    fn matches_polar_closed_forms() {
        let cfg = BearingConfig::default();
        for &theta in &[0.05, 0.3, 1.0, 2.0, 3.0] {
            for &phi in &[0.0, 1.1, 4.0] {
                let eta = UnitVector::new_unchecked(Vector3::new(
                    f64::cos(theta),
                    f64::sin(theta) * f64::cos(phi),
                    f64::sin(theta) * f64::sin(phi),
                ));
                let [ekf, eqf, star] = linearization_errors(&eta, &cfg).unwrap();
                let (c, s) = (theta.cos(), theta.sin());
                assert_relative_eq!(ekf, (1.0 - c).abs(), epsilon = 1e-12);
                assert_relative_eq!(eqf, ((1.0 - c).powi(2) + (s - theta).powi(2)).sqrt(), epsilon = 1e-12);
                let a = c - 1.0 + theta * s / 2.0;
                let b = s - theta * (1.0 + c) / 2.0;
                assert_relative_eq!(star, (a * a + b * b).sqrt(), epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn grid_shape_and_cap() {
        let rows = linearization_error_map(&BearingConfig::default(), 10).unwrap();
        assert_eq!(rows.len(), 100);
        assert!(rows.iter().all(|r| r.theta <= PI - CAP_RADIUS + 1e-12));
    }
}
