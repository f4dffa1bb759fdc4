//! Central-difference Jacobians and a Moore–Penrose pseudoinverse.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NumericError {
    #[error("function returned a non-finite value at perturbation {index} (step {step:.3e})")]
    NonFiniteEvaluation { index: usize, step: f64 },
}

/// Default central-difference step for a base point `x0`.
pub fn default_step(x0: &DVector<f64>) -> f64 {
    1e-6 * x0.norm().max(1.0)
}

/// Central-difference Jacobian of `f` at `x0`. `step = None` uses
/// [`default_step`].
pub fn numeric_jacobian<F>(f: F, x0: &DVector<f64>, step: Option<f64>) -> Result<DMatrix<f64>, NumericError>
where
    F: Fn(&DVector<f64>) -> DVector<f64>,
{
    let h = step.unwrap_or_else(|| default_step(x0));
    let k = x0.len();
    let mut cols: Vec<DVector<f64>> = Vec::with_capacity(k);
    let mut x = x0.clone();
    for i in 0..k {
        x[i] = x0[i] + h;
        let fp = f(&x);
        x[i] = x0[i] - h;
        let fm = f(&x);
        x[i] = x0[i];
        if fp.iter().chain(fm.iter()).any(|v| !v.is_finite()) {
            return Err(NumericError::NonFiniteEvaluation { index: i, step: h });
        }
        cols.push((fp - fm) / (2.0 * h));
    }
    let rows = cols.first().map_or(0, |c| c.len());
    Ok(DMatrix::from_fn(rows, k, |r, c| cols[c][r]))
}

/// Moore–Penrose pseudoinverse with a relative singular-value cutoff.
pub fn pseudo_inverse(m: &DMatrix<f64>) -> DMatrix<f64> {
    let eps = 1e-10 * m.amax().max(1.0);
    m.clone()
        .pseudo_inverse(eps)
        .expect("pseudo_inverse with non-negative epsilon")
}
