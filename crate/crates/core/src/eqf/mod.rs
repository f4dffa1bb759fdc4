//! Equivariant Filter over an arbitrary [`EquivariantSystem`].
//!
//! The observer state lives on the symmetry group. Linearizations are taken
//! once, about the fixed origin ξ°, in a local chart of the state space. All
//! differentials are built from central differences of the system maps,
//! except the right inverse of the origin differential and the chart
//! differential at zero, which a system may supply in closed form.

mod checks;
mod filter;
mod group;
mod iekf;
mod matrices;
mod system;

pub use checks::{run_invariant_checks, CheckResult, SystemSampler};
pub use filter::{
    eqf_step, eqf_step_with, lyapunov_value, riccati_step, EqfState, GainSchedule, OutputMode, Tolerances,
};
pub use group::LieGroup;
pub use iekf::{iekf_specialization_check, IekfCheckConfig, IekfReport, IekfTrial};
pub use matrices::{
    correction, correction_map, input_matrix, origin_differential, output_matrix_equivariant,
    output_matrix_standard, state_matrix, state_matrix_via, StateMatrixPath,
};
pub use system::{Dims, EquivariantSystem};

use thiserror::Error;

use crate::lie::LieError;
use crate::numeric::NumericError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EqfError {
    #[error("the origin-velocity state matrix needs an input action ψ")]
    MissingPsi,
    #[error("the equivariant output matrix needs an output action ρ")]
    MissingRho,
    #[error("the equivariant output matrix needs a normal chart with a wedge map")]
    NotNormalChart,
    #[error("output gain N is singular or ill-conditioned (condition {0:.3e})")]
    SingularN(f64),
    #[error("Riccati term lost positive definiteness; reduce dt or check the gains")]
    LostPositivity,
    #[error("state is outside the chart domain: {0}")]
    OutOfChart(String),
    #[error("vector is not tangent at the origin")]
    NotTangent,
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error(transparent)]
    Numeric(#[from] NumericError),
    #[error(transparent)]
    Lie(#[from] LieError),
}
