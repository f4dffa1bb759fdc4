use nalgebra::{DMatrix, DVector};

use super::{EqfError, LieGroup};

/// Dimensions of one filtering problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Dims {
    /// State-space dimension `m` (chart coordinates).
    pub state: usize,
    /// Output dimension `n`.
    pub output: usize,
    /// Input dimension `l`.
    pub input: usize,
    /// Lie algebra dimension `g`.
    pub group: usize,
    /// Dimension of the ambient space the state is embedded in.
    pub ambient: usize,
}

/// An equivariant kinematic system: state action, lift, output and chart.
///
/// Inputs, outputs, algebra elements and chart coordinates are plain vectors.
/// Tangent vectors of the state space are expressed in the ambient
/// coordinates returned by [`embed`](Self::embed).
pub trait EquivariantSystem: Sync {
    type Group: LieGroup;
    type State: Clone + Send + Sync;

    fn dims(&self) -> Dims;

    /// Right action φ(X, ξ) of the group on the state space.
    fn phi(&self, x: &Self::Group, xi: &Self::State) -> Self::State;

    /// Input action ψ(X, u). Systems without a closed form return `None`; the
    /// state matrix is then computed without it.
    fn psi(&self, _x: &Self::Group, _u: &DVector<f64>) -> Option<DVector<f64>> {
        None
    }

    /// Lift Λ(ξ, u) in algebra coordinates.
    fn lift(&self, xi: &Self::State, u: &DVector<f64>) -> DVector<f64>;

    /// Configuration output h(ξ).
    fn output(&self, xi: &Self::State) -> DVector<f64>;

    /// Output action ρ(X, y), when the output is equivariant.
    fn rho(&self, _x: &Self::Group, _y: &DVector<f64>) -> Option<DVector<f64>> {
        None
    }

    /// The fixed origin ξ°.
    fn origin(&self) -> Self::State;

    /// Local coordinates ϑ about the origin, `ϑ(ξ°) = 0`.
    fn chart(&self, xi: &Self::State) -> Result<DVector<f64>, EqfError>;

    fn chart_inverse(&self, eps: &DVector<f64>) -> Self::State;

    /// Identification of chart coordinates with 𝔪 ⊂ 𝔤. Only normal charts
    /// (`ϑ⁻¹(ε) = φ(exp(ε^∧), ξ°)`) provide this.
    fn wedge(&self, _eps: &DVector<f64>) -> Option<DVector<f64>> {
        None
    }

    /// Ambient coordinates of a state.
    fn embed(&self, xi: &Self::State) -> DVector<f64>;

    /// System vector field f_u(ξ) in ambient coordinates.
    fn vector_field(&self, xi: &Self::State, u: &DVector<f64>) -> DVector<f64>;

    /// Right inverse of `D_E|id φ_ξ°(E)` as a g×ambient matrix, if known in
    /// closed form.
    fn dphi_origin_pinv(&self) -> Option<DMatrix<f64>> {
        None
    }

    /// `D_ε|0 ϑ⁻¹(ε)` as an ambient×m matrix, if known in closed form.
    fn chart_inverse_differential(&self) -> Option<DMatrix<f64>> {
        None
    }

    /// True for group-affine systems posed on a group torsor with right
    /// translation, identity origin and logarithmic chart. Only these have
    /// exactly linear pre-observer error dynamics.
    fn is_group_affine_torsor(&self) -> bool {
        false
    }

    /// Step for the central differences used by the framework.
    fn jacobian_step(&self) -> Option<f64> {
        None
    }
}
