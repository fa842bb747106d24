//! Solver library for the radially symmetric fourth-order MEMS equation
//!
//! ```text
//!     gamma^2 u_tt + u_t + B Delta^2 u - T Delta u = -lambda / (1 + u)^2
//! ```
//!
//! on the unit ball in dimension d in {1, 2}, with clamped boundary conditions
//! `u = du/dnu = 0` and radial symmetry. `u` is the deflection of an elastic
//! plate toward a ground plate at `u = -1`; `lambda >= 0` is the drive voltage
//! parameter, `B > 0` bending stiffness, `T >= 0` tension, `gamma >= 0` the
//! inertia coefficient (`gamma = 0` gives the parabolic gradient flow).
//!
//! The crate provides:
//!
//! - [`model`]: the nonlinearity `g(u) = (1+u)^{-2}` with touchdown guards, and
//!   the scalar functions (`chi`, `z_lambda`, `i_d`) used by touchdown-time
//!   bounds and branch certificates.
//! - [`disc`]: uniform radial grids on `[0, 1]`, ball quadrature weights, the
//!   discrete Laplacian with axis limit and clamped closure, and the banded
//!   operator `A_h = B L_h L_h - T L_h`.
//! - [`linalg`]: banded LU with partial pivoting and a shift-invert solver for
//!   the principal eigenpair; the stability eigenvalue `mu1(u)`.
//! - [`branch`]: damped Newton for the stationary problem, natural plus
//!   pseudo-arclength continuation through the fold `lambda*`, fold location,
//!   the two-solutions query, and per-point qualitative certificates.
//! - [`omega`]: closed-form end-point profiles `omega` (the touching stationary
//!   limit) built from polynomial / exponential / modified Bessel bases, and
//!   the in-house Bessel evaluations `I0, I1, K0, K1`.
//! - [`evolution`]: implicit Euler (parabolic) and implicit midpoint
//!   (hyperbolic) time stepping with adaptive steps, touchdown detection, the
//!   functionals `N`, `M`, energy, and explicit touchdown-time bounds.
//! - [`validate`]: the named invariant suite behind `mems4 validate`.
//!
//! All numerics are deterministic: no randomness, no threading inside a run.

pub mod bessel;
pub mod branch;
pub mod disc;
pub mod evolution;
pub mod linalg;
pub mod model;
pub mod omega;
pub mod validate;

pub use branch::{Branch, BranchPoint, Certificates, ContinuationOptions, FoldRecord, Termination, TwoSolutions};
pub use disc::{assemble_a, inner_h2, laplacian, DiscreteOperator, OperatorKind, RadialField, RadialGrid};
pub use evolution::{EvolveOptions, EvolutionTrace, Sample, Verdict};
pub use linalg::{principal_eigen, BandLu, BandMatrix, EigenPair};
pub use model::{Dim, ModelParams, ScalarDiagnostics};
pub use omega::OmegaProfile;

/// Crate-wide error type. Domain violations (an evaluation in the touchdown
/// region `u <= -1`) and linear-algebra breakdowns are recoverable values, not
/// panics: the continuation and time steppers catch them to shrink steps.
#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("domain error: {what} at value {value}")]
    Domain { what: &'static str, value: f64 },

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("singular pivot while factoring column {column}")]
    SingularPivot { column: usize },

    #[error("{what} did not converge after {iterations} iterations (residual {residual:.3e})")]
    NoConvergence {
        what: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("branch has no fold (no sign change of dlambda/ds)")]
    NoFold,

    #[error("no bracketing branch segment for lambda = {lambda}")]
    NoBracket { lambda: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
