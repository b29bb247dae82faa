//! Error type shared by all engine modules.

use thiserror::Error;

#[derive(Error, Debug)]
pub enum EngineError {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("multi-index weight overflows the integer type at total degree {degree}")]
    DegreeTooLarge { degree: usize },

    #[error("constant term of the series is not the identity (cannot invert)")]
    NotIdentityAtZero,

    #[error("resolvent I - Z(lambda)A is singular at lambda = {point}")]
    SingularResolvent { point: String },

    #[error("colligation is not contractive: sigma_max(U) = {sigma}")]
    NotContractive { sigma: f64 },

    #[error("output pair is not contractive to tolerance: residual {residual:.3e}")]
    PairNotContractive { residual: f64 },

    #[error(
        "gramian iteration did not converge within {iterations} iterations (residual {residual:.3e}); pair not output-stable at this tolerance"
    )]
    GramianDiverged { iterations: usize, residual: f64 },

    #[error("observability gramian singular to tolerance (min eigenvalue {min_eig:.3e}); pair not exactly observable")]
    NotExactlyObservable { min_eig: f64 },

    #[error("observability stack rank-deficient at word cap {cap} (rank {rank} < {dim}); equivalence test inconclusive, raise the cap")]
    ObservabilityRankDeficient { cap: usize, rank: usize, dim: usize },

    #[error(
        "subspace not invariant under the backward shift: image of basis vector {basis_index} along variable {var} leaves the span (residual {residual:.3e})"
    )]
    NotShiftInvariant {
        basis_index: usize,
        var: usize,
        residual: f64,
    },

    #[error("H(K_S) not captured at this degree cap; raise N (reproducing-property residual {residual:.3e})")]
    HksValidationFailed { residual: f64 },

    #[error("functional-model data inconsistent: least-squares residual {residual:.3e} above tolerance {tol:.3e}")]
    ModelInconsistency { residual: f64, tol: f64 },

    #[error("parameter X is not a contraction: norm {norm}")]
    ParameterNotContractive { norm: f64 },

    #[error("defect matrix not positive semidefinite to tolerance (min eigenvalue {min_eig:.3e})")]
    NotPsd { min_eig: f64 },

    #[error("interpolation point lies on or outside the unit sphere: |omega| = {norm}")]
    PointNotInBall { norm: f64 },

    #[error("row contraction required: sigma_max(T) = {sigma}")]
    NotRowContraction { sigma: f64 },

    #[error("pair fails the inner-representer hypotheses: {0}")]
    HypothesesFailed(String),

    #[error("Hankel probe size {n} exceeds the configured bound {bound}")]
    HankelBound { n: usize, bound: usize },

    #[error("invalid input: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, EngineError>;
