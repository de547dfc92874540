use num_complex::Complex64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors raised while building or analyzing channels and generators.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix entry count {found} does not match shape {rows}x{cols}")]
    EntryCount { rows: usize, cols: usize, found: usize },

    #[error("matrix contains a non-finite entry")]
    NonFinite,

    #[error("eigenvalue iteration did not converge within {iterations} sweeps")]
    NoConvergence { iterations: usize },

    #[error("trace preservation violated: residual {residual:.3e} exceeds {tolerance:.1e}")]
    TraceNotPreserved { residual: f64, tolerance: f64 },

    #[error("complete positivity violated: Choi eigenvalue {min_eigenvalue:.3e} below -{tolerance:.1e}")]
    NotCompletelyPositive { min_eigenvalue: f64, tolerance: f64 },

    #[error("operator is not Hermitian: residual {residual:.3e} exceeds {tolerance:.1e}")]
    NotHermitian { residual: f64, tolerance: f64 },

    #[error("an empty operator list was supplied")]
    EmptyOperatorList,

    #[error("no eigenvalue cluster within {tolerance:.1e} of {target} (nearest at distance {distance:.3e})")]
    MissingStationaryCluster {
        target: Complex64,
        distance: f64,
        tolerance: f64,
    },

    #[error("spectral multiplicity {spectral} disagrees with nullspace dimension {nullspace}")]
    ClusterMismatch { spectral: usize, nullspace: usize },

    #[error("peripheral eigenvalue {value} is defective: algebraic {algebraic}, geometric {geometric}")]
    PeripheralDefect {
        value: Complex64,
        algebraic: usize,
        geometric: usize,
    },

    #[error("biorthogonal normalization broke down (smallest singular value {min_singular:.3e})")]
    Biorthogonalization { min_singular: f64 },

    #[error("support of the reference state is not invariant: leakage {residual:.3e}")]
    SupportLeakage { residual: f64 },

    #[error("could not extract a positive semidefinite state (min eigenvalue {min_eigenvalue:.3e})")]
    PositivityExtraction { min_eigenvalue: f64 },

    #[error("eigenvalue clusters separated by {separation:.3e}, need at least {required:.3e}")]
    IllSeparatedClusters { separation: f64, required: f64 },

    #[error("rank sequence for eigenvalue {value} sums to {found}, expected multiplicity {expected}")]
    InconsistentWeyr {
        value: Complex64,
        expected: usize,
        found: usize,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),

    #[error("CSV output failed: {0}")]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
