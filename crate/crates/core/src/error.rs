use thiserror::Error;

/// Errors produced by graph construction, transforms, and the CLI plumbing.
#[derive(Debug, Error)]
pub enum Error {
    #[error("graph is disconnected")]
    DisconnectedGraph,

    #[error("self loop at vertex {0}")]
    SelfLoop(usize),

    #[error("non-positive edge weight {weight} on edge ({i},{j})")]
    NonPositiveWeight { i: usize, j: usize, weight: f64 },

    #[error("duplicate undirected edge ({i},{j})")]
    DuplicateEdge { i: usize, j: usize },

    #[error("infeasible graph spec: {0}")]
    InfeasibleSpec(String),

    #[error("graph generation still disconnected after {0} attempts")]
    ConnectivityRetriesExceeded(usize),

    #[error("matrix is not symmetric (max asymmetry {0:.3e})")]
    NotSymmetric(f64),

    #[error("eigensolver failed to converge")]
    EigensolverFailure,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("index {index} out of range for size {size}")]
    IndexOutOfRange { index: usize, size: usize },

    #[error("cannot normalize an identically zero kernel")]
    ZeroKernel,

    #[error("window has zero norm")]
    ZeroWindow,

    #[error("signal is identically zero")]
    ZeroSignal,

    #[error("window has zero mean (ghat(0) = 0); reconstruction undefined")]
    ZeroMeanWindow,

    #[error("translated window norm {0:.3e} is numerically singular")]
    NearSingularNorm(f64),

    #[error("spectrum variant mismatch: expected {expected}, got {got}")]
    VariantMismatch {
        expected: &'static str,
        got: &'static str,
    },

    #[error("dual graph is disconnected")]
    DisconnectedDual,

    #[error("kernel form not supported for this operation: {0}")]
    UnsupportedKernelForm(&'static str),

    #[error("operation requires a {expected} kernel")]
    WrongKernelForm { expected: &'static str },

    #[error("source and target vertex coincide ({0})")]
    SameVertex(usize),

    #[error("degenerate degrees: structural d_max = {0} < 2")]
    DegenerateDegrees(usize),

    #[error("kernel has zero DC component")]
    ZeroDc,

    #[error("invalid cluster count k = {k} for {n} points")]
    BadK { k: usize, n: usize },

    #[error("invalid band [{lo}, {hi}] for lambda_max = {lambda_max}")]
    BadBand { lo: f64, hi: f64, lambda_max: f64 },

    #[error("feature matrix is numerically constant; clustering is degenerate")]
    DegenerateFeatures,

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
