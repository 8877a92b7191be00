use thiserror::Error;

/// Errors produced anywhere in the denoising pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("mesh has no faces")]
    EmptyMesh,

    #[error("face {face} references vertex {index}, but the mesh has {vertex_count} vertices")]
    IndexOutOfRange {
        face: usize,
        index: usize,
        vertex_count: usize,
    },

    #[error("face {face} is degenerate (repeated vertex or zero area)")]
    DegenerateFace { face: usize },

    #[error("vertex {vertex} has a non-finite coordinate")]
    NonFiniteVertex { vertex: usize },

    #[error("edge ({a}, {b}) is shared by more than two faces")]
    NonManifoldEdge { a: usize, b: usize },

    #[error("faces {first} and {second} traverse their shared edge in the same direction")]
    InconsistentOrientation { first: usize, second: usize },

    #[error("face {face} meets the same neighbouring face across two of its edges")]
    DegenerateStencil { face: usize },

    #[error("size mismatch: expected {expected}, found {found}")]
    SizeMismatch { expected: usize, found: usize },

    #[error("channel mismatch: expected {expected} channels, found {found}")]
    ChannelMismatch { expected: usize, found: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("linear solve failed: {reason} (relative residual {relative_residual:e})")]
    LinearSolveFailure {
        reason: String,
        relative_residual: f64,
    },

    #[error("non-finite value in iterate at iteration {iteration}")]
    NonFinite { iteration: usize },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("line {line}: face with {arity} vertices (enable triangulation to accept polygons)")]
    UnsupportedFace { line: usize, arity: usize },

    #[error("unsupported mesh file extension: {0:?}")]
    UnsupportedFormat(String),

    #[error("meshes differ in connectivity: {0}")]
    ConnectivityMismatch(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    /// True for failures of the numerical solve, as opposed to bad input data.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::LinearSolveFailure { .. } | Error::NonFinite { .. }
        )
    }
}
