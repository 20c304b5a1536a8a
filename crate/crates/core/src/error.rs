use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors shared across the mesh, geometry, partitioning and solver layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("face {face} is not a simple cycle")]
    NonSimpleFace { face: usize },
    #[error("vertex {vertex} is not referenced by any face")]
    DanglingVertex { vertex: usize },
    #[error("edge ({a}, {b}) has more than two incident faces")]
    NonManifoldEdge { a: usize, b: usize },
    #[error("cell {cell} boundary is not a closed 2-manifold")]
    NonManifoldCellBoundary { cell: usize },
    #[error("cell {cell} has an edge used by != 2 of its faces")]
    OpenCell { cell: usize },
    #[error("cell {cell} has non-positive volume after orientation resolution")]
    InvertedCell { cell: usize },
    #[error("element {element} is degenerate (measure below tolerance)")]
    DegenerateElement { element: usize },
    #[error("mesh has no elements")]
    EmptyMesh,
    #[error("element set is not interface-connected")]
    DisconnectedUnion,
    #[error("merged element is not a manifold")]
    NonManifoldUnion,
    #[error("unsupported order k={k} in dimension {dim}")]
    UnsupportedOrder { k: usize, dim: usize },
    #[error("quadrature failed on element {element}: {reason}")]
    QuadratureFailure { element: usize, reason: String },
    #[error("matrix is not positive definite")]
    NotPositiveDefinite,
    #[error("iterative solver did not converge within {iterations} iterations")]
    NoConvergence { iterations: usize },
    #[error("records come from different problems or orders")]
    MismatchedRuns,
    #[error("invalid mesh file: {0}")]
    Parse(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
