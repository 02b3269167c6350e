use thiserror::Error;

use crate::lattice::VertexId;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown lattice `{0}`")]
    UnknownLattice(String),

    #[error("lattice `{name}` requires d >= 2, got d = {d}")]
    DimensionTooSmall { name: String, d: usize },

    #[error("invalid lattice specification: {0}")]
    InvalidSpec(String),

    #[error("cell index {cell} out of range (lattice has {cells} cell points)")]
    InvalidCell { cell: usize, cells: usize },

    #[error("translation index has {got} components, lattice dimension is {expected}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("box with {size} vertices exceeds the cap of {cap}")]
    BoxCapExceeded { size: usize, cap: usize },

    #[error("adjacent cell points {a} and {b} have different degrees; the truncated operator would not be symmetric")]
    NonUniformDegree { a: usize, b: usize },

    #[error("symmetric eigensolver did not converge within {iterations} sweeps (N = {size})")]
    EigenNoConvergence { size: usize, iterations: usize },

    #[error("eigenpair {index} has residual {residual:e} above {bound:e}")]
    EigenResidual {
        index: usize,
        residual: f64,
        bound: f64,
    },

    #[error("no increasing height function exists for `{0}`")]
    NoHeightFunction(String),

    #[error("vertex {0} lies outside the height-function domain")]
    OutsideDomain(VertexId),

    #[error("equation residual {residual:e} at {vertex} exceeds {tolerance:e}")]
    ResidualTooLarge {
        vertex: VertexId,
        residual: f64,
        tolerance: f64,
    },

    #[error("no closed-form dependence cone is known for `{0}`")]
    NoClosedFormCone(String),

    #[error("exhaustive two-points search is capped at {cap} interior vertices, graph has {size}")]
    ExhaustiveCapExceeded { size: usize, cap: usize },

    #[error("boundary graph is disconnected")]
    DisconnectedGraph,

    #[error("hexagon {center:?} and its neighbours do not fit in the box of radius {radius}")]
    HexagonNotContained { center: Vec<i64>, radius: f64 },

    #[error("no branch of arccos({w}) within pi/2 of {hint}")]
    NoBranch {
        w: num_complex::Complex64,
        hint: num_complex::Complex64,
    },

    #[error("path construction infeasible: {0}")]
    StageInfeasible(String),

    #[error("energy {0} is excluded for this construction")]
    ExcludedEnergy(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
