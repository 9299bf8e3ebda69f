use alloc::string::String;

use crate::geometry::Point;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("infeasible grading at ({x}, {y}): local_h = {local_h} is below the minimum {min_h}", x = center.x, y = center.y)]
    InfeasibleGrading { center: Point, local_h: f64, min_h: f64 },

    #[error("mesh generation failed: {0}")]
    Meshing(String),

    #[error("slit polyline is not resolved by the mesh ({0}); re-mesh with the polyline as a constraint")]
    SlitNotResolved(String),

    #[error("point ({x}, {y}) is outside the mesh", x = .0.x, y = .0.y)]
    Outside(Point),

    #[error("magnetic potential is undefined at the pole")]
    AtPole,

    #[error("weight q is not positive ({value}) at ({x}, {y})", x = at.x, y = at.y)]
    NonPositiveWeight { value: f64, at: Point },

    #[error("matrix is not positive definite (pivot {pivot} at column {column})")]
    NotPositiveDefinite { column: usize, pivot: f64 },

    #[error("eigensolver did not converge in {iterations} iterations (worst residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("zero vector: {0}")]
    ZeroVector(&'static str),

    #[error("non-positive boundary mass H = {value} at r = {radius}")]
    NonPositiveMass { radius: f64, value: f64 },

    #[error("zero Dirichlet energy")]
    ZeroEnergy,

    #[error("radius {radius} exceeds the mesh radius {mesh_radius}")]
    RadiusTooLarge { radius: f64, mesh_radius: f64 },

    #[error("no vanishing order in 1..={max_j} fits with relative residual below {threshold}")]
    NoVanishingOrder { max_j: usize, threshold: f64 },

    #[error("power-law fit failed: {0}")]
    Fit(String),

    #[error("eigenvalue {index} is not simple (relative gap {gap:e} below {tol:e})")]
    NotSimple { index: usize, gap: f64, tol: f64 },

    #[error("oracle mismatch: {0}")]
    OracleMismatch(String),

    #[error("crack solve failed at alpha = {alpha}: {reason}")]
    CrackSolve { alpha: f64, reason: String },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
