use std::path::PathBuf;

use thiserror::Error;

use crate::geometry::Point2;
use crate::scenario::TargetId;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("empty point set")]
    EmptyInput,
    #[error("non-finite coordinate in {0}")]
    NonFinite(Point2),
    #[error("invalid circle radius {0}")]
    InvalidRadius(f64),
    #[error("concentric circles")]
    ConcentricCircles,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("singular anchor geometry{}", .0.map(|t| format!(" for target {t}")).unwrap_or_default())]
    SingularGeometry(Option<TargetId>),
    #[error("jammer position coincides with target {0}")]
    CoincidentJammer(TargetId),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("SNR gate ill-posed: E/SNR0 - N0/2 = {0} must be positive")]
    GateIllPosed(f64),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolverError {
    #[error("scenario has no targets")]
    NoTargets,
    #[error("targets {0} and {1} coincide")]
    CoincidentTargets(TargetId, TargetId),
    #[error("a single target has no finite unconstrained optimum")]
    Unbounded,
    #[error("no feasible grid point in the search box")]
    NoFeasiblePoint,
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Error)]
pub enum IoError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("schema violation: {0}")]
    Schema(String),
    #[error("no records to save")]
    EmptyRecords,
    #[error(transparent)]
    Model(#[from] ModelError),
}
