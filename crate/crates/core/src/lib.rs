//! Max-min CRLB jammer placement against cooperative localization.
//!
//! A single jammer at `z` raises every target's position-error bound. The
//! solvers find the `z` (at least `epsilon` from every target) that maximizes
//! the smallest bound.

pub mod crlb;
pub mod error;
pub mod geometry;
pub mod goldens;
pub mod io;
pub mod oracle;
pub mod scenario;
pub mod solver;

pub use crlb::{ChannelModel, EnergyModel, JammingParams, SnrGate, TargetProfile};
pub use error::{GeometryError, IoError, ModelError, SolverError};
pub use geometry::Point2;
pub use oracle::{field_map, grid_search, refine, FieldMap, GridSpec};
pub use scenario::{bundled, Anchor, AnchorId, Scenario, TargetId, TargetSpec};
pub use solver::{solve, solve_gated, sweep, Branch, PlacementResult, SweepResult};
