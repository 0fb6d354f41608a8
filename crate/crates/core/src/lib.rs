//! Frenet-coordinate immersed finite elements on Cartesian meshes with a
//! symmetric interior penalty DG discretization for 2D elliptic interface
//! problems.

pub mod assembly;
pub mod error;
pub mod geometry;
pub mod ife;
pub mod jet;
pub mod mesh;
pub mod problems;
pub mod quadrature;
pub mod solver;

/// Crate version, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub use assembly::{CutSpace, Discretization, DiscretizationOptions, ErrorReport, DEFAULT_SIGMA0};
pub use error::{Error, Result};
pub use geometry::{Curve, FrenetFrame, FrenetPoint, Side, SidePair, Vec2};
pub use ife::{LocalSpace, PiecewiseFrenetPoly, XiFamily};
pub use mesh::{FrenetChart, Mesh, Rect};
pub use problems::Problem;
pub use quadrature::QuadRule;
pub use solver::{GlobalSystem, Rates, SolveRecord, DEFAULT_TOLERANCE};
