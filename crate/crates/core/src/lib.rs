//! Steady Euler flow admissibility for 2D vorticity configurations.
//!
//! A vorticity configuration on a surface is encoded as a *measured Reeb
//! graph*: a finite oriented graph with a strictly monotone height on each
//! edge and a positive measure describing how much area sits over each part
//! of an edge. This crate decides whether such a configuration is attainable
//! by a steady ideal flow, computes the space of circulation functions, the
//! polytope of admissible circulations, Casimir (moment) invariants, and the
//! local building blocks (cylinder / elliptic / hyperbolic charts) of the
//! steady flows themselves. A companion pipeline extracts measured Reeb
//! graphs from scalar fields on triangle meshes.

pub mod casimir;
pub mod certificate;
pub mod circulation;
pub mod error;
pub mod generate;
pub mod graph;
pub mod linalg;
pub mod lp;
pub mod measure;
pub mod mesh;
pub mod poly;
pub mod polytope;
pub mod scalar;
pub mod steady;
mod steady_verify;

pub use error::Error;
pub use scalar::{Scalar, Sign};

/// Default threshold below which a floating-point quantity has no
/// trustworthy sign.
pub const SIGN_TOL: f64 = 1e-9;
