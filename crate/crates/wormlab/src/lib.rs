//! Numerical laboratory for Worm domains: exact model metrics, Worm and
//! pre-Worm geometry, Kobayashi metric estimation by extremal discs and metric
//! graphs, Gromov hyperbolicity diagnostics, and experiment drivers.

pub mod error;
pub mod exact;
pub mod experiments;
pub mod geom;
pub mod gromov;
pub mod numeric;
pub mod worm;

pub use error::{Error, Result};
pub use geom::{AccuracyClass, BoundDirection, ComplexPoint2, ComplexScalar, HermitianForm2, MetricOracle, RealInterval, TangentVector2};
