//! Numerical engine for radial maps of two-dimensional Riemannian metrics: geodesics and the
//! exponential map, the equal-area radial distortion with its slip, and a verification suite
//! that checks both against closed forms and against each other.

pub mod distortion;
pub mod error;
pub mod geodesic;
pub mod metric;
pub mod numerics;
pub mod spec;
pub mod table;
pub mod verification;

pub use distortion::{KappaField, LengthProfile, RadialProfile, SyntheticPoint};
pub use error::{Error, Result};
pub use geodesic::{GeodesicCurve, NormalFrame, SampledCurve};
pub use metric::{ChartPoint, Domain, MetricField, TangentTuple, Variance, WarpChart, WarpProfile};
pub use spec::ManifoldSpec;
pub use verification::{CheckRecord, Resolution, VerificationReport};
