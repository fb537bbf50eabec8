//! Horosphere curvature toolkit.
//!
//! Computes the shape operator of horospheres in negatively curved model
//! spaces as the stable solution of the matrix Riccati equation
//! `S' + S^2 + R(., c')c' = 0` along a geodesic, derives the intrinsic scalar
//! curvature of the horosphere through the Gauss equation, and checks the
//! traced, integrated and inequality forms of these relations numerically.
//!
//! Module map:
//!
//! * [`models`]: chart metrics, Christoffel symbols and curvature tensors.
//! * [`geodesic`]: geodesic flow with a parallel orthonormal frame.
//! * [`riccati`]: stable Riccati solutions and their residual checks.
//! * [`horosphere`]: Gauss-equation scalar curvature, sum-product gap, spread.
//! * [`liouville`]: Monte-Carlo averages over unit tangent spheres.
//! * [`report`]: verification suites, direction scans and their serialization.

// `!(x > 0.0)` style guards are used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod geodesic;
pub mod horosphere;
pub mod liouville;
pub mod linalg;
pub mod models;
pub mod report;
pub mod riccati;

pub use error::{GeomError, Result};
pub use horosphere::HorosphereReport;
pub use liouville::{SphereAverage, SphereSampler};
pub use geodesic::{FrameSeeding, GeodesicState, IntegratorConfig};
pub use riccati::{InitialCondition, RiccatiConfig, RiccatiRun, ShapeOperator};

pub use models::{CurvatureMode, MetricModel, ModelSpec, Point, TangentVector};

