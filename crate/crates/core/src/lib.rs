//! Holomorphic-invariant complex Finsler metrics on products of model
//! Hermitian manifolds, with numerical checks of their structure.

pub mod automorphisms;
pub mod cli;
pub mod connection;
pub mod coords;
pub mod curvature;
pub mod error;
pub mod factors;
pub mod fd;
pub mod geodesics;
pub mod linalg;
pub mod metric;
pub mod product;
pub mod report;
pub mod sampling;

pub use error::{Error, Result};
pub use factors::{FactorKind, FactorMetric};
pub use metric::ComplexFinslerMetric;
pub use product::{MetricParams, ProductManifold, ProductMetric};
