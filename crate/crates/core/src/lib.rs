//! Topological defect analysis for tangent fields on charted surfaces.

pub mod boundary;
pub mod commands;
pub mod conservation;
pub mod energy;
pub mod error;
pub mod expr;
pub mod fields;
pub mod geometry;
pub mod predictor;
pub mod quadrature;
pub mod rates;
pub mod report;
pub mod spec;

pub use error::{Error, Result};
