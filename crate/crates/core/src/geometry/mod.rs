//! Charted surfaces: frames, metric coefficients, the F vector, fundamental
//! forms, Gaussian curvature and local Hölder data.

mod chart;
mod domain;
mod holder;

pub use chart::{
    ChartFamily, ConeForm, Frame, LocalGeometry, MetricData, SurfaceChart, TOL_ORTH, V3,
};
pub use domain::{Domain, P2};
pub use holder::{holder_fit, HolderData};
