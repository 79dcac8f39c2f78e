use thiserror::Error;

use crate::expr::ExprError;

/// Errors produced by the analysis pipeline.
///
/// Every variant belongs to one of two classes: validation failures (bad
/// input, inconsistent data) and numerical failures (a computation could not
/// be resolved at the requested accuracy). The CLI maps them to exit codes 2
/// and 3 respectively.
#[derive(Debug, Error)]
pub enum Error {
    #[error("spec error at {location}: {message}")]
    Spec { location: String, message: String },

    #[error(transparent)]
    Expression(#[from] ExprError),

    #[error("point ({0:.6}, {1:.6}) lies outside the parameter domain")]
    OutsideDomain(f64, f64),

    #[error("degenerate chart point ({0:.6}, {1:.6}): frame is undefined")]
    DegeneratePoint(f64, f64),

    #[error("chart is not orthogonal at ({w1:.6}, {w2:.6}): |x1.x2|/(|x1||x2|) = {ratio:.3e}")]
    NonOrthogonal { w1: f64, w2: f64, ratio: f64 },

    #[error("Hölder fit failed: worst sandwich violation {violation:.3e} at r = {radius:.3e}")]
    FitFailed { violation: f64, radius: f64 },

    #[error("boundary component {component} has a zero-length segment ({segment})")]
    DegenerateCurve { component: usize, segment: usize },

    #[error("boundary component {component} is not closed (gap {gap:.3e})")]
    OpenBoundary { component: usize, gap: f64 },

    #[error("cusp vertex at segment junction {junction} of component {component}")]
    CuspVertex { component: usize, junction: usize },

    #[error("arclength {0} is a boundary vertex; geodesic curvature is undefined there")]
    VertexPoint(f64),

    #[error("zeros at ({0:.6}, {1:.6}) and ({2:.6}, {3:.6}) are not isolated")]
    ZeroNotIsolated(f64, f64, f64, f64),

    #[error("field vanishes along a curve near ({0:.6}, {1:.6})")]
    CurveOfZeros(f64, f64),

    #[error("winding could not be resolved near ({0:.6}, {1:.6}); loop passes too close to a zero")]
    UnresolvedWinding(f64, f64),

    #[error("inconsistent topology: triangulation gives chi = {triangulated}, genus/boundary give {descriptor}")]
    InconsistentTopology { triangulated: i64, descriptor: i64 },

    #[error("site {0} has no rate weight")]
    MissingWeight(usize),

    #[error("wedge angle {0:.3e} is not positive")]
    ZeroWedge(f64),

    #[error("search bound {bound} is too small: minimum moved from {at_bound} to {at_next}")]
    BoundTooSmall {
        bound: String,
        at_bound: String,
        at_next: String,
    },

    #[error("no admissible configuration satisfies the topological constraint")]
    InfeasibleParity,

    #[error("instance too large for the brute-force oracle: {0}")]
    InstanceTooLarge(String),

    #[error("quadrature unresolved: Richardson estimate {estimate:.3e} exceeds 1% of {value:.6e}")]
    QuadratureUnresolved { estimate: f64, value: f64 },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn spec(location: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Spec {
            location: location.into(),
            message: message.into(),
        }
    }

    /// Exit code used by the command line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Spec { .. }
            | Error::Expression(ExprError::Syntax { .. })
            | Error::Expression(ExprError::UnknownIdentifier { .. })
            | Error::NonOrthogonal { .. }
            | Error::DegenerateCurve { .. }
            | Error::OpenBoundary { .. }
            | Error::CuspVertex { .. }
            | Error::InconsistentTopology { .. }
            | Error::MissingWeight(_)
            | Error::InstanceTooLarge(_)
            | Error::OutsideDomain(..)
            | Error::Io { .. } => 2,
            _ => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
