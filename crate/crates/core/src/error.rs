use num_complex::Complex64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// The direction is the south pole, which has no stereographic coordinate.
    #[error("direction is the south pole (outside the stereographic chart)")]
    SouthPole,

    #[error("direction coordinate is not finite at mu = {mu}")]
    DegenerateChart { mu: Complex64 },

    /// Optical scalars blow up: the point is focal.
    #[error("optical scalars blow up (focal point) at r = {r}: |denominator| = {denominator:e}")]
    FocalBlowup { r: f64, denominator: f64 },

    #[error("congruence has twist {twist:e} at mu = {mu}; no orthogonal wavefront exists")]
    TwistedCongruence { mu: Complex64, twist: f64 },

    #[error("wavefront loop-closure residual {residual:e} exceeds {tolerance:e}")]
    NonIntegrable { residual: f64, tolerance: f64 },

    #[error("incident ray does not meet the surface point (intersection residual {residual:e})")]
    NotIncident { residual: f64 },

    #[error("profile curve is singular at u = {u} (|dz0/du| = {speed:e})")]
    SingularProfile { u: f64, speed: f64 },

    #[error("the source lies on the mirror")]
    SourceOnMirror,

    #[error("focal surface is degenerate at u = {u} (|denominator| = {denominator:e})")]
    DegenerateFocal { u: f64, denominator: f64 },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),
}

impl Error {
    /// Short machine-readable code, used by diagnostics streams.
    pub fn code(&self) -> &'static str {
        match self {
            Error::SouthPole => "south_pole",
            Error::DegenerateChart { .. } => "degenerate_chart",
            Error::FocalBlowup { .. } => "focal_blowup",
            Error::TwistedCongruence { .. } => "twisted_congruence",
            Error::NonIntegrable { .. } => "non_integrable",
            Error::NotIncident { .. } => "not_incident",
            Error::SingularProfile { .. } => "singular_profile",
            Error::SourceOnMirror => "source_on_mirror",
            Error::DegenerateFocal { .. } => "degenerate_focal",
            Error::InvalidGrid(_) => "invalid_grid",
        }
    }
}
