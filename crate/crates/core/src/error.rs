use thiserror::Error;

/// Errors raised by the simulation pipelines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument is outside the domain where the operation is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// The trap has no interior minimum inside its parabolic section.
    #[error("degenerate trap: f = {f} must be below z/2 = {half_z}")]
    DegenerateTrap { f: f64, half_z: f64 },

    /// The requested configuration has no open decay channel or is otherwise unsupported.
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// Grid or run configuration violates a precondition.
    #[error("configuration error: {0}")]
    Config(String),

    /// The peak is narrower than the energy resolution floor.
    #[error("resonance width unresolved (gamma < {upper_bound:e})")]
    WidthUnresolved { upper_bound: f64 },

    /// Fewer resonances than the culling pipeline needs.
    #[error("trap shape error: {0}")]
    Shape(String),

    /// No admissible splitting path exists on the gap map.
    #[error("no splitting path with gap >= {min_gap}: best bottleneck gap is {bottleneck}")]
    PathNotFound { min_gap: f64, bottleneck: f64 },

    /// A numerical routine failed to converge or became unstable.
    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn numerical(msg: impl Into<String>) -> Self {
        Error::Numerical(msg.into())
    }

    /// True for errors caused by invalid input rather than by the numerics.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Domain(_)
                | Error::DegenerateTrap { .. }
                | Error::Unsupported(_)
                | Error::Config(_)
                | Error::Shape(_)
                | Error::PathNotFound { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
