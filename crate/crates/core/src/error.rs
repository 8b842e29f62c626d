use thiserror::Error;

/// Errors raised anywhere in the library.
///
/// Variants carry enough context for a CLI diagnostic; callers that need to
/// distinguish configuration mistakes from runtime failures use
/// [`Error::is_validation`].
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("chord of length {chord} exceeds the diameter 2r = {diameter}")]
    ChordTooLong { chord: f64, diameter: f64 },

    #[error("chord endpoints coincide")]
    DegenerateChord,

    #[error("value {value} outside the admissible range [{lo}, {hi}]")]
    OutOfRange { value: f64, lo: f64, hi: f64 },

    #[error("invalid disc-polygon: {0}")]
    InvalidPolygon(String),

    #[error("non-finite coordinate ({x}, {y})")]
    NonFinite { x: f64, y: f64 },

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("unknown registered model '{0}'")]
    UnknownModel(String),

    #[error("rejection sampler exceeded {0} attempts for one point")]
    SamplerStall(u64),

    #[error("adaptive quadrature exceeded depth cap {0}")]
    QuadratureFailure(u32),

    #[error("empty point set")]
    EmptyInput,

    #[error("hull vertex ({x}, {y}) lies outside the model")]
    VertexOutsideModel { x: f64, y: f64 },

    #[error("height t = {t} outside [0, t_star = {t_star}]")]
    HeightOutOfRange { t: f64, t_star: f64 },

    #[error("no boundary intersection found: {0}")]
    IntersectionNotFound(String),

    #[error("points must lie in the interior of the model")]
    PointsOutsideModel,

    #[error("degenerate triangle")]
    DegenerateTriangle,

    #[error("r = {r} is not admissible: r < r_M = {r_m}")]
    RadiusNotAdmissible { r: f64, r_m: f64 },

    #[error("need at least {needed} replications per n, got {got} for n = {n}")]
    InsufficientReplications { n: u64, needed: usize, got: usize },

    #[error("value {0} is not positive; cannot take a logarithm")]
    NonpositiveValue(f64),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("incident rate {rate} exceeds the limit {limit}")]
    TooManyIncidents { rate: f64, limit: f64 },
}

impl Error {
    /// True for errors caused by bad user input or configuration rather than
    /// a failure during computation.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::RadiusNotAdmissible { .. }
                | Error::InvalidConfig(_)
                | Error::InvalidModel(_)
                | Error::UnknownModel(_)
                | Error::OutOfRange { .. }
                | Error::NonFinite { .. }
                | Error::HeightOutOfRange { .. }
                | Error::InsufficientReplications { .. }
                | Error::NonpositiveValue(_)
                | Error::EmptyInput
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
