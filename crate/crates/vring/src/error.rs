//! Error type shared across the crate.
//!
//! Variants split into two families that the CLI maps onto exit codes:
//! configuration/domain problems (exit code 2) and numerical failures
//! encountered mid-computation (exit code 3).

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An operand lies outside the kernel's domain (target on or below the
    /// axis, coincident points without regularization, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// Adaptive quadrature exhausted its subdivision budget.
    #[error(
        "quadrature did not converge: error estimate {achieved:.3e} above target {requested:.3e} \
         after {subdivisions} subdivisions"
    )]
    QuadratureConvergence {
        achieved: f64,
        requested: f64,
        subdivisions: usize,
    },

    /// A ring specification violates its own constraints.
    #[error("invalid ring spec: {0}")]
    RingSpec(String),

    /// Two initial vorticity supports intersect.
    #[error("rings {i} and {j} overlap: centers {dist:.6} apart, radii sum {radii_sum:.6}")]
    RingOverlap {
        i: usize,
        j: usize,
        dist: f64,
        radii_sum: f64,
    },

    /// A particle reached r <= 0 during time integration. The step is
    /// aborted, never clamped.
    #[error(
        "particle {particle} of ring {ring} crossed the symmetry axis at t = {time:.6} (r = {r:.3e})"
    )]
    AxisCrossing {
        ring: usize,
        particle: usize,
        r: f64,
        time: f64,
    },

    /// A weight-normalized diagnostic was requested for a field with zero
    /// total mass.
    #[error("diagnostic undefined: total vorticity mass is zero")]
    ZeroMass,

    /// Two point vortices fell below the collision floor.
    #[error(
        "point vortices {i} and {j} collided at t = {time:.6}: distance {dist:.3e} below floor {floor:.3e}"
    )]
    Collision {
        i: usize,
        j: usize,
        dist: f64,
        floor: f64,
        time: f64,
    },

    /// Bad experiment configuration (schema, ranges, missing sections).
    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Machine-readable category printed by the CLI on failure.
    pub fn category(&self) -> &'static str {
        match self {
            Error::Domain(_) => "domain",
            Error::QuadratureConvergence { .. } => "quadrature-failure",
            Error::RingSpec(_) => "ring-spec",
            Error::RingOverlap { .. } => "ring-overlap",
            Error::AxisCrossing { .. } => "axis-crossing",
            Error::ZeroMass => "zero-mass",
            Error::Collision { .. } => "collision",
            Error::Config(_) => "config-parse",
            Error::Io(_) => "io",
            Error::Json(_) => "config-parse",
        }
    }

    /// CLI exit code: 2 for configuration errors, 3 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Domain(_)
            | Error::RingSpec(_)
            | Error::RingOverlap { .. }
            | Error::Config(_)
            | Error::Io(_)
            | Error::Json(_) => 2,
            Error::QuadratureConvergence { .. }
            | Error::AxisCrossing { .. }
            | Error::ZeroMass
            | Error::Collision { .. } => 3,
        }
    }
}
