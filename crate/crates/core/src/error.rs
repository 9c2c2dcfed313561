use alloc::string::String;
use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

/// Every failure the solver can report. [`Error::code`] gives the stable
/// machine-readable name the CLI puts in its error JSON.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Input violates a documented precondition (bad alpha, masses, node counts...).
    InvalidInput(String),
    /// Evaluation point too close to a centre.
    Singularity { centre: usize, distance: f64 },
    /// Far-field quantity requested inside the centre disc.
    Domain { radius: f64, min_radius: f64 },
    EndpointRadiusMismatch { r_minus: f64, r_plus: f64 },
    CoincidentEndpoints,
    PointOnPath { distance: f64 },
    IllConditionedWinding { residual: f64 },
    InvalidPartition(String),
    /// All parity bits equal: the class cannot separate the centres.
    InadmissibleClass,
    /// The seed path is not in the requested class.
    ClassMismatch,
    ClassChangeUnrecoverable { iteration: usize },
    MaxIterations { iterations: usize, gradient_norm: f64 },
    CollisionBarrierSaturated { centre: usize, distance: f64 },
    NoRoutingFound,
    DegeneratePath,
    EnergyResidualTooLarge { residual: f64, bound: f64 },
    CloseEncounter { centre: usize, distance: f64 },
    StepUnderflow { time: f64, step: f64 },
    WrongAlpha { alpha: f64 },
    OverlappingRegularization { centre: usize, other: usize },
    TailTooShort,
    InsufficientSpan { decades: f64 },
    InsufficientData { needed: usize, got: usize },
    WindowTooShort { needed: f64, available: f64 },
}

impl Error {
    pub fn code(&self) -> &'static str {
        match self {
            Error::InvalidInput(_) => "invalid-input",
            Error::Singularity { .. } => "singularity",
            Error::Domain { .. } => "domain",
            Error::EndpointRadiusMismatch { .. } => "endpoint-radius-mismatch",
            Error::CoincidentEndpoints => "coincident-endpoints",
            Error::PointOnPath { .. } => "point-on-path",
            Error::IllConditionedWinding { .. } => "ill-conditioned-winding",
            Error::InvalidPartition(_) => "invalid-partition",
            Error::InadmissibleClass => "inadmissible-class",
            Error::ClassMismatch => "class-mismatch",
            Error::ClassChangeUnrecoverable { .. } => "class-change-unrecoverable",
            Error::MaxIterations { .. } => "max-iterations",
            Error::CollisionBarrierSaturated { .. } => "collision-barrier-saturated",
            Error::NoRoutingFound => "no-routing-found",
            Error::DegeneratePath => "degenerate-path",
            Error::EnergyResidualTooLarge { .. } => "energy-residual-too-large",
            Error::CloseEncounter { .. } => "close-encounter",
            Error::StepUnderflow { .. } => "step-underflow",
            Error::WrongAlpha { .. } => "wrong-alpha",
            Error::OverlappingRegularization { .. } => "overlapping-regularization",
            Error::TailTooShort => "tail-too-short",
            Error::InsufficientSpan { .. } => "insufficient-span",
            Error::InsufficientData { .. } => "insufficient-data",
            Error::WindowTooShort { .. } => "window-too-short",
        }
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidInput(msg) => write!(f, "invalid input: {msg}"),
            Error::Singularity { centre, distance } => {
                write!(f, "point at distance {distance:e} from centre {centre}")
            }
            Error::Domain { radius, min_radius } => {
                write!(f, "radius {radius} not outside the centre disc (need > {min_radius})")
            }
            Error::EndpointRadiusMismatch { r_minus, r_plus } => {
                write!(f, "endpoint radii differ: {r_minus} vs {r_plus}")
            }
            Error::CoincidentEndpoints => f.write_str("path endpoints coincide"),
            Error::PointOnPath { distance } => {
                write!(f, "point lies on the closed path (distance {distance:e})")
            }
            Error::IllConditionedWinding { residual } => {
                write!(f, "winding sum is {residual} away from an integer")
            }
            Error::InvalidPartition(msg) => write!(f, "invalid partition: {msg}"),
            Error::InadmissibleClass => {
                f.write_str("parity class has all bits equal and cannot separate the centres")
            }
            Error::ClassMismatch => f.write_str("seed path is not in the target parity class"),
            Error::ClassChangeUnrecoverable { iteration } => {
                write!(f, "parity class kept flipping at iteration {iteration}")
            }
            Error::MaxIterations { iterations, gradient_norm } => write!(
                f,
                "no convergence after {iterations} iterations (gradient norm {gradient_norm:e})"
            ),
            Error::CollisionBarrierSaturated { centre, distance } => write!(
                f,
                "minimizer pinned at the collision barrier of centre {centre} (distance {distance:e})"
            ),
            Error::NoRoutingFound => f.write_str("no seed routing realizes the requested class"),
            Error::DegeneratePath => f.write_str("path is constant"),
            Error::EnergyResidualTooLarge { residual, bound } => {
                write!(f, "zero-energy residual {residual:e} exceeds {bound:e}")
            }
            Error::CloseEncounter { centre, distance } => write!(
                f,
                "close encounter with centre {centre} at distance {distance:e}, no regularization for alpha > 1"
            ),
            Error::StepUnderflow { time, step } => {
                write!(f, "step size underflow ({step:e}) at t = {time}")
            }
            Error::WrongAlpha { alpha } => {
                write!(f, "Levi-Civita regularization needs alpha = 1, got {alpha}")
            }
            Error::OverlappingRegularization { centre, other } => write!(
                f,
                "centre {other} entered the regularization region of centre {centre}"
            ),
            Error::TailTooShort => f.write_str("trajectory tail does not leave the ring"),
            Error::InsufficientSpan { decades } => {
                write!(f, "fit window spans only {decades:.2} decades")
            }
            Error::InsufficientData { needed, got } => {
                write!(f, "need at least {needed} data points, got {got}")
            }
            Error::WindowTooShort { needed, available } => {
                write!(f, "trajectory covers |t| <= {available}, need {needed}")
            }
        }
    }
}

impl core::error::Error for Error {}
