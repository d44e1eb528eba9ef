use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("fixed points coincide: |c - ab| = {gap:e}")]
    DegenerateFixedPoints { gap: f64 },

    #[error("coordinate change undefined: C^2 - 4AB = {discriminant} <= 0")]
    ConversionUndefined { discriminant: f64 },

    #[error("state is not on the plane x + a*y = 0 (residual {residual:e})")]
    OffSection { residual: f64 },

    #[error("tangency curve sigma is undefined at its pole x = a + c")]
    UndefinedAtPole,

    #[error("not a saddle-focus: {0}")]
    NotSaddleFocus(String),

    #[error("trajectory left every bounded region at t = {t} (|s| = {norm:e})")]
    BlowUp { t: f64, norm: f64 },

    #[error("step size underflow at t = {t} (h = {h:e})")]
    StepUnderflow { t: f64, h: f64 },

    #[error("no discontinuity detected in the scanned window")]
    NoDiscontinuityFound,

    #[error("separatrix terminated before reaching the section: {0}")]
    NoCrossing(String),

    #[error("index loop still too coarse after refinement to {n_loop} points")]
    LoopTooCoarse { n_loop: usize },

    #[error("index loop meets a discontinuity of the return map at loop point {index}")]
    LoopHitsDiscontinuity { index: usize },

    #[error("index loop passes within {min_displacement:e} of a fixed point")]
    LoopNotIsolating { min_displacement: f64 },

    #[error("orbit point {index} lies in the undecided band of the partition")]
    UndecidedPoint { index: usize },

    #[error("projection is not generic: {0}")]
    NonGenericProjection(String),

    #[error("degenerate knot diagram: {0}")]
    DegenerateDiagram(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
