use thiserror::Error;

/// Errors produced by the numerical kernels.
#[derive(Debug, Error)]
pub enum CoreError {
    #[error("degenerate far-field states: u_l = u_r = {0}")]
    DegenerateStates(f64),

    #[error("profile existence condition fails: gamma^2 + 4 mu (s - f'(u_l)) = {discriminant} < 0")]
    ExistenceCondition { discriminant: f64 },

    #[error("shooting trajectory not monotone: {0}")]
    NonMonotone(String),

    #[error("domain half-width {half_width} too small: need at least {needed}")]
    DomainTooSmall { half_width: f64, needed: f64 },

    #[error("grid with {nodes} nodes is too small for a {width}-point stencil")]
    StencilWidth { nodes: usize, width: usize },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("weight exponent alpha = {alpha} outside admissible range (0, {max})")]
    AlphaOutOfRange { alpha: f64, max: f64 },

    #[error("predicted rate beta = {beta} <= 0: rate test unavailable")]
    RateUnavailable { beta: f64 },

    #[error("insufficient decay for a rate fit: {0}")]
    InsufficientDecay(String),

    #[error("exponential tail fit failed: {0}")]
    TailFitFailure(String),

    #[error("no sign change when bracketing the initial shift: F({lo}) = {f_lo}, F({hi}) = {f_hi}")]
    NoSignChange { lo: f64, hi: f64, f_lo: f64, f_hi: f64 },

    #[error("shift denominator degenerate: |{value}| < {bound} (perturbation too large)")]
    DenominatorDegeneracy { value: f64, bound: f64 },

    #[error("solution blow-up detected at t = {t}: max |u| = {norm}")]
    BlowUp { t: f64, norm: f64 },

    #[error("boundary contamination at t = {t}: margin {margin} exceeds {allowed}")]
    BoundaryContamination { t: f64, margin: f64, allowed: f64 },

    #[error("time step rejected: {0}")]
    StepRejected(String),

    #[error("shift {eta} too large for grid half-width {half_width}")]
    ShiftTooLarge { eta: f64, half_width: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, CoreError>;
