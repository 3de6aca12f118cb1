use std::fmt;

/// Why a parameter set falls outside the bistable regime.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum BistableViolation {
    NoPositiveRoots,
    WrongRootCount,
    WrongDerivativeSigns,
    DNonNegative,
}

impl fmt::Display for BistableViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Self::NoPositiveRoots => "no positive roots",
            Self::WrongRootCount => "wrong number of positive roots",
            Self::WrongDerivativeSigns => "wrong derivative signs at the roots",
            Self::DNonNegative => "Q(0) = d is not negative",
        };
        f.write_str(s)
    }
}

/// Which pulse monitor tripped during continuation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum MonitorKind {
    Positivity,
    Monotonicity,
    BoxBound,
    Separation,
    Decay,
    WeightedNorm,
}

impl fmt::Display for MonitorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("schema error: {0}")]
    Schema(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("sample {index} lies outside region C (component v{component})")]
    SampleOutsideC { index: usize, component: usize },

    #[error("condition P violated: {0}")]
    ConditionPViolated(BistableViolation),
    #[error("coefficient mismatch: fitted d = {fitted:e}, closed form d = {closed:e}")]
    CoefficientMismatch { fitted: f64, closed: f64 },
    #[error(
        "principal eigenvalue sign changes across tau at equilibrium {equilibrium} (tau = {tau})"
    )]
    SignFlipAcrossTau { equilibrium: &'static str, tau: f64 },
    #[error("parameter search exhausted after {tried} candidates")]
    SearchExhausted { tried: usize },

    #[error("bump construction failed: {0}")]
    GConstructionFailed(String),
    #[error("bump support [{lo}, {hi}] is not strictly inside ({t_bar}, {t_minus})")]
    GSupportOutside {
        lo: f64,
        hi: f64,
        t_bar: f64,
        t_minus: f64,
    },
    #[error("wave speed not positive at tau = {tau} (c = {c})")]
    SpeedSignLost { tau: f64, c: f64 },
    #[error("upper solution violated at s = {s}, tau = {tau}, component {component}")]
    UpperSolutionViolated { s: f64, tau: f64, component: usize },
    #[error("condition z1 violated at tau = {tau} (ratio = {ratio})")]
    ConditionZ1Violated { tau: f64, ratio: f64 },

    #[error("time step {dt} exceeds the explicit stability limit {limit}")]
    CflViolation { dt: f64, limit: f64 },
    #[error("non-finite state at t = {t}")]
    NonFiniteState { t: f64 },
    #[error("front left the domain at t = {t} (x = {x})")]
    FrontLeftDomain { t: f64, x: f64 },
    #[error("no front detected at t = {t}")]
    NoFrontDetected { t: f64 },

    #[error("no pulse: total integral {integral:e} is not positive")]
    NoPulse { integral: f64 },
    #[error("no pulse expected: wave speed c = {c} is not positive")]
    NoPulseExpected { c: f64 },
    #[error("quadrature failure: {0}")]
    QuadratureFailure(String),
    #[error("scalar pulse for the thrombin equation is missing")]
    ScalarPulseMissing,
    #[error("linear solve failed: {0}")]
    LinearSolveFailure(String),
    #[error("pulse certificate failed: {0}")]
    CertificateFailed(String),
    #[error("Newton iteration diverged at tau = {tau}")]
    NewtonDiverged { tau: f64 },
    #[error("pulse monitor {kind} violated at tau = {tau}")]
    MonitorViolated { kind: MonitorKind, tau: f64 },
    #[error("linearized spectrum has an eigenvalue near zero ({lambda:e})")]
    NearZeroEigenvalue { lambda: f64 },

    #[error("dichotomy inconclusive: c = {c} with uncertainty {uncertainty}")]
    Inconclusive { c: f64, uncertainty: f64 },
    #[error("threshold run for lambda = {lambda} unclassified at t = {t_end}")]
    Unclassified { lambda: f64, t_end: f64 },

    #[error("stage {stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// Errors caused by the model parameters rather than by the numerics.
    pub fn is_domain_error(&self) -> bool {
        match self {
            Error::ConditionPViolated(_)
            | Error::SearchExhausted { .. }
            | Error::NoPulse { .. }
            | Error::NoPulseExpected { .. }
            | Error::ConditionZ1Violated { .. }
            | Error::GSupportOutside { .. }
            | Error::SampleOutsideC { .. } => true,
            Error::Stage { source, .. } => source.is_domain_error(),
            _ => false,
        }
    }

    pub fn is_usage_error(&self) -> bool {
        match self {
            Error::Schema(_) | Error::Io(_) | Error::Json(_) => true,
            Error::Stage { source, .. } => source.is_usage_error(),
            _ => false,
        }
    }

    pub(crate) fn at_stage(self, stage: &'static str) -> Error {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
