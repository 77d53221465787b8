use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("degenerate coupling: L0(Cv+Cw) = CΣ(Mv+Mw), δ is undefined")]
    DegenerateCoupling,
    #[error("invalid δ = {0}: need 0 < |δ| < 1")]
    InvalidDelta(f64),
    #[error("negative radicand {radicand:e} in dispersion at k = {k}")]
    NumericalDomain { k: f64, radicand: f64 },
    #[error("gapless system: min |f(k)| = {0:e}")]
    GaplessSystem(f64),
    #[error("invalid regime: {0}")]
    InvalidRegime(String),
    #[error("singular matrix (reciprocal condition estimate {0:e})")]
    SingularMatrix(f64),
    #[error("eigensolver failed: {0}")]
    EigenFailure(String),
    #[error("eigenvalue {re:e}{im:+e}i is not of the ±iω form")]
    ComplexResidual { re: f64, im: f64 },
    #[error("fit failed: {0}")]
    FitFailure(String),
    #[error("non-positive data at index {0}")]
    NonPositiveData(usize),
    #[error("no eigenvalue inside the middle bandgap")]
    NoGapState,
    #[error("port damping shifts the bound state by {0:.3}% of the gap width")]
    DampingTooLarge(f64),
    #[error("frequency {0:e} rad/s is outside the band")]
    OutsideBand(f64),
    #[error("frequency {0:e} rad/s is within the band-edge margin")]
    BandEdgeProximity(f64),
    #[error("time step {dt:e} s too large for coupling {g_max:e} rad/s")]
    StepTooLarge { dt: f64, g_max: f64 },
    #[error("trace drift {0:e}")]
    TraceDrift(f64),
}

impl Error {
    /// Name of the module that raises this error, for machine-readable reports.
    pub fn module(&self) -> &'static str {
        use Error::*;
        match self {
            InvalidParams(_) | DegenerateCoupling | InvalidDelta(_) => "circuit_model",
            NumericalDomain { .. } | GaplessSystem(_) | InvalidRegime(_) => "band_structure",
            SingularMatrix(_) | ComplexResidual { .. } => "finite_lattice",
            EigenFailure(_) | FitFailure(_) | NonPositiveData(_) => "numerics",
            NoGapState | DampingTooLarge(_) => "bound_states",
            OutsideBand(_) | BandEdgeProximity(_) => "cooperative",
            StepTooLarge { .. } | TraceDrift(_) => "dynamics",
        }
    }

    pub fn code(&self) -> &'static str {
        use Error::*;
        match self {
            InvalidParams(_) => "InvalidParams",
            DegenerateCoupling => "DegenerateCoupling",
            InvalidDelta(_) => "InvalidDelta",
            NumericalDomain { .. } => "NumericalDomain",
            GaplessSystem(_) => "GaplessSystem",
            InvalidRegime(_) => "InvalidRegime",
            SingularMatrix(_) => "SingularMatrix",
            EigenFailure(_) => "EigenFailure",
            ComplexResidual { .. } => "ComplexResidual",
            FitFailure(_) => "FitFailure",
            NonPositiveData(_) => "NonPositiveData",
            NoGapState => "NoGapState",
            DampingTooLarge(_) => "DampingTooLarge",
            OutsideBand(_) => "OutsideBand",
            BandEdgeProximity(_) => "BandEdgeProximity",
            StepTooLarge { .. } => "StepTooLarge",
            TraceDrift(_) => "TraceDrift",
        }
    }
}
