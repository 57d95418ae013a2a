use std::fmt;

/// Anything that can abort a run. The class decides the exit code: config
/// problems (parse errors, missing sections, bad parameter values) exit with
/// 2, IO and library failures with 1.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Io(String),
    Lib(dulac::Error),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(msg) => write!(f, "{msg}"),
            CliError::Io(msg) => write!(f, "{msg}"),
            CliError::Lib(e) => write!(f, "{e}"),
        }
    }
}

impl From<dulac::Error> for CliError {
    fn from(e: dulac::Error) -> Self {
        CliError::Lib(e)
    }
}

impl CliError {
    pub fn io(context: &str, e: std::io::Error) -> Self {
        CliError::Io(format!("{context}: {e}"))
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Io(_) | CliError::Lib(_) => 1,
        }
    }

    pub fn class(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Io(_) => "io",
            CliError::Lib(_) => "module",
        }
    }

    /// Stable machine-readable discriminant for the error record.
    pub fn kind(&self) -> &'static str {
        use dulac::Error::*;
        match self {
            CliError::Config(_) => "Config",
            CliError::Io(_) => "Io",
            CliError::Lib(e) => match e {
                DimensionMismatch { .. } => "DimensionMismatch",
                InvalidJet(_) => "InvalidJet",
                SingularLinearPart { .. } => "SingularLinearPart",
                SingularMatrix { .. } => "SingularMatrix",
                InvalidSpectrum(_) => "InvalidSpectrum",
                NonPositiveMargin { .. } => "NonPositiveMargin",
                InvalidCocycle(_) => "InvalidCocycle",
                NonContracting { .. } => "NonContracting",
                ClusterSeparation { .. } => "ClusterSeparation",
                EpsilonNotAchievable { .. } => "EpsilonNotAchievable",
                NotHomogeneous { .. } => "NotHomogeneous",
                NotResonant { .. } => "NotResonant",
                RenormalizationHypothesis(_) => "RenormalizationHypothesis",
                NoConvergence { .. } => "NoConvergence",
                InvalidEndomorphism(_) => "InvalidEndomorphism",
                CriticalOrbit { .. } => "CriticalOrbit",
                RadiusCollapse { .. } => "RadiusCollapse",
                IncompleteRoots { .. } => "IncompleteRoots",
            },
        }
    }
}
