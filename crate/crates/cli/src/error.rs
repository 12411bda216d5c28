use poweralert::game::GameError;
use poweralert::icgen::IcError;
use poweralert::power::PowerError;
use poweralert::protocol::ProtocolError;
use poweralert::timing::TimingError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("input format: {0}")]
    Format(String),
    #[error("{0}")]
    Infeasible(String),
    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Usage(_) => 2,
            Self::Format(_) | Self::Io { .. } => 3,
            Self::Infeasible(_) => 4,
        }
    }

    pub fn io(context: impl Into<String>) -> impl FnOnce(std::io::Error) -> Self {
        let context = context.into();
        move |source| Self::Io { context, source }
    }
}

impl From<TimingError> for CliError {
    fn from(e: TimingError) -> Self {
        match e {
            TimingError::Parse { .. } => Self::Format(e.to_string()),
            TimingError::InvalidConfig(_) => Self::Usage(e.to_string()),
            TimingError::TooFewSamples { .. } | TimingError::Singular(_) | TimingError::Infeasible { .. } => {
                Self::Infeasible(e.to_string())
            }
        }
    }
}

impl From<PowerError> for CliError {
    fn from(e: PowerError) -> Self {
        match e {
            PowerError::InvalidParameter(_) => Self::Usage(e.to_string()),
            PowerError::LearningFailure(_) => Self::Infeasible(e.to_string()),
            PowerError::Format { .. } => Self::Format(e.to_string()),
            PowerError::Io(source) => Self::Io { context: "trace".into(), source },
        }
    }
}

impl From<IcError> for CliError {
    fn from(e: IcError) -> Self {
        match e {
            IcError::UnsupportedDegree(_)
            | IcError::InvalidParameter(_)
            | IcError::InvalidCoverage { .. }
            | IcError::TooLarge(_)
            | IcError::Gf2(_) => Self::Usage(e.to_string()),
            IcError::CostUnreachable(_) => Self::Infeasible(e.to_string()),
            _ => Self::Format(e.to_string()),
        }
    }
}

impl From<ProtocolError> for CliError {
    fn from(e: ProtocolError) -> Self {
        match e {
            ProtocolError::Program(e) => e.into(),
            ProtocolError::Power(e) => e.into(),
            ProtocolError::Timing(e) => e.into(),
            other => Self::Format(other.to_string()),
        }
    }
}

impl From<GameError> for CliError {
    fn from(e: GameError) -> Self {
        Self::Usage(e.to_string())
    }
}
