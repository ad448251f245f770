use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error{}: {message}", location(*line, field.as_deref()))]
    Config {
        line: Option<usize>,
        field: Option<String>,
        message: String,
    },
    #[error("numerical abort: {0}")]
    Numerical(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

fn location(line: Option<usize>, field: Option<&str>) -> String {
    match (line, field) {
        (Some(l), Some(f)) => format!(" at line {l}, field '{f}'"),
        (Some(l), None) => format!(" at line {l}"),
        (None, Some(f)) => format!(" in field '{f}'"),
        (None, None) => String::new(),
    }
}

impl CliError {
    pub fn config(line: Option<usize>, field: Option<&str>, message: String) -> Self {
        CliError::Config {
            line,
            field: field.map(str::to_string),
            message,
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config { .. } => 2,
            CliError::Numerical(_) => 3,
            CliError::Io(_) | CliError::Json(_) => 1,
        }
    }
}

impl From<qfall::Error> for CliError {
    fn from(e: qfall::Error) -> Self {
        use qfall::Error as E;
        match e {
            E::InvalidInput(m) | E::Config(m) => CliError::config(None, None, m),
            E::UncertaintyViolation { .. }
            | E::DegenerateState { .. }
            | E::NoRepresentingDistribution { .. }
            | E::UnsupportedOrder { .. } => CliError::config(None, None, e.to_string()),
            other => CliError::Numerical(other.to_string()),
        }
    }
}
