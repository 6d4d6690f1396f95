use ioncav::Category;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),

    #[error("{0}")]
    Io(String),

    #[error(transparent)]
    Core(#[from] ioncav::Error),

    #[error("{0}")]
    Check(String),
}

impl CliError {
    /// Label printed in `ERROR(<label>):`.
    pub fn label(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Io(_) => "io",
            CliError::Core(e) => match e.category() {
                Category::Input => "config",
                Category::Model => "model",
                Category::Numerical => "numerical",
            },
            CliError::Check(_) => "numerical",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self.label() {
            "model" => 2,
            "numerical" => 3,
            _ => 1,
        }
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Config(format!("CSV: {e}"))
    }
}
