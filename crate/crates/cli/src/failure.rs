use std::fmt;
use std::process::ExitCode;

/// An error tagged with the exit status it maps to.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub error: anyhow::Error,
}

pub const INTERNAL: u8 = 1;
pub const INPUT: u8 = 2;

impl Failure {
    pub fn input(error: impl Into<anyhow::Error>) -> Self {
        Failure { code: INPUT, error: error.into() }
    }

    pub fn internal(error: impl Into<anyhow::Error>) -> Self {
        Failure { code: INTERNAL, error: error.into() }
    }

    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(self.code)
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:#}", self.error)
    }
}

pub trait Tag<T> {
    fn input(self, context: impl fmt::Display + Send + Sync + 'static) -> Result<T, Failure>;
    fn internal(self, context: impl fmt::Display + Send + Sync + 'static) -> Result<T, Failure>;
}

impl<T, E> Tag<T> for Result<T, E>
where
    E: Into<anyhow::Error>,
{
    fn input(self, context: impl fmt::Display + Send + Sync + 'static) -> Result<T, Failure> {
        self.map_err(|e| Failure::input(e.into().context(context)))
    }

    fn internal(self, context: impl fmt::Display + Send + Sync + 'static) -> Result<T, Failure> {
        self.map_err(|e| Failure::internal(e.into().context(context)))
    }
}
