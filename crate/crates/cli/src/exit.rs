use std::fmt::Display;

pub const RUNTIME: u8 = 1;
pub const USAGE: u8 = 2;

/// An error with the process exit code it maps to.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub error: anyhow::Error,
}

impl From<anyhow::Error> for Failure {
    fn from(error: anyhow::Error) -> Self {
        Failure {
            code: RUNTIME,
            error,
        }
    }
}

pub fn usage(msg: impl Display) -> Failure {
    Failure {
        code: USAGE,
        error: anyhow::anyhow!("{msg}"),
    }
}

pub fn runtime(msg: impl Display) -> Failure {
    Failure {
        code: RUNTIME,
        error: anyhow::anyhow!("{msg}"),
    }
}

pub type CmdResult = Result<(), Failure>;

/// Attaches an exit code to any error.
pub trait OrExit<T> {
    fn or_usage(self) -> Result<T, Failure>;
    fn or_runtime(self) -> Result<T, Failure>;
}

impl<T, E: Display> OrExit<T> for Result<T, E> {
    fn or_usage(self) -> Result<T, Failure> {
        self.map_err(usage)
    }

    fn or_runtime(self) -> Result<T, Failure> {
        self.map_err(runtime)
    }
}
