use std::fmt;

/// Error categories and their machine-readable codes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErrorCode {
    Parse = 10,
    Validation = 11,
    Usage = 12,
    Io = 13,
    Checkpoint = 14,
    BlowUp = 20,
    Invariant = 30,
}

impl ErrorCode {
    /// Process exit status for this category.
    pub fn exit_code(self) -> u8 {
        match self {
            Self::BlowUp => 2,
            Self::Invariant => 3,
            _ => 1,
        }
    }
}

/// Error printed to standard error as `EHD-E<code>: <message>`.
#[derive(Clone, Debug, PartialEq)]
pub struct CliError {
    pub code: ErrorCode,
    pub message: String,
}

impl CliError {
    pub fn new(code: ErrorCode, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }

    pub fn io(what: &str, err: impl fmt::Display) -> Self {
        Self::new(ErrorCode::Io, format!("{what}: {err}"))
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // One prefixed line per message line, so every line is greppable.
        for (i, line) in self.message.lines().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "EHD-E{}: {line}", self.code as u8)?;
        }
        Ok(())
    }
}

impl std::error::Error for CliError {}
