use std::fmt;

/// Errors surfaced by the expression kernel, the solvers and the problem parser.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Error {
    /// Syntax or semantic error in a problem file or expression string,
    /// with a 1-based line/column locus.
    Parse {
        line: usize,
        col: usize,
        msg: String,
    },
    /// Numeric evaluation left the conformable domain (x <= 0, t < 0, ...).
    Domain(String),
    /// Structurally invalid input: nonlinear R, order outside (0,1],
    /// non-rational exponent, insufficient spectra, and the like.
    Invalid(String),
}

impl Error {
    pub fn parse_at(line: usize, col: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            col,
            msg: msg.into(),
        }
    }

    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Parse { line, col, msg } => write!(f, "{line}:{col}: {msg}"),
            Error::Domain(msg) => write!(f, "domain error: {msg}"),
            Error::Invalid(msg) => write!(f, "invalid input: {msg}"),
        }
    }
}

impl std::error::Error for Error {}
