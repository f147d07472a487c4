use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("invalid alphabet: {0}")]
    InvalidAlphabet(String),
    #[error("unknown generator `{0}`")]
    UnknownGenerator(String),
    #[error("invalid graph: {0}")]
    InvalidGraph(String),
    #[error("invalid path: {0}")]
    InvalidPath(String),
    #[error("labelling is not reduced at vertex {vertex}: edges {first} and {second} share label and direction")]
    NotReduced {
        vertex: usize,
        first: usize,
        second: usize,
    },
    #[error("invalid coefficient system: {0}")]
    InvalidCoefficients(String),
    #[error("invalid coset action: {0}")]
    InvalidAction(String),
    #[error("action does not factor through G(Γ): edge {edge} closes a cycle with coset {found} instead of {expected}")]
    ActionNotFactoring {
        edge: usize,
        expected: usize,
        found: usize,
    },
    #[error("graph is disconnected")]
    Disconnected,
    #[error(
        "traversal dead end: letter {position} of the word cannot be read from vertex {vertex}"
    )]
    DeadEnd { position: usize, vertex: usize },
    #[error("resource limit exceeded: {0}")]
    Resource(String),
    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("{0}")]
    Io(String),
    #[error("internal consistency failure: {0}")]
    Internal(String),
}

impl Error {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
