use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("non-finite input: {0}")]
    NonFinite(&'static str),

    #[error("invalid trace: {0}")]
    InvalidTrace(String),

    #[error("ego bridge error: {0}")]
    Bridge(#[from] BridgeError),

    #[error("aborted by the ego bridge: {msg}")]
    BridgeAborted { episode: usize, msg: String },

    #[error("episode {index} failed: {source}")]
    Episode {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("{path}: line {line}: {msg}")]
    Parse {
        path: String,
        line: u64,
        msg: String,
    },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }

    /// Process exit code for the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::NonFinite(_) | Error::InvalidTrace(_) | Error::Parse { .. } => 1,
            Error::Bridge(_) | Error::BridgeAborted { .. } => 2,
            Error::Io { .. } => 3,
            Error::Episode { source, .. } => source.exit_code(),
        }
    }
}

#[derive(Debug, Error)]
pub enum BridgeError {
    #[error("failed to spawn `{cmd}`: {source}")]
    Spawn {
        cmd: String,
        #[source]
        source: std::io::Error,
    },
    #[error("handshake failed: {0}")]
    Handshake(String),
    #[error("no response within {0:?}")]
    Timeout(std::time::Duration),
    #[error("malformed response {line:?}: {msg}")]
    Malformed { line: String, msg: String },
    #[error("controller process closed its output")]
    Closed,
    #[error("pipe error: {0}")]
    Pipe(#[source] std::io::Error),
}
