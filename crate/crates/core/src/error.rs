use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("non-finite position ({0}, {1}, {2})")]
    NonFinitePosition(f64, f64, f64),

    #[error("degenerate geometry: tx and rx coincide")]
    CoincidentEndpoints,

    #[error("degenerate spread: estimated {0} is zero")]
    ZeroSpread(&'static str),

    #[error("zero total power")]
    ZeroPower,

    #[error("invalid config: {0}")]
    Config(String),

    #[error("config parse error: {0}")]
    ConfigParse(String),

    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}
