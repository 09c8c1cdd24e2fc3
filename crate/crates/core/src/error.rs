use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("invalid scene: {0}")]
    InvalidScene(String),
    #[error("empty shape")]
    EmptyShape,
    #[error("no surface found")]
    NoSurfaceFound,
    #[error("scene parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("malformed volume file: {0}")]
    Format(String),
    #[error("size guard exceeded: {what} = {size} > {limit}")]
    SizeGuard {
        what: &'static str,
        size: usize,
        limit: usize,
    },
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("index {index} out of range for length {len}")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("unsupported Betti number {0}")]
    UnsupportedBetti(usize),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
