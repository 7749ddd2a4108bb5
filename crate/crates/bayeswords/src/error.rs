use std::fmt;
use std::path::PathBuf;

/// Pipeline stage named in diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Load,
    Split,
    Binarize,
    Features,
    Quantize,
    Structure,
    Train,
    Evaluate,
    Persist,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::Load => "load",
            Stage::Split => "split",
            Stage::Binarize => "binarize",
            Stage::Features => "features",
            Stage::Quantize => "quantize",
            Stage::Structure => "structure",
            Stage::Train => "train",
            Stage::Evaluate => "evaluate",
            Stage::Persist => "persist",
        })
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{}: {source}", path.display())]
    Image {
        path: PathBuf,
        source: image::ImageError,
    },
    #[error("{}:{line}: {message}", path.display())]
    Manifest {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("config {origin}: {message}")]
    Config { origin: String, message: String },
    #[error(transparent)]
    Core(#[from] bayeswords_core::Error),
    #[error("[{stage}] {inner}")]
    Stage { stage: Stage, inner: Box<Error> },
    #[error("checksum mismatch in {kind} document")]
    Checksum { kind: String },
    #[error("unsupported {kind} document version `{found}` (this build reads v{expected})")]
    Version {
        kind: String,
        found: String,
        expected: u32,
    },
    #[error("malformed document: {0}")]
    Format(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

/// Attaches a stage tag to errors.
pub trait StageExt<T> {
    fn stage(self, stage: Stage) -> Result<T>;
}

impl<T, E: Into<Error>> StageExt<T> for std::result::Result<T, E> {
    fn stage(self, stage: Stage) -> Result<T> {
        self.map_err(|e| match e.into() {
            tagged @ Error::Stage { .. } => tagged,
            inner => Error::Stage {
                stage,
                inner: Box::new(inner),
            },
        })
    }
}

pub(crate) fn io_error(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> Error {
    let path = path.into();
    move |source| Error::Io { path, source }
}
