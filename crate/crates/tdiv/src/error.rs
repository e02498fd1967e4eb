use std::path::PathBuf;

use thiserror::Error;

#[derive(Error, Debug)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}: no such file or directory")]
    Missing(PathBuf),
    #[error("{0}: no frame_%05d.png files found")]
    EmptyDirectory(PathBuf),
    #[error("{dir}: gap at index {index}")]
    Gap { dir: PathBuf, index: usize },
    #[error("{path}: frame {index}: {source}")]
    Frame {
        path: PathBuf,
        index: usize,
        #[source]
        source: tdiv_core::Error,
    },
    #[error("{path}: frame {index}: unsupported PNG color type {color}")]
    UnsupportedPng {
        path: PathBuf,
        index: usize,
        color: String,
    },
    #[error("{path}: frame {index}: {source}")]
    Image {
        path: PathBuf,
        index: usize,
        #[source]
        source: image::ImageError,
    },
    #[error("{path}: corrupt header at byte {offset}: {reason}")]
    CorruptHeader {
        path: PathBuf,
        offset: usize,
        reason: String,
    },
    #[error("{path}: value {value} at byte {offset} is outside [0, 1]")]
    ValueOutOfRange {
        path: PathBuf,
        offset: usize,
        value: f32,
    },
    #[error("cannot infer the format of {0}; use a directory or a .fvr file")]
    UnknownFormat(PathBuf),
    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error("{path}: {reason}")]
    Schema { path: PathBuf, reason: String },
    #[error(transparent)]
    Core(#[from] tdiv_core::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
