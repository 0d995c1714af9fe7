use std::io;

use crate::classify::ClassLabel;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected:?}, got {actual:?}")]
    DimensionMismatch {
        expected: (usize, usize),
        actual: (usize, usize),
    },

    #[error("expected a {expected}-channel image, got {actual} channel(s)")]
    ChannelMismatch { expected: usize, actual: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("lattice has {sites} sites; exhaustive search supports at most {max}")]
    LatticeTooLarge { sites: usize, max: usize },

    #[error("malformed PNM data: {0}")]
    Pnm(String),

    #[error("training set has no example of class {0}")]
    MissingClass(ClassLabel),

    #[error("class model is invalid: {0}")]
    InvalidModel(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    pub(crate) fn check_dims(expected: (usize, usize), actual: (usize, usize)) -> Result<()> {
        if expected == actual {
            Ok(())
        } else {
            Err(Error::DimensionMismatch { expected, actual })
        }
    }
}
