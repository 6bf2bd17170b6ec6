//! Unified error type for the restoration library.
//!
//! Every fallible operation in the crate returns [`Error`]. Variants carry
//! enough structure for callers (CLI, FFI) to map failures onto distinct
//! process exit codes and C error codes without string matching.

use std::path::PathBuf;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// All failure modes surfaced by the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Two grids that must share a shape do not.
    #[error("dimension mismatch: expected {expected_h}x{expected_w}, got {got_h}x{got_w}")]
    DimensionMismatch {
        expected_h: usize,
        expected_w: usize,
        got_h: usize,
        got_w: usize,
    },

    /// A grid with zero rows, zero columns, or no pixels was supplied where
    /// content is required.
    #[error("empty input: {context}")]
    EmptyInput { context: &'static str },

    /// A parameter violates its documented domain (e.g. a negative penalty
    /// weight or a zero tolerance).
    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// The supplied illumination falls below the positivity floor, which
    /// would make the transmission ratio unbounded.
    #[error("illumination below floor {floor} (minimum value {min})")]
    IlluminationBelowFloor { floor: f64, min: f64 },

    /// The iterative solver produced a non-finite value. The offending
    /// sub-update and the 1-based outer iteration are named so the failure
    /// is diagnosable from the message alone.
    #[error("solver diverged: non-finite value in {update} at iteration {iteration}")]
    SolverDiverged { update: &'static str, iteration: usize },

    /// An image file could not be read or decoded.
    #[error("cannot read image {path}: {source}")]
    ImageRead {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },

    /// An image file could not be encoded or written.
    #[error("cannot write image {path}: {source}")]
    ImageWrite {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },

    /// Configuration text failed to parse or validate.
    #[error("config error: {0}")]
    Config(String),

    /// Filesystem failure outside image codecs.
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// Shorthand used by grid operations when two shapes must agree.
    pub(crate) fn shape(expected: (usize, usize), got: (usize, usize)) -> Self {
        Error::DimensionMismatch {
            expected_h: expected.0,
            expected_w: expected.1,
            got_h: got.0,
            got_w: got.1,
        }
    }
}
