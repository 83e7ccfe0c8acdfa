//! Crate-wide error type.

use std::path::PathBuf;
use thiserror::Error;

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

/// Everything that can go wrong while building maps, generating
/// configurations, planning, or replaying a plan.
#[derive(Error, Debug)]
pub enum Error {
    /// Filesystem-level failure (open, create, rename, ...).
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// A map, path, or parameter file whose contents could not be parsed.
    /// `line` is 1-based and refers to the offending line of the file.
    #[error("parse error at {path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    /// Grid construction rejected its inputs (dimension mismatch,
    /// non-finite heights, non-positive resolution, ...).
    #[error("invalid map: {0}")]
    InvalidMap(String),

    /// Robot parameters, search settings, or obstacle specs that violate
    /// their documented invariants.
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    /// A continuous map query landed outside the interpolation domain.
    #[error("query ({x:.4}, {y:.4}) is outside the map interpolation domain")]
    OutOfBounds { x: f64, y: f64 },

    /// A morphology that cannot describe a physical robot state
    /// (flipper angle outside limits, reference joints at the wrong
    /// separation, non-finite fields).
    #[error("invalid morphology: {0}")]
    InvalidMorphology(String),

    /// A contact search swept its whole angular interval without the
    /// moving points ever reaching the inflated surface.
    #[error("no contact within the angular search interval for {context}")]
    NoContact { context: &'static str },

    /// A contact search was asked to start from a configuration that is
    /// already inside the inflated surface.
    #[error("puncture at search start for {context} (min clearance {min_clearance:.4} m)")]
    PunctureAtStart {
        context: &'static str,
        min_clearance: f64,
    },

    /// The start pose handed to the planner is itself infeasible.
    #[error("infeasible start pose: {0}")]
    InfeasibleStart(String),

    /// Greedy search could not produce any feasible candidate for the
    /// next step. Carries the x the planner was trying to reach and a
    /// short summary of why every candidate was rejected.
    #[error("dead end at x = {x:.3}: {detail}")]
    DeadEnd { x: f64, detail: String },

    /// An operation that needs at least one plan step got none.
    #[error("plan contains no steps")]
    EmptyPath,
}

impl Error {
    /// Wraps an I/O failure with the path it happened on.
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Parse failure at a 1-based line of `path`.
    pub fn parse(path: impl Into<PathBuf>, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            message: message.into(),
        }
    }
}
