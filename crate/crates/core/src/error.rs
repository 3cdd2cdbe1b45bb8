use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::grid::Coord;

/// Errors raised by the core models.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A coordinate outside the configured grid.
    OutOfBounds { coord: Coord, rows: u16, cols: u16 },
    /// A statistics snapshot dated in the future of the reader.
    NegativeAge { age: f64 },
    /// Source and observation point coincide.
    ZeroRange,
    /// A direction vector of zero length.
    ZeroVector,
    /// One entry per violated configuration constraint.
    InvalidConfig(Vec<String>),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::OutOfBounds { coord, rows, cols } => {
                write!(f, "coordinate {coord} outside {rows}x{cols} grid")
            }
            Error::NegativeAge { age } => write!(f, "statistics snapshot is {age} s in the future"),
            Error::ZeroRange => write!(f, "observation point coincides with the source"),
            Error::ZeroVector => write!(f, "zero-length direction vector"),
            Error::InvalidConfig(violations) => {
                write!(f, "invalid configuration: {}", violations.join("; "))
            }
        }
    }
}

impl core::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;
