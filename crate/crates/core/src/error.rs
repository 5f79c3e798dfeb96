use thiserror::Error;

use crate::numerals::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("not a rational literal: {0:?}")]
    Rational(String),
    #[error("letter {letter:?} at position {pos} is outside the alphabet |-/*ab")]
    Letter { letter: char, pos: usize },
    #[error("malformed numeral word {0:?}")]
    Numeral(String),
    #[error("malformed *-system {word:?}: {reason}")]
    StarSystem { word: String, reason: &'static str },
    #[error("scheme line {line}: {reason}")]
    SchemeLine { line: usize, reason: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolygonError {
    #[error("polygon has no points")]
    Empty,
    #[error("first breakpoint must be 0, got {0}")]
    BadStart(Rational),
    #[error("last breakpoint must be 1, got {0}")]
    BadEnd(Rational),
    #[error("breakpoints must be strictly increasing ({prev} then {next})")]
    NotIncreasing { prev: Rational, next: Rational },
    #[error("breakpoint {0} lies outside [0,1]")]
    OutOfRange(Rational),
    #[error("argument {0} lies outside [0,1]")]
    Domain(Rational),
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("tagged partition is invalid: {0}")]
    Partition(String),
}
