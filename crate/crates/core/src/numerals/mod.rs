//! Exact rationals and their word encodings.

mod rational;
mod word;

pub use rational::{rat, Rational};
pub use word::{
    decode_natural, decode_rational, encode_big_natural, encode_natural, encode_rational,
    encode_rational_list, is_letter, join_star_system, parse_star_system, Word, ALPHABET,
};
