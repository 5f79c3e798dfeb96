//! Words over the six-letter alphabet and the numeral codecs.
//!
//! A natural `n` is written as `n + 1` strokes, so no numeral is empty. A
//! rational is `[-] numerator '/' denominator` with both parts in that stroke
//! form. Lists of rationals are `*`-systems: `*w0*w1*...*wk*`.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::Zero;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::Rational;
use crate::error::ParseError;

pub const ALPHABET: [u8; 6] = *b"|-/*ab";

pub fn is_letter(b: u8) -> bool {
    ALPHABET.contains(&b)
}

/// A finite word over `|-/*ab`. The empty word is allowed.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Word(String);

impl Word {
    pub fn empty() -> Self {
        Word(String::new())
    }

    pub fn new(s: &str) -> Result<Self, ParseError> {
        if let Some((pos, letter)) = s.char_indices().find(|(_, c)| !c.is_ascii() || !is_letter(*c as u8)) {
            return Err(ParseError::Letter { letter, pos });
        }
        Ok(Word(s.to_string()))
    }

    /// Caller guarantees every byte is a letter.
    pub(crate) fn from_string_unchecked(s: String) -> Self {
        debug_assert!(s.bytes().all(is_letter));
        Word(s)
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_string(self) -> String {
        self.0
    }

    pub fn concat<'a>(parts: impl IntoIterator<Item = &'a Word>) -> Word {
        let mut s = String::new();
        for p in parts {
            s.push_str(&p.0);
        }
        Word(s)
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

impl FromStr for Word {
    type Err = ParseError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Word::new(s)
    }
}

impl Serialize for Word {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.0)
    }
}

impl<'de> Deserialize<'de> for Word {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        Word::new(&s).map_err(serde::de::Error::custom)
    }
}

pub fn encode_natural(n: u64) -> Word {
    Word("|".repeat(n as usize + 1))
}

/// Arbitrary-size variant of [`encode_natural`]; the word has `n + 1` letters.
pub fn encode_big_natural(n: &BigInt) -> Word {
    let len: usize = (n + 1u32).try_into().expect("numeral too long to materialise");
    Word("|".repeat(len))
}

fn decode_strokes(s: &str) -> Option<BigInt> {
    if s.is_empty() || !s.bytes().all(|b| b == b'|') {
        return None;
    }
    Some(BigInt::from(s.len() - 1))
}

pub fn decode_natural(w: &Word) -> Result<u64, ParseError> {
    match decode_strokes(w.as_str()) {
        Some(_) => Ok(w.len() as u64 - 1),
        None => Err(ParseError::Numeral(w.0.clone())),
    }
}

pub fn encode_rational(r: &Rational) -> Word {
    let mut s = String::new();
    if r.is_negative() {
        s.push('-');
    }
    let num = r.numer().magnitude().clone();
    let den = r.denom().magnitude().clone();
    s.push_str(encode_big_natural(&BigInt::from(num)).as_str());
    s.push('/');
    s.push_str(encode_big_natural(&BigInt::from(den)).as_str());
    Word(s)
}

/// Liberal decoder: unreduced fractions are accepted and reduced.
pub fn decode_rational(w: &Word) -> Result<Rational, ParseError> {
    let bad = || ParseError::Numeral(w.0.clone());
    let (negative, body) = match w.as_str().strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, w.as_str()),
    };
    let (num, den) = body.split_once('/').ok_or_else(bad)?;
    let num = decode_strokes(num).ok_or_else(bad)?;
    let den = decode_strokes(den).ok_or_else(bad)?;
    if den.is_zero() {
        return Err(bad());
    }
    let r = Rational::new(num, den);
    Ok(if negative { -r } else { r })
}

/// Splits `*w0*w1*...*wk*` into its segments. Segments are not decoded here.
pub fn parse_star_system(w: &Word) -> Result<Vec<Word>, ParseError> {
    let bad = |reason| ParseError::StarSystem { word: w.0.clone(), reason };
    let s = w.as_str();
    if s.len() < 2 || !s.starts_with('*') || !s.ends_with('*') {
        return Err(bad("must begin and end with '*' and contain at least two stars"));
    }
    let inner = &s[1..s.len() - 1];
    inner
        .split('*')
        .map(|seg| {
            if seg.is_empty() {
                Err(bad("empty segment between stars"))
            } else {
                Ok(Word(seg.to_string()))
            }
        })
        .collect()
}

/// Inverse of [`parse_star_system`] on nonempty lists of nonempty words. The
/// empty list joins to `*`, which does not parse.
pub fn join_star_system<'a>(segments: impl IntoIterator<Item = &'a Word>) -> Word {
    let mut s = String::from("*");
    for seg in segments {
        s.push_str(seg.as_str());
        s.push('*');
    }
    Word(s)
}

/// `*r0*r1*...*` for a list of rationals.
pub fn encode_rational_list(values: &[Rational]) -> Word {
    let words: Vec<Word> = values.iter().map(encode_rational).collect();
    join_star_system(&words)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerals::rat;
    use proptest::prelude::*;

    fn w(s: &str) -> Word {
        Word::new(s).unwrap()
    }

    #[test]
    fn alphabet_is_enforced() {
        assert!(Word::new("|-/*ab").is_ok());
        assert!(Word::new("").is_ok());
        assert_eq!(Word::new("|c").unwrap_err(), ParseError::Letter { letter: 'c', pos: 1 });
    }

    #[test]
    fn naturals() {
        assert_eq!(encode_natural(0).as_str(), "|");
        assert_eq!(encode_natural(3).as_str(), "||||");
        for n in 0..=1000 {
            assert_eq!(decode_natural(&encode_natural(n)).unwrap(), n);
        }
        assert!(decode_natural(&w("")).is_err());
        assert!(decode_natural(&w("|a")).is_err());
    }

    #[test]
    fn rationals() {
        assert_eq!(encode_rational(&rat(1, 2)).as_str(), "||/|||");
        assert_eq!(decode_rational(&w("-|||/||")).unwrap(), rat(-2, 1));
        assert_eq!(decode_rational(&w("||||||/||||")).unwrap(), rat(5, 3));
        // unreduced input is canonicalised
        assert_eq!(decode_rational(&w("|||/|||||")).unwrap(), rat(1, 2));
        assert_eq!(encode_rational(&Rational::zero()).as_str(), "|/||");
    }

    #[test]
    fn malformed_rationals() {
        for bad in ["", "||", "/||", "||/", "||/|", "a/||", "--||/||", "||/||/||", "||/|-"] {
            assert!(decode_rational(&w(bad)).is_err(), "{bad:?} should be rejected");
        }
    }

    #[test]
    fn star_systems() {
        assert_eq!(parse_star_system(&w("*||/|||*|/||*")).unwrap(), vec![w("||/|||"), w("|/||")]);
        assert!(parse_star_system(&w("||/|||")).is_err());
        assert!(parse_star_system(&w("*")).is_err());
        assert!(parse_star_system(&w("**")).is_err());
        assert!(parse_star_system(&w("*|**|*")).is_err());
        let segs = parse_star_system(&w("*a*")).unwrap();
        assert_eq!(segs, vec![w("a")]);
        assert!(decode_rational(&segs[0]).is_err());
    }

    proptest! {
        #[test]
        fn rational_roundtrip(n in -10_000i64..=10_000, d in 1i64..=10_000) {
            let r = rat(n, d);
            prop_assert_eq!(decode_rational(&encode_rational(&r)).unwrap(), r);
        }

        #[test]
        fn star_roundtrip(segs in proptest::collection::vec("[|/ab-]{1,6}", 1..8)) {
            let words: Vec<Word> = segs.iter().map(|s| w(s)).collect();
            prop_assert_eq!(parse_star_system(&join_star_system(&words)).unwrap(), words);
        }
    }
}
