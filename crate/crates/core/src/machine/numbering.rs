//! Numbering of all schemes: a user registry at indices `0..r`, followed by a
//! canonical tail.
//!
//! The tail lists every scheme exactly once by its self-delimiting code, a
//! word over nine symbols: the six letters, `>` between the two sides of a
//! rule, and `;` / `.` closing a nonterminal / terminal rule. Codes are
//! ordered by length, then lexicographically with symbol order
//! `| - / * a b > ; .`. Every code string parses back to exactly one scheme,
//! so ranking and unranking by counting valid completions gives a bijection
//! between the naturals and schemes.

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;
use sha2::{Digest, Sha256};

use super::{Rule, Scheme};
use crate::numerals::{Word, ALPHABET};

/// Identifies the numbering and the dovetail schedule; recorded in outputs.
pub const NUMBERING_VERSION: &str = "ccx-numbering-1:registry+lenlex9;dovetail:triangular-resume";

const SEP: u8 = 6;
const END_NONTERMINAL: u8 = 7;
const END_TERMINAL: u8 = 8;
const SYMBOLS: u8 = 9;

#[derive(Clone, Copy, PartialEq, Eq)]
enum State {
    /// Between rules; the only accepting state.
    Boundary,
    /// Inside a left side.
    Lhs,
    /// Inside a right side.
    Rhs,
}

fn step(state: State, sym: u8) -> Option<State> {
    match (state, sym) {
        (State::Boundary | State::Lhs, 0..=5) => Some(State::Lhs),
        (State::Rhs, 0..=5) => Some(State::Rhs),
        (State::Boundary | State::Lhs, SEP) => Some(State::Rhs),
        (State::Rhs, END_NONTERMINAL | END_TERMINAL) => Some(State::Boundary),
        _ => None,
    }
}

/// `counts[k][s]`: number of symbol strings of length `k` leading from state
/// `s` (indexed Boundary, Lhs, Rhs) to a complete code.
fn completion_counts(max_len: usize) -> Vec<[BigUint; 3]> {
    let mut c: Vec<[BigUint; 3]> = Vec::with_capacity(max_len + 1);
    c.push([BigUint::from(1u8), BigUint::zero(), BigUint::zero()]);
    for k in 1..=max_len {
        let [b, l, r] = &c[k - 1];
        let open = l * 6u8 + r;
        let rhs = r * 6u8 + b * 2u8;
        c.push([open.clone(), open, rhs]);
    }
    c
}

fn count(counts: &[[BigUint; 3]], state: State, len: usize) -> &BigUint {
    &counts[len][state as usize]
}

fn letter_symbol(b: u8) -> u8 {
    ALPHABET.iter().position(|&c| c == b).expect("word letters are in the alphabet") as u8
}

fn encode_code(scheme: &Scheme) -> Vec<u8> {
    let mut code = Vec::new();
    for r in &scheme.rules {
        code.extend(r.lhs.as_str().bytes().map(letter_symbol));
        code.push(SEP);
        code.extend(r.rhs.as_str().bytes().map(letter_symbol));
        code.push(if r.terminal { END_TERMINAL } else { END_NONTERMINAL });
    }
    code
}

fn decode_code(code: &[u8]) -> Scheme {
    let mut rules = Vec::new();
    let (mut lhs, mut rhs, mut in_rhs) = (String::new(), String::new(), false);
    for &s in code {
        match s {
            0..=5 => {
                let c = ALPHABET[s as usize] as char;
                if in_rhs { rhs.push(c) } else { lhs.push(c) }
            }
            SEP => in_rhs = true,
            _ => {
                rules.push(Rule {
                    lhs: Word::from_string_unchecked(std::mem::take(&mut lhs)),
                    rhs: Word::from_string_unchecked(std::mem::take(&mut rhs)),
                    terminal: s == END_TERMINAL,
                });
                in_rhs = false;
            }
        }
    }
    Scheme { rules }
}

/// Position of `scheme` in the canonical tail.
pub fn canonical_rank(scheme: &Scheme) -> BigUint {
    let code = encode_code(scheme);
    let counts = completion_counts(code.len());
    let mut rank: BigUint = (0..code.len()).map(|l| &counts[l][0]).sum();
    let mut state = State::Boundary;
    for (pos, &sym) in code.iter().enumerate() {
        let remaining = code.len() - pos - 1;
        for smaller in 0..sym {
            if let Some(next) = step(state, smaller) {
                rank += count(&counts, next, remaining);
            }
        }
        state = step(state, sym).expect("encoded scheme is a valid code");
    }
    rank
}

/// Scheme at position `rank` of the canonical tail.
pub fn canonical_unrank(rank: &BigUint) -> Scheme {
    let mut rest = rank.clone();
    let mut counts = completion_counts(16);
    let mut len = 0usize;
    loop {
        if len >= counts.len() {
            counts = completion_counts(2 * counts.len());
        }
        if rest < counts[len][0] {
            break;
        }
        rest -= &counts[len][0];
        len += 1;
    }
    let mut code = Vec::with_capacity(len);
    let mut state = State::Boundary;
    for pos in 0..len {
        let remaining = len - pos - 1;
        for sym in 0..SYMBOLS {
            let Some(next) = step(state, sym) else { continue };
            let c = count(&counts, next, remaining);
            if &rest < c {
                code.push(sym);
                state = next;
                break;
            }
            rest -= c;
        }
    }
    debug_assert_eq!(code.len(), len);
    decode_code(&code)
}

/// Registry prefix followed by the canonical tail.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Numbering {
    registry: Vec<Scheme>,
}

impl Numbering {
    pub fn new(registry: Vec<Scheme>) -> Self {
        Numbering { registry }
    }

    pub fn canonical() -> Self {
        Numbering::default()
    }

    pub fn registry(&self) -> &[Scheme] {
        &self.registry
    }

    /// Appends a scheme to the registry and returns its index.
    pub fn register(&mut self, scheme: Scheme) -> u64 {
        self.registry.push(scheme);
        self.registry.len() as u64 - 1
    }

    pub fn index_to_scheme(&self, index: &BigUint) -> Scheme {
        let r = self.registry.len();
        match index.to_usize() {
            Some(i) if i < r => self.registry[i].clone(),
            _ => canonical_unrank(&(index - BigUint::from(r))),
        }
    }

    pub fn scheme_at(&self, index: u64) -> Scheme {
        self.index_to_scheme(&BigUint::from(index))
    }

    /// Least index whose scheme equals `scheme`.
    pub fn scheme_to_index(&self, scheme: &Scheme) -> BigUint {
        match self.registry.iter().position(|s| s == scheme) {
            Some(i) => BigUint::from(i),
            None => canonical_rank(scheme) + BigUint::from(self.registry.len()),
        }
    }

    /// SHA-256 over the registry in text form, schemes separated by `---`.
    pub fn registry_digest(&self) -> String {
        let mut h = Sha256::new();
        for (i, s) in self.registry.iter().enumerate() {
            if i > 0 {
                h.update(b"---\n");
            }
            h.update(s.to_text().as_bytes());
        }
        hex::encode(h.finalize())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::machine::constant_machine;
    use proptest::prelude::*;

    fn rule(l: &str, r: &str, t: bool) -> Rule {
        Rule::new(l, r, t).unwrap()
    }

    #[test]
    fn first_codes() {
        let n = Numbering::canonical();
        assert_eq!(n.scheme_at(0), Scheme::default());
        assert_eq!(n.scheme_at(1), Scheme::new(vec![rule("", "", false)]));
        assert_eq!(n.scheme_at(2), Scheme::new(vec![rule("", "", true)]));
        assert_eq!(n.scheme_at(3), Scheme::new(vec![rule("|", "", false)]));
    }

    /// Brute force: every symbol string of length <= 5 in length-lex order,
    /// keeping those that are complete codes.
    fn brute_force_codes() -> Vec<Vec<u8>> {
        let valid = |code: &[u8]| {
            let mut st = State::Boundary;
            for &s in code {
                match step(st, s) {
                    Some(n) => st = n,
                    None => return false,
                }
            }
            st == State::Boundary
        };
        let mut out = Vec::new();
        for len in 0..=5u32 {
            for mut k in 0..(SYMBOLS as u64).pow(len) {
                let mut code = vec![0u8; len as usize];
                for slot in code.iter_mut().rev() {
                    *slot = (k % SYMBOLS as u64) as u8;
                    k /= SYMBOLS as u64;
                }
                if valid(&code) {
                    out.push(code);
                }
            }
        }
        out
    }

    #[test]
    fn unrank_matches_brute_force_order() {
        let codes = brute_force_codes();
        assert_eq!(codes.len(), 1 + 2 + 24 + 220 + 1824);
        for (i, code) in codes.iter().enumerate() {
            assert_eq!(canonical_unrank(&BigUint::from(i)), decode_code(code), "index {i}");
        }
        let target = encode_code(&Scheme::new(vec![rule("", "|/", true)]));
        let pos = codes.iter().position(|c| c == &target).unwrap();
        assert_eq!(BigUint::from(pos), canonical_rank(&Scheme::new(vec![rule("", "|/", true)])));
    }

    #[test]
    fn length_counts() {
        let c = completion_counts(5);
        let lhs: Vec<u64> = c.iter().map(|p| p[0].to_u64().unwrap()).collect();
        assert_eq!(lhs, vec![1, 0, 2, 24, 220, 1824]);
    }

    #[test]
    fn empty_scheme_index_is_stable() {
        assert_eq!(canonical_rank(&Scheme::default()), BigUint::zero());
        let n = Numbering::new(vec![constant_machine(&Word::new("|").unwrap())]);
        assert_eq!(n.scheme_to_index(&Scheme::default()), BigUint::from(1u8));
        // golden value for a typical small scheme
        let s = Scheme::new(vec![rule("", "|/", true)]);
        assert_eq!(canonical_rank(&s), BigUint::from(176u32));
    }

    #[test]
    fn registry_prefix() {
        let k = constant_machine(&Word::new("ab").unwrap());
        let n = Numbering::new(vec![k.clone()]);
        assert_eq!(n.scheme_to_index(&k), BigUint::zero());
        assert_eq!(n.scheme_at(0), k);
        assert_eq!(n.scheme_at(1), Scheme::default());
        assert_eq!(n.registry_digest().len(), 64);
        assert_ne!(n.registry_digest(), Numbering::canonical().registry_digest());
    }

    #[test]
    fn small_schemes_all_appear_below_bound() {
        // every scheme of <= 3 rules with sides of length <= 2
        let words: Vec<Word> = {
            let mut v = vec![Word::empty()];
            for &a in &ALPHABET {
                v.push(Word::new(&(a as char).to_string()).unwrap());
                for &b in &ALPHABET {
                    v.push(Word::new(&format!("{}{}", a as char, b as char)).unwrap());
                }
            }
            v
        };
        let rules: Vec<Rule> = words
            .iter()
            .flat_map(|l| words.iter().flat_map(move |r| [false, true].map(|t| Rule { lhs: l.clone(), rhs: r.clone(), terminal: t })))
            .collect();
        // codes have length <= 3 * 6 = 18; the bound is the count of all shorter-or-equal codes
        let counts = completion_counts(18);
        let bound: BigUint = counts.iter().map(|c| &c[0]).sum();
        let n = Numbering::canonical();
        let mut checked = 0;
        for (i, a) in rules.iter().enumerate().step_by(37) {
            for b in rules.iter().skip(i % 11).step_by(401) {
                for s in [Scheme::new(vec![a.clone()]), Scheme::new(vec![a.clone(), b.clone()]), Scheme::new(vec![b.clone(), a.clone(), b.clone()])] {
                    let idx = n.scheme_to_index(&s);
                    assert!(idx < bound);
                    assert_eq!(n.index_to_scheme(&idx), s);
                    checked += 1;
                }
            }
        }
        assert!(checked > 500);
    }

    #[test]
    fn unrank_rank_prefix_is_bijective() {
        let n = Numbering::canonical();
        for i in 0u64..3000 {
            let s = n.scheme_at(i);
            assert_eq!(n.scheme_to_index(&s), BigUint::from(i));
        }
    }

    fn arb_scheme() -> impl Strategy<Value = Scheme> {
        let word = "[|/*ab-]{0,4}";
        proptest::collection::vec((word, word, any::<bool>()), 0..5).prop_map(|rules| {
            Scheme::new(rules.into_iter().map(|(l, r, t)| Rule::new(&l, &r, t).unwrap()).collect())
        })
    }

    proptest! {
        #[test]
        fn index_roundtrip(s in arb_scheme()) {
            let n = Numbering::new(vec![constant_machine(&Word::new("|").unwrap())]);
            let i = n.scheme_to_index(&s);
            prop_assert_eq!(n.index_to_scheme(&i), s);
        }
    }
}
