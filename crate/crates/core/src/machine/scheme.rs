use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::ParseError;
use crate::numerals::{Word, ALPHABET};

/// One substitution `lhs -> rhs`, or `lhs ->. rhs` when terminal.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Rule {
    pub lhs: Word,
    pub rhs: Word,
    pub terminal: bool,
}

impl Rule {
    pub fn new(lhs: &str, rhs: &str, terminal: bool) -> Result<Self, ParseError> {
        Ok(Rule { lhs: Word::new(lhs)?, rhs: Word::new(rhs)?, terminal })
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let arrow = if self.terminal { "->." } else { "->" };
        match (self.lhs.is_empty(), self.rhs.is_empty()) {
            (true, true) => write!(f, "{arrow}"),
            (true, false) => write!(f, "{arrow} {}", self.rhs),
            (false, true) => write!(f, "{} {arrow}", self.lhs),
            (false, false) => write!(f, "{} {arrow} {}", self.lhs, self.rhs),
        }
    }
}

/// A normal algorithm: rules tried in order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct Scheme {
    pub rules: Vec<Rule>,
}

impl Scheme {
    pub fn new(rules: Vec<Rule>) -> Self {
        Scheme { rules }
    }

    /// Parses the line-oriented text format. `#` starts a comment line.
    pub fn parse(text: &str) -> Result<Self, ParseError> {
        let mut rules = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |reason: String| ParseError::SchemeLine { line: i + 1, reason };
            // '>' is not a letter, so its first occurrence locates the arrow
            let gt = line.find('>').ok_or_else(|| err("missing '->'".into()))?;
            if gt == 0 || &line[gt - 1..gt] != "-" {
                return Err(err("missing '->'".into()));
            }
            let lhs = line[..gt - 1].trim();
            let mut rest = &line[gt + 1..];
            let terminal = rest.starts_with('.');
            if terminal {
                rest = &rest[1..];
            }
            let rhs = rest.trim();
            let word = |s: &str| Word::new(s).map_err(|e| err(e.to_string()));
            rules.push(Rule { lhs: word(lhs)?, rhs: word(rhs)?, terminal });
        }
        Ok(Scheme { rules })
    }

    /// Several schemes in one file, separated by `---` lines.
    pub fn parse_many(text: &str) -> Result<Vec<Self>, ParseError> {
        let mut chunks = vec![String::new()];
        let mut offsets = vec![0usize];
        for (i, line) in text.lines().enumerate() {
            if line.trim() == "---" {
                chunks.push(String::new());
                offsets.push(i + 1);
            } else {
                let cur = chunks.last_mut().expect("nonempty");
                cur.push_str(line);
                cur.push('\n');
            }
        }
        chunks
            .iter()
            .zip(offsets)
            .map(|(chunk, off)| {
                Scheme::parse(chunk).map_err(|e| match e {
                    ParseError::SchemeLine { line, reason } => ParseError::SchemeLine { line: line + off, reason },
                    other => other,
                })
            })
            .collect()
    }

    pub fn to_text(&self) -> String {
        self.rules.iter().map(|r| format!("{r}\n")).collect()
    }
}

/// Erases the input letter by letter, then writes `w` and stops. Output is
/// `w` on every input.
pub fn constant_machine(w: &Word) -> Scheme {
    let mut rules: Vec<Rule> = ALPHABET
        .iter()
        .map(|&c| Rule {
            lhs: Word::from_string_unchecked((c as char).to_string()),
            rhs: Word::empty(),
            terminal: false,
        })
        .collect();
    rules.push(Rule { lhs: Word::empty(), rhs: w.clone(), terminal: true });
    Scheme { rules }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_format() {
        let text = "# doubles a's\na -> bb\n -> \n|->.-\n->. ab\n- -> /\n-->|\n";
        let s = Scheme::parse(text).unwrap();
        assert_eq!(
            s.rules,
            vec![
                Rule::new("a", "bb", false).unwrap(),
                Rule::new("", "", false).unwrap(),
                Rule::new("|", "-", true).unwrap(),
                Rule::new("", "ab", true).unwrap(),
                Rule::new("-", "/", false).unwrap(),
                Rule::new("-", "|", false).unwrap(),
            ]
        );
        assert_eq!(Scheme::parse(&s.to_text()).unwrap(), s);
    }

    #[test]
    fn text_errors() {
        assert!(matches!(Scheme::parse("ab"), Err(ParseError::SchemeLine { line: 1, .. })));
        assert!(matches!(Scheme::parse("# c\na => b"), Err(ParseError::SchemeLine { line: 2, .. })));
        assert!(matches!(Scheme::parse("x -> a"), Err(ParseError::SchemeLine { line: 1, .. })));
        assert!(matches!(Scheme::parse("a -> b c"), Err(ParseError::SchemeLine { line: 1, .. })));
    }

    #[test]
    fn many() {
        let v = Scheme::parse_many("a -> b\n---\n->. |\n---\nbad\n").unwrap_err();
        assert_eq!(v, ParseError::SchemeLine { line: 5, reason: "missing '->'".into() });
        let v = Scheme::parse_many("a -> b\n---\n->. |\n").unwrap();
        assert_eq!(v.len(), 2);
        assert_eq!(v[1].rules[0].rhs.as_str(), "|");
    }

    #[test]
    fn constant_machine_shape() {
        let s = constant_machine(&Word::new("ab").unwrap());
        assert_eq!(s.rules.len(), 7);
        assert!(s.rules[6].terminal && s.rules[6].lhs.is_empty());
    }
}
