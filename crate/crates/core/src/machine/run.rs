use serde::Serialize;

use super::Scheme;
use crate::numerals::Word;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Outcome {
    Halted { output: Word, steps: u64 },
    OutOfFuel,
}

/// A computation that can be resumed with a larger fuel budget.
#[derive(Debug, Clone)]
pub struct Run {
    word: String,
    steps: u64,
    finished: bool,
}

impl Run {
    pub fn new(input: &Word) -> Self {
        Run { word: input.as_str().to_string(), steps: 0, finished: false }
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn is_finished(&self) -> bool {
        self.finished
    }

    /// Continues until the machine halts or `total_fuel` substitutions have
    /// been made in total. Returns the halting outcome the first time it is
    /// reached, `None` otherwise (including on later calls).
    pub fn advance(&mut self, scheme: &Scheme, total_fuel: u64) -> Option<(Word, u64)> {
        if self.finished {
            return None;
        }
        loop {
            let hit = scheme.rules.iter().find_map(|r| self.word.find(r.lhs.as_str()).map(|pos| (r, pos)));
            let Some((rule, pos)) = hit else {
                return Some(self.finish());
            };
            if self.steps >= total_fuel {
                return None;
            }
            self.word.replace_range(pos..pos + rule.lhs.len(), rule.rhs.as_str());
            self.steps += 1;
            if rule.terminal {
                return Some(self.finish());
            }
        }
    }

    fn finish(&mut self) -> (Word, u64) {
        self.finished = true;
        (Word::from_string_unchecked(std::mem::take(&mut self.word)), self.steps)
    }
}

/// Applies `scheme` to `input` with at most `fuel` substitutions: the first
/// rule (in scheme order) whose left side occurs rewrites its leftmost
/// occurrence; an empty left side matches at position 0. Stops after a
/// terminal rule or when no rule applies.
pub fn run_machine(scheme: &Scheme, input: &Word, fuel: u64) -> Outcome {
    match Run::new(input).advance(scheme, fuel) {
        Some((output, steps)) => Outcome::Halted { output, steps },
        None => Outcome::OutOfFuel,
    }
}
