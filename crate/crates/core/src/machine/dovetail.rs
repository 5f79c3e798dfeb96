//! Triangular dovetailing of all machines in a numbering.
//!
//! At stage `t = 1, 2, …` machines `0..=t` are each resumed until their total
//! fuel reaches `t`, so machine `i` that halts in `k` steps is observed at
//! stage `max(1, i, k)`. Halts are reported per stage in index order. The
//! schedule is part of [`NUMBERING_VERSION`](super::NUMBERING_VERSION).

use serde::Serialize;

use super::{Numbering, Run, Scheme};
use crate::exec::Exec;
use crate::numerals::{encode_natural, Word};

pub const DEFAULT_MAX_FUEL: u64 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HaltEvent {
    pub index: u64,
    pub input: Word,
    pub output: Word,
    pub steps: u64,
}

/// Input fed to machine `i`.
pub type InputRule = fn(u64) -> Word;

/// Self-application: machine `i` runs on the numeral of `i`.
pub fn self_application(i: u64) -> Word {
    encode_natural(i)
}

struct Slot {
    scheme: Scheme,
    input: Word,
    run: Run,
    stalled: bool,
}

pub struct Dovetailer {
    numbering: Numbering,
    input_of: InputRule,
    slots: Vec<Slot>,
    stage: u64,
    max_fuel: u64,
    exec: Exec,
}

impl Dovetailer {
    pub fn new(numbering: Numbering, input_of: InputRule) -> Self {
        Dovetailer { numbering, input_of, slots: Vec::new(), stage: 0, max_fuel: DEFAULT_MAX_FUEL, exec: Exec::default() }
    }

    /// Caps the per-machine fuel regardless of stage.
    pub fn with_max_fuel(mut self, max_fuel: u64) -> Self {
        self.max_fuel = max_fuel;
        self
    }

    /// Machines within a stage are independent; the halts are reassembled in
    /// index order, so the mode affects speed only.
    pub fn with_exec(mut self, exec: Exec) -> Self {
        self.exec = exec;
        self
    }

    pub fn numbering(&self) -> &Numbering {
        &self.numbering
    }

    pub fn stage(&self) -> u64 {
        self.stage
    }

    /// Runs one more stage and returns its halts.
    pub fn step_stage(&mut self) -> Vec<HaltEvent> {
        self.stage += 1;
        let t = self.stage;
        while (self.slots.len() as u64) <= t {
            let i = self.slots.len() as u64;
            let input = (self.input_of)(i);
            self.slots.push(Slot { scheme: self.numbering.scheme_at(i), run: Run::new(&input), input, stalled: false });
        }
        let max_fuel = self.max_fuel;
        let budget = t.min(max_fuel);
        let results = self.exec.map_mut(&mut self.slots, |slot| {
            if slot.stalled || slot.run.is_finished() {
                return None;
            }
            let halted = slot.run.advance(&slot.scheme, budget);
            if halted.is_none() && slot.run.steps() >= max_fuel {
                slot.stalled = true;
            }
            halted
        });
        results
            .into_iter()
            .enumerate()
            .filter_map(|(i, r)| {
                r.map(|(output, steps)| HaltEvent { index: i as u64, input: self.slots[i].input.clone(), output, steps })
            })
            .collect()
    }

    pub fn run_stages(&mut self, stages: u64) -> Vec<HaltEvent> {
        let mut events = Vec::new();
        for _ in 0..stages {
            events.extend(self.step_stage());
        }
        events
    }
}

/// Halts observed in the first `stages` stages.
pub fn dovetail(numbering: &Numbering, stages: u64, input_of: InputRule) -> Vec<HaltEvent> {
    Dovetailer::new(numbering.clone(), input_of).run_stages(stages)
}
