//! The index set of machines whose self-application halts with a valid
//! `*δ*p0*q0*...*pm*qm*` list, and its repetition-free enumeration `μ`.

use std::collections::BTreeSet;

use serde::Serialize;
use thiserror::Error;

use crate::machine::{self_application, Dovetailer, HaltEvent, Numbering, NUMBERING_VERSION};
use crate::numerals::{decode_rational, parse_star_system, rat, Rational, Word};
use crate::polygon::PolygonalFunction;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Reject {
    #[error("parse: {0}")]
    Parse(String),
    #[error("delta: {0} is not positive")]
    Delta(Rational),
    #[error("breakpoints: {0}")]
    Breakpoints(String),
    #[error("negativity: value {0} is below zero")]
    Negativity(Rational),
    #[error("integral: {0} is not below 1/2")]
    Integral(Rational),
}

impl Reject {
    pub fn reason(&self) -> &'static str {
        match self {
            Reject::Parse(_) => "parse",
            Reject::Delta(_) => "delta",
            Reject::Breakpoints(_) => "breakpoints",
            Reject::Negativity(_) => "negativity",
            Reject::Integral(_) => "integral",
        }
    }
}

/// A validated pair `(δ, g)` with `δ > 0`, `g ≥ 0` and `∫g < 1/2`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Candidate {
    pub delta: Rational,
    pub g: PolygonalFunction,
}

pub fn validate_candidate(w: &Word) -> Result<Candidate, Reject> {
    let segments = parse_star_system(w).map_err(|e| Reject::Parse(e.to_string()))?;
    let values = segments
        .iter()
        .map(decode_rational)
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| Reject::Parse(e.to_string()))?;
    let (delta, pairs) = values.split_first().expect("star systems have at least one segment");
    if pairs.is_empty() || pairs.len() % 2 != 0 {
        return Err(Reject::Parse(format!("expected δ followed by (p, q) pairs, got {} values", values.len())));
    }
    if !delta.is_positive() {
        return Err(Reject::Delta(delta.clone()));
    }
    let points: Vec<(Rational, Rational)> = pairs.chunks(2).map(|c| (c[0].clone(), c[1].clone())).collect();
    if points[0].0 != 0 {
        return Err(Reject::Breakpoints(format!("p0 = {} is not 0", points[0].0)));
    }
    if points[points.len() - 1].0 != 1 {
        return Err(Reject::Breakpoints(format!("last p = {} is not 1", points[points.len() - 1].0)));
    }
    if let Some(w) = points.windows(2).find(|w| w[0].0 >= w[1].0) {
        return Err(Reject::Breakpoints(format!("{} then {} is not increasing", w[0].0, w[1].0)));
    }
    if let Some((_, q)) = points.iter().find(|(_, q)| q.is_negative()) {
        return Err(Reject::Negativity(q.clone()));
    }
    let g = PolygonalFunction::new(points).map_err(|e| Reject::Breakpoints(e.to_string()))?;
    let integral = g.integral();
    if integral >= rat(1, 2) {
        return Err(Reject::Integral(integral));
    }
    Ok(Candidate { delta: delta.clone(), g })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Entry {
    pub n: usize,
    pub mu: u64,
    pub delta: Rational,
    pub g: PolygonalFunction,
    #[serde(skip)]
    pub output: Word,
}

/// Entries in discovery order plus the dovetail that produced them, so the
/// enumeration can be continued.
pub struct EnumerationState {
    entries: Vec<Entry>,
    seen: BTreeSet<u64>,
    dovetailer: Dovetailer,
}

#[derive(Serialize)]
struct EnumerationView<'a> {
    numbering_version: &'static str,
    stages: u64,
    entries: &'a [Entry],
}

impl Serialize for EnumerationState {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        EnumerationView { numbering_version: NUMBERING_VERSION, stages: self.stages(), entries: &self.entries }
            .serialize(serializer)
    }
}

impl EnumerationState {
    pub fn new(numbering: Numbering) -> Self {
        Self::with_dovetailer(Dovetailer::new(numbering, self_application))
    }

    pub fn with_dovetailer(dovetailer: Dovetailer) -> Self {
        EnumerationState { entries: Vec::new(), seen: BTreeSet::new(), dovetailer }
    }

    pub fn entries(&self) -> &[Entry] {
        &self.entries
    }

    pub fn entry(&self, n: usize) -> Option<&Entry> {
        self.entries.get(n)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn stages(&self) -> u64 {
        self.dovetailer.stage()
    }

    pub fn numbering(&self) -> &Numbering {
        self.dovetailer.numbering()
    }

    /// Position of machine `index` in the enumeration, if enrolled.
    pub fn position_of(&self, index: u64) -> Option<usize> {
        self.entries.iter().position(|e| e.mu == index)
    }

    fn absorb(&mut self, events: &[HaltEvent]) {
        for event in events {
            if self.seen.contains(&event.index) {
                continue;
            }
            if let Ok(c) = validate_candidate(&event.output) {
                self.seen.insert(event.index);
                self.entries.push(Entry { n: self.entries.len(), mu: event.index, delta: c.delta, g: c.g, output: event.output.clone() });
            }
        }
    }

    /// Runs one dovetail stage, enrolls its valid halts and returns all of
    /// the stage's halts.
    pub fn step_stage(&mut self) -> Vec<HaltEvent> {
        let events = self.dovetailer.step_stage();
        self.absorb(&events);
        events
    }

    pub fn run_stages(&mut self, stages: u64) {
        for _ in 0..stages {
            self.step_stage();
        }
    }

    /// Runs further stages until `done` holds, spending at most `budget`
    /// stages. Returns whether `done` was reached.
    pub fn run_until(&mut self, budget: u64, done: impl Fn(&Self) -> bool) -> bool {
        for _ in 0..budget {
            if done(self) {
                return true;
            }
            self.step_stage();
        }
        done(self)
    }
}

pub fn enumerate_mu(numbering: Numbering, stages: u64) -> EnumerationState {
    let mut state = EnumerationState::new(numbering);
    state.run_stages(stages);
    state
}

/// `*δ*p0*q0*...*` for a candidate.
pub fn encode_candidate(delta: &Rational, g: &PolygonalFunction) -> Word {
    let mut values = vec![delta.clone()];
    for (p, q) in g.points() {
        values.push(p.clone());
        values.push(q.clone());
    }
    crate::numerals::encode_rational_list(&values)
}
