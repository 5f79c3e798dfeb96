//! Finite prefixes of a singular covering of `[0,1]` and the nondecreasing
//! sequence `h_0 = 0`, `h_{n+1} = max(h_n, 2·φ_n)` built from it.
//!
//! Machine `e` that halts on its own numeral with a word decoding to
//! `r ∈ [0,1]` contributes `(r − 2^{−e−5}, r + 2^{−e−5})`; these lengths sum
//! to at most 1/8. Accelerator injections at slot `j` contribute
//! `(x − 2^{−j−8}, x + 2^{−j−8})`, of lengths `2^{−j−7}` summing to at most
//! 1/64. The total stays at or below 9/64 < 1/6 (machine intervals alone stay
//! at or below 1/8), and every prefix is re-checked exactly.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::error::PolygonError;
use crate::machine::{self_application, Dovetailer, HaltEvent, Numbering};
use crate::numerals::{decode_rational, rat, Rational};
use crate::polygon::PolygonalFunction;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CoveringError {
    #[error("covering lengths sum to {total}, not below 1/6")]
    Budget { total: Rational },
    #[error("h_{requested} needs more intervals; only {available} emitted")]
    NeedsMoreStages { requested: usize, available: usize },
    #[error("injection slot {0} used twice")]
    DuplicateSlot(u32),
    #[error("point {0} lies outside [0,1]")]
    OutOfRange(Rational),
    #[error("h-sequence invariant violated at n = {n}: {what}")]
    Invariant { n: usize, what: String },
    #[error(transparent)]
    Polygon(#[from] PolygonError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Source {
    Machine(u64),
    Injected(u32),
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Source::Machine(e) => write!(f, "machine:{e}"),
            Source::Injected(j) => write!(f, "injected:{j}"),
        }
    }
}

impl Serialize for Source {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Interval {
    pub a: Rational,
    pub b: Rational,
    pub source: Source,
}

impl Interval {
    pub fn length(&self) -> Rational {
        &self.b - &self.a
    }

    pub fn contains(&self, x: &Rational) -> bool {
        &self.a <= x && x <= &self.b
    }

    /// `2·φ(x)` for this interval's trapezoid, from the closed-form
    /// expression rather than the polygon.
    pub fn double_phi_at(&self, x: &Rational) -> Rational {
        let two = rat(2, 1);
        let len = self.length();
        let t = &two - (&(&two * x) - &self.b - &self.a).abs() / &len;
        two * t.max(Rational::zero()).min(Rational::one())
    }
}

impl Serialize for Interval {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        (&self.a, &self.b, &self.source).serialize(serializer)
    }
}

pub fn machine_radius(e: u64) -> Rational {
    Rational::pow2_neg(e + 5)
}

pub fn injection_radius(slot: u32) -> Rational {
    Rational::pow2_neg(slot as u64 + 8)
}

/// Upper bound on any prefix total under the radius rules.
pub fn length_budget() -> Rational {
    rat(9, 64)
}

/// Upper bound on the machine-sourced part of any prefix.
pub fn machine_length_budget() -> Rational {
    rat(1, 8)
}

/// The interval a halt event contributes, if its output decodes into `[0,1]`.
pub fn interval_from_event(event: &HaltEvent) -> Option<Interval> {
    let r = decode_rational(&event.output).ok()?;
    if !r.in_unit_interval() {
        return None;
    }
    let rad = machine_radius(event.index);
    Some(Interval { a: &r - &rad, b: &r + &rad, source: Source::Machine(event.index) })
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CoveringPrefix {
    intervals: Vec<Interval>,
    total: Rational,
    machine_total: Rational,
    slots: BTreeSet<u32>,
}

impl CoveringPrefix {
    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn total_length(&self) -> &Rational {
        &self.total
    }

    /// Total length of the machine-sourced intervals.
    pub fn machine_length(&self) -> &Rational {
        &self.machine_total
    }

    pub fn next_free_slot(&self) -> u32 {
        self.slots.last().map_or(0, |s| s + 1)
    }

    /// Appends an interval, re-checking the partial sum exactly.
    pub fn push(&mut self, interval: Interval) -> Result<(), CoveringError> {
        if let Source::Injected(j) = interval.source {
            if !self.slots.insert(j) {
                return Err(CoveringError::DuplicateSlot(j));
            }
        }
        let total = &self.total + &interval.length();
        if total >= rat(1, 6) || total > length_budget() {
            return Err(CoveringError::Budget { total });
        }
        if let Source::Machine(_) = interval.source {
            let machine_total = &self.machine_total + &interval.length();
            if machine_total > machine_length_budget() {
                return Err(CoveringError::Budget { total: machine_total });
            }
            self.machine_total = machine_total;
        }
        self.total = total;
        self.intervals.push(interval);
        Ok(())
    }

    pub fn inject(&mut self, x: &Rational, slot: u32) -> Result<(), CoveringError> {
        if !x.in_unit_interval() {
            return Err(CoveringError::OutOfRange(x.clone()));
        }
        let rad = injection_radius(slot);
        self.push(Interval { a: x - &rad, b: x + &rad, source: Source::Injected(slot) })
    }

    fn absorb(&mut self, events: &[HaltEvent]) -> Result<(), CoveringError> {
        for iv in events.iter().filter_map(interval_from_event) {
            self.push(iv)?;
        }
        Ok(())
    }
}

/// Injections first, in the given order, then machine intervals in dovetail
/// order.
pub fn covering_prefix(numbering: &Numbering, stages: u64, injections: &[(Rational, u32)]) -> Result<CoveringPrefix, CoveringError> {
    Ok(HSequence::build(numbering.clone(), stages, injections, None)?.into_covering())
}

/// Result of a per-point coverage search.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Coverage {
    /// Least `n` (greater than the requested floor) meeting the threshold.
    Found(usize),
    BudgetExhausted { stages_run: u64 },
}

/// How far to push a coverage search.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchBudget {
    /// Extra dovetail stages allowed.
    pub stages: u64,
    /// Inject an interval at the target point instead of dovetailing.
    pub accelerate: bool,
}

/// A covering prefix with the cached `h_n` and, when built from a numbering,
/// the dovetailer that extends it.
pub struct HSequence {
    covering: CoveringPrefix,
    hs: Vec<PolygonalFunction>,
    dovetailer: Option<Dovetailer>,
}

impl HSequence {
    pub fn from_covering(covering: CoveringPrefix) -> Self {
        HSequence { covering, hs: vec![PolygonalFunction::zero()], dovetailer: None }
    }

    /// Runs `stages` dovetail stages (machines on their own numerals) after
    /// placing `injections`. The dovetailer is kept for later extension.
    pub fn build(numbering: Numbering, stages: u64, injections: &[(Rational, u32)], max_fuel: Option<u64>) -> Result<Self, CoveringError> {
        let mut covering = CoveringPrefix::default();
        for (x, slot) in injections {
            covering.inject(x, *slot)?;
        }
        let mut dovetailer = Dovetailer::new(numbering, self_application);
        if let Some(f) = max_fuel {
            dovetailer = dovetailer.with_max_fuel(f);
        }
        for _ in 0..stages {
            let events = dovetailer.step_stage();
            covering.absorb(&events)?;
        }
        Ok(HSequence { covering, hs: vec![PolygonalFunction::zero()], dovetailer: Some(dovetailer) })
    }

    /// Feeds halts from an externally driven dovetail into the covering.
    pub fn absorb(&mut self, events: &[HaltEvent]) -> Result<(), CoveringError> {
        self.covering.absorb(events)
    }

    pub fn covering(&self) -> &CoveringPrefix {
        &self.covering
    }

    pub fn into_covering(self) -> CoveringPrefix {
        self.covering
    }

    pub fn stages_run(&self) -> u64 {
        self.dovetailer.as_ref().map_or(0, |d| d.stage())
    }

    /// Number of available `h` indices minus one, i.e. the largest `n` for
    /// which `h_n` can be built without extending the covering.
    pub fn max_index(&self) -> usize {
        self.covering.len()
    }

    /// `h_n`, building and checking any missing members up to `n`.
    pub fn h(&mut self, n: usize) -> Result<&PolygonalFunction, CoveringError> {
        if n > self.covering.len() {
            return Err(CoveringError::NeedsMoreStages { requested: n, available: self.covering.len() });
        }
        while self.hs.len() <= n {
            let k = self.hs.len() - 1;
            let iv = &self.covering.intervals[k];
            let bump = PolygonalFunction::trapezoid_phi(&iv.a, &iv.b)?.scale(&rat(2, 1));
            let next = self.hs[k].lattice_sup(&bump);
            check_step(&self.hs[k], &next, iv, k + 1)?;
            self.hs.push(next);
        }
        Ok(&self.hs[n])
    }

    /// Every `h_0..=h_n` that has been built so far.
    pub fn built(&self) -> &[PolygonalFunction] {
        &self.hs
    }

    /// Least `n > floor` with `pred(h_n(x))`, where `pred` is monotone along
    /// the nondecreasing sequence `h_n(x)`. Uses the closed-form trapezoids:
    /// `h_n(x) = max_{k<n} 2φ_k(x)`.
    fn first_index(&self, x: &Rational, floor: usize, pred: &dyn Fn(&Rational) -> bool) -> Option<usize> {
        self.covering
            .intervals
            .iter()
            .position(|iv| pred(&iv.double_phi_at(x)))
            .map(|k| (k + 1).max(floor + 1))
    }

    /// Extends the covering until some `h_n(x)` with `n > floor` satisfies
    /// `pred`; returns the least such `n`.
    pub fn search(&mut self, x: &Rational, floor: usize, pred: &dyn Fn(&Rational) -> bool, budget: SearchBudget) -> Result<Coverage, CoveringError> {
        if !x.in_unit_interval() {
            return Err(CoveringError::OutOfRange(x.clone()));
        }
        let mut spent = 0u64;
        loop {
            if let Some(n) = self.first_index(x, floor, pred) {
                if n <= self.covering.len() {
                    return Ok(Coverage::Found(n));
                }
            }
            if budget.accelerate {
                let slot = self.covering.next_free_slot();
                self.covering.inject(x, slot)?;
                continue;
            }
            match self.dovetailer.as_mut() {
                Some(d) if spent < budget.stages => {
                    let events = d.step_stage();
                    spent += 1;
                    self.covering.absorb(&events)?;
                }
                _ => return Ok(Coverage::BudgetExhausted { stages_run: spent }),
            }
        }
    }

    /// Least `n` with `h_n(x) = 2`.
    pub fn coverage_search(&mut self, x: &Rational, budget: SearchBudget) -> Result<Coverage, CoveringError> {
        let two = rat(2, 1);
        self.search(x, 0, &|v| v == &two, budget)
    }
}

fn check_step(prev: &PolygonalFunction, next: &PolygonalFunction, iv: &Interval, n: usize) -> Result<(), CoveringError> {
    let fail = |what: &str| Err(CoveringError::Invariant { n, what: what.to_string() });
    if next.min_value().is_negative() || next.max_value() > rat(2, 1) {
        return fail("values leave [0,2]");
    }
    if !prev.le_everywhere(next) {
        return fail("not nondecreasing");
    }
    if next.integral() >= rat(1, 2) {
        return fail("integral reaches 1/2");
    }
    let lo = iv.a.clamp_unit();
    let hi = iv.b.clamp_unit();
    let two = rat(2, 1);
    let plateau_ok = next.eval_unchecked(&lo) == two
        && next.eval_unchecked(&hi) == two
        && next.points().iter().filter(|(x, _)| x >= &lo && x <= &hi).all(|(_, y)| y == &two);
    if !plateau_ok {
        return fail("plateau below 2 on the covering interval");
    }
    Ok(())
}
