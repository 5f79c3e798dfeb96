//! The diagonal construction: witness points `ζ_n`, radii `β_n`, the index
//! sequence `ν`, bumps `f_n = bump(2^{−μ(n)}, β_n, ζ_n)` and their partial
//! sums `F_N`, with exact checks of every strict inequality involved.

use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::covering::{Coverage, CoveringError, CoveringPrefix, HSequence, SearchBudget};
use crate::enumerator::{Entry, EnumerationState};
use crate::error::PolygonError;
use crate::machine::{self_application, Dovetailer, Numbering, NUMBERING_VERSION};
use crate::numerals::{rat, Rational};
use crate::polygon::{PolygonalFunction, Side, Tagging, TaggedPartition};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Enumeration,
    Coverage,
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Phase::Enumeration => "enumeration",
            Phase::Coverage => "coverage",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DiagonalError {
    #[error("budget exhausted during {phase} after {stages} extra stages")]
    BudgetExhausted { phase: Phase, stages: u64 },
    #[error("row {n}: {what}")]
    Assertion { n: usize, what: String },
    #[error("row {requested} requested but only {rows} built")]
    OutOfRange { requested: usize, rows: usize },
    #[error(transparent)]
    Covering(#[from] CoveringError),
    #[error(transparent)]
    Polygon(#[from] PolygonError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Row {
    pub n: usize,
    pub mu: u64,
    #[serde(skip)]
    pub delta: Rational,
    pub zeta: Rational,
    pub beta: Rational,
    #[serde(skip)]
    pub nu: usize,
    pub nu_next: usize,
    #[serde(skip)]
    pub bump: PolygonalFunction,
}

/// Enumeration and covering share one dovetail: every stage feeds its halts
/// to both.
pub struct DiagonalState {
    enumeration: EnumerationState,
    hseq: HSequence,
    nu: Vec<usize>,
    rows: Vec<Row>,
}

impl fmt::Debug for DiagonalState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DiagonalState").field("stages", &self.stages()).field("nu", &self.nu).field("rows", &self.rows).finish()
    }
}

#[derive(Serialize)]
struct DiagonalView<'a> {
    numbering_version: &'static str,
    stages: u64,
    nu: &'a [usize],
    rows: &'a [Row],
}

impl Serialize for DiagonalState {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        DiagonalView { numbering_version: NUMBERING_VERSION, stages: self.stages(), nu: &self.nu, rows: &self.rows }
            .serialize(serializer)
    }
}

impl DiagonalState {
    /// Places `injections`, then runs `stages` shared dovetail stages.
    pub fn build(numbering: Numbering, stages: u64, injections: &[(Rational, u32)], max_fuel: Option<u64>) -> Result<Self, DiagonalError> {
        let mut dovetailer = Dovetailer::new(numbering, self_application);
        if let Some(f) = max_fuel {
            dovetailer = dovetailer.with_max_fuel(f);
        }
        let mut covering = CoveringPrefix::default();
        for (x, slot) in injections {
            covering.inject(x, *slot)?;
        }
        let mut state = DiagonalState {
            enumeration: EnumerationState::with_dovetailer(dovetailer),
            hseq: HSequence::from_covering(covering),
            nu: vec![0],
            rows: Vec::new(),
        };
        for _ in 0..stages {
            state.step()?;
        }
        Ok(state)
    }

    fn step(&mut self) -> Result<(), CoveringError> {
        let events = self.enumeration.step_stage();
        self.hseq.absorb(&events)
    }

    pub fn stages(&self) -> u64 {
        self.enumeration.stages()
    }

    pub fn numbering(&self) -> &Numbering {
        self.enumeration.numbering()
    }

    pub fn enumeration(&self) -> &EnumerationState {
        &self.enumeration
    }

    pub fn hseq(&self) -> &HSequence {
        &self.hseq
    }

    pub fn hseq_mut(&mut self) -> &mut HSequence {
        &mut self.hseq
    }

    pub fn nu(&self) -> &[usize] {
        &self.nu
    }

    pub fn rows(&self) -> &[Row] {
        &self.rows
    }

    /// Runs extra stages until the enumeration has `n + 1` entries.
    pub fn await_entry(&mut self, n: usize, stage_budget: u64) -> Result<&Entry, DiagonalError> {
        let mut spent = 0;
        while self.enumeration.len() <= n {
            if spent >= stage_budget {
                return Err(DiagonalError::BudgetExhausted { phase: Phase::Enumeration, stages: spent });
            }
            self.step()?;
            spent += 1;
        }
        Ok(self.enumeration.entry(n).expect("entry just awaited"))
    }

    /// Runs extra stages until machine `index` is enrolled; returns its
    /// position `m` in the enumeration.
    pub fn enrol(&mut self, index: u64, stage_budget: u64) -> Result<usize, DiagonalError> {
        let mut spent = 0;
        loop {
            if let Some(m) = self.enumeration.position_of(index) {
                return Ok(m);
            }
            if spent >= stage_budget {
                return Err(DiagonalError::BudgetExhausted { phase: Phase::Enumeration, stages: spent });
            }
            self.step()?;
            spent += 1;
        }
    }

    /// Builds the next row. Extra dovetail stages, at most `budget.stages`,
    /// are spent while waiting for the next enumeration entry or for the
    /// covering to reach `ζ_n`.
    pub fn extend(&mut self, budget: SearchBudget) -> Result<&Row, DiagonalError> {
        let n = self.rows.len();
        let before = self.stages();
        let entry = self.await_entry(n, budget.stages)?.clone();
        let nu_n = self.nu[n];
        let one = Rational::one();

        let s = entry.g.add(self.hseq.h(nu_n)?);
        let zeta = choose_zeta(&s).ok_or_else(|| DiagonalError::Assertion { n, what: format!("g + h_{nu_n} never drops below 1") })?;

        let nu_next = loop {
            let spent = self.stages() - before;
            let search = SearchBudget { stages: 0, accelerate: budget.accelerate };
            match self.hseq.search(&zeta, nu_n, &|v| v > &one, search)? {
                Coverage::Found(k) => break k,
                Coverage::BudgetExhausted { .. } if spent < budget.stages => self.step()?,
                Coverage::BudgetExhausted { .. } => {
                    return Err(DiagonalError::BudgetExhausted { phase: Phase::Coverage, stages: spent })
                }
            }
        };
        let h_next = self.hseq.h(nu_next)?.clone();

        let rho1 = s.strict_level_radius(&zeta, &one, Side::Below)?;
        let rho2 = h_next.strict_level_radius(&zeta, &one, Side::Above)?;
        let beta = [rho2, entry.delta.clone(), zeta.clone(), &one - &zeta].into_iter().fold(rho1, Rational::min) / rat(2, 1);

        check_row(n, &entry.delta, &zeta, &beta, &s, &h_next)?;
        let bump = PolygonalFunction::bump(&Rational::pow2_neg(entry.mu), &beta, &zeta)?;
        self.nu.push(nu_next);
        self.rows.push(Row { n, mu: entry.mu, delta: entry.delta, zeta, beta, nu: nu_n, nu_next, bump });
        Ok(&self.rows[n])
    }

    /// Extends until `rows` rows exist.
    pub fn extend_to(&mut self, rows: usize, budget: SearchBudget) -> Result<(), DiagonalError> {
        let start = self.stages();
        while self.rows.len() < rows {
            let spent = self.stages() - start;
            let remaining = SearchBudget { stages: budget.stages.saturating_sub(spent), ..budget };
            self.extend(remaining)?;
        }
        Ok(())
    }

    /// Re-checks the strict inequalities of every built row from scratch.
    pub fn recheck_rows(&mut self) -> Result<(), DiagonalError> {
        for i in 0..self.rows.len() {
            let row = self.rows[i].clone();
            if i > 0 && self.nu[i] <= self.nu[i - 1] {
                return Err(DiagonalError::Assertion { n: i, what: "ν is not strictly increasing".into() });
            }
            let entry = self.enumeration.entry(i).expect("every row has an entry").clone();
            if (entry.mu, &entry.delta) != (row.mu, &row.delta) {
                return Err(DiagonalError::Assertion { n: i, what: "row disagrees with the enumeration".into() });
            }
            let s = entry.g.add(self.hseq.h(row.nu)?);
            let h_next = self.hseq.h(row.nu_next)?.clone();
            check_row(i, &row.delta, &row.zeta, &row.beta, &s, &h_next)?;
            if row.bump != PolygonalFunction::bump(&Rational::pow2_neg(row.mu), &row.beta, &row.zeta)? {
                return Err(DiagonalError::Assertion { n: i, what: "bump does not match its parameters".into() });
            }
        }
        Ok(())
    }

    /// `F_N = f_0 + … + f_N`.
    pub fn partial_sum(&self, n: usize) -> Result<PolygonalFunction, DiagonalError> {
        if n >= self.rows.len() {
            return Err(DiagonalError::OutOfRange { requested: n, rows: self.rows.len() });
        }
        Ok(self.sum_of(n + 1))
    }

    fn sum_of(&self, terms: usize) -> PolygonalFunction {
        self.rows[..terms].iter().fold(PolygonalFunction::zero(), |acc, r| acc.add(&r.bump))
    }

    /// Riemann-integrability checks for the sum of the first `terms` bumps
    /// (`terms = N + 1`; zero terms is the empty sum).
    pub fn verify_riemann(&self, terms: usize, eps: &Rational) -> Result<RiemannReport, DiagonalError> {
        if terms > self.rows.len() {
            return Err(DiagonalError::OutOfRange { requested: terms, rows: self.rows.len() });
        }
        if !eps.is_positive() {
            return Err(PolygonError::Parameter(format!("ε must be positive, got {eps}")).into());
        }
        let window = eps / &rat(16, 1);
        let f = self.sum_of(terms);
        let a = f.oscillation(&window)?.integral();
        let mut bumps = Vec::with_capacity(terms);
        for row in &self.rows[..terms] {
            let value = row.bump.oscillation(&window)?.integral();
            let bound = Rational::pow2_neg(row.mu + 1) * eps;
            bumps.push(BumpBound { n: row.n, value, bound });
        }
        let b: Rational = bumps.iter().map(|x| &x.value).sum();
        let c: Rational = bumps.iter().map(|x| &x.bound).sum();
        let cells: u32 = (rat(16, 1) / eps).ceil().try_into().map_err(|_| PolygonError::Parameter(format!("ε = {eps} is too small")))?;
        let left = f.riemann_sum(&TaggedPartition::uniform(cells, Tagging::Left));
        let right = f.riemann_sum(&TaggedPartition::uniform(cells, Tagging::Right));
        let cauchy_gap = (&left - &right).abs();

        let mut failures = Vec::new();
        if a > b {
            failures.push(format!("A = {a} exceeds B = {b}"));
        }
        if (terms > 0 && b >= c) || b > c {
            failures.push(format!("B = {b} is not below C = {c}"));
        }
        if &c >= eps {
            failures.push(format!("C = {c} is not below ε = {eps}"));
        }
        for x in &bumps {
            if x.value > x.bound {
                failures.push(format!("bump {}: {} exceeds {}", x.n, x.value, x.bound));
            }
        }
        if cauchy_gap > &a * &rat(2, 1) {
            failures.push(format!("|I(F,τ) − I(F,σ)| = {cauchy_gap} exceeds 2A"));
        }
        Ok(RiemannReport { terms, eps: eps.clone(), a, b, c, bumps, cells, cauchy_gap, failures })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BumpBound {
    pub n: usize,
    pub value: Rational,
    pub bound: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RiemannReport {
    pub terms: usize,
    pub eps: Rational,
    pub a: Rational,
    pub b: Rational,
    pub c: Rational,
    pub bumps: Vec<BumpBound>,
    pub cells: u32,
    pub cauchy_gap: Rational,
    pub failures: Vec<String>,
}

impl RiemannReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Leftmost interior breakpoint with `s < 1`; failing that, the midpoint of
/// the part below 1 of the leftmost segment with an endpoint below 1.
pub fn choose_zeta(s: &PolygonalFunction) -> Option<Rational> {
    let one = Rational::one();
    let pts = s.points();
    if let Some((x, _)) = pts[1..pts.len() - 1].iter().find(|(_, y)| y < &one) {
        return Some(x.clone());
    }
    pts.windows(2).find_map(|w| {
        let ((x0, y0), (x1, y1)) = (&w[0], &w[1]);
        let crossing = || x0 + &((x1 - x0) * (&one - y0) / (y1 - y0));
        match (y0 < &one, y1 < &one) {
            (true, true) => Some(x0.midpoint(x1)),
            (true, false) => Some(x0.midpoint(&crossing())),
            (false, true) => Some(crossing().midpoint(x1)),
            (false, false) => None,
        }
    })
}

/// `f` strictly satisfies `pred` on `[lo, hi]`: breakpoints inside plus both
/// ends suffice for a piecewise linear `f`.
fn strictly_on(f: &PolygonalFunction, lo: &Rational, hi: &Rational, pred: impl Fn(&Rational) -> bool) -> bool {
    pred(&f.eval_unchecked(lo))
        && pred(&f.eval_unchecked(hi))
        && f.points().iter().filter(|(x, _)| x > lo && x < hi).all(|(_, y)| pred(y))
}

fn check_row(n: usize, delta: &Rational, zeta: &Rational, beta: &Rational, s: &PolygonalFunction, h_next: &PolygonalFunction) -> Result<(), DiagonalError> {
    let fail = |what: String| Err(DiagonalError::Assertion { n, what });
    let one = Rational::one();
    if !beta.is_positive() {
        return fail(format!("β = {beta} is not positive"));
    }
    if !(zeta.is_positive() && zeta < &one) {
        return fail(format!("ζ = {zeta} is not inside (0,1)"));
    }
    if beta >= delta || beta >= zeta || beta >= &(&one - zeta) {
        return fail(format!("β = {beta} is not below min(δ, ζ, 1 − ζ) for δ = {delta}, ζ = {zeta}"));
    }
    let lo = zeta - beta;
    let hi = zeta + beta;
    if !strictly_on(s, &lo, &hi, |y| y < &one) {
        return fail(format!("g + h_ν(n) reaches 1 on [{lo}, {hi}]"));
    }
    if !strictly_on(h_next, &lo, &hi, |y| y > &one) {
        return fail(format!("h_ν(n+1) drops to 1 on [{lo}, {hi}]"));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::enumerator::encode_candidate;
    use crate::machine::constant_machine;

    fn zero_candidate(delta: Rational) -> crate::machine::Scheme {
        constant_machine(&encode_candidate(&delta, &PolygonalFunction::zero()))
    }

    fn tent_candidate() -> crate::machine::Scheme {
        // g peaks at 3/4 over [0, 1/2] and vanishes on [1/2, 1]
        let g = PolygonalFunction::new(vec![(rat(0, 1), rat(0, 1)), (rat(1, 4), rat(3, 4)), (rat(1, 2), rat(0, 1)), (rat(1, 1), rat(0, 1))]).unwrap();
        constant_machine(&encode_candidate(&rat(1, 8), &g))
    }

    fn four_rows() -> DiagonalState {
        let numbering = Numbering::new(vec![
            zero_candidate(rat(1, 4)),
            tent_candidate(),
            zero_candidate(rat(1, 1)),
            zero_candidate(rat(1, 100)),
        ]);
        let mut state = DiagonalState::build(numbering, 40, &[], None).unwrap();
        state.extend_to(4, SearchBudget { stages: 100, accelerate: true }).unwrap();
        state
    }

    #[test]
    fn zeta_rule() {
        assert_eq!(choose_zeta(&PolygonalFunction::zero()), Some(rat(1, 2)));
        let s = PolygonalFunction::new(vec![(rat(0, 1), rat(2, 1)), (rat(1, 3), rat(1, 2)), (rat(2, 3), rat(0, 1)), (rat(1, 1), rat(2, 1))]).unwrap();
        assert_eq!(choose_zeta(&s), Some(rat(1, 3)));
        // only the left end is below 1: the crossing is at 1/2
        let s = PolygonalFunction::new(vec![(rat(0, 1), rat(0, 1)), (rat(1, 4), rat(2, 1)), (rat(1, 1), rat(2, 1))]).unwrap();
        assert_eq!(choose_zeta(&s), Some(rat(1, 16)));
        assert_eq!(choose_zeta(&PolygonalFunction::constant(rat(1, 1))), None);
    }

    #[test]
    fn first_row() {
        let numbering = Numbering::new(vec![zero_candidate(rat(1, 4))]);
        let mut state = DiagonalState::build(numbering, 10, &[], None).unwrap();
        assert_eq!(state.nu(), &[0]);
        let row = state.extend(SearchBudget { stages: 0, accelerate: true }).unwrap().clone();
        assert_eq!(row.zeta, rat(1, 2));
        assert!(row.beta < rat(1, 4));
        assert!(state.hseq_mut().h(row.nu_next).unwrap().eval(&rat(1, 2)).unwrap() == rat(2, 1));
        assert_eq!(state.partial_sum(0).unwrap().eval(&rat(1, 2)).unwrap(), rat(1, 1));
    }

    #[test]
    fn rows_and_witness_values() {
        let mut state = four_rows();
        state.recheck_rows().unwrap();
        assert!(state.nu().windows(2).all(|w| w[0] < w[1]));
        for big_n in 0..4 {
            let f = state.partial_sum(big_n).unwrap();
            for row in &state.rows()[..=big_n] {
                assert_eq!(f.eval(&row.zeta).unwrap(), Rational::pow2_neg(row.mu));
                assert_eq!(f.eval(&(&row.zeta + &row.beta)).unwrap(), Rational::zero());
                let rest = f.sub(&row.bump);
                for x in [&row.zeta - &row.beta, row.zeta.clone(), &row.zeta + &row.beta] {
                    assert!(rest.eval(&x).unwrap().is_zero());
                }
            }
        }
        assert!(state.partial_sum(4).is_err());
    }

    #[test]
    fn later_bumps_vanish_where_h_exceeds_one() {
        let mut state = four_rows();
        let f3 = state.partial_sum(3).unwrap();
        for n in 0..4 {
            let nu = state.nu()[n];
            let h = state.hseq_mut().h(nu).unwrap().clone();
            let later = state.rows()[n..].iter().fold(PolygonalFunction::zero(), |acc, r| acc.add(&r.bump));
            for k in 0..=64 {
                let x = rat(k, 64);
                if h.eval(&x).unwrap() > rat(1, 1) {
                    assert!(later.eval(&x).unwrap().is_zero(), "row {n} at {x}");
                }
            }
        }
        assert!(f3.min_value() >= rat(0, 1));
    }

    #[test]
    fn riemann_reports() {
        let state = four_rows();
        for terms in 0..=4 {
            for eps in [rat(1, 2), rat(1, 8), rat(1, 32)] {
                let report = state.verify_riemann(terms, &eps).unwrap();
                assert!(report.passed(), "{terms} terms, ε = {eps}: {:?}", report.failures);
            }
        }
        let empty = state.verify_riemann(0, &rat(1, 2)).unwrap();
        assert!(empty.a.is_zero() && empty.passed());
    }

    #[test]
    fn tampered_row_is_caught() {
        let mut state = four_rows();
        state.rows[1].beta = state.rows[1].delta.clone();
        assert!(matches!(state.recheck_rows(), Err(DiagonalError::Assertion { n: 1, .. })));
    }

    #[test]
    fn budget_exhaustion() {
        let numbering = Numbering::new(vec![zero_candidate(rat(1, 4))]);
        let mut state = DiagonalState::build(numbering, 10, &[], None).unwrap();
        state.extend(SearchBudget { stages: 0, accelerate: true }).unwrap();
        let err = state.extend(SearchBudget { stages: 3, accelerate: true }).unwrap_err();
        assert_eq!(err, DiagonalError::BudgetExhausted { phase: Phase::Enumeration, stages: 3 });
        let numbering = Numbering::new(vec![zero_candidate(rat(1, 4))]);
        let mut state = DiagonalState::build(numbering, 10, &[], None).unwrap();
        let err = state.extend(SearchBudget { stages: 2, accelerate: false }).unwrap_err();
        assert_eq!(err, DiagonalError::BudgetExhausted { phase: Phase::Coverage, stages: 2 });
    }

    #[test]
    fn deterministic() {
        let a = serde_json::to_string(&four_rows()).unwrap();
        let b = serde_json::to_string(&four_rows()).unwrap();
        assert_eq!(a, b);
        assert!(a.contains("\"nu_next\""));
    }
}
