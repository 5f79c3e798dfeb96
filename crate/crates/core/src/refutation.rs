//! Refuting a claimed oscillation modulus: the claim machine is enrolled,
//! the diagonal is built through its row `m`, and the jump of `F_m` across
//! `[ζ_m, ζ_m + β_m]` is recorded as an exact certificate.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::covering::SearchBudget;
use crate::diagonal::{DiagonalError, DiagonalState, Phase};
use crate::enumerator::validate_candidate;
use crate::machine::{run_machine, self_application, Numbering, Outcome, Scheme, DEFAULT_MAX_FUEL, NUMBERING_VERSION};
use crate::numerals::Rational;
use crate::polygon::PolygonalFunction;

/// A scheme claiming that on input `e` (its own index) it outputs `(δ, g)`
/// such that `sup(g(x), g(y)) < 1` and `|x − y| < δ` force
/// `|f(x) − f(y)| < 2^{−e−1}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModulusClaim {
    pub scheme: Scheme,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RefuteBudget {
    /// Total dovetail stages for enrolment and diagonal extension.
    pub stages: u64,
    pub accelerate: bool,
    pub max_fuel: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RefuteError {
    #[error("budget exhausted during {phase}: {detail}")]
    BudgetExhausted { phase: Phase, detail: String },
    #[error(transparent)]
    Diagonal(DiagonalError),
}

impl From<DiagonalError> for RefuteError {
    fn from(e: DiagonalError) -> Self {
        match e {
            DiagonalError::BudgetExhausted { phase, stages } => {
                RefuteError::BudgetExhausted { phase, detail: format!("{stages} stages spent") }
            }
            other => RefuteError::Diagonal(other),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub lhs: Rational,
    pub relation: String,
    pub rhs: Rational,
}

impl Check {
    fn new(name: &str, lhs: Rational, relation: &str, rhs: Rational) -> Self {
        Check { name: name.into(), lhs, relation: relation.into(), rhs }
    }

    pub fn holds(&self) -> bool {
        match self.relation.as_str() {
            "<" => self.lhs < self.rhs,
            "=" => self.lhs == self.rhs,
            ">" => self.lhs > self.rhs,
            _ => false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificate {
    pub numbering_version: String,
    pub registry_digest: String,
    pub claim_index: u64,
    pub m: usize,
    pub mu_m: u64,
    pub delta_m: Rational,
    pub g_m: PolygonalFunction,
    pub zeta: Rational,
    pub beta: Rational,
    pub value_at_zeta: Rational,
    pub value_at_zeta_plus_beta: Rational,
    pub required_bound: Rational,
    pub checks: Vec<Check>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Refutation {
    /// The claim's own output is violated at `(ζ_m, ζ_m + β_m)`.
    Witness(Box<Certificate>),
    /// The claim machine halted, but not with a valid candidate list.
    InvalidList { claim_index: u64, reason: String },
}

fn build_checks(g: &PolygonalFunction, zeta: &Rational, beta: &Rational, delta: &Rational, v0: &Rational, v1: &Rational, mu: u64) -> Vec<Check> {
    let one = Rational::one();
    let right = zeta + beta;
    vec![
        Check::new("g_m(zeta) < 1", g.eval_unchecked(zeta), "<", one.clone()),
        Check::new("g_m(zeta + beta) < 1", g.eval_unchecked(&right), "<", one),
        Check::new("beta < delta_m", beta.clone(), "<", delta.clone()),
        Check::new("gap = 2^-mu_m", (v0 - v1).abs(), "=", Rational::pow2_neg(mu)),
    ]
}

/// Registers the claim after `base`'s registry and runs the pipeline.
pub fn refute(claim: &ModulusClaim, base: Numbering, budget: RefuteBudget) -> Result<(Refutation, DiagonalState), RefuteError> {
    let mut numbering = base;
    let e = numbering.register(claim.scheme.clone());
    // The dovetail sees machine e halt within the budget exactly when it
    // halts within min(stages, fuel cap) steps, so decide that up front.
    let fuel = budget.stages.min(budget.max_fuel.unwrap_or(DEFAULT_MAX_FUEL));
    let state = DiagonalState::build(numbering, 0, &[], budget.max_fuel)?;
    let output = match run_machine(&claim.scheme, &self_application(e), fuel) {
        Outcome::Halted { output, .. } => output,
        Outcome::OutOfFuel => {
            return Err(RefuteError::BudgetExhausted {
                phase: Phase::Enumeration,
                detail: format!("claim machine {e} produced nothing within {fuel} steps"),
            })
        }
    };
    if let Err(reject) = validate_candidate(&output) {
        return Ok((Refutation::InvalidList { claim_index: e, reason: reject.to_string() }, state));
    }
    let mut state = state;
    let m = state.enrol(e, budget.stages)?;
    let spent = state.stages();
    let search = SearchBudget { stages: budget.stages.saturating_sub(spent), accelerate: budget.accelerate };
    state.extend_to(m + 1, search)?;
    let cert = certificate_for(&state, m)?;
    Ok((Refutation::Witness(Box::new(cert)), state))
}

fn certificate_for(state: &DiagonalState, m: usize) -> Result<Certificate, DiagonalError> {
    let row = &state.rows()[m];
    let entry = state.enumeration().entry(m).expect("row m has an entry");
    let f = state.partial_sum(m)?;
    let v0 = f.eval(&row.zeta)?;
    let v1 = f.eval(&(&row.zeta + &row.beta))?;
    let checks = build_checks(&entry.g, &row.zeta, &row.beta, &entry.delta, &v0, &v1, row.mu);
    Ok(Certificate {
        numbering_version: NUMBERING_VERSION.to_string(),
        registry_digest: state.numbering().registry_digest(),
        claim_index: row.mu,
        m,
        mu_m: row.mu,
        delta_m: entry.delta.clone(),
        g_m: entry.g.clone(),
        zeta: row.zeta.clone(),
        beta: row.beta.clone(),
        value_at_zeta: v0,
        value_at_zeta_plus_beta: v1,
        required_bound: Rational::pow2_neg(row.mu + 1),
        checks,
    })
}

/// Recomputes every field of `cert` from `state` and re-verifies each check.
pub fn verify_certificate(cert: &Certificate, state: &DiagonalState) -> Result<(), String> {
    if cert.numbering_version != NUMBERING_VERSION {
        return Err(format!("numbering version {} differs from {NUMBERING_VERSION}", cert.numbering_version));
    }
    if cert.registry_digest != state.numbering().registry_digest() {
        return Err("registry digest does not match the state".into());
    }
    if cert.m >= state.rows().len() {
        return Err(format!("row {} is not built", cert.m));
    }
    let expected = certificate_for(state, cert.m).map_err(|e| e.to_string())?;
    if let Some(c) = expected.checks.iter().find(|c| !c.holds()) {
        return Err(format!("check {:?} fails: {} {} {}", c.name, c.lhs, c.relation, c.rhs));
    }
    let gap = (&expected.value_at_zeta - &expected.value_at_zeta_plus_beta).abs();
    if gap <= expected.required_bound {
        return Err(format!("gap {gap} does not exceed {}", expected.required_bound));
    }
    // the witness values do not move once later bumps are added
    let last = state.partial_sum(state.rows().len() - 1).map_err(|e| e.to_string())?;
    if last.eval_unchecked(&expected.zeta) != expected.value_at_zeta
        || last.eval_unchecked(&(&expected.zeta + &expected.beta)) != expected.value_at_zeta_plus_beta
    {
        return Err("witness values change in later partial sums".into());
    }
    if cert != &expected {
        let a = serde_json::to_value(cert).map_err(|e| e.to_string())?;
        let b = serde_json::to_value(&expected).map_err(|e| e.to_string())?;
        let field = a
            .as_object()
            .and_then(|a| a.iter().find(|(k, v)| b.get(k.as_str()) != Some(v)).map(|(k, _)| k.clone()))
            .unwrap_or_default();
        return Err(format!("field {field:?} differs from the recomputed value"));
    }
    Ok(())
}

pub fn check_certificate(cert: &Certificate, state: &DiagonalState) -> bool {
    verify_certificate(cert, state).is_ok()
}
