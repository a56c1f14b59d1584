//! Learning algorithms for sparse GF(2) polynomials.
//!
//! The building blocks live in [`primitives`] (zero test, monomial search,
//! literal identification), the exact learners in [`exact`] and the
//! approximate pipelines in [`pipeline`]. [`run`] dispatches on an
//! [`Algorithm`] and wraps the result in a [`LearnReport`].
//!
//! Every leaf routine records its query usage and closed-form ceiling in
//! the [`QueryLedger`] of the [`Ctx`], so the root counter can be
//! reconciled against the formulas after the fact.

pub mod cost;
pub mod exact;
pub mod pipeline;
pub mod primitives;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bounds::{self, BoundKind};
use crate::oracle::{capped, Oracle, OracleError};
use crate::poly::{PolyError, SparsePoly};

pub use exact::{learn_exact_low_degree, learn_reduced_vars, KnownVars};
pub use pipeline::{learn_poly_fig3, learn_small_beta, learn_sparse_main, Fig3Result};
pub use primitives::{find_monomial, identify_literal, test_equal, FoundMonomial, Literal, TestOutcome};

#[derive(Debug, Error)]
pub enum LearnError {
    #[error("query budget exhausted")]
    BudgetExhausted,
    #[error("promise violated: {0}")]
    PromiseViolation(String),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error(transparent)]
    Oracle(OracleError),
}

impl From<OracleError> for LearnError {
    fn from(e: OracleError) -> Self {
        match e {
            OracleError::BudgetExhausted { .. } => LearnError::BudgetExhausted,
            other => LearnError::Oracle(other),
        }
    }
}

impl From<PolyError> for LearnError {
    fn from(e: PolyError) -> Self {
        LearnError::Oracle(OracleError::Poly(e))
    }
}

/// Inputs shared by all learners.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LearnParams {
    /// Sparsity bound.
    pub s: u64,
    /// Accuracy, in (0, 1).
    pub epsilon: f64,
    /// Failure probability, in (0, 1).
    pub delta: f64,
    /// Arity of the target.
    pub n: usize,
    /// Degree bound, used by the exact learners.
    pub degree: Option<usize>,
    /// Maximum number of queries this learner may issue.
    pub budget: Option<u64>,
    pub seed: u64,
    /// Overrides the optimized projection exponent of the main pipeline.
    pub eta: Option<f64>,
}

impl LearnParams {
    pub fn new(s: u64, epsilon: f64, delta: f64, n: usize) -> Self {
        LearnParams {
            s,
            epsilon,
            delta,
            n,
            degree: None,
            budget: None,
            seed: 0,
            eta: None,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_budget(mut self, budget: Option<u64>) -> Self {
        self.budget = budget;
        self
    }

    pub fn with_degree(mut self, d: usize) -> Self {
        self.degree = Some(d);
        self
    }

    pub fn with_eta(mut self, eta: Option<f64>) -> Self {
        self.eta = eta;
        self
    }

    /// `log2(1/eps) / log2 s`; `None` for `s = 1`.
    pub fn beta(&self) -> Option<f64> {
        bounds::beta_of(self.s, self.epsilon)
    }

    pub fn validate(&self) -> Result<(), LearnError> {
        let bad = |m: String| Err(LearnError::InvalidParams(m));
        if self.s == 0 {
            return bad("s must be at least 1".into());
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return bad(format!("epsilon {} outside (0, 1)", self.epsilon));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return bad(format!("delta {} outside (0, 1)", self.delta));
        }
        if self.n == 0 {
            return bad("n must be at least 1".into());
        }
        if let Some(eta) = self.eta {
            if !(eta > 0.0 && eta <= 1.0) {
                return bad(format!("eta {eta} outside (0, 1]"));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    Auto,
    Main,
    SmallBeta,
    Fig3,
    ExactLowdeg,
    ReducedVars,
}

impl Algorithm {
    pub const ALL: [Algorithm; 6] = [
        Algorithm::Auto,
        Algorithm::Main,
        Algorithm::SmallBeta,
        Algorithm::Fig3,
        Algorithm::ExactLowdeg,
        Algorithm::ReducedVars,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Auto => "auto",
            Algorithm::Main => "main",
            Algorithm::SmallBeta => "small-beta",
            Algorithm::Fig3 => "fig3",
            Algorithm::ExactLowdeg => "exact-lowdeg",
            Algorithm::ReducedVars => "reduced-vars",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| format!("unknown algorithm {s:?}"))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Outcome {
    Exact,
    Approx,
    GaveUpBudget,
    DeclaredZero,
}

/// Leaf routines whose queries are accounted individually.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Routine {
    TestEqual,
    Identify,
    PositiveSearch,
    DistanceEstimate,
    Validation,
    ConstantProbe,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoutineTotals {
    pub calls: u64,
    pub used: u64,
    pub ceiling: u64,
    pub early_exits: u64,
    /// Calls that either exceeded their ceiling or stopped short of it
    /// without an early exit.
    pub violations: u64,
}

/// Per-routine query totals.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryLedger {
    pub routines: BTreeMap<Routine, RoutineTotals>,
}

impl QueryLedger {
    pub fn record(&mut self, routine: Routine, ceiling: u64, used: u64, early_exit: bool) {
        let t = self.routines.entry(routine).or_default();
        t.calls += 1;
        t.used += used;
        t.ceiling += ceiling;
        t.early_exits += u64::from(early_exit);
        if used > ceiling || (used != ceiling && !early_exit) {
            t.violations += 1;
        }
    }

    pub fn total_used(&self) -> u64 {
        self.routines.values().map(|t| t.used).sum()
    }

    pub fn violations(&self) -> u64 {
        self.routines.values().map(|t| t.violations).sum()
    }

    pub fn merge(&mut self, other: &QueryLedger) {
        for (r, t) in &other.routines {
            let e = self.routines.entry(*r).or_default();
            e.calls += t.calls;
            e.used += t.used;
            e.ceiling += t.ceiling;
            e.early_exits += t.early_exits;
            e.violations += t.violations;
        }
    }
}

/// Per-run state: the random generator and the query ledger.
pub struct Ctx {
    pub rng: ChaCha8Rng,
    pub ledger: QueryLedger,
}

impl Ctx {
    pub fn new(seed: u64) -> Self {
        Ctx {
            rng: ChaCha8Rng::seed_from_u64(seed),
            ledger: QueryLedger::default(),
        }
    }
}

/// Result of one learning run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LearnReport {
    pub algorithm: Algorithm,
    pub hypothesis: SparsePoly,
    pub queries_used: u64,
    /// Asymptotic prediction with constants set to 1.
    pub predicted_bound: f64,
    /// Closed-form worst-case query count of this run's parameters.
    pub ceiling: Option<f64>,
    pub outcome: Outcome,
    pub ledger: QueryLedger,
    /// Wall-clock time; excluded from serialized output.
    #[serde(skip)]
    pub elapsed: Duration,
}

/// Which branch [`Algorithm::Auto`] takes for these parameters.
pub fn auto_branch(params: &LearnParams) -> Algorithm {
    match params.beta() {
        None => Algorithm::SmallBeta,
        Some(beta) => {
            if bounds::gamma_prime(beta) < bounds::gamma(beta).0 {
                Algorithm::SmallBeta
            } else {
                Algorithm::Main
            }
        }
    }
}

fn predicted(params: &LearnParams, algorithm: Algorithm) -> f64 {
    let kind = match algorithm {
        Algorithm::SmallBeta | Algorithm::Fig3 => BoundKind::SmallBeta,
        _ => BoundKind::Main,
    };
    bounds::predicted_queries(params.s, params.epsilon, params.n as u64, kind)
        .map(|p| p.value)
        .unwrap_or(f64::NAN)
}

/// Runs `algorithm` on `f` and reports the result.
///
/// Budget exhaustion is not an error: the report carries whatever
/// hypothesis was available with outcome [`Outcome::GaveUpBudget`].
pub fn run(f: &dyn Oracle, params: &LearnParams, algorithm: Algorithm) -> Result<LearnReport, LearnError> {
    params.validate()?;
    if f.arity() != params.n {
        return Err(LearnError::Oracle(OracleError::ArityMismatch {
            expected: params.n,
            found: f.arity(),
        }));
    }
    let start = Instant::now();
    let before = f.queries();
    let view = capped(f, params.budget.unwrap_or(u64::MAX));
    let mut ctx = Ctx::new(params.seed);
    let chosen = match algorithm {
        Algorithm::Auto => auto_branch(params),
        other => other,
    };
    let degree = || {
        params
            .degree
            .ok_or_else(|| LearnError::InvalidParams(format!("{chosen} needs a degree bound")))
    };
    let (hypothesis, outcome) = match chosen {
        Algorithm::Main => pipeline::learn_sparse_main(&view, params, &mut ctx)?,
        Algorithm::SmallBeta => pipeline::learn_small_beta(&view, params, &mut ctx)?,
        Algorithm::Fig3 => {
            let r = match pipeline::learn_poly_fig3(&view, params.s, params.epsilon, &mut ctx) {
                Ok(r) => r,
                Err(LearnError::BudgetExhausted) => Fig3Result {
                    hypothesis: SparsePoly::zero(params.n),
                    declared_zero: false,
                    budget_exhausted: true,
                },
                Err(e) => return Err(e),
            };
            let outcome = if r.budget_exhausted {
                Outcome::GaveUpBudget
            } else if r.declared_zero {
                Outcome::DeclaredZero
            } else {
                Outcome::Approx
            };
            (r.hypothesis, outcome)
        }
        Algorithm::ExactLowdeg => {
            let d = degree()?;
            match exact::learn_exact_low_degree(&view, d, params.s, params.delta, &mut ctx) {
                Ok(h) => (h, Outcome::Exact),
                Err(LearnError::BudgetExhausted) => (SparsePoly::zero(params.n), Outcome::GaveUpBudget),
                Err(e) => return Err(e),
            }
        }
        Algorithm::ReducedVars => {
            let d = degree()?;
            let live = crate::Assignment::ones(params.n);
            let mut known = KnownVars::default();
            match exact::learn_reduced_vars(&view, &live, d, params.s, params.delta, &mut known, &mut ctx) {
                Ok(h) => (h, Outcome::Exact),
                Err(LearnError::BudgetExhausted) => (SparsePoly::zero(params.n), Outcome::GaveUpBudget),
                Err(e) => return Err(e),
            }
        }
        Algorithm::Auto => unreachable!("auto resolves to a concrete branch"),
    };
    Ok(LearnReport {
        algorithm: chosen,
        hypothesis,
        queries_used: f.queries() - before,
        predicted_bound: predicted(params, chosen),
        ceiling: cost::worst_case(params, chosen),
        outcome,
        ledger: ctx.ledger,
        elapsed: start.elapsed(),
    })
}

/// [`run`] with [`Algorithm::Auto`].
pub fn learn_auto(f: &dyn Oracle, params: &LearnParams) -> Result<LearnReport, LearnError> {
    run(f, params, Algorithm::Auto)
}
