//! Learn-then-verify tester for sparsity.
//!
//! The tester learns a hypothesis to accuracy `eps/4` under a hard query
//! budget and then checks it against the target on fresh uniform samples.
//! An `s`-sparse target is learned well and passes the check; a target
//! `eps`-far from every `s`-sparse polynomial is far from any hypothesis
//! the learner can output, so the check fails.

use serde::{Deserialize, Serialize};

use crate::learner::pipeline::estimate_distance;
use crate::learner::{self, cost, Algorithm, Ctx, LearnError, LearnParams, Outcome, QueryLedger};
use crate::oracle::Oracle;
use crate::poly::SparsePoly;

/// Default multiple of the learner's worst-case ceiling used as the budget.
pub const DEFAULT_BUDGET_FACTOR: f64 = 10.0;

/// Confidence parameter handed to the learner.
pub const LEARN_DELTA: f64 = 0.1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Decision {
    Accept,
    Reject,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Evidence {
    pub hypothesis: SparsePoly,
    pub estimated_distance: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestVerdict {
    pub decision: Decision,
    pub queries_used: u64,
    /// Present when the learner produced a hypothesis.
    pub evidence: Option<Evidence>,
    /// Why the learning stage failed, if it did.
    pub failure: Option<String>,
    pub budget: u64,
    pub ledger: QueryLedger,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TesterConfig {
    pub budget_factor: f64,
}

impl Default for TesterConfig {
    fn default() -> Self {
        TesterConfig {
            budget_factor: DEFAULT_BUDGET_FACTOR,
        }
    }
}

/// Uniform samples of the verification stage: `ceil(48/eps ln 20)`.
pub fn estimation_samples(epsilon: f64) -> u64 {
    (48.0 / epsilon * 20f64.ln()).ceil() as u64
}

/// Learner parameters used for a test at accuracy `epsilon`.
pub fn learner_params(n: usize, s: u64, epsilon: f64, seed: u64) -> LearnParams {
    LearnParams::new(s, epsilon / 4.0, LEARN_DELTA, n).with_seed(seed)
}

/// Query budget of the learning stage.
pub fn learning_budget(params: &LearnParams, config: &TesterConfig) -> u64 {
    let ceiling = cost::worst_case(params, Algorithm::Auto).unwrap_or(f64::INFINITY);
    let b = (config.budget_factor * ceiling).ceil();
    if b.is_finite() && b < u64::MAX as f64 {
        b as u64
    } else {
        u64::MAX
    }
}

/// Decides whether `f` is `s`-sparse or `epsilon`-far from every
/// `s`-sparse polynomial. Learner failures fold into rejection.
pub fn test_sparsity(
    f: &dyn Oracle,
    s: u64,
    epsilon: f64,
    seed: u64,
    config: &TesterConfig,
) -> Result<TestVerdict, LearnError> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(LearnError::InvalidParams(format!("epsilon {epsilon} outside (0, 1)")));
    }
    let n = f.arity();
    let before = f.queries();
    let params = learner_params(n, s, epsilon, seed);
    params.validate()?;
    let budget = learning_budget(&params, config);
    let params = params.with_budget(Some(budget));
    let mut ledger = QueryLedger::default();
    let reject = |failure: String, ledger: QueryLedger, evidence| TestVerdict {
        decision: Decision::Reject,
        queries_used: f.queries() - before,
        evidence,
        failure: Some(failure),
        budget,
        ledger,
    };
    let report = match learner::run(f, &params, Algorithm::Auto) {
        Ok(r) => r,
        Err(e) => return Ok(reject(e.to_string(), ledger, None)),
    };
    ledger.merge(&report.ledger);
    if report.outcome == Outcome::GaveUpBudget {
        return Ok(reject("learning budget exhausted".into(), ledger, None));
    }
    // A seed distinct from the learner's stream for the verification draws.
    let mut ctx = Ctx::new(seed ^ 0x9e37_79b9_7f4a_7c15);
    let dist = estimate_distance(f, &report.hypothesis, estimation_samples(epsilon), &mut ctx)?;
    ledger.merge(&ctx.ledger);
    Ok(TestVerdict {
        decision: if dist <= epsilon / 2.0 {
            Decision::Accept
        } else {
            Decision::Reject
        },
        queries_used: f.queries() - before,
        evidence: Some(Evidence {
            hypothesis: report.hypothesis,
            estimated_distance: dist,
        }),
        failure: None,
        budget,
        ledger,
    })
}
