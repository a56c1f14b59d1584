//! Exact learners: the degree-`d` learner and its variable-reduction
//! wrapper.

use std::collections::BTreeSet;

use rand::Rng;

use crate::assignment::Assignment;
use crate::oracle::{hash_project, pin_bucket, xor_local, Oracle};
use crate::poly::{Monomial, SparsePoly, Subst};

use super::primitives::{find_monomial, identify_literal, test_equal, Literal, TestOutcome};
use super::{cost, Ctx, LearnError, Routine};

/// Learns a target promised to be in the degree-`d`, `s`-sparse class.
///
/// Repeatedly tests `f + h` against zero and, on a witness, extracts one
/// monomial of `f + h` and adds it to `h`. More than `s` extractions break
/// the promise. Degree 0 is handled with two queries.
pub fn learn_exact_low_degree(
    f: &dyn Oracle,
    d: usize,
    s: u64,
    delta: f64,
    ctx: &mut Ctx,
) -> Result<SparsePoly, LearnError> {
    let m = f.arity();
    if d == 0 {
        return constant_probe(f, ctx);
    }
    let sub = delta / (2 * s) as f64;
    let zero = SparsePoly::zero(m);
    let mut residual = xor_local(f, SparsePoly::zero(m))?;
    for extracted in 0..=s {
        match test_equal(&residual, &zero, 2 * s, d, sub, ctx)? {
            TestOutcome::Equal => return Ok(residual.local().clone()),
            TestOutcome::Witness(_) if extracted == s => break,
            TestOutcome::Witness(_) => {}
        }
        let found = find_monomial(&residual, d, 2 * s, sub, ctx)?;
        residual.toggle(Monomial::new(found.assignment.ones_iter()))?;
    }
    Err(LearnError::PromiseViolation(format!(
        "target still differs after extracting {s} monomials"
    )))
}

fn constant_probe(f: &dyn Oracle, ctx: &mut Ctx) -> Result<SparsePoly, LearnError> {
    let m = f.arity();
    let before = f.queries();
    let res = f
        .query(&Assignment::zeros(m))
        .and_then(|z| Ok((z, f.query(&Assignment::ones(m))?)));
    let used = f.queries() - before;
    ctx.ledger.record(Routine::ConstantProbe, 2, used, res.is_err());
    let (z, o) = res?;
    if z != o {
        return Err(LearnError::PromiseViolation("degree-0 target is not constant".into()));
    }
    Ok(if z { SparsePoly::one(m) } else { SparsePoly::zero(m) })
}

/// Original variables already identified as relevant, shared across calls
/// so later projections can skip the search.
#[derive(Clone, Debug, Default)]
pub struct KnownVars {
    vars: BTreeSet<usize>,
    /// Buckets resolved from the cache without queries.
    pub hits: u64,
}

impl KnownVars {
    pub fn contains(&self, v: usize) -> bool {
        self.vars.contains(&v)
    }

    pub fn len(&self) -> usize {
        self.vars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vars.is_empty()
    }

    pub fn insert(&mut self, v: usize) {
        self.vars.insert(v);
    }
}

/// Exact learner for the degree-`d`, `s`-sparse class over many variables.
///
/// Hashes the variables into `(2ds)^2` buckets, learns the hashed function
/// exactly, and maps every relevant bucket back to an original variable:
/// a separating pair for the bucket pins all other buckets, leaving a
/// literal over the bucket's members. Only variables set in `live` are
/// considered as candidates (the others are known to be fixed to 0).
/// Hash collisions surface as identification failures and trigger a
/// fresh hash.
pub fn learn_reduced_vars(
    f: &dyn Oracle,
    live: &Assignment,
    d: usize,
    s: u64,
    delta: f64,
    known: &mut KnownVars,
    ctx: &mut Ctx,
) -> Result<SparsePoly, LearnError> {
    let attempts = cost::reduced_attempts(delta);
    let mut last = None;
    for _ in 0..attempts {
        match reduced_attempt(f, live, d, s, known, ctx) {
            Ok(h) => return Ok(h),
            Err(LearnError::PromiseViolation(msg)) => last = Some(msg),
            Err(e) => return Err(e),
        }
    }
    Err(LearnError::PromiseViolation(format!(
        "variable reduction failed after {attempts} hashes: {}",
        last.unwrap_or_default()
    )))
}

fn reduced_attempt(
    f: &dyn Oracle,
    live: &Assignment,
    d: usize,
    s: u64,
    known: &mut KnownVars,
    ctx: &mut Ctx,
) -> Result<SparsePoly, LearnError> {
    let n = f.arity();
    let Some(m) = cost::reduced_buckets(n, d, s) else {
        // Fewer variables than buckets: learn directly, nothing to map back.
        return learn_exact_low_degree(f, d, s, cost::REDUCED_INNER_DELTA, ctx);
    };
    let phi: Vec<u32> = (0..n).map(|_| ctx.rng.gen_range(0..m as u32)).collect();
    let projected = hash_project(f, &phi, m)?;
    let learned = learn_exact_low_degree(&projected, d, s, cost::REDUCED_INNER_DELTA, ctx)?;
    let relevant = learned.relevant_variables();
    let mut buckets: Vec<Vec<usize>> = vec![Vec::new(); m];
    for j in live.ones_iter() {
        if relevant.contains(&(phi[j] as usize)) {
            buckets[phi[j] as usize].push(j);
        }
    }
    let mut map = vec![Subst::Zero; m];
    for &i in &relevant {
        let candidates = &buckets[i];
        let cached: Vec<usize> = candidates.iter().copied().filter(|&j| known.contains(j)).collect();
        if cached.len() == 1 {
            known.hits += 1;
            map[i] = Subst::Var(cached[0]);
            continue;
        }
        let (a, _) = learned.witness_pair(i)?;
        let pinned = pin_bucket(f, &phi, i, &a)?;
        match identify_literal(&pinned, candidates, ctx)? {
            Literal::Positive(j) | Literal::Negative(j) => {
                known.insert(j);
                map[i] = Subst::Var(j);
            }
            Literal::Constant0 | Literal::Constant1 => {
                return Err(LearnError::PromiseViolation(format!(
                    "bucket {i} does not behave as a literal"
                )))
            }
        }
    }
    Ok(learned.substitute(&map, n)?)
}
