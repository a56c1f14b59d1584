//! Approximate learners: the zero-projection pipeline, the positive-example
//! loop for small `beta` and its wrapper.

use std::collections::BTreeSet;

use rand::Rng;

use crate::assignment::Assignment;
use crate::oracle::{and_restrict, hash_project, pin_bucket, xor_local, xor_pair, zero_project, Oracle, ProductSampler};
use crate::poly::{Monomial, SparsePoly, Subst};

use super::exact::{learn_reduced_vars, KnownVars};
use super::primitives::{find_monomial, identify_literal, test_equal_charged, Literal, TestOutcome};
use super::{cost, Ctx, LearnError, LearnParams, Outcome, Routine};

fn union_poly(n: usize, monomials: &BTreeSet<Monomial>) -> SparsePoly {
    let mut h = SparsePoly::zero(n);
    for m in monomials {
        h.toggle(m.clone()).expect("monomials come from an arity-n hypothesis");
    }
    h
}

/// Counts disagreements between `f` and `h` on `samples` uniform points.
fn estimate_disagreements(
    f: &dyn Oracle,
    h: &SparsePoly,
    samples: u64,
    routine: Routine,
    ctx: &mut Ctx,
) -> Result<u64, LearnError> {
    let mut x = Assignment::zeros(f.arity());
    let uniform = ProductSampler::new(f.arity(), 0.5);
    let before = f.queries();
    let mut errors = 0;
    for _ in 0..samples {
        uniform.sample_into(&mut x, &mut ctx.rng);
        match f.query(&x) {
            Ok(v) => errors += u64::from(v != h.eval(&x)),
            Err(e) => {
                ctx.ledger.record(routine, samples, f.queries() - before, true);
                return Err(e.into());
            }
        }
    }
    ctx.ledger.record(routine, samples, f.queries() - before, false);
    Ok(errors)
}

/// Empirical distance between `f` and `h` from `samples` uniform queries.
pub fn estimate_distance(f: &dyn Oracle, h: &SparsePoly, samples: u64, ctx: &mut Ctx) -> Result<f64, LearnError> {
    let errors = estimate_disagreements(f, h, samples, Routine::DistanceEstimate, ctx)?;
    Ok(errors as f64 / samples.max(1) as f64)
}

/// Learns an `s`-sparse target to accuracy `epsilon` from zero projections.
///
/// Each projection keeps every variable with probability `p`, so long
/// monomials vanish and the projected target is learned exactly with the
/// variable-reduction learner. The hypothesis collects every learned
/// monomial of size at most `log2(s/eps)`. With more than one restart the
/// candidates are validated on uniform samples.
pub fn learn_sparse_main(
    f: &dyn Oracle,
    params: &LearnParams,
    ctx: &mut Ctx,
) -> Result<(SparsePoly, Outcome), LearnError> {
    let n = f.arity();
    let plan = cost::main_plan(params);
    let sampler = ProductSampler::new(n, plan.p);
    let mut known = KnownVars::default();
    let mut best: Option<(u64, SparsePoly)> = None;
    for _ in 0..plan.restarts {
        let mut union = BTreeSet::new();
        for _ in 0..plan.projections {
            let keep = sampler.sample(&mut ctx.rng);
            let view = zero_project(f, keep.clone())?;
            match learn_reduced_vars(&view, &keep, plan.degree, params.s, plan.inner_delta, &mut known, ctx) {
                Ok(h) => union.extend(h.monomials().filter(|m| m.degree() <= plan.max_monomial).cloned()),
                Err(LearnError::BudgetExhausted) => return Ok((union_poly(n, &union), Outcome::GaveUpBudget)),
                Err(LearnError::PromiseViolation(_)) => {}
                Err(e) => return Err(e),
            }
        }
        let h = union_poly(n, &union);
        if plan.restarts == 1 {
            return Ok((h, Outcome::Approx));
        }
        let errors = match estimate_disagreements(f, &h, plan.validation_samples, Routine::Validation, ctx) {
            Ok(e) => e,
            Err(LearnError::BudgetExhausted) => return Ok((h, Outcome::GaveUpBudget)),
            Err(e) => return Err(e),
        };
        if errors as f64 <= 2.0 * params.epsilon * plan.validation_samples as f64 {
            return Ok((h, Outcome::Approx));
        }
        if best.as_ref().is_none_or(|(e, _)| errors < *e) {
            best = Some((errors, h));
        }
    }
    let (_, h) = best.expect("at least one restart ran");
    Ok((h, Outcome::Approx))
}

#[derive(Clone, Debug, PartialEq)]
pub struct Fig3Result {
    pub hypothesis: SparsePoly,
    /// The positive-example cap was reached and 0 was output.
    pub declared_zero: bool,
    /// The budget ran out; `hypothesis` holds the monomials found so far.
    pub budget_exhausted: bool,
}

/// Learns an `s`-sparse target on `f.arity()` variables to accuracy
/// `epsilon` by monomial extraction from positive examples.
///
/// Up to `s` rounds; each round draws uniform points until `f + h` is 1 at
/// some `a`, shrinks `a` with a monomial search on `(f + h)(a * x)`, and if
/// the result is light enough, searches once more on the further
/// restricted function and adds the monomial found to `h`. A round without
/// a light positive example ends the run.
pub fn learn_poly_fig3(f: &dyn Oracle, s: u64, epsilon: f64, ctx: &mut Ctx) -> Result<Fig3Result, LearnError> {
    let mut h = SparsePoly::zero(f.arity());
    match fig3_rounds(f, s, epsilon, ctx, &mut h) {
        Ok(declared_zero) => Ok(Fig3Result {
            hypothesis: if declared_zero { SparsePoly::zero(f.arity()) } else { h },
            declared_zero,
            budget_exhausted: false,
        }),
        Err(LearnError::BudgetExhausted) => Ok(Fig3Result {
            hypothesis: h,
            declared_zero: false,
            budget_exhausted: true,
        }),
        Err(e) => Err(e),
    }
}

/// Returns whether the positive-example cap was hit; `out` tracks `h`.
fn fig3_rounds(f: &dyn Oracle, s: u64, epsilon: f64, ctx: &mut Ctx, out: &mut SparsePoly) -> Result<bool, LearnError> {
    let m = f.arity();
    let plan = cost::fig3_plan(s, epsilon);
    let uniform = ProductSampler::new(m, 0.5);
    let mut residual = xor_local(f, SparsePoly::zero(m))?;
    let mut a = Assignment::zeros(m);
    let mut positives = 0u64;
    for _ in 0..s {
        let mut found = None;
        let mut draws = 0u64;
        while draws < plan.loop_bound && found.is_none() {
            uniform.sample_into(&mut a, &mut ctx.rng);
            let positive = match residual.query(&a) {
                Ok(v) => v,
                Err(e) => {
                    ctx.ledger.record(Routine::PositiveSearch, plan.loop_bound, draws, true);
                    return Err(e.into());
                }
            };
            draws += 1;
            if !positive {
                continue;
            }
            positives += 1;
            if positives == plan.positive_cap {
                ctx.ledger.record(Routine::PositiveSearch, plan.loop_bound, draws, true);
                return Ok(true);
            }
            let outcome = (|| -> Result<Option<Monomial>, LearnError> {
                let first = and_restrict(&residual, a.clone())?;
                let r1 = find_monomial(&first, plan.degree, 2 * s, plan.search_delta, ctx)?;
                let a1 = a.and(&r1.assignment);
                if a1.weight() as f64 > plan.weight_bound {
                    return Ok(None);
                }
                let second = and_restrict(&residual, a1.clone())?;
                let r2 = find_monomial(&second, plan.degree, 2 * s, plan.search_delta, ctx)?;
                Ok(Some(Monomial::new(a1.and(&r2.assignment).ones_iter())))
            })();
            match outcome {
                Ok(m) => found = m,
                Err(e) => {
                    ctx.ledger.record(Routine::PositiveSearch, plan.loop_bound, draws, true);
                    return Err(e);
                }
            }
        }
        ctx.ledger.record(Routine::PositiveSearch, plan.loop_bound, draws, found.is_some());
        match found {
            Some(mono) => {
                residual.toggle(mono)?;
                *out = residual.local().clone();
            }
            None => break,
        }
    }
    Ok(false)
}

/// Learns an `s`-sparse target to accuracy `epsilon` for small `beta`.
///
/// Zero-projects with keep probability `1 - 1/(64 s log2(2s/eps))`, hashes
/// into `16 (d s)^2` buckets, learns the hashed function to accuracy
/// `eps/2` with [`learn_poly_fig3`], and maps every relevant bucket back to
/// an original variable. Buckets that cannot be mapped are set to 0.
pub fn learn_small_beta(
    f: &dyn Oracle,
    params: &LearnParams,
    ctx: &mut Ctx,
) -> Result<(SparsePoly, Outcome), LearnError> {
    let buckets = cost::small_beta_plan(params).buckets;
    small_beta_with_buckets(f, params, buckets, ctx)
}

pub(crate) fn small_beta_with_buckets(
    f: &dyn Oracle,
    params: &LearnParams,
    buckets: Option<usize>,
    ctx: &mut Ctx,
) -> Result<(SparsePoly, Outcome), LearnError> {
    let n = f.arity();
    let plan = cost::small_beta_plan(params);
    let keep = ProductSampler::new(n, plan.keep).sample(&mut ctx.rng);
    let g = zero_project(f, keep.clone())?;
    let Some(m) = buckets else {
        // No hashing: the learned polynomial is already over the original
        // variables.
        let r = learn_poly_fig3(&g, params.s, params.epsilon / 2.0, ctx)?;
        return Ok(fig3_outcome(r));
    };
    let phi: Vec<u32> = (0..n).map(|_| ctx.rng.gen_range(0..m as u32)).collect();
    let hashed = hash_project(&g, &phi, m)?;
    let r = learn_poly_fig3(&hashed, params.s, params.epsilon / 2.0, ctx)?;
    if r.budget_exhausted || r.declared_zero {
        let (_, outcome) = fig3_outcome(r);
        return Ok((SparsePoly::zero(n), outcome));
    }
    let learned = r.hypothesis;
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); m];
    let relevant = learned.relevant_variables();
    for j in keep.ones_iter() {
        if relevant.contains(&(phi[j] as usize)) {
            members[phi[j] as usize].push(j);
        }
    }
    let zero = SparsePoly::zero(m);
    let test_delta = 1.0 / (32.0 * m as f64);
    let mut map = vec![Subst::Zero; m];
    for &i in &relevant {
        let mono = learned
            .monomials()
            .filter(|mono| mono.contains(i))
            .min_by_key(|mono| mono.degree())
            .expect("relevant variables occur in some monomial");
        let with_i = and_restrict(&hashed, mono.indicator(m))?;
        let without_i = and_restrict(&hashed, mono.without(i).indicator(m))?;
        let diff = xor_pair(&with_i, &without_i)?;
        let step = test_equal_charged(&diff, &zero, params.s, plan.test_degree, test_delta, 2, ctx)
            .and_then(|t| match t {
                TestOutcome::Equal => Ok(None),
                TestOutcome::Witness(u) => {
                    let a = u.and(&mono.without(i).indicator(m));
                    let pinned = pin_bucket(&g, &phi, i, &a)?;
                    identify_literal(&pinned, &members[i], ctx).map(Some)
                }
            });
        match step {
            Ok(Some(Literal::Positive(j) | Literal::Negative(j))) => map[i] = Subst::Var(j),
            Ok(_) | Err(LearnError::PromiseViolation(_)) => {}
            Err(LearnError::BudgetExhausted) => {
                return Ok((learned.substitute(&map, n)?, Outcome::GaveUpBudget));
            }
            Err(e) => return Err(e),
        }
    }
    Ok((learned.substitute(&map, n)?, Outcome::Approx))
}

fn fig3_outcome(r: Fig3Result) -> (SparsePoly, Outcome) {
    let outcome = if r.budget_exhausted {
        Outcome::GaveUpBudget
    } else if r.declared_zero {
        Outcome::DeclaredZero
    } else {
        Outcome::Approx
    };
    (r.hypothesis, outcome)
}
