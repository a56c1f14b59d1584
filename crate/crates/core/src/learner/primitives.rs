//! Zero testing, monomial search and literal identification.

use crate::assignment::Assignment;
use crate::oracle::{and_restrict, Oracle, ProductSampler};
use crate::poly::SparsePoly;

use super::cost;
use super::{Ctx, LearnError, Routine};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TestOutcome {
    Equal,
    /// A queried point where the oracle and the comparison polynomial
    /// disagree.
    Witness(Assignment),
}

/// Searches for a point where `f` and the local polynomial `g` differ.
///
/// Draws [`cost::test_equal_reps`] points from the product distribution
/// with bias [`cost::test_equal_bias`] and returns the first disagreement.
/// If `f` and `g` are both in the degree-`d`, `s`-sparse class and differ,
/// a witness is found with probability at least `1 - delta`.
pub fn test_equal(
    f: &dyn Oracle,
    g: &SparsePoly,
    s: u64,
    d: usize,
    delta: f64,
    ctx: &mut Ctx,
) -> Result<TestOutcome, LearnError> {
    test_equal_charged(f, g, s, d, delta, 1, ctx)
}

/// [`test_equal`] for an oracle whose every query costs `charge` root
/// queries (e.g. the XOR of two charged oracles).
pub(crate) fn test_equal_charged(
    f: &dyn Oracle,
    g: &SparsePoly,
    s: u64,
    d: usize,
    delta: f64,
    charge: u64,
    ctx: &mut Ctx,
) -> Result<TestOutcome, LearnError> {
    let reps = cost::test_equal_reps(s, d, delta);
    let sampler = ProductSampler::new(f.arity(), cost::test_equal_bias(s, d));
    let ceiling = reps.saturating_mul(charge);
    let before = f.queries();
    let mut x = Assignment::zeros(f.arity());
    let mut result = Ok(TestOutcome::Equal);
    for _ in 0..reps {
        sampler.sample_into(&mut x, &mut ctx.rng);
        match f.query(&x) {
            Ok(v) if v != g.eval(&x) => {
                result = Ok(TestOutcome::Witness(x));
                break;
            }
            Ok(_) => {}
            Err(e) => {
                result = Err(e.into());
                break;
            }
        }
    }
    let used = f.queries() - before;
    let early = !matches!(result, Ok(TestOutcome::Equal));
    ctx.ledger.record(Routine::TestEqual, ceiling, used, early);
    result
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FoundMonomial {
    /// Final assignment; its support is the candidate monomial.
    pub assignment: Assignment,
    /// Rounds executed, at most [`cost::find_monomial_rounds`].
    pub rounds: u64,
}

/// Shrinks the all-ones assignment by random products while `f(a * x)`
/// stays certifiably nonzero.
///
/// Each round draws `b` from the `2^(-1/d)`-product distribution and keeps
/// `a * b` only if a zero test with confidence 1/2 finds a point where
/// `f(a * b * x)` is 1. Rounds where `a * b = a`, and all rounds after `a`
/// reaches weight zero, cannot change `a` and are skipped without queries.
pub fn find_monomial(
    f: &dyn Oracle,
    d: usize,
    s: u64,
    delta: f64,
    ctx: &mut Ctx,
) -> Result<FoundMonomial, LearnError> {
    let m = f.arity();
    let d = d.max(1);
    let rounds = cost::find_monomial_rounds(d, m, delta);
    let sampler = ProductSampler::new(m, (-1.0 / d as f64).exp2());
    let zero = SparsePoly::zero(m);
    let mut a = Assignment::ones(m);
    let mut b = Assignment::zeros(m);
    let mut executed = 0;
    while executed < rounds {
        if a.weight() == 0 {
            break;
        }
        executed += 1;
        sampler.sample_into(&mut b, &mut ctx.rng);
        b.and_assign(&a);
        if b == a {
            continue;
        }
        let view = and_restrict(f, b.clone())?;
        if let TestOutcome::Witness(_) = test_equal(&view, &zero, s, d, 0.5, ctx)? {
            a.copy_from(&b);
        }
    }
    Ok(FoundMonomial {
        assignment: a,
        rounds: executed,
    })
}

/// A member of `{0, 1, x_j, not x_j}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "kind", content = "var", rename_all = "snake_case")]
pub enum Literal {
    Constant0,
    Constant1,
    Positive(usize),
    Negative(usize),
}

impl Literal {
    pub fn var(self) -> Option<usize> {
        match self {
            Literal::Positive(v) | Literal::Negative(v) => Some(v),
            _ => None,
        }
    }
}

/// Learns a function promised to be a constant or a literal over one of
/// `candidates`, with `ceil(log2 k) + 2` non-adaptive queries.
///
/// Queries the all-zeros point, the indicator of all candidates and, for
/// each bit position `t`, the indicator of the candidates whose rank has
/// bit `t` set. Coordinates outside `candidates` are 0 in every query.
pub fn identify_literal(g: &dyn Oracle, candidates: &[usize], ctx: &mut Ctx) -> Result<Literal, LearnError> {
    let n = g.arity();
    let k = candidates.len();
    let bits = cost::identify_bits(k);
    let ceiling = bits as u64 + 2;
    let before = g.queries();
    let mut ask = |x: &Assignment| -> Result<bool, LearnError> {
        g.query(x).map_err(|e| {
            let used = g.queries() - before;
            ctx.ledger.record(Routine::Identify, ceiling, used, true);
            LearnError::from(e)
        })
    };
    let zeros = ask(&Assignment::zeros(n))?;
    let ones = ask(&Assignment::indicator(n, candidates.iter().copied()))?;
    let mut responses = Vec::with_capacity(bits);
    for t in 0..bits {
        let pattern = Assignment::indicator(
            n,
            candidates.iter().enumerate().filter(|(j, _)| j >> t & 1 == 1).map(|(_, &c)| c),
        );
        responses.push(ask(&pattern)?);
    }
    ctx.ledger.record(Routine::Identify, ceiling, g.queries() - before, false);

    if zeros == ones {
        if responses.iter().any(|&r| r != zeros) {
            return Err(LearnError::PromiseViolation(
                "responses match no constant or literal".into(),
            ));
        }
        return Ok(if zeros { Literal::Constant1 } else { Literal::Constant0 });
    }
    let positive = ones;
    let rank = responses
        .iter()
        .enumerate()
        .fold(0usize, |acc, (t, &r)| acc | (usize::from(r != !positive) << t));
    if rank >= k {
        return Err(LearnError::PromiseViolation(format!(
            "decoded rank {rank} but only {k} candidates"
        )));
    }
    let var = candidates[rank];
    Ok(if positive {
        Literal::Positive(var)
    } else {
        Literal::Negative(var)
    })
}
