//! Membership-query oracles with exact accounting.
//!
//! A [`QueryOracle`] owns the hidden target, the query counter and the
//! optional budget. Transforms such as [`AndRestrict`] or [`HashProject`]
//! are borrowed views: each of their queries becomes exactly one query to
//! the root, so the root counter is the query complexity of the whole
//! computation no matter how deeply views are nested.

use std::cell::{Cell, RefCell};
use std::io::Write;

use rand::Rng;
use thiserror::Error;

use crate::assignment::Assignment;
use crate::poly::{PolyError, SparsePoly, Subst, TruthTable};

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("arity mismatch: expected {expected}, found {found}")]
    ArityMismatch { expected: usize, found: usize },
    #[error("query budget of {budget} exhausted")]
    BudgetExhausted { budget: u64 },
    #[error("hash map sends variable {var} to {target}, outside [0, {m})")]
    MapOutOfRange { var: usize, target: usize, m: usize },
    #[error("target evaluation failed: {0}")]
    Target(String),
    #[error(transparent)]
    Poly(#[from] PolyError),
}

/// A Boolean function available only through charged queries.
pub trait Oracle {
    fn arity(&self) -> usize;

    /// Evaluates at `x`, charging one query to the root target.
    fn query(&self, x: &Assignment) -> Result<bool, OracleError>;

    /// Queries charged to the root target so far.
    fn queries(&self) -> u64;

    /// The function as a polynomial, when the root target is symbolic.
    /// Used only by instrumentation and tests; costs no queries.
    fn symbolic(&self) -> Option<SparsePoly> {
        None
    }
}

fn check_arity(expected: usize, found: usize) -> Result<(), OracleError> {
    if expected == found {
        Ok(())
    } else {
        Err(OracleError::ArityMismatch { expected, found })
    }
}

type TargetFn = Box<dyn Fn(&Assignment) -> Result<bool, String>>;

enum Target {
    Poly(SparsePoly),
    Table(TruthTable),
    Func(TargetFn),
}

/// Root oracle: hidden target, counter, budget and optional trace log.
pub struct QueryOracle {
    arity: usize,
    target: Target,
    counter: Cell<u64>,
    budget: Option<u64>,
    trace: Option<RefCell<Box<dyn Write>>>,
}

impl QueryOracle {
    pub fn from_poly(p: SparsePoly) -> Self {
        QueryOracle::new(p.arity(), Target::Poly(p))
    }

    pub fn from_truth_table(t: TruthTable) -> Self {
        QueryOracle::new(t.arity(), Target::Table(t))
    }

    /// Wraps an arbitrary function; an `Err` from it aborts the query.
    pub fn from_fn<F>(arity: usize, f: F) -> Self
    where
        F: Fn(&Assignment) -> Result<bool, String> + 'static,
    {
        QueryOracle::new(arity, Target::Func(Box::new(f)))
    }

    fn new(arity: usize, target: Target) -> Self {
        QueryOracle {
            arity,
            target,
            counter: Cell::new(0),
            budget: None,
            trace: None,
        }
    }

    pub fn with_budget(mut self, budget: Option<u64>) -> Self {
        self.budget = budget;
        self
    }

    /// Logs every query as `<assignment hex> <response bit>`.
    pub fn with_trace(mut self, sink: Box<dyn Write>) -> Self {
        self.trace = Some(RefCell::new(sink));
        self
    }

    pub fn budget(&self) -> Option<u64> {
        self.budget
    }

    pub fn reset_counter(&self) {
        self.counter.set(0);
    }

    pub fn flush_trace(&self) -> std::io::Result<()> {
        match &self.trace {
            Some(t) => t.borrow_mut().flush(),
            None => Ok(()),
        }
    }
}

impl Oracle for QueryOracle {
    fn arity(&self) -> usize {
        self.arity
    }

    fn query(&self, x: &Assignment) -> Result<bool, OracleError> {
        check_arity(self.arity, x.len())?;
        let used = self.counter.get();
        if let Some(budget) = self.budget {
            if used >= budget {
                return Err(OracleError::BudgetExhausted { budget });
            }
        }
        self.counter.set(used + 1);
        let bit = match &self.target {
            Target::Poly(p) => p.eval(x),
            Target::Table(t) => t.eval(x),
            Target::Func(f) => f(x).map_err(OracleError::Target)?,
        };
        if let Some(trace) = &self.trace {
            // Trace failures must not change the query semantics.
            let _ = writeln!(trace.borrow_mut(), "{} {}", x.to_hex(), u8::from(bit));
        }
        Ok(bit)
    }

    fn queries(&self) -> u64 {
        self.counter.get()
    }

    fn symbolic(&self) -> Option<SparsePoly> {
        match &self.target {
            Target::Poly(p) => Some(p.clone()),
            Target::Table(t) => Some(SparsePoly::from_truth_table(t)),
            Target::Func(_) => None,
        }
    }
}

/// `x -> o(a * x)`.
pub struct AndRestrict<'a> {
    inner: &'a dyn Oracle,
    mask: Assignment,
    scratch: RefCell<Assignment>,
}

pub fn and_restrict<'a>(o: &'a dyn Oracle, a: Assignment) -> Result<AndRestrict<'a>, OracleError> {
    check_arity(o.arity(), a.len())?;
    Ok(AndRestrict {
        inner: o,
        scratch: RefCell::new(Assignment::zeros(a.len())),
        mask: a,
    })
}

/// A zero projection keeps the variables in `keep` and sets the rest to 0,
/// which is the AND-restriction by `keep`.
pub fn zero_project<'a>(o: &'a dyn Oracle, keep: Assignment) -> Result<AndRestrict<'a>, OracleError> {
    and_restrict(o, keep)
}

impl AndRestrict<'_> {
    pub fn mask(&self) -> &Assignment {
        &self.mask
    }
}

impl Oracle for AndRestrict<'_> {
    fn arity(&self) -> usize {
        self.mask.len()
    }

    fn query(&self, x: &Assignment) -> Result<bool, OracleError> {
        check_arity(self.mask.len(), x.len())?;
        let mut y = self.scratch.borrow_mut();
        y.copy_from(x);
        y.and_assign(&self.mask);
        self.inner.query(&y)
    }

    fn queries(&self) -> u64 {
        self.inner.queries()
    }

    fn symbolic(&self) -> Option<SparsePoly> {
        self.inner.symbolic()?.restrict_and(&self.mask).ok()
    }
}

/// `x -> o(x) + h(x)` with `h` evaluated locally for free.
pub struct XorLocal<'a> {
    inner: &'a dyn Oracle,
    h: SparsePoly,
}

pub fn xor_local(o: &dyn Oracle, h: SparsePoly) -> Result<XorLocal<'_>, OracleError> {
    check_arity(o.arity(), h.arity())?;
    Ok(XorLocal { inner: o, h })
}

impl XorLocal<'_> {
    pub fn local(&self) -> &SparsePoly {
        &self.h
    }

    /// Adds one monomial to the local part.
    pub fn toggle(&mut self, m: crate::poly::Monomial) -> Result<(), OracleError> {
        self.h.toggle(m)?;
        Ok(())
    }
}

impl Oracle for XorLocal<'_> {
    fn arity(&self) -> usize {
        self.h.arity()
    }

    fn query(&self, x: &Assignment) -> Result<bool, OracleError> {
        check_arity(self.h.arity(), x.len())?;
        Ok(self.inner.query(x)? ^ self.h.eval(x))
    }

    fn queries(&self) -> u64 {
        self.inner.queries()
    }

    fn symbolic(&self) -> Option<SparsePoly> {
        self.inner.symbolic()?.add(&self.h).ok()
    }
}

/// `x -> f(x) + g(x)` for two charged oracles; costs one query to each.
pub struct XorPair<'a> {
    f: &'a dyn Oracle,
    g: &'a dyn Oracle,
}

pub fn xor_pair<'a>(f: &'a dyn Oracle, g: &'a dyn Oracle) -> Result<XorPair<'a>, OracleError> {
    check_arity(f.arity(), g.arity())?;
    Ok(XorPair { f, g })
}

impl Oracle for XorPair<'_> {
    fn arity(&self) -> usize {
        self.f.arity()
    }

    fn query(&self, x: &Assignment) -> Result<bool, OracleError> {
        Ok(self.f.query(x)? ^ self.g.query(x)?)
    }

    /// Both sides usually share a root, so this is that root's counter.
    fn queries(&self) -> u64 {
        self.f.queries()
    }

    fn symbolic(&self) -> Option<SparsePoly> {
        self.f.symbolic()?.add(&self.g.symbolic()?).ok()
    }
}

fn check_map(phi: &[u32], m: usize) -> Result<(), OracleError> {
    for (var, &t) in phi.iter().enumerate() {
        if t as usize >= m {
            return Err(OracleError::MapOutOfRange {
                var,
                target: t as usize,
                m,
            });
        }
    }
    Ok(())
}

/// `F(y_0..y_{m-1}) = f(y_{phi(0)}, ..., y_{phi(n-1)})`.
pub struct HashProject<'a> {
    inner: &'a dyn Oracle,
    phi: &'a [u32],
    m: usize,
    scratch: RefCell<Assignment>,
}

pub fn hash_project<'a>(o: &'a dyn Oracle, phi: &'a [u32], m: usize) -> Result<HashProject<'a>, OracleError> {
    check_arity(o.arity(), phi.len())?;
    check_map(phi, m)?;
    Ok(HashProject {
        inner: o,
        phi,
        m,
        scratch: RefCell::new(Assignment::zeros(phi.len())),
    })
}

impl Oracle for HashProject<'_> {
    fn arity(&self) -> usize {
        self.m
    }

    fn query(&self, y: &Assignment) -> Result<bool, OracleError> {
        check_arity(self.m, y.len())?;
        let mut x = self.scratch.borrow_mut();
        for (w, chunk) in x.words_mut().iter_mut().zip(self.phi.chunks(64)) {
            let mut word = 0u64;
            for (b, &t) in chunk.iter().enumerate() {
                word |= (y.get(t as usize) as u64) << b;
            }
            *w = word;
        }
        self.inner.query(&x)
    }

    fn queries(&self) -> u64 {
        self.inner.queries()
    }

    fn symbolic(&self) -> Option<SparsePoly> {
        let map: Vec<Subst> = self.phi.iter().map(|&t| Subst::Var(t as usize)).collect();
        self.inner.symbolic()?.substitute(&map, self.m).ok()
    }
}

/// `x -> f(pi(x))` where `pi_j = x_j` if `phi(j) = i` and `a_{phi(j)}`
/// otherwise: the variables hashed to bucket `i` stay free, every other
/// variable copies the value of its bucket in `a`.
pub struct PinBucket<'a> {
    inner: &'a dyn Oracle,
    base: Assignment,
    free: Assignment,
    members: Vec<usize>,
    scratch: RefCell<Assignment>,
}

pub fn pin_bucket<'a>(
    o: &'a dyn Oracle,
    phi: &[u32],
    bucket: usize,
    a: &Assignment,
) -> Result<PinBucket<'a>, OracleError> {
    check_arity(o.arity(), phi.len())?;
    check_map(phi, a.len())?;
    if bucket >= a.len() {
        return Err(OracleError::MapOutOfRange {
            var: bucket,
            target: bucket,
            m: a.len(),
        });
    }
    let n = phi.len();
    let mut base = Assignment::zeros(n);
    let mut members = Vec::new();
    for (j, &t) in phi.iter().enumerate() {
        if t as usize == bucket {
            members.push(j);
        } else if a.get(t as usize) {
            base.set(j, true);
        }
    }
    let free = Assignment::indicator(n, members.iter().copied());
    Ok(PinBucket {
        inner: o,
        base,
        free,
        members,
        scratch: RefCell::new(Assignment::zeros(n)),
    })
}

impl PinBucket<'_> {
    /// Original variables hashed to the free bucket, increasing.
    pub fn members(&self) -> &[usize] {
        &self.members
    }
}

impl Oracle for PinBucket<'_> {
    fn arity(&self) -> usize {
        self.base.len()
    }

    fn query(&self, x: &Assignment) -> Result<bool, OracleError> {
        check_arity(self.base.len(), x.len())?;
        let mut y = self.scratch.borrow_mut();
        for ((out, (&b, &f)), &xi) in y
            .words_mut()
            .iter_mut()
            .zip(self.base.words().iter().zip(self.free.words()))
            .zip(x.words())
        {
            *out = b | (xi & f);
        }
        self.inner.query(&y)
    }

    fn queries(&self) -> u64 {
        self.inner.queries()
    }

    fn symbolic(&self) -> Option<SparsePoly> {
        let n = self.base.len();
        let map: Vec<Subst> = (0..n)
            .map(|j| {
                if self.free.get(j) {
                    Subst::Var(j)
                } else if self.base.get(j) {
                    Subst::One
                } else {
                    Subst::Zero
                }
            })
            .collect();
        self.inner.symbolic()?.substitute(&map, n).ok()
    }
}

/// Refuses queries once the root counter reaches `limit`.
pub struct Capped<'a> {
    inner: &'a dyn Oracle,
    limit: u64,
}

/// Allows at most `budget` more queries through `o`.
pub fn capped(o: &dyn Oracle, budget: u64) -> Capped<'_> {
    Capped {
        limit: o.queries().saturating_add(budget),
        inner: o,
    }
}

impl Oracle for Capped<'_> {
    fn arity(&self) -> usize {
        self.inner.arity()
    }

    fn query(&self, x: &Assignment) -> Result<bool, OracleError> {
        if self.inner.queries() >= self.limit {
            return Err(OracleError::BudgetExhausted { budget: self.limit });
        }
        self.inner.query(x)
    }

    fn queries(&self) -> u64 {
        self.inner.queries()
    }

    fn symbolic(&self) -> Option<SparsePoly> {
        self.inner.symbolic()
    }
}

/// Draws from the `p`-product distribution: each coordinate is 1
/// independently with probability `p`.
///
/// Bernoulli(p) is realized exactly up to 2^-64 by comparing a lazily
/// generated uniform 64-bit number with `floor(p * 2^64)`, 64 coordinates
/// at a time; on average about two random words per output word.
#[derive(Clone, Copy, Debug)]
pub struct ProductSampler {
    arity: usize,
    p: f64,
    mode: Mode,
}

#[derive(Clone, Copy, Debug)]
enum Mode {
    Zeros,
    Ones,
    Uniform,
    Threshold(u64),
}

impl ProductSampler {
    pub fn new(arity: usize, p: f64) -> Self {
        assert!((0.0..=1.0).contains(&p), "bias {p} outside [0, 1]");
        let mode = if p == 0.0 {
            Mode::Zeros
        } else if p == 1.0 {
            Mode::Ones
        } else if p == 0.5 {
            Mode::Uniform
        } else {
            // p * 2^64 < 2^64 here; the cast truncates toward zero.
            Mode::Threshold((p * 18_446_744_073_709_551_616.0) as u64)
        };
        ProductSampler { arity, p, mode }
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn bias(&self) -> f64 {
        self.p
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Assignment {
        let mut a = Assignment::zeros(self.arity);
        self.sample_into(&mut a, rng);
        a
    }

    pub fn sample_into<R: Rng + ?Sized>(&self, out: &mut Assignment, rng: &mut R) {
        assert_eq!(out.len(), self.arity);
        for w in out.words_mut() {
            *w = match self.mode {
                Mode::Zeros => 0,
                Mode::Ones => !0,
                Mode::Uniform => rng.next_u64(),
                Mode::Threshold(t) => bernoulli_word(t, rng),
            };
        }
        out.clear_padding();
    }
}

/// 64 independent bits, each 1 iff a fresh uniform 64-bit `U` is `< t`.
/// Bits of `U` are drawn most significant first, one random word per bit
/// position, until every lane is decided.
#[inline]
fn bernoulli_word<R: Rng + ?Sized>(t: u64, rng: &mut R) -> u64 {
    let mut result = 0u64;
    let mut undecided = !0u64;
    for k in (0..64).rev() {
        let u = rng.next_u64();
        if (t >> k) & 1 == 1 {
            result |= undecided & !u;
            undecided &= u;
        } else {
            undecided &= !u;
        }
        // Lanes still equal to t's prefix can no longer fall below t once
        // the remaining bits of t are all zero.
        if undecided == 0 || t & ((1u64 << k) - 1) == 0 {
            break;
        }
    }
    result
}

pub fn sample_product<R: Rng + ?Sized>(n: usize, p: f64, rng: &mut R) -> Assignment {
    ProductSampler::new(n, p).sample(rng)
}
