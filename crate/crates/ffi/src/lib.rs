//! C ABI for the `sparse-gf2` learners, tester and bound calculators.
//!
//! Handles are opaque pointers created by the `sgf2_*_from_*` and
//! `sgf2_poly_random` constructors and released with the matching
//! `sgf2_*_free`. Fallible calls return an [`Sgf2Status`]; on failure
//! [`sgf2_last_error_message`] holds a description for the calling thread. Strings returned through `char **`
//! out-parameters are owned by the caller and released with
//! [`sgf2_string_free`]. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, c_void, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use sparse_gf2::bounds::{self, BoundsProfile};
use sparse_gf2::learner::{self, Algorithm, LearnError, LearnParams, LearnReport, Outcome};
use sparse_gf2::poly::random_sparse_poly;
use sparse_gf2::tester::{self, Decision, TesterConfig};
use sparse_gf2::{Assignment, Oracle, OracleError, PolyError, QueryOracle, SparsePoly};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sgf2Status {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    ArityMismatch = 3,
    Parse = 4,
    BudgetExhausted = 5,
    PromiseViolation = 6,
    Panic = 7,
    Io = 8,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sgf2Algorithm {
    Auto = 0,
    Main = 1,
    SmallBeta = 2,
    Fig3 = 3,
    ExactLowdeg = 4,
    ReducedVars = 5,
}

impl From<Sgf2Algorithm> for Algorithm {
    fn from(a: Sgf2Algorithm) -> Self {
        match a {
            Sgf2Algorithm::Auto => Algorithm::Auto,
            Sgf2Algorithm::Main => Algorithm::Main,
            Sgf2Algorithm::SmallBeta => Algorithm::SmallBeta,
            Sgf2Algorithm::Fig3 => Algorithm::Fig3,
            Sgf2Algorithm::ExactLowdeg => Algorithm::ExactLowdeg,
            Sgf2Algorithm::ReducedVars => Algorithm::ReducedVars,
        }
    }
}

impl From<Algorithm> for Sgf2Algorithm {
    fn from(a: Algorithm) -> Self {
        match a {
            Algorithm::Auto => Sgf2Algorithm::Auto,
            Algorithm::Main => Sgf2Algorithm::Main,
            Algorithm::SmallBeta => Sgf2Algorithm::SmallBeta,
            Algorithm::Fig3 => Sgf2Algorithm::Fig3,
            Algorithm::ExactLowdeg => Sgf2Algorithm::ExactLowdeg,
            Algorithm::ReducedVars => Sgf2Algorithm::ReducedVars,
        }
    }
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sgf2Outcome {
    Exact = 0,
    Approx = 1,
    GaveUpBudget = 2,
    DeclaredZero = 3,
}

impl From<Outcome> for Sgf2Outcome {
    fn from(o: Outcome) -> Self {
        match o {
            Outcome::Exact => Sgf2Outcome::Exact,
            Outcome::Approx => Sgf2Outcome::Approx,
            Outcome::GaveUpBudget => Sgf2Outcome::GaveUpBudget,
            Outcome::DeclaredZero => Sgf2Outcome::DeclaredZero,
        }
    }
}

/// Learner inputs. Optional fields are ignored unless their `has_` flag is
/// set; `eta <= 0` selects the optimized exponent.
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct Sgf2LearnParams {
    pub s: u64,
    pub epsilon: f64,
    pub delta: f64,
    pub seed: u64,
    pub degree: usize,
    pub has_degree: bool,
    pub budget: u64,
    pub has_budget: bool,
    pub eta: f64,
}

#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct Sgf2Verdict {
    pub accept: bool,
    pub queries_used: u64,
    pub budget: u64,
    /// NaN when the learning stage failed.
    pub estimated_distance: f64,
}

/// Query callback: returns 0 or 1, or a negative value to abort the query.
pub type Sgf2QueryFn = Option<unsafe extern "C" fn(user_data: *mut c_void, bits: *const u8, len: usize) -> i32>;

pub struct Sgf2Poly(SparsePoly);

pub struct Sgf2Oracle(Option<QueryOracle>);

pub struct Sgf2Report(LearnReport);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

struct Failure(Sgf2Status, String);

impl From<PolyError> for Failure {
    fn from(e: PolyError) -> Self {
        let status = match e {
            PolyError::ArityMismatch { .. } => Sgf2Status::ArityMismatch,
            PolyError::Json(_) => Sgf2Status::Parse,
            _ => Sgf2Status::InvalidArgument,
        };
        Failure(status, e.to_string())
    }
}

impl From<OracleError> for Failure {
    fn from(e: OracleError) -> Self {
        let status = match e {
            OracleError::ArityMismatch { .. } => Sgf2Status::ArityMismatch,
            OracleError::BudgetExhausted { .. } => Sgf2Status::BudgetExhausted,
            OracleError::Poly(p) => return p.into(),
            _ => Sgf2Status::InvalidArgument,
        };
        Failure(status, e.to_string())
    }
}

impl From<LearnError> for Failure {
    fn from(e: LearnError) -> Self {
        match e {
            LearnError::BudgetExhausted => Failure(Sgf2Status::BudgetExhausted, e.to_string()),
            LearnError::PromiseViolation(_) => Failure(Sgf2Status::PromiseViolation, e.to_string()),
            LearnError::InvalidParams(_) => Failure(Sgf2Status::InvalidArgument, e.to_string()),
            LearnError::Oracle(o) => o.into(),
        }
    }
}

fn invalid(msg: impl Into<String>) -> Failure {
    Failure(Sgf2Status::InvalidArgument, msg.into())
}

fn null(what: &str) -> Failure {
    Failure(Sgf2Status::NullPointer, format!("{what} is null"))
}

/// Runs `body`, converting failures and panics into a status code.
fn guard(body: impl FnOnce() -> Result<(), Failure>) -> Sgf2Status {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => {
            set_error("");
            Sgf2Status::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("panic inside the library");
            Sgf2Status::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(Sgf2Status::Parse, format!("{what} is not UTF-8")))
}

unsafe fn bits_arg(bits: *const u8, len: usize) -> Result<Assignment, Failure> {
    if bits.is_null() && len > 0 {
        return Err(null("bits"));
    }
    let slice = if len == 0 { &[][..] } else { std::slice::from_raw_parts(bits, len) };
    let bits: Vec<bool> = slice.iter().map(|&b| b != 0).collect();
    Ok(Assignment::from_bits(&bits))
}

unsafe fn out_arg<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn ref_arg<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

fn into_c_string(s: String) -> *mut c_char {
    CString::new(s).map(CString::into_raw).unwrap_or(ptr::null_mut())
}

/// Message of the last failed call on this thread; empty after a success.
/// Valid until the next call into the library from this thread.
#[no_mangle]
pub extern "C" fn sgf2_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn sgf2_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// # Safety
/// `s` must be null or a string returned by this library.
#[no_mangle]
pub unsafe extern "C" fn sgf2_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

// ---- polynomials -------------------------------------------------------

/// Parses `{"n": .., "monomials": [[..], ..]}`.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sgf2_poly_from_json(json: *const c_char, out: *mut *mut Sgf2Poly) -> Sgf2Status {
    guard(|| {
        let out = out_arg(out, "out")?;
        let p = SparsePoly::from_json(str_arg(json, "json")?)?;
        *out = Box::into_raw(Box::new(Sgf2Poly(p)));
        Ok(())
    })
}

/// `s` distinct random monomials of degree at most `d` over `n` variables,
/// identical to `sparse-gf2 gen` with the same seed.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sgf2_poly_random(n: usize, d: usize, s: usize, seed: u64, out: *mut *mut Sgf2Poly) -> Sgf2Status {
    guard(|| {
        let out = out_arg(out, "out")?;
        let p = random_sparse_poly(n, d, s, &mut sparse_gf2::cli::instance_rng(seed))?;
        *out = Box::into_raw(Box::new(Sgf2Poly(p)));
        Ok(())
    })
}

/// # Safety
/// `p` must be a valid handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sgf2_poly_to_json(p: *const Sgf2Poly, out: *mut *mut c_char) -> Sgf2Status {
    guard(|| {
        let p = ref_arg(p, "poly")?;
        *out_arg(out, "out")? = into_c_string(p.0.to_json());
        Ok(())
    })
}

/// Evaluates `p` at the assignment whose coordinate `i` is `bits[i] != 0`.
///
/// # Safety
/// `bits` must point to `len` bytes; `p` and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn sgf2_poly_eval(p: *const Sgf2Poly, bits: *const u8, len: usize, out: *mut bool) -> Sgf2Status {
    guard(|| {
        let p = ref_arg(p, "poly")?;
        let out = out_arg(out, "out")?;
        *out = p.0.evaluate(&bits_arg(bits, len)?)?;
        Ok(())
    })
}

/// Arity of `p`, 0 for a null handle.
///
/// # Safety
/// `p` must be null or a valid handle.
#[no_mangle]
pub unsafe extern "C" fn sgf2_poly_arity(p: *const Sgf2Poly) -> usize {
    p.as_ref().map_or(0, |p| p.0.arity())
}

/// # Safety
/// `p` must be null or a valid handle.
#[no_mangle]
pub unsafe extern "C" fn sgf2_poly_sparsity(p: *const Sgf2Poly) -> usize {
    p.as_ref().map_or(0, |p| p.0.sparsity())
}

/// # Safety
/// `p` must be null or a valid handle.
#[no_mangle]
pub unsafe extern "C" fn sgf2_poly_degree(p: *const Sgf2Poly) -> usize {
    p.as_ref().map_or(0, |p| p.0.degree())
}

/// Symbolic equality; false if either handle is null.
///
/// # Safety
/// Both pointers must be null or valid handles.
#[no_mangle]
pub unsafe extern "C" fn sgf2_poly_equal(a: *const Sgf2Poly, b: *const Sgf2Poly) -> bool {
    match (a.as_ref(), b.as_ref()) {
        (Some(a), Some(b)) => a.0 == b.0,
        _ => false,
    }
}

/// # Safety
/// `p` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sgf2_poly_free(p: *mut Sgf2Poly) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

// ---- oracles -----------------------------------------------------------

/// Query oracle hiding a copy of `p`.
///
/// # Safety
/// `p` must be a valid handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sgf2_oracle_from_poly(p: *const Sgf2Poly, out: *mut *mut Sgf2Oracle) -> Sgf2Status {
    guard(|| {
        let p = ref_arg(p, "poly")?;
        let out = out_arg(out, "out")?;
        *out = Box::into_raw(Box::new(Sgf2Oracle(Some(QueryOracle::from_poly(p.0.clone())))));
        Ok(())
    })
}

/// Query oracle backed by `callback`, which receives `arity` bytes of 0/1.
///
/// # Safety
/// `callback` must stay callable with `user_data` for the oracle's lifetime
/// and must only be used from the thread that runs the queries.
#[no_mangle]
pub unsafe extern "C" fn sgf2_oracle_from_callback(
    arity: usize,
    callback: Sgf2QueryFn,
    user_data: *mut c_void,
    out: *mut *mut Sgf2Oracle,
) -> Sgf2Status {
    guard(|| {
        let out = out_arg(out, "out")?;
        let cb = callback.ok_or_else(|| null("callback"))?;
        if arity == 0 {
            return Err(invalid("arity must be at least 1"));
        }
        let f = move |x: &Assignment| {
            let bytes: Vec<u8> = x.to_bits().into_iter().map(u8::from).collect();
            match cb(user_data, bytes.as_ptr(), bytes.len()) {
                0 => Ok(false),
                1 => Ok(true),
                r => Err(format!("callback returned {r}")),
            }
        };
        *out = Box::into_raw(Box::new(Sgf2Oracle(Some(QueryOracle::from_fn(arity, f)))));
        Ok(())
    })
}

unsafe fn oracle_ref<'a>(o: *const Sgf2Oracle) -> Result<&'a QueryOracle, Failure> {
    ref_arg(o, "oracle")?.0.as_ref().ok_or_else(|| null("oracle"))
}

/// Sets (`has_budget`) or clears the hard query budget.
///
/// # Safety
/// `o` must be a valid handle.
#[no_mangle]
pub unsafe extern "C" fn sgf2_oracle_set_budget(o: *mut Sgf2Oracle, budget: u64, has_budget: bool) -> Sgf2Status {
    guard(|| {
        let slot = &mut out_arg(o, "oracle")?.0;
        let inner = slot.take().ok_or_else(|| null("oracle"))?;
        *slot = Some(inner.with_budget(has_budget.then_some(budget)));
        Ok(())
    })
}

/// One charged query.
///
/// # Safety
/// `bits` must point to `len` bytes; `o` and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn sgf2_oracle_query(o: *const Sgf2Oracle, bits: *const u8, len: usize, out: *mut bool) -> Sgf2Status {
    guard(|| {
        let o = oracle_ref(o)?;
        let out = out_arg(out, "out")?;
        *out = o.query(&bits_arg(bits, len)?)?;
        Ok(())
    })
}

/// Queries charged so far, 0 for a null handle.
///
/// # Safety
/// `o` must be null or a valid handle.
#[no_mangle]
pub unsafe extern "C" fn sgf2_oracle_queries(o: *const Sgf2Oracle) -> u64 {
    oracle_ref(o).map_or(0, |o| o.queries())
}

/// # Safety
/// `o` must be null or a valid handle.
#[no_mangle]
pub unsafe extern "C" fn sgf2_oracle_arity(o: *const Sgf2Oracle) -> usize {
    oracle_ref(o).map_or(0, |o| o.arity())
}

/// # Safety
/// `o` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sgf2_oracle_free(o: *mut Sgf2Oracle) {
    if !o.is_null() {
        drop(Box::from_raw(o));
    }
}

// ---- learning ------------------------------------------------------------

/// Default parameters: delta 0.1, seed 0, no degree, budget or eta.
#[no_mangle]
pub extern "C" fn sgf2_learn_params_default(s: u64, epsilon: f64) -> Sgf2LearnParams {
    Sgf2LearnParams {
        s,
        epsilon,
        delta: 0.1,
        seed: 0,
        degree: 0,
        has_degree: false,
        budget: 0,
        has_budget: false,
        eta: 0.0,
    }
}

/// Runs `algorithm` against `o`. Budget exhaustion is reported through the
/// report's outcome, not the status.
///
/// # Safety
/// `o`, `params` and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn sgf2_learn(
    o: *const Sgf2Oracle,
    params: *const Sgf2LearnParams,
    algorithm: Sgf2Algorithm,
    out: *mut *mut Sgf2Report,
) -> Sgf2Status {
    guard(|| {
        let o = oracle_ref(o)?;
        let p = ref_arg(params, "params")?;
        let out = out_arg(out, "out")?;
        let mut lp = LearnParams::new(p.s, p.epsilon, p.delta, o.arity())
            .with_seed(p.seed)
            .with_budget(p.has_budget.then_some(p.budget))
            .with_eta((p.eta > 0.0).then_some(p.eta));
        if p.has_degree {
            lp = lp.with_degree(p.degree);
        }
        let report = learner::run(o, &lp, algorithm.into())?;
        *out = Box::into_raw(Box::new(Sgf2Report(report)));
        Ok(())
    })
}

/// # Safety
/// `r` must be null or a valid handle.
#[no_mangle]
pub unsafe extern "C" fn sgf2_report_queries_used(r: *const Sgf2Report) -> u64 {
    r.as_ref().map_or(0, |r| r.0.queries_used)
}

/// Prediction with constants set to 1; NaN when undefined.
///
/// # Safety
/// `r` must be null or a valid handle.
#[no_mangle]
pub unsafe extern "C" fn sgf2_report_predicted(r: *const Sgf2Report) -> f64 {
    r.as_ref().map_or(f64::NAN, |r| r.0.predicted_bound)
}

/// # Safety
/// `r` and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn sgf2_report_outcome(r: *const Sgf2Report, out: *mut Sgf2Outcome) -> Sgf2Status {
    guard(|| {
        let r = ref_arg(r, "report")?;
        *out_arg(out, "out")? = r.0.outcome.into();
        Ok(())
    })
}

/// The concrete algorithm that ran (never `Auto`).
///
/// # Safety
/// `r` and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn sgf2_report_algorithm(r: *const Sgf2Report, out: *mut Sgf2Algorithm) -> Sgf2Status {
    guard(|| {
        let r = ref_arg(r, "report")?;
        *out_arg(out, "out")? = r.0.algorithm.into();
        Ok(())
    })
}

/// Copies the hypothesis into a new polynomial handle.
///
/// # Safety
/// `r` and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn sgf2_report_hypothesis(r: *const Sgf2Report, out: *mut *mut Sgf2Poly) -> Sgf2Status {
    guard(|| {
        let r = ref_arg(r, "report")?;
        *out_arg(out, "out")? = Box::into_raw(Box::new(Sgf2Poly(r.0.hypothesis.clone())));
        Ok(())
    })
}

/// The full report, including the per-routine query ledger, as JSON.
///
/// # Safety
/// `r` and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn sgf2_report_to_json(r: *const Sgf2Report, out: *mut *mut c_char) -> Sgf2Status {
    guard(|| {
        let r = ref_arg(r, "report")?;
        let text = serde_json::to_string(&r.0).map_err(|e| invalid(e.to_string()))?;
        *out_arg(out, "out")? = into_c_string(text);
        Ok(())
    })
}

/// # Safety
/// `r` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sgf2_report_free(r: *mut Sgf2Report) {
    if !r.is_null() {
        drop(Box::from_raw(r));
    }
}

// ---- testing -------------------------------------------------------------

/// Sparsity test of the oracle's target. `budget_factor <= 0` selects the
/// default multiple of the learner's ceiling.
///
/// # Safety
/// `o` and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn sgf2_test_sparsity(
    o: *const Sgf2Oracle,
    s: u64,
    epsilon: f64,
    seed: u64,
    budget_factor: f64,
    out: *mut Sgf2Verdict,
) -> Sgf2Status {
    guard(|| {
        let o = oracle_ref(o)?;
        let out = out_arg(out, "out")?;
        let config = if budget_factor > 0.0 {
            TesterConfig { budget_factor }
        } else {
            TesterConfig::default()
        };
        let v = tester::test_sparsity(o, s, epsilon, seed, &config)?;
        *out = Sgf2Verdict {
            accept: v.decision == Decision::Accept,
            queries_used: v.queries_used,
            budget: v.budget,
            estimated_distance: v.evidence.map_or(f64::NAN, |e| e.estimated_distance),
        };
        Ok(())
    })
}

// ---- bounds --------------------------------------------------------------

/// # Safety
/// `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn sgf2_binary_entropy(x: f64, out: *mut f64) -> Sgf2Status {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = bounds::binary_entropy(x).map_err(|e| invalid(e.to_string()))?;
        Ok(())
    })
}

/// Minimized exponent of the main learner and its minimizer.
///
/// # Safety
/// `value` and `eta` must be valid.
#[no_mangle]
pub unsafe extern "C" fn sgf2_gamma(beta: f64, value: *mut f64, eta: *mut f64) -> Sgf2Status {
    guard(|| {
        let value = out_arg(value, "value")?;
        let eta = out_arg(eta, "eta")?;
        if !(beta > 0.0) {
            return Err(invalid(format!("beta {beta} must be positive")));
        }
        (*value, *eta) = bounds::gamma(beta);
        Ok(())
    })
}

/// Exponent of the small-beta learner; NaN for `beta <= 0`.
#[no_mangle]
pub extern "C" fn sgf2_gamma_prime(beta: f64) -> f64 {
    if beta > 0.0 {
        bounds::gamma_prime(beta)
    } else {
        f64::NAN
    }
}

/// Every bound at `(s, epsilon, n)` as JSON.
///
/// # Safety
/// `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn sgf2_bounds_profile_json(s: u64, epsilon: f64, n: u64, out: *mut *mut c_char) -> Sgf2Status {
    guard(|| {
        let out = out_arg(out, "out")?;
        let profile = BoundsProfile::new(s, epsilon, n).map_err(|e| invalid(e.to_string()))?;
        let text = serde_json::to_string(&profile).map_err(|e| invalid(e.to_string()))?;
        *out = into_c_string(text);
        Ok(())
    })
}
