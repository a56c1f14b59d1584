//! Repetition counts, derived parameters and worst-case query ceilings.
//!
//! Every real-valued count is rounded up.

use crate::bounds::{self, h2};

use super::{Algorithm, LearnParams};

#[inline]
fn ceil_count(x: f64) -> u64 {
    if x.is_nan() || x <= 0.0 {
        0
    } else {
        // saturating float-to-int cast
        x.ceil() as u64
    }
}

/// `floor(log2 s)` for `s >= 1`.
pub fn floor_log2(s: u64) -> u32 {
    63 - s.max(1).leading_zeros()
}

/// `ceil(log2 k)`, 0 for `k <= 1`.
pub fn identify_bits(k: usize) -> usize {
    if k <= 1 {
        0
    } else {
        (usize::BITS - (k - 1).leading_zeros()) as usize
    }
}

/// Bias `max(1 - (floor(log2 s)+1)/d, 1/2)` of the zero-test samples.
pub fn test_equal_bias(s: u64, d: usize) -> f64 {
    let d = d.max(1) as f64;
    let k = floor_log2(s) as f64 + 1.0;
    (1.0 - k / d).max(0.5)
}

/// `ceil(2^{H2(min((floor(log2 s)+1)/d, 1/2)) d} ln(1/delta))`.
pub fn test_equal_reps(s: u64, d: usize, delta: f64) -> u64 {
    let d = d.max(1) as f64;
    let k = floor_log2(s) as f64 + 1.0;
    let r = (k / d).min(0.5);
    ceil_count((h2(r) * d).exp2() * (1.0 / delta).ln())
}

/// `ceil(8 d ln(m/delta))`.
pub fn find_monomial_rounds(d: usize, m: usize, delta: f64) -> u64 {
    ceil_count(8.0 * d.max(1) as f64 * (m.max(1) as f64 / delta).ln())
}

/// Worst-case queries of one monomial search.
pub fn find_monomial_ceiling(d: usize, s: u64, delta: f64, m: usize) -> f64 {
    find_monomial_rounds(d, m, delta) as f64 * test_equal_reps(s, d, 0.5) as f64
}

/// Worst-case queries of the exact degree-`d` learner.
pub fn exact_ceiling(d: usize, s: u64, delta: f64, m: usize) -> f64 {
    if d == 0 {
        return 2.0;
    }
    let sub = delta / (2 * s) as f64;
    (s + 1) as f64 * test_equal_reps(2 * s, d, sub) as f64 + s as f64 * find_monomial_ceiling(d, 2 * s, sub, m)
}

/// Number of hash buckets `(2ds)^2`, or `None` when that is at least `n`
/// and hashing is replaced by the identity.
pub fn reduced_buckets(n: usize, d: usize, s: u64) -> Option<usize> {
    let m = (2.0 * d as f64 * s as f64).powi(2);
    if m >= n as f64 {
        None
    } else {
        Some(m as usize)
    }
}

/// Fresh-hash attempts of the variable-reduction learner.
pub fn reduced_attempts(delta: f64) -> u64 {
    1 + 3u64.max(ceil_count((1.0 / delta).log2() / 3.0))
}

/// Confidence of the exact learner inside the variable reduction.
pub const REDUCED_INNER_DELTA: f64 = 1.0 / 16.0;

pub fn reduced_ceiling(n: usize, d: usize, s: u64, delta: f64) -> f64 {
    let m = reduced_buckets(n, d, s).unwrap_or(n);
    let identify = (s as f64) * (d as f64) * (identify_bits(n) as f64 + 2.0);
    reduced_attempts(delta) as f64 * (exact_ceiling(d, s, REDUCED_INNER_DELTA, m) + identify)
}

/// Parameters of the projection pipeline.
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct MainPlan {
    pub beta: f64,
    pub eta: f64,
    /// Keep probability of each zero projection.
    pub p: f64,
    /// Degree bound for the projected targets.
    pub degree: usize,
    /// Number of projections per restart.
    pub projections: u64,
    /// Largest monomial size kept in the hypothesis.
    pub max_monomial: usize,
    pub restarts: u64,
    pub validation_samples: u64,
    pub inner_delta: f64,
}

/// Derives the pipeline parameters. `s = 1` leaves `beta` undefined; the
/// formulas then use `s = 2`.
pub fn main_plan(params: &LearnParams) -> MainPlan {
    let s = params.s as f64;
    let s_eff = s.max(2.0);
    let eps = params.epsilon;
    let beta = (1.0 / eps).log2() / s_eff.log2();
    let eta = params.eta.unwrap_or_else(|| bounds::gamma(beta).1);
    let lp = eta / (beta + 1.0);
    let log_ratio = (s / eps).log2();
    let degree = ceil_count(log_ratio + (s_eff.log2() + s_eff.log2().log2() + 6.0) / lp) as usize;
    let projections = ceil_count((s / eps).powf(lp) * (16.0 * s).ln()).max(1);
    let restarts = ceil_count((1.0 / params.delta).ln() / 3f64.ln()).max(1);
    MainPlan {
        beta,
        eta,
        p: (-lp).exp2(),
        degree,
        projections,
        max_monomial: log_ratio.floor() as usize,
        restarts,
        validation_samples: validation_samples(eps, params.delta),
        inner_delta: 1.0 / (16.0 * projections as f64),
    }
}

/// Uniform samples used to validate one candidate hypothesis.
pub fn validation_samples(epsilon: f64, delta: f64) -> u64 {
    ceil_count(16.0 / epsilon * (2.0 / delta).ln())
}

pub fn main_ceiling(params: &LearnParams) -> f64 {
    let plan = main_plan(params);
    let per_restart =
        plan.projections as f64 * reduced_ceiling(params.n, plan.degree, params.s, plan.inner_delta);
    let validation = if plan.restarts > 1 {
        plan.validation_samples as f64
    } else {
        0.0
    };
    plan.restarts as f64 * (per_restart + validation)
}

/// Constants of the small-accuracy loop.
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct Fig3Plan {
    /// Uniform draws per inner loop.
    pub loop_bound: u64,
    /// Cap on positive examples before declaring 0.
    pub positive_cap: u64,
    /// Degree parameter of the monomial searches.
    pub degree: usize,
    /// Weight threshold `log2(s/eps) + 3`.
    pub weight_bound: f64,
    pub search_delta: f64,
}

pub fn fig3_plan(s: u64, epsilon: f64) -> Fig3Plan {
    let sf = s as f64;
    let ln = (128.0 * sf).ln();
    let log_ratio = (sf / epsilon).log2();
    Fig3Plan {
        loop_bound: ceil_count(8.0 / (7.0 * epsilon) * ln),
        positive_cap: ceil_count(64.0 * sf * ln),
        degree: ceil_count(log_ratio) as usize + 3,
        weight_bound: log_ratio + 3.0,
        search_delta: 1.0 / (128.0 * sf),
    }
}

pub fn fig3_ceiling(s: u64, epsilon: f64, m: usize) -> f64 {
    let plan = fig3_plan(s, epsilon);
    let search = find_monomial_ceiling(plan.degree, 2 * s, plan.search_delta, m);
    s as f64 * plan.loop_bound as f64 + (plan.positive_cap as f64 + s as f64) * search
}

/// Parameters of the small-`beta` wrapper.
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct SmallBetaPlan {
    /// Keep probability of the zero projection.
    pub keep: f64,
    /// Degree bound `64 s log2(2s/eps) ln(64 s)`.
    pub degree: f64,
    /// Hash buckets `16 (d s)^2`, `None` for the identity.
    pub buckets: Option<usize>,
    /// Degree bound of the recovery tests.
    pub test_degree: usize,
}

pub fn small_beta_plan(params: &LearnParams) -> SmallBetaPlan {
    let s = params.s as f64;
    let l2 = (2.0 * s / params.epsilon).log2();
    let degree = (64.0 * s * l2 * (64.0 * s).ln()).ceil();
    let m = 16.0 * (degree * s).powi(2);
    SmallBetaPlan {
        keep: 1.0 - 1.0 / (64.0 * s * l2),
        degree,
        buckets: if m >= params.n as f64 { None } else { Some(m as usize) },
        test_degree: ceil_count(l2) as usize + 3,
    }
}

pub fn small_beta_ceiling(params: &LearnParams) -> f64 {
    let plan = small_beta_plan(params);
    let m = plan.buckets.unwrap_or(params.n);
    let learn = fig3_ceiling(params.s, params.epsilon / 2.0, m);
    let relevant = params.s as f64 * fig3_plan(params.s, params.epsilon / 2.0).degree as f64;
    let test = 2.0 * test_equal_reps(params.s, plan.test_degree, 1.0 / (32.0 * m as f64)) as f64;
    learn + relevant * (test + identify_bits(params.n) as f64 + 2.0)
}

/// Closed-form worst-case query count of `algorithm` under `params`.
/// `None` when a required parameter (a degree bound) is missing.
pub fn worst_case(params: &LearnParams, algorithm: Algorithm) -> Option<f64> {
    Some(match algorithm {
        Algorithm::Auto => return worst_case(params, super::auto_branch(params)),
        Algorithm::Main => main_ceiling(params),
        Algorithm::SmallBeta => small_beta_ceiling(params),
        Algorithm::Fig3 => fig3_ceiling(params.s, params.epsilon, params.n),
        Algorithm::ExactLowdeg => exact_ceiling(params.degree?, params.s, params.delta, params.n),
        Algorithm::ReducedVars => reduced_ceiling(params.n, params.degree?, params.s, params.delta),
    })
}
