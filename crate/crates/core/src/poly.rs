//! Multilinear polynomials over GF(2) in sparse (monomial-set) form.
//!
//! A [`SparsePoly`] is the algebraic normal form of a Boolean function: a
//! set of monomials, each a set of variable indices, summed with XOR. The
//! exhaustive helpers at the bottom of the module (truth tables, weight
//! histograms, exact satisfying probabilities) exist to verify the
//! learners at small arity and are capped by an arity limit.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::assignment::Assignment;

/// Default cap on the arity of exhaustive (2^n) computations.
pub const DEFAULT_EXHAUSTIVE_LIMIT: usize = 20;

/// Largest sparsity for which [`SparsePoly::satisfying_fraction`] uses
/// inclusion-exclusion over monomial subsets.
pub const INCLUSION_EXCLUSION_LIMIT: usize = 24;

#[derive(Debug, Error)]
pub enum PolyError {
    #[error("arity mismatch: expected {expected}, found {found}")]
    ArityMismatch { expected: usize, found: usize },
    #[error("variable index {index} out of range for arity {arity}")]
    IndexOutOfRange { index: usize, arity: usize },
    #[error("cannot draw {requested} distinct monomials, only {available} exist")]
    Infeasible { requested: u128, available: u128 },
    #[error("arity {arity} exceeds the exhaustive limit {limit}")]
    ArityTooLarge { arity: usize, limit: usize },
    #[error("variable x{0} is not relevant")]
    IrrelevantVariable(usize),
    #[error("probability {0} outside [0, 1]")]
    InvalidProbability(f64),
    #[error("malformed polynomial file: {0}")]
    Json(#[from] serde_json::Error),
}

/// A product of distinct variables; the empty product is the constant 1.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial(Vec<u32>);

impl Monomial {
    /// Builds a monomial from arbitrary indices; duplicates collapse since
    /// `x * x = x`.
    pub fn new<I: IntoIterator<Item = usize>>(indices: I) -> Self {
        let mut v: Vec<u32> = indices
            .into_iter()
            .map(|i| u32::try_from(i).expect("variable index exceeds u32"))
            .collect();
        v.sort_unstable();
        v.dedup();
        Monomial(v)
    }

    pub fn one() -> Self {
        Monomial(Vec::new())
    }

    pub fn degree(&self) -> usize {
        self.0.len()
    }

    pub fn support(&self) -> impl ExactSizeIterator<Item = usize> + '_ {
        self.0.iter().map(|&i| i as usize)
    }

    pub fn indices(&self) -> &[u32] {
        &self.0
    }

    pub fn contains(&self, var: usize) -> bool {
        self.0.binary_search(&(var as u32)).is_ok()
    }

    pub fn max_index(&self) -> Option<usize> {
        self.0.last().map(|&i| i as usize)
    }

    /// Value of the monomial at `a`: the AND of `a` over the support.
    #[inline]
    pub fn eval(&self, a: &Assignment) -> bool {
        self.0.iter().all(|&i| a.get(i as usize))
    }

    pub fn indicator(&self, arity: usize) -> Assignment {
        Assignment::indicator(arity, self.support())
    }

    pub fn without(&self, var: usize) -> Monomial {
        Monomial(self.0.iter().copied().filter(|&i| i as usize != var).collect())
    }
}

impl fmt::Debug for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("1");
        }
        for (k, i) in self.0.iter().enumerate() {
            if k > 0 {
                f.write_str("*")?;
            }
            write!(f, "x{i}")?;
        }
        Ok(())
    }
}

/// Image of one variable under [`SparsePoly::substitute`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Subst {
    Zero,
    One,
    Var(usize),
}

/// A multilinear polynomial over GF(2) on `arity` variables.
///
/// Serializes as `{"n": arity, "monomials": [[indices]...]}` with the
/// monomials in lexicographic order.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "PolyFile", try_from = "PolyFile")]
pub struct SparsePoly {
    arity: usize,
    monomials: BTreeSet<Monomial>,
}

#[derive(Clone, Serialize, Deserialize)]
struct PolyFile {
    n: usize,
    monomials: Vec<Vec<u32>>,
}

impl SparsePoly {
    pub fn zero(arity: usize) -> Self {
        SparsePoly {
            arity,
            monomials: BTreeSet::new(),
        }
    }

    pub fn one(arity: usize) -> Self {
        let mut p = SparsePoly::zero(arity);
        p.monomials.insert(Monomial::one());
        p
    }

    /// Sums the given monomials; a monomial listed twice cancels.
    pub fn from_monomials<I, M>(arity: usize, monomials: I) -> Result<Self, PolyError>
    where
        I: IntoIterator<Item = M>,
        M: IntoIterator<Item = usize>,
    {
        let mut p = SparsePoly::zero(arity);
        for m in monomials {
            p.toggle(Monomial::new(m))?;
        }
        Ok(p)
    }

    /// Adds a single monomial (XOR), cancelling it if already present.
    pub fn toggle(&mut self, m: Monomial) -> Result<(), PolyError> {
        if let Some(index) = m.max_index() {
            if index >= self.arity {
                return Err(PolyError::IndexOutOfRange {
                    index,
                    arity: self.arity,
                });
            }
        }
        if !self.monomials.remove(&m) {
            self.monomials.insert(m);
        }
        Ok(())
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    /// Number of monomials.
    pub fn sparsity(&self) -> usize {
        self.monomials.len()
    }

    /// Largest monomial size; 0 for the zero polynomial.
    pub fn degree(&self) -> usize {
        self.monomials.iter().map(Monomial::degree).max().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.monomials.is_empty()
    }

    pub fn monomials(&self) -> impl ExactSizeIterator<Item = &Monomial> {
        self.monomials.iter()
    }

    pub fn contains(&self, m: &Monomial) -> bool {
        self.monomials.contains(m)
    }

    fn check_arity(&self, found: usize) -> Result<(), PolyError> {
        if self.arity == found {
            Ok(())
        } else {
            Err(PolyError::ArityMismatch {
                expected: self.arity,
                found,
            })
        }
    }

    pub fn evaluate(&self, a: &Assignment) -> Result<bool, PolyError> {
        self.check_arity(a.len())?;
        Ok(self.eval(a))
    }

    /// [`evaluate`](Self::evaluate) without the arity check.
    #[inline]
    pub fn eval(&self, a: &Assignment) -> bool {
        self.monomials.iter().fold(false, |acc, m| acc ^ m.eval(a))
    }

    pub fn add(&self, other: &SparsePoly) -> Result<SparsePoly, PolyError> {
        self.check_arity(other.arity)?;
        let monomials = self
            .monomials
            .symmetric_difference(&other.monomials)
            .cloned()
            .collect();
        Ok(SparsePoly {
            arity: self.arity,
            monomials,
        })
    }

    /// Symbolic `x -> p(a * x)`: keeps the monomials inside `support(a)`.
    pub fn restrict_and(&self, a: &Assignment) -> Result<SparsePoly, PolyError> {
        self.check_arity(a.len())?;
        let monomials = self
            .monomials
            .iter()
            .filter(|m| m.eval(a))
            .cloned()
            .collect();
        Ok(SparsePoly {
            arity: self.arity,
            monomials,
        })
    }

    /// Union of all monomial supports.
    pub fn relevant_variables(&self) -> BTreeSet<usize> {
        self.monomials.iter().flat_map(|m| m.support()).collect()
    }

    /// Two assignments differing only at `j` on which the polynomial differs.
    ///
    /// Writes `p = x_j * f1 + f0`, takes a minimal-degree monomial `M` of
    /// `f1` and returns `(1_M, 1_M + e_j)`: then `f1(1_M) = 1`, so the two
    /// values differ.
    pub fn witness_pair(&self, j: usize) -> Result<(Assignment, Assignment), PolyError> {
        if j >= self.arity {
            return Err(PolyError::IndexOutOfRange {
                index: j,
                arity: self.arity,
            });
        }
        let minimal = self
            .monomials
            .iter()
            .filter(|m| m.contains(j))
            .min_by_key(|m| m.degree())
            .ok_or(PolyError::IrrelevantVariable(j))?;
        let a = minimal.without(j).indicator(self.arity);
        let mut b = a.clone();
        b.set(j, true);
        Ok((a, b))
    }

    /// Replaces every variable by a constant or a variable of a polynomial
    /// on `new_arity` variables, then re-normalizes.
    pub fn substitute(&self, map: &[Subst], new_arity: usize) -> Result<SparsePoly, PolyError> {
        self.check_arity(map.len())?;
        let mut out = SparsePoly::zero(new_arity);
        'mono: for m in &self.monomials {
            let mut image = Vec::with_capacity(m.degree());
            for i in m.support() {
                match map[i] {
                    Subst::Zero => continue 'mono,
                    Subst::One => {}
                    Subst::Var(k) => {
                        if k >= new_arity {
                            return Err(PolyError::IndexOutOfRange {
                                index: k,
                                arity: new_arity,
                            });
                        }
                        image.push(k);
                    }
                }
            }
            out.toggle(Monomial::new(image))?;
        }
        Ok(out)
    }

    /// Monomials of degree at most `max_degree`.
    pub fn truncate_degree(&self, max_degree: usize) -> SparsePoly {
        SparsePoly {
            arity: self.arity,
            monomials: self
                .monomials
                .iter()
                .filter(|m| m.degree() <= max_degree)
                .cloned()
                .collect(),
        }
    }

    // ---- exhaustive verification helpers -------------------------------

    /// Packed truth table (entry `x` at bit `x`, coordinate `i` of the
    /// assignment being bit `i` of `x`), via the GF(2) zeta transform.
    pub fn truth_table(&self, limit: usize) -> Result<TruthTable, PolyError> {
        if self.arity > limit {
            return Err(PolyError::ArityTooLarge {
                arity: self.arity,
                limit,
            });
        }
        let mut t = TruthTable::zeros(self.arity);
        for m in &self.monomials {
            let idx = m.support().fold(0usize, |acc, i| acc | (1 << i));
            t.flip(idx);
        }
        t.mobius_in_place();
        Ok(t)
    }

    /// Unique polynomial of a truth table (the transform is an involution).
    pub fn from_truth_table(table: &TruthTable) -> SparsePoly {
        let mut coeffs = table.clone();
        coeffs.mobius_in_place();
        let n = table.arity();
        let mut p = SparsePoly::zero(n);
        for idx in coeffs.ones() {
            let m = Monomial::new((0..n).filter(|i| idx >> i & 1 == 1));
            p.monomials.insert(m);
        }
        p
    }

    /// `hist[w]` = number of satisfying assignments of Hamming weight `w`.
    pub fn satisfying_weight_histogram(&self, limit: usize) -> Result<Vec<u64>, PolyError> {
        let t = self.truth_table(limit)?;
        let mut hist = vec![0u64; self.arity + 1];
        for idx in t.ones() {
            hist[idx.count_ones() as usize] += 1;
        }
        Ok(hist)
    }

    /// `Pr_{x ~ D_{n,q}}[p(x) = 1]`, by enumeration of all `2^n` points.
    pub fn prob_one_exact(&self, q: f64) -> Result<f64, PolyError> {
        self.prob_one_exact_with_limit(q, DEFAULT_EXHAUSTIVE_LIMIT)
    }

    pub fn prob_one_exact_with_limit(&self, q: f64, limit: usize) -> Result<f64, PolyError> {
        if !(0.0..=1.0).contains(&q) {
            return Err(PolyError::InvalidProbability(q));
        }
        let hist = self.satisfying_weight_histogram(limit)?;
        let n = self.arity as i32;
        Ok(hist
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(w, &c)| c as f64 * q.powi(w as i32) * (1.0 - q).powi(n - w as i32))
            .sum())
    }

    /// Exact `Pr_x[p(x) = 1]` under the uniform distribution.
    ///
    /// Uses `E[(-1)^p] = sum_{T} (-2)^{|T|} 2^{-|union T|}` over subsets `T`
    /// of monomials when the sparsity is at most
    /// [`INCLUSION_EXCLUSION_LIMIT`] and the arity at most 126, and falls
    /// back to enumeration under `limit` otherwise.
    pub fn satisfying_fraction(&self, limit: usize) -> Result<f64, PolyError> {
        if self.is_zero() {
            return Ok(0.0);
        }
        if self.sparsity() <= INCLUSION_EXCLUSION_LIMIT && self.arity <= 126 {
            let count = self.satisfying_count_inclusion_exclusion();
            return Ok(count as f64 / (self.arity as f64).exp2());
        }
        let t = self.truth_table(limit)?;
        Ok(t.weight() as f64 / (self.arity as f64).exp2())
    }

    /// Number of satisfying assignments out of `2^n`, `n <= 126`.
    fn satisfying_count_inclusion_exclusion(&self) -> u128 {
        // Compress relevant variables into a dense bitmask space.
        let relevant: Vec<usize> = self.relevant_variables().into_iter().collect();
        let pos: BTreeMap<usize, usize> = relevant.iter().enumerate().map(|(k, &v)| (v, k)).collect();
        let width = relevant.len().div_ceil(64).max(1);
        let masks: Vec<Vec<u64>> = self
            .monomials
            .iter()
            .map(|m| {
                let mut w = vec![0u64; width];
                for v in m.support() {
                    let k = pos[&v];
                    w[k >> 6] |= 1 << (k & 63);
                }
                w
            })
            .collect();
        let n = self.arity as u32;
        // sum over subsets of (-2)^{|T|} 2^{n - |union T|}, wrapping mod 2^128;
        // the true total lies in [-2^n, 2^n] so the wrapped value is exact.
        fn walk(masks: &[Vec<u64>], k: usize, union: &mut Vec<u64>, size: u32, n: u32, acc: &mut i128) {
            if k == masks.len() {
                let u: u32 = union.iter().map(|w| w.count_ones()).sum();
                let exp = n - u + size;
                if exp < 128 {
                    let term = 1i128.wrapping_shl(exp);
                    if size % 2 == 1 {
                        *acc = acc.wrapping_sub(term);
                    } else {
                        *acc = acc.wrapping_add(term);
                    }
                }
                return;
            }
            walk(masks, k + 1, union, size, n, acc);
            let saved = union.clone();
            for (u, m) in union.iter_mut().zip(&masks[k]) {
                *u |= m;
            }
            walk(masks, k + 1, union, size + 1, n, acc);
            *union = saved;
        }
        let mut acc = 0i128;
        let mut union = vec![0u64; width];
        walk(&masks, 0, &mut union, 0, n, &mut acc);
        // #ones = (2^n - E * 2^n) / 2
        let total = 1i128 << n;
        ((total - acc) / 2) as u128
    }

    /// Exact uniform distance `Pr_x[p(x) != q(x)]`.
    pub fn distance(&self, other: &SparsePoly, limit: usize) -> Result<f64, PolyError> {
        self.add(other)?.satisfying_fraction(limit)
    }

    // ---- interchange format ------------------------------------------

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("polynomial serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<SparsePoly, PolyError> {
        let file: PolyFile = serde_json::from_str(text)?;
        SparsePoly::try_from(file)
    }
}

impl From<SparsePoly> for PolyFile {
    fn from(p: SparsePoly) -> Self {
        PolyFile {
            n: p.arity,
            monomials: p.monomials.into_iter().map(|m| m.0).collect(),
        }
    }
}

impl TryFrom<PolyFile> for SparsePoly {
    type Error = PolyError;

    fn try_from(file: PolyFile) -> Result<Self, PolyError> {
        SparsePoly::from_monomials(
            file.n,
            file.monomials
                .into_iter()
                .map(|m| m.into_iter().map(|i| i as usize).collect::<Vec<_>>()),
        )
    }
}

impl fmt::Debug for SparsePoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SparsePoly(n={}, {})", self.arity, self)
    }
}

impl fmt::Display for SparsePoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.monomials.is_empty() {
            return f.write_str("0");
        }
        for (k, m) in self.monomials.iter().enumerate() {
            if k > 0 {
                f.write_str(" + ")?;
            }
            write!(f, "{m}")?;
        }
        Ok(())
    }
}

/// Number of monomials of degree at most `d` over `n` variables, saturating.
pub fn monomial_count(n: usize, d: usize) -> u128 {
    let mut total: u128 = 0;
    let mut binom: u128 = 1;
    for k in 0..=d.min(n) {
        if k > 0 {
            binom = binom.saturating_mul((n - k + 1) as u128) / k as u128;
        }
        total = total.saturating_add(binom);
    }
    total
}

/// Below this many candidate monomials the generator enumerates them all.
const ENUMERATION_THRESHOLD: u128 = 1 << 16;

/// `s` distinct monomials of degree at most `d`, uniformly without
/// replacement from all such monomials over `n` variables.
pub fn random_sparse_poly<R: Rng + ?Sized>(
    n: usize,
    d: usize,
    s: usize,
    rng: &mut R,
) -> Result<SparsePoly, PolyError> {
    let d = d.min(n);
    let available = monomial_count(n, d);
    if s as u128 > available {
        return Err(PolyError::Infeasible {
            requested: s as u128,
            available,
        });
    }
    let mut p = SparsePoly::zero(n);
    if available <= ENUMERATION_THRESHOLD {
        let mut all = Vec::with_capacity(available as usize);
        for k in 0..=d {
            push_combinations(n, k, &mut all);
        }
        for idx in rand::seq::index::sample(rng, all.len(), s) {
            p.monomials.insert(all[idx].clone());
        }
        return Ok(p);
    }
    // Pick the degree with probability C(n,k)/available, then a uniform
    // k-subset; reject repeats.
    let weights: Vec<f64> = (0..=d)
        .scan(1.0f64, |b, k| {
            if k > 0 {
                *b = *b * (n - k + 1) as f64 / k as f64;
            }
            Some(*b)
        })
        .collect();
    let degree = WeightedIndex::new(&weights).expect("binomial weights are positive");
    while p.sparsity() < s {
        let k = degree.sample(rng);
        let support = rand::seq::index::sample(rng, n, k);
        p.monomials.insert(Monomial::new(support));
    }
    Ok(p)
}

fn push_combinations(n: usize, k: usize, out: &mut Vec<Monomial>) {
    if k > n {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        out.push(Monomial::new(idx.iter().copied()));
        // advance to the next k-subset in lexicographic order
        let mut i = k;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if idx[i] != i + n - k {
                break;
            }
            if i == 0 {
                return;
            }
        }
        if idx[i] == i + n - k {
            return;
        }
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Packed truth table of a function on at most ~30 variables.
#[derive(Clone, PartialEq, Eq)]
pub struct TruthTable {
    arity: usize,
    bits: Vec<u64>,
}

impl TruthTable {
    pub fn zeros(arity: usize) -> Self {
        assert!(arity <= 32, "truth tables are limited to 32 variables");
        let len = 1usize << arity;
        TruthTable {
            arity,
            bits: vec![0; len.div_ceil(64)],
        }
    }

    pub fn random<R: Rng + ?Sized>(arity: usize, rng: &mut R) -> Self {
        let mut t = TruthTable::zeros(arity);
        for w in &mut t.bits {
            *w = rng.gen();
        }
        t.clear_padding();
        t
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn len(&self) -> usize {
        1 << self.arity
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn get(&self, idx: usize) -> bool {
        (self.bits[idx >> 6] >> (idx & 63)) & 1 == 1
    }

    pub fn set(&mut self, idx: usize, v: bool) {
        let m = 1u64 << (idx & 63);
        if v {
            self.bits[idx >> 6] |= m;
        } else {
            self.bits[idx >> 6] &= !m;
        }
    }

    pub fn flip(&mut self, idx: usize) {
        self.bits[idx >> 6] ^= 1 << (idx & 63);
    }

    /// Value at an assignment of matching arity.
    #[inline]
    pub fn eval(&self, a: &Assignment) -> bool {
        self.get(a.to_u64() as usize)
    }

    pub fn weight(&self) -> u64 {
        self.bits.iter().map(|w| w.count_ones() as u64).sum()
    }

    pub fn words(&self) -> &[u64] {
        &self.bits
    }

    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits.iter().enumerate().flat_map(|(wi, &w)| {
            let mut rest = w;
            std::iter::from_fn(move || {
                if rest == 0 {
                    None
                } else {
                    let tz = rest.trailing_zeros() as usize;
                    rest &= rest - 1;
                    Some(wi * 64 + tz)
                }
            })
        })
    }

    /// Hamming distance between two tables of equal arity.
    pub fn hamming(&self, other: &TruthTable) -> u64 {
        assert_eq!(self.arity, other.arity);
        self.bits
            .iter()
            .zip(&other.bits)
            .map(|(a, b)| (a ^ b).count_ones() as u64)
            .sum()
    }

    fn clear_padding(&mut self) {
        if self.arity < 6 {
            self.bits[0] &= (1u64 << (1 << self.arity)) - 1;
        }
    }

    /// In-place GF(2) zeta/Mobius transform: `t[x] <- XOR_{y subset of x} t[y]`.
    fn mobius_in_place(&mut self) {
        const MASKS: [u64; 6] = [
            0x5555_5555_5555_5555,
            0x3333_3333_3333_3333,
            0x0f0f_0f0f_0f0f_0f0f,
            0x00ff_00ff_00ff_00ff,
            0x0000_ffff_0000_ffff,
            0x0000_0000_ffff_ffff,
        ];
        for (i, &mask) in MASKS.iter().enumerate().take(self.arity.min(6)) {
            let shift = 1u32 << i;
            for w in &mut self.bits {
                *w ^= (*w & mask) << shift;
            }
        }
        for i in 6..self.arity {
            let stride = 1usize << (i - 6);
            for w in 0..self.bits.len() {
                if w & stride != 0 {
                    self.bits[w] ^= self.bits[w ^ stride];
                }
            }
        }
        self.clear_padding();
    }
}

impl fmt::Debug for TruthTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TruthTable(n={}, weight={})", self.arity, self.weight())
    }
}
