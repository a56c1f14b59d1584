use proptest::prelude::*;

use sparse_gf2::bounds::{gamma, gamma_prime};
use sparse_gf2::learner::cost::identify_bits;
use sparse_gf2::learner::{identify_literal, Ctx, Literal};
use sparse_gf2::oracle::{and_restrict, xor_local, xor_pair};
use sparse_gf2::poly::{Monomial, SparsePoly};
use sparse_gf2::{Assignment, Oracle, QueryOracle};

fn poly_from_masks(n: usize, masks: &[u32]) -> SparsePoly {
    let mask = if n == 32 { u32::MAX } else { (1u32 << n) - 1 };
    SparsePoly::from_monomials(n, masks.iter().map(|m| (0..n).filter(move |i| (m & mask) >> i & 1 == 1))).unwrap()
}

fn arb_poly(max_n: usize, max_terms: usize) -> impl Strategy<Value = SparsePoly> {
    (1..=max_n).prop_flat_map(move |n| {
        prop::collection::vec(any::<u32>(), 0..=max_terms).prop_map(move |ms| poly_from_masks(n, &ms))
    })
}

fn arb_pair(max_n: usize, max_terms: usize) -> impl Strategy<Value = (SparsePoly, SparsePoly, Assignment)> {
    (1..=max_n).prop_flat_map(move |n| {
        (
            prop::collection::vec(any::<u32>(), 0..=max_terms),
            prop::collection::vec(any::<u32>(), 0..=max_terms),
            prop::collection::vec(any::<bool>(), n),
        )
            .prop_map(move |(a, b, x)| (poly_from_masks(n, &a), poly_from_masks(n, &b), Assignment::from_bits(&x)))
    })
}

fn floor_log2(s: usize) -> usize {
    (usize::BITS - 1 - s.max(1).leading_zeros()) as usize
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn addition_is_pointwise_xor((p, q, x) in arb_pair(12, 10)) {
        let sum = p.add(&q).unwrap();
        prop_assert_eq!(sum.eval(&x), p.eval(&x) ^ q.eval(&x));
        prop_assert_eq!(&sum, &q.add(&p).unwrap());
        prop_assert!(p.add(&p).unwrap().is_zero());
        prop_assert_eq!(sum.add(&q).unwrap(), p);
    }

    #[test]
    fn addition_is_associative((p, q, _x) in arb_pair(10, 8), r in prop::collection::vec(any::<u32>(), 0..8)) {
        let r = poly_from_masks(p.arity(), &r);
        let left = p.add(&q).unwrap().add(&r).unwrap();
        let right = p.add(&q.add(&r).unwrap()).unwrap();
        prop_assert_eq!(left, right);
    }

    #[test]
    fn restriction_distributes_over_addition((p, q, a) in arb_pair(12, 10), x in any::<u32>()) {
        let n = p.arity();
        let lhs = p.add(&q).unwrap().restrict_and(&a).unwrap();
        let rhs = p.restrict_and(&a).unwrap().add(&q.restrict_and(&a).unwrap()).unwrap();
        prop_assert_eq!(&lhs, &rhs);
        let x = Assignment::from_u64(n, u64::from(x));
        prop_assert_eq!(p.restrict_and(&a).unwrap().eval(&x), p.eval(&a.and(&x)));
    }

    #[test]
    fn truth_table_round_trip(p in arb_poly(12, 12)) {
        let t = p.truth_table(12).unwrap();
        prop_assert_eq!(SparsePoly::from_truth_table(&t), p.clone());
        prop_assert_eq!(SparsePoly::from_json(&p.to_json()).unwrap(), p);
    }

    #[test]
    fn exact_fraction_agrees_with_enumeration(p in arb_poly(14, 10)) {
        let t = p.truth_table(14).unwrap();
        let counted = t.weight() as f64 / (p.arity() as f64).exp2();
        prop_assert!((p.satisfying_fraction(14).unwrap() - counted).abs() < 1e-12);
        prop_assert!((p.prob_one_exact(0.5).unwrap() - counted).abs() < 1e-12);
    }

    /// A nonzero polynomial of degree `d` is 1 on at least a `2^-d` fraction.
    #[test]
    fn nonzero_weight_lower_bound(p in arb_poly(12, 16)) {
        prop_assume!(!p.is_zero());
        let d = p.degree() as i32;
        prop_assert!(p.prob_one_exact(0.5).unwrap() >= 2f64.powi(-d) * (1.0 - 1e-12));
    }

    /// A nonzero `s`-sparse polynomial has a satisfying assignment of
    /// weight at least `n - floor(log2 s)`.
    #[test]
    fn heavy_satisfying_assignment(p in arb_poly(12, 16)) {
        prop_assume!(!p.is_zero());
        let n = p.arity();
        let hist = p.satisfying_weight_histogram(12).unwrap();
        let min_weight = n.saturating_sub(floor_log2(p.sparsity()));
        prop_assert!(hist[min_weight..].iter().any(|&c| c > 0));
    }

    /// Under the `q`-product distribution a nonzero polynomial of degree at
    /// most `d >= floor(log2 s)` is 1 with probability at least
    /// `q^(d - k) (1 - q)^k`, `k = floor(log2 s)`.
    #[test]
    fn product_distribution_lower_bound(p in arb_poly(12, 16), q in 0.5f64..0.95, extra in 0usize..3) {
        prop_assume!(!p.is_zero());
        let k = floor_log2(p.sparsity());
        let d = p.degree().max(k) + extra;
        let bound = q.powi((d - k) as i32) * (1.0 - q).powi(k as i32);
        prop_assert!(p.prob_one_exact(q).unwrap() >= bound * (1.0 - 1e-12));
    }

    #[test]
    fn gamma_is_non_increasing(b1 in 1.0f64..50.0, b2 in 1.0f64..50.0) {
        let (lo, hi) = if b1 <= b2 { (b1, b2) } else { (b2, b1) };
        prop_assert!(gamma(lo).0 >= gamma(hi).0 - 1e-6);
        prop_assert!(gamma(lo).0 <= 4.0);
    }

    #[test]
    fn gamma_prime_is_at_least_one(beta in 0.01f64..100.0) {
        prop_assert!(gamma_prime(beta) >= 1.0);
    }

    #[test]
    fn literals_are_identified(
        n in 2usize..40,
        picks in prop::collection::vec(any::<prop::sample::Index>(), 1..20),
        which in any::<prop::sample::Index>(),
        kind in 0u8..4,
        seed in any::<u64>(),
    ) {
        let mut cands: Vec<usize> = picks.iter().map(|i| i.index(n)).collect();
        cands.sort_unstable();
        cands.dedup();
        let var = cands[which.index(cands.len())];
        let (p, want) = match kind {
            0 => (SparsePoly::zero(n), Literal::Constant0),
            1 => (SparsePoly::one(n), Literal::Constant1),
            2 => (SparsePoly::from_monomials(n, [[var]]).unwrap(), Literal::Positive(var)),
            _ => (SparsePoly::from_monomials(n, [vec![var], vec![]]).unwrap(), Literal::Negative(var)),
        };
        let o = QueryOracle::from_poly(p);
        let mut ctx = Ctx::new(seed);
        prop_assert_eq!(identify_literal(&o, &cands, &mut ctx).unwrap(), want);
        prop_assert_eq!(o.queries(), identify_bits(cands.len()) as u64 + 2);
    }
}

#[derive(Clone, Debug)]
enum Op {
    And(Vec<bool>),
    Xor(Vec<u32>),
    PairWithSelf,
}

fn arb_ops(n: usize) -> impl Strategy<Value = Vec<Op>> {
    let op = prop_oneof![
        prop::collection::vec(any::<bool>(), n).prop_map(Op::And),
        prop::collection::vec(any::<u32>(), 0..4).prop_map(Op::Xor),
        Just(Op::PairWithSelf),
    ];
    prop::collection::vec(op, 0..5)
}

/// Queries `points` through the nested views described by `ops` and
/// checks values against the symbolic composition. Returns the number of
/// root queries one outer query costs.
fn nest(o: &dyn Oracle, expect: &SparsePoly, ops: &[Op], points: &[Assignment]) -> Result<u64, TestCaseError> {
    let n = expect.arity();
    match ops.split_first() {
        None => {
            for x in points {
                prop_assert_eq!(o.query(x).unwrap(), expect.eval(x));
            }
            Ok(1)
        }
        Some((Op::And(bits), rest)) => {
            let a = Assignment::from_bits(bits);
            let view = and_restrict(o, a.clone()).unwrap();
            nest(&view, &expect.restrict_and(&a).unwrap(), rest, points)
        }
        Some((Op::Xor(masks), rest)) => {
            let h = poly_from_masks(n, masks);
            let view = xor_local(o, h.clone()).unwrap();
            nest(&view, &expect.add(&h).unwrap(), rest, points)
        }
        Some((Op::PairWithSelf, rest)) => {
            let view = xor_pair(o, o).unwrap();
            Ok(2 * nest(&view, &SparsePoly::zero(n), rest, points)?)
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    /// Every view charges the root exactly once per inner evaluation.
    #[test]
    fn composed_views_charge_the_root(
        (p, ops, raw) in (1usize..=12).prop_flat_map(|n| (
            prop::collection::vec(any::<u32>(), 0..6).prop_map(move |m| poly_from_masks(n, &m)),
            arb_ops(n),
            prop::collection::vec(any::<u32>(), 1..10),
        )),
    ) {
        let n = p.arity();
        let root = QueryOracle::from_poly(p.clone());
        let points: Vec<Assignment> = raw.iter().map(|&x| Assignment::from_u64(n, u64::from(x))).collect();
        let per_query = nest(&root, &p, &ops, &points)?;
        prop_assert_eq!(root.queries(), per_query * points.len() as u64);
    }
}

#[test]
fn monomial_display() {
    assert_eq!(Monomial::new([3, 1]).to_string(), "x1*x3");
    assert_eq!(Monomial::one().to_string(), "1");
}
