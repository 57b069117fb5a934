use std::collections::BTreeSet;

use qrep_core::burau::{BraidWord, BurauParams};
use qrep_core::cyclo::{residue_contexts, ResidueContext, ResidueRing, RingElem};
use qrep_core::linalg::RepMatrix;
use qrep_core::quotients::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn ctx(n: u32, q: u64) -> ResidueContext {
    residue_contexts(n, q).unwrap().remove(0)
}

fn b3() -> Vec<RepMatrix> {
    BurauParams::standard(7, 3).unwrap().generators()
}

#[test]
fn identity_reduces_to_identity() {
    for (n, q, dim) in [(7u32, 2u64, 3usize), (7, 13, 2), (5, 11, 3), (14, 3, 1)] {
        let c = ctx(n, q);
        for k in [1, 2] {
            let rgs = reduce_generator_set(&[RepMatrix::identity(dim, n)], &c, k, false).unwrap();
            assert_eq!(rgs.generators[0], rgs.identity());
            assert_eq!(group_closure(&rgs, 10).unwrap().report.order, 1);
        }
    }
}

#[test]
fn burau_b3_mod_13_lives_in_quadratic_field() {
    let c = ctx(7, 13);
    assert_eq!(c.degree, 2);
    let rgs = reduce_generator_set(&b3(), &c, 1, false).unwrap();
    assert_eq!(rgs.dim, 2);
    assert_eq!(rgs.ring.size, 169);
    assert_eq!(rgs.generators.len(), 4);
}

#[test]
fn reduction_is_a_homomorphism() {
    let gens = b3();
    let mut rng = ChaCha8Rng::seed_from_u64(50);
    for q in [2u64, 13, 29] {
        let c = ctx(7, q);
        let rgs = reduce_generator_set(&gens, &c, 1, false).unwrap();
        let ring = &rgs.ring;
        for _ in 0..50 {
            let mut word = || {
                let len = rng.gen_range(1..6);
                BraidWord(
                    (0..len)
                        .map(|_| {
                            let g: i32 = rng.gen_range(1..=2);
                            if rng.gen() { g } else { -g }
                        })
                        .collect(),
                )
            };
            let (u, v) = (word(), word());
            let (mu, mv) = (u.evaluate(&gens).unwrap(), v.evaluate(&gens).unwrap());
            let lhs = reduce_matrix(ring, &mu.mul(&mv)).unwrap();
            let rhs = rgs.mat_mul(&reduce_matrix(ring, &mu).unwrap(), &reduce_matrix(ring, &mv).unwrap());
            assert_eq!(lhs, rhs);
        }
    }
}

#[test]
fn single_generator_of_order_seven() {
    // ζ_7 itself, as a 1×1 matrix over F_8
    let c = ctx(7, 2);
    let z = RepMatrix::diagonal(&[qrep_core::cyclo::CyclotomicNumber::zeta_pow(7, 1)]);
    let rgs = reduce_generator_set(&[z], &c, 1, false).unwrap();
    assert_eq!(group_closure(&rgs, 100).unwrap().report.order, 7);
}

fn count_matrices(ring: &ResidueRing, dim: usize, keep: impl Fn(&[RingElem]) -> bool) -> u64 {
    let total = ring.size.pow((dim * dim) as u32);
    let mut m = vec![0; dim * dim];
    (0..total)
        .filter(|&code| {
            let mut c = code;
            for x in m.iter_mut() {
                *x = c % ring.size;
                c /= ring.size;
            }
            keep(&m)
        })
        .count() as u64
}

fn det2(r: &ResidueRing, m: &[RingElem]) -> RingElem {
    r.sub(r.mul(m[0], m[3]), r.mul(m[1], m[2]))
}

#[test]
fn target_orders_match_brute_force() {
    // SL(2, 3) and GL(2, 2)
    let f3 = ctx(1, 3).ring(1).unwrap();
    let sl = count_matrices(&f3, 2, |m| det2(&f3, m) == 1);
    assert_eq!(sl as u128, special_group_order(2, family_of(&ctx(1, 3))).unwrap());
    assert_eq!(sl, 24);
    let f2 = ctx(1, 2).ring(1).unwrap();
    assert_eq!(count_matrices(&f2, 2, |m| det2(&f2, m) != 0), 6);
    assert_eq!(family_order(2, GroupFamily::Linear { field_size: 2 }, false, 1), Some(6));

    // SU(3, 2): 3×3 matrices over F_4 with M^† M = I and det 1; conjugation is x ↦ x²
    let c = ctx(3, 2);
    assert!(c.conjugation_descends);
    let f4 = c.ring(1).unwrap();
    let r = &*f4;
    let su = count_matrices(r, 3, |m| {
        for i in 0..3 {
            for j in 0..3 {
                let mut s = 0;
                for t in 0..3 {
                    s = r.add(s, r.mul(r.frobenius(m[t * 3 + i], 1), m[t * 3 + j]));
                }
                if s != (i == j) as u64 {
                    return false;
                }
            }
        }
        let det = [(0, 4, 8), (1, 5, 6), (2, 3, 7), (2, 4, 6), (0, 5, 7), (1, 3, 8)]
            .iter()
            .map(|&(a, b, d)| r.mul(r.mul(m[a], m[b]), m[d]))
            .fold(0, |acc, x| r.add(acc, x));
        det == 1
    });
    assert_eq!(su, 216);
    assert_eq!(family_of(&c), GroupFamily::Unitary { base_field_size: 2 });
    assert_eq!(special_group_order(3, family_of(&c)), Some(216));
}

#[test]
fn b3_mod_13_is_full() {
    let rgs = reduce_generator_set(&b3(), &ctx(7, 13), 1, true).unwrap();
    let c = group_closure(&rgs, 1_000_000).unwrap();
    assert_eq!(c.report.target_order, Some(2184));
    assert_eq!(c.report.order, 2184);
    assert_eq!(c.report.verdict, Verdict::Full);
}

#[test]
fn sweep_orders_divide_targets() {
    let sweep = usable_contexts(&b3(), 50, 200_000, true);
    let primes: Vec<u64> = sweep.iter().map(|(c, _)| c.prime).collect();
    assert_eq!(primes, vec![2, 3, 13, 29, 41, 43]);
    for (c, t) in sweep {
        let rgs = reduce_generator_set(&b3(), &c, 1, true).unwrap();
        let r = group_closure(&rgs, 1_000_000).unwrap().report;
        assert_ne!(r.verdict, Verdict::Unknown);
        assert_eq!(t % r.order as u128, 0, "q={}", c.prime);
    }
}

fn closure_set(gens: &[RepMatrix], c: &ResidueContext, projective: bool) -> BTreeSet<u64> {
    let cl = group_closure(&reduce_generator_set(gens, c, 1, projective).unwrap(), 1 << 22).unwrap();
    assert!(!cl.report.truncated);
    cl.elements.into_iter().collect()
}

#[test]
fn closure_ignores_generator_order() {
    let c = ctx(7, 2);
    let pb = BurauParams::standard(7, 4).unwrap().pure_generators();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..3 {
        // two generators give a proper subgroup small enough to compare as sets
        let mut pick: Vec<RepMatrix> = pb.choose_multiple(&mut rng, 2).cloned().collect();
        for projective in [false, true] {
            let a = closure_set(&pick, &c, projective);
            pick.reverse();
            assert!(a == closure_set(&pick, &c, projective));
        }
    }
    let mut gens = b3();
    for q in [13u64, 29] {
        let c = ctx(7, q);
        let a = closure_set(&gens, &c, true);
        gens.reverse();
        assert!(a == closure_set(&gens, &c, true));
    }
}

#[test]
fn projective_times_scalars_is_linear() {
    for q in [2u64, 13, 29] {
        let c = ctx(7, q);
        let lin = reduce_generator_set(&b3(), &c, 1, false).unwrap();
        let proj = reduce_generator_set(&b3(), &c, 1, true).unwrap();
        let cl = group_closure(&lin, 1 << 22).unwrap();
        let cp = group_closure(&proj, 1 << 22).unwrap();
        let scalars = cl
            .elements
            .iter()
            .filter(|&&k| {
                let m = lin.unpack(k);
                m[1] == 0 && m[2] == 0 && m[0] == m[3]
            })
            .count() as u64;
        assert_eq!(cl.report.order, cp.report.order * scalars, "q={q}");
        assert_eq!(cl.report.verdict, Verdict::Full, "q={q}");
    }
}

#[test]
fn lift_contract() {
    let c = ctx(7, 13);
    let id = [RepMatrix::identity(2, 7)];
    let lo = reduce_generator_set(&id, &c, 1, true).unwrap();
    let hi = reduce_generator_set(&id, &c, 2, true).unwrap();
    let (cl, ch) = (group_closure(&lo, 10).unwrap(), group_closure(&hi, 10).unwrap());
    let r = lift_check(&lo, &cl.report, &hi, &ch.report).unwrap();
    assert_eq!(r.ratio, Some(1));
    assert_eq!(r.predicted_kernel, Some(2197));

    let lo = reduce_generator_set(&b3(), &c, 1, true).unwrap();
    let hi = reduce_generator_set(&b3(), &c, 2, true).unwrap();
    let cl = group_closure(&lo, 1 << 20).unwrap();
    assert_eq!(cl.report.verdict, Verdict::Full);
    let ch = group_closure(&hi, 5000).unwrap();
    assert!(ch.report.truncated);
    assert_eq!(lift_check(&lo, &cl.report, &hi, &ch.report).unwrap().verdict, Verdict::Unknown);
}

#[test]
fn sweep_gaps_are_positive() {
    for q in [2u64, 13, 29] {
        let rgs = reduce_generator_set(&b3(), &ctx(7, q), 1, true).unwrap();
        let c = group_closure(&rgs, 1 << 20).unwrap();
        let g = cayley_gap(&rgs, &c, 100_000, 11).unwrap();
        assert!(g.gap > 1e-3 && g.lambda2 < 1.0, "q={q} {g:?}");
        assert_eq!(
            cayley_gap(&rgs, &c, 10, 11).unwrap_err(),
            QuotientError::SpectralBudgetExceeded { order: c.report.order, budget: 10 }
        );
    }
}

#[test]
fn cyclic_group_gap_matches_circulant() {
    // a primitive root mod 101 generates a cyclic group of order 100
    let c = ctx(1, 101);
    let ring = c.ring(1).unwrap();
    let rgs = ReducedGenSet::from_ring_matrices(c, ring, 1, vec![vec![2]], false).unwrap();
    let cl = group_closure(&rgs, 1000).unwrap();
    assert_eq!(cl.report.order, 100);
    let g = cayley_gap(&rgs, &cl, 1000, 5).unwrap();
    assert!((g.lambda2 - (2.0 * std::f64::consts::PI / 100.0).cos()).abs() < 1e-9);
}
