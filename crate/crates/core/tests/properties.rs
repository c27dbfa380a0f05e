use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use zorn_core::expr::ExprTree;
use zorn_core::factor::{
    decompose_congruence, decomposition_leaf_ok, euclid_steps, factor_unital, is_axis_elementary_of_level, sl2_factor,
    split_contract_ok, split_gamma1_delta,
};
use zorn_core::ring::{crt, ext_gcd, factor_int, mod_inv, unimodular_shift};
use zorn_core::sample;
use zorn_core::wohl::wohlfahrt_split;
use zorn_core::zorn::{associator, moufang_report};
use zorn_core::{Modulus, ZornMatrix};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn big() -> impl Strategy<Value = BigInt> {
    prop_oneof![
        (-1000i64..1000).prop_map(BigInt::from),
        any::<i128>().prop_map(BigInt::from),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn ext_gcd_is_bezout(a in big(), b in big()) {
        let (g, x, y) = ext_gcd(&a, &b);
        prop_assert!(!g.is_negative());
        prop_assert_eq!(&a * &x + &b * &y, g.clone());
        prop_assert_eq!(g, a.gcd(&b));
    }

    #[test]
    fn mod_inv_inverts(a in -10_000i64..10_000, m in 2i64..10_000) {
        let (a, m) = (BigInt::from(a), BigInt::from(m));
        match mod_inv(&a, &m) {
            Ok(inv) => {
                prop_assert!(inv >= BigInt::zero() && inv < m);
                prop_assert!((&a * &inv - 1u8).mod_floor(&m).is_zero());
            }
            Err(_) => prop_assert!(!a.gcd(&m).is_one()),
        }
    }

    #[test]
    fn crt_reduces_under_every_modulus(r in proptest::collection::vec(0u64..1_000_000, 1..4), seed in any::<u64>()) {
        let mut moduli: Vec<u64> = Vec::new();
        let mut candidate = 2 + seed % 997;
        while moduli.len() < r.len() {
            if moduli.iter().all(|m| m.gcd(&candidate) == 1) && candidate <= 1_000_000 {
                moduli.push(candidate);
            }
            candidate = candidate * 7 + 3;
            if candidate > 1_000_000 {
                candidate = 2 + candidate % 991;
            }
        }
        let pairs: Vec<(BigInt, BigInt)> =
            r.iter().zip(&moduli).map(|(&r, &m)| (BigInt::from(r), BigInt::from(m))).collect();
        let (x, total) = crt(&pairs).unwrap();
        prop_assert!(x >= BigInt::zero() && x < total);
        for (r, m) in &pairs {
            prop_assert_eq!(x.mod_floor(m), r.mod_floor(m));
        }
    }

    #[test]
    fn unimodular_shift_completes(a in 1i64..1_000_000, u in -1000i64..1000, v2 in -1000i64..1000, v3 in -1000i64..1000) {
        let (a, u, v2, v3) = (BigInt::from(a), BigInt::from(u), BigInt::from(v2), BigInt::from(v3));
        let unimodular = u.gcd(&v2).gcd(&v3).gcd(&a).is_one();
        match unimodular_shift(&a, &u, &v2, &v3) {
            Ok((t, s)) => {
                prop_assert!(unimodular);
                prop_assert!((&u + &v2 * &t + &v3 * &s).gcd(&a).is_one());
            }
            Err(_) => prop_assert!(!unimodular),
        }
    }

    #[test]
    fn determinant_is_multiplicative(seed in any::<u64>(), m in prop_oneof![Just(0u64), 2u64..13]) {
        let mut rng = rng(seed);
        let a = sample::invertible_walk(&mut rng, Modulus(m), 10);
        let b = sample::invertible_walk(&mut rng, Modulus(m), 10);
        prop_assert_eq!(a.mul(&b).unwrap().det(), Modulus(m).reduce(&(a.det() * b.det())));
    }

    #[test]
    fn inverse_is_two_sided(seed in any::<u64>(), m in prop_oneof![Just(0u64), 2u64..13]) {
        let a = sample::invertible_walk(&mut rng(seed), Modulus(m), 10);
        let inv = a.inv().unwrap();
        prop_assert!(a.mul(&inv).unwrap().is_identity());
        prop_assert!(inv.mul(&a).unwrap().is_identity());
    }

    #[test]
    fn moufang_and_diassociative(seed in any::<u64>(), m in prop_oneof![Just(0u64), 2u64..13]) {
        let mut rng = rng(seed);
        let [a, b, c] = std::array::from_fn(|_| sample::invertible_walk(&mut rng, Modulus(m), 8));
        prop_assert!(moufang_report(&a, &b, &c).unwrap().all());
        prop_assert!(associator(&a, &a, &b).unwrap().is_identity());
        prop_assert!(associator(&b, &a, &a).unwrap().is_identity());
    }

    #[test]
    fn json_round_trips(seed in any::<u64>(), m in prop_oneof![Just(0u64), 2u64..13]) {
        let a = sample::invertible_walk(&mut rng(seed), Modulus(m), 10);
        prop_assert_eq!(ZornMatrix::from_json(&a.to_json()).unwrap(), a.clone());
        let s = a.to_canonical_string();
        prop_assert_eq!(s.parse::<ZornMatrix>().unwrap(), a);
    }

    #[test]
    fn factor_unital_round_trips(seed in any::<u64>(), q in 1u64..6) {
        let a = sample::unital(&mut rng(seed), q);
        let tree = factor_unital(&a, q).unwrap();
        prop_assert_eq!(tree.eval().unwrap(), a);
        prop_assert!(tree.leaves().iter().all(|t| is_axis_elementary_of_level(t, q)));
        prop_assert!(tree.certify_level(q));
    }

    #[test]
    fn decompositions_round_trip(seed in any::<u64>(), n in 1u64..6) {
        let a = sample::gamma_element(&mut rng(seed), n, 12);
        let tree = decompose_congruence(&a, n).unwrap();
        prop_assert_eq!(tree.eval().unwrap(), a.clone());
        prop_assert!(tree.leaves().iter().all(|t| decomposition_leaf_ok(t, n)));
        let json = tree.to_json();
        prop_assert_eq!(ExprTree::from_json(&json).unwrap(), tree);
        let split = split_gamma1_delta(&a, n).unwrap();
        prop_assert_eq!(split.eval().unwrap(), a);
        prop_assert!(split_contract_ok(&split, n));
    }

    #[test]
    fn wohlfahrt_splits(seed in any::<u64>(), n1 in 1u64..6, n2 in 1u64..8) {
        let a = sample::gamma_element(&mut rng(seed), n1, 12);
        let split = wohlfahrt_split(&a, n1, n2).unwrap();
        prop_assert_eq!(split.b_tree.eval().unwrap().mul(&split.c).unwrap(), a);
        prop_assert!(split.b_tree.certify_level(n1));
        prop_assert!(split.c.in_gamma(n2));
    }

    #[test]
    fn reduction_is_a_homomorphism(seed in any::<u64>(), m in 2u64..13) {
        let mut rng = rng(seed);
        let a = sample::invertible_walk(&mut rng, Modulus::INTEGERS, 8);
        let b = sample::invertible_walk(&mut rng, Modulus::INTEGERS, 8);
        let lhs = a.mul(&b).unwrap().reduce_mod(m).unwrap();
        let rhs = a.reduce_mod(m).unwrap().mul(&b.reduce_mod(m).unwrap()).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn sl2_words_multiply_back(p in -200i64..200, q in -200i64..200, seed in any::<u64>()) {
        // complete (p, q) to a determinant-one matrix when coprime
        let (g, x, y) = ext_gcd(&BigInt::from(p), &BigInt::from(q));
        prop_assume!(g.is_one());
        let shift = BigInt::from(seed % 7) - 3;
        let r = -&y + &shift * p;
        let s = &x + &shift * q;
        let m = [[BigInt::from(p), BigInt::from(q)], [r, s]];
        let word = sl2_factor(&m).unwrap();
        prop_assert_eq!(word.eval(), m.clone());
        prop_assert!(word.len() <= 2 * euclid_steps(&m) + 3);
    }
}

#[test]
fn factor_int_recomposes_up_to_1e5() {
    for n in 1..=100_000u64 {
        let f = factor_int(n);
        assert_eq!(f.product(), num_bigint::BigUint::from(n), "n = {n}");
        assert!(f.factors.windows(2).all(|w| w[0].0 < w[1].0));
    }
}

#[test]
fn gamma_membership_is_a_subloop() {
    let mut r = rng(99);
    for n in 1..=5 {
        for _ in 0..100 {
            let a = sample::gamma_element(&mut r, n, 8);
            let b = sample::gamma_element(&mut r, n, 8);
            assert!(a.inv().unwrap().in_gamma(n));
            assert!(a.mul(&b).unwrap().in_gamma(n));
        }
    }
}
