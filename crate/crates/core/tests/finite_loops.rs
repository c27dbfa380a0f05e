use std::sync::Arc;

use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use zorn_core::floop::{
    closure, coset, derived_subloop, gamma_ns_image_in, index_or_cosets, lagrange_check, normality_check,
    power_closure, LagrangeOutcome, Side,
};
use zorn_core::quotient::{crt_iso_check, enumerate_sll, index_gamma, kernel_subloop};
use zorn_core::zorn::zmul;
use zorn_core::{Error, FiniteLoop, GeneratorTag, Modulus, SubloopSet};

fn loop_mod(m: u64) -> Arc<FiniteLoop> {
    Arc::new(enumerate_sll(m).unwrap())
}

/// `H·(h·x) = H·x` for all `h, x`, straight from the definition.
fn lagrange_by_definition(ambient: &SubloopSet, h: &SubloopSet) -> bool {
    let l = ambient.parent();
    ambient.members().iter().all(|&x| {
        let hx = coset(h, x, Side::Right);
        h.members().iter().all(|&e| coset(h, l.mul(e, x), Side::Right) == hx)
    })
}

#[test]
fn index_formula_is_multiplicative() {
    for a in 1..=40u64 {
        for b in 1..=40u64 {
            if num_integer::Integer::gcd(&a, &b) == 1 {
                assert_eq!(index_gamma(a * b).unwrap(), index_gamma(a).unwrap() * index_gamma(b).unwrap());
            }
        }
    }
}

#[test]
fn index_matches_prime_power_form() {
    // p^{7k}(1 − p^{−4}) = p^{7k−4}(p^4 − 1)
    for (p, k) in [(2u64, 1u32), (2, 3), (3, 2), (5, 1), (7, 2)] {
        let p_big = BigUint::from(p);
        let expected = p_big.pow(7 * k - 4) * (p_big.pow(4) - 1u8);
        assert_eq!(index_gamma(p.pow(k)).unwrap(), expected);
    }
}

#[test]
fn random_products_stay_in_the_element_set() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for m in [2u64, 3, 4, 5, 6] {
        let l = loop_mod(m);
        let n = l.order() as u32;
        for _ in 0..20_000 {
            let (i, j) = (rng.gen_range(0..n), rng.gen_range(0..n));
            let product = zmul(&l.element(i), &l.element(j)).unwrap();
            assert_eq!(l.index_of(&product), Some(l.mul(i, j)));
        }
    }
}

#[test]
fn kernels_are_closed_normal_and_lagrange() {
    for m in 1..=4u64 {
        let l = loop_mod(m);
        let full = SubloopSet::full(&l);
        for d in (1..=m).filter(|d| m % d == 0) {
            let k = kernel_subloop(&l, d).unwrap();
            // the d = 1 kernel is the whole loop
            if d > 1 {
                assert!(k.verify_closed(), "m = {m}, d = {d}");
            }
            assert!(normality_check(&full, &k).unwrap().is_ok(), "m = {m}, d = {d}");
            assert!(lagrange_check(&full, &k).unwrap().is_ok());
            assert_eq!(index_or_cosets(&full, &k).unwrap() as usize * k.len(), l.order());
        }
    }
    let l6 = loop_mod(6);
    assert_eq!(kernel_subloop(&l6, 1).unwrap().len(), 259_200);
    assert_eq!(kernel_subloop(&l6, 2).unwrap().len(), 2160);
    assert_eq!(kernel_subloop(&l6, 3).unwrap().len(), 120);
}

#[test]
fn crt_isomorphisms() {
    assert!(crt_iso_check(2, 3).unwrap());
    assert!(crt_iso_check(3, 2).unwrap());
    assert!(crt_iso_check(1, 5).unwrap());
    assert!(matches!(crt_iso_check(2, 4), Err(Error::NotCoprime(_, _))));
}

#[test]
fn gamma1_image_mod_2_lagrange_outcome() {
    let l = loop_mod(2);
    let full = SubloopSet::full(&l);
    let gens: Vec<u32> = [GeneratorTag::sl2_i64(1, [[1, 1], [0, 1]]), GeneratorTag::sl2_i64(1, [[1, 0], [1, 1]])]
        .iter()
        .map(|t| l.index_of(&t.matrix_in(Modulus(2)).unwrap()).unwrap())
        .collect();
    let h = closure(&l, &gens);
    assert_eq!(h.len(), 6);
    let outcome = lagrange_check(&full, &h).unwrap();
    assert_eq!(outcome.is_ok(), lagrange_by_definition(&full, &h));
    if let LagrangeOutcome::Fails(w) = outcome {
        assert_ne!(w.coset_hx, w.coset_x);
        assert_eq!(w.coset_x, coset(&h, w.x, Side::Right));
        assert_eq!(w.coset_hx, coset(&h, l.mul(w.h, w.x), Side::Right));
    }
}

#[test]
fn lagrange_check_matches_definition() {
    let l = loop_mod(2);
    let full = SubloopSet::full(&l);
    let mut seen: Vec<Vec<u32>> = Vec::new();
    for x in 0..120u32 {
        for y in [0u32, 7, 33, 101] {
            let h = closure(&l, &[x, y]);
            if seen.iter().any(|s| s == h.members()) {
                continue;
            }
            seen.push(h.members().to_vec());
            let ok = lagrange_check(&full, &h).unwrap().is_ok();
            assert_eq!(ok, lagrange_by_definition(&full, &h));
            if ok {
                // cosets partition L
                let count = index_or_cosets(&full, &h).unwrap() as usize;
                assert_eq!(count * h.len(), 120);
            } else {
                assert!(matches!(index_or_cosets(&full, &h), Err(Error::LagrangeFails(_))));
            }
            if normality_check(&full, &h).unwrap().is_ok() {
                assert!(ok, "normal subloops have the Lagrange property");
            }
        }
    }
}

#[test]
fn coset_sizes_equal_subloop_order() {
    let l = loop_mod(3);
    let h = closure(&l, &[5, 900]);
    for x in (0..l.order() as u32).step_by(37) {
        assert_eq!(coset(&h, x, Side::Right).len(), h.len());
        assert_eq!(coset(&h, x, Side::Left).len(), h.len());
    }
}

#[test]
fn derived_subloop_invariants() {
    let l = loop_mod(2);
    let full = SubloopSet::full(&l);
    for seed in [[3u32, 50], [10, 11], [0, 77]] {
        let s = closure(&l, &seed);
        let d = derived_subloop(&s);
        assert!(d.is_certified());
        assert!(d.is_subset_of(&s).unwrap());
        assert_eq!(derived_subloop(&s), d);
        assert!(d.verify_closed());
    }
    let k4 = kernel_subloop(&loop_mod(4), 2).unwrap();
    assert_eq!(derived_subloop(&k4).members(), &[0]);
    assert!(power_closure(&full, 1) == full);
}

#[test]
fn gamma_ns_contains_sampled_powers() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let l = loop_mod(4);
    for (n, s) in [(2u64, 3u64), (2, 2), (4, 5)] {
        let g = gamma_ns_image_in(&l, n, s).unwrap();
        let k = kernel_subloop(&l, n).unwrap();
        assert!(g.is_subset_of(&k).unwrap());
        for _ in 0..1000 {
            let a = k.members()[rng.gen_range(0..k.len())];
            assert!(g.contains(l.pow(a, s)));
        }
    }
}

#[test]
fn parent_mismatch_is_reported() {
    let a = loop_mod(2);
    let b = loop_mod(2);
    let ha = SubloopSet::full(&a);
    let hb = SubloopSet::full(&b);
    assert!(matches!(ha.is_subset_of(&hb), Err(Error::ParentMismatch)));
}
