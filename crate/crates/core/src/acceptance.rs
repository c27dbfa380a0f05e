//! The acceptance suite: one self-contained check per criterion.

use std::sync::Arc;
use std::time::{Duration, Instant};

use num_bigint::{BigInt, BigUint};
use num_traits::One;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::factor::{decompose_congruence, decomposition_leaf_ok, factor_unital, is_axis_elementary_of_level, split_gamma1_delta};
use crate::floop::{
    closure, derived_subloop, elementary_image, gamma_ns_image_in, index_or_cosets, lagrange_check, normal_closure,
    normality_check, SubloopSet,
};
use crate::quotient::{crt_iso_check, enumerate_sll, index_gamma, kernel_subloop};
use crate::ring::Modulus;
use crate::sample;
use crate::wohl::{delta_level_join, join_certificate_holds, wohlfahrt_split};
use crate::zorn::{associator, commutator, generator, moufang_report, GeneratorTag, Vec3, ZornMatrix};

/// Titles of the twelve criteria, in order.
pub const CRITERIA: [&str; 12] = [
    "worked product example",
    "loop cardinalities m = 1..9",
    "CRT decomposition (2, 3)",
    "Moufang and alternative identities",
    "determinant multiplicativity",
    "unital factorization round-trip",
    "congruence decomposition round-trip",
    "Wohlfahrt splitting",
    "kernel subloop and index",
    "Lagrange property of intersections",
    "diassociativity",
    "Gamma(n, s) containments",
];

#[derive(Debug, Clone)]
pub struct CriterionReport {
    pub id: usize,
    pub title: &'static str,
    pub passed: bool,
    pub detail: String,
    pub elapsed: Duration,
}

impl std::fmt::Display for CriterionReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{} criterion {:>2} {} ({:.2}s): {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.title,
            self.elapsed.as_secs_f64(),
            self.detail
        )
    }
}

/// Runs one criterion (1-based).
pub fn run_criterion(id: usize, slow: bool) -> CriterionReport {
    assert!((1..=12).contains(&id), "criteria are numbered 1..=12");
    let start = Instant::now();
    let outcome = match id {
        1 => worked_product(),
        2 => cardinalities(),
        3 => crt_decomposition(),
        4 => moufang_identities(),
        5 => determinant_multiplicativity(),
        6 => unital_round_trip(),
        7 => congruence_round_trip(),
        8 => wohlfahrt(),
        9 => kernel_index(),
        10 => lagrange_intersections(),
        11 => diassociativity(),
        _ => gamma_ns_containments(slow),
    };
    let (passed, detail) = match outcome {
        Ok(detail) => (true, detail),
        Err(e) => (false, e.to_string()),
    };
    CriterionReport { id, title: CRITERIA[id - 1], passed, detail, elapsed: start.elapsed() }
}

pub fn run_all(slow: bool) -> Vec<CriterionReport> {
    (1..=12).map(|id| run_criterion(id, slow)).collect()
}

fn ensure(cond: bool, what: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::Internal(what()))
    }
}

fn rng(stream: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(0x7a6f_726e_0000 + stream)
}

const RING_MODULI: [u64; 12] = [0, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12];

fn z(a: i64, x: [i64; 3], y: [i64; 3], b: i64) -> ZornMatrix {
    ZornMatrix::int(a, x, y, b)
}

fn worked_product() -> Result<String> {
    let m1 = z(1, [1, 0, 0], [1, 0, 0], 2);
    let m2 = z(1, [0, 0, 0], [1, 0, 0], 1);
    let m3 = z(0, [1, 1, 0], [0, -1, 1], 0);
    let product = m1.mul(&m2.mul(&m3)?)?;
    let expected = z(0, [2, 3, 2], [0, -3, 4], 3);
    ensure(product == expected, || format!("got {product}"))?;
    Ok(format!("{product}"))
}

fn cardinalities() -> Result<String> {
    let mut counts = Vec::new();
    for m in 1..=9 {
        let order = enumerate_sll(m)?.order();
        let formula = index_gamma(m)?;
        ensure(BigUint::from(order) == formula, || format!("m = {m}: {order} vs {formula}"))?;
        counts.push(format!("{m}:{order}"));
    }
    Ok(counts.join(" "))
}

fn crt_decomposition() -> Result<String> {
    ensure(crt_iso_check(2, 3)?, || "reduction mod 6 is not a bijective homomorphism".into())?;
    Ok("259200 elements, bijective and multiplicative".into())
}

fn moufang_identities() -> Result<String> {
    let mut rng = rng(4);
    let mut checked = 0;
    for m in RING_MODULI {
        let modulus = Modulus(m);
        for _ in 0..10_000 {
            let [a, b, c] = std::array::from_fn(|_| sample::invertible_walk(&mut rng, modulus, 8));
            let report = moufang_report(&a, &b, &c)?;
            ensure(report.all(), || format!("{report:?} on {a}, {b}, {c}"))?;
            checked += 1;
        }
    }
    Ok(format!("{checked} triples over Z and Z/mZ, m = 2..12"))
}

fn determinant_multiplicativity() -> Result<String> {
    let mut rng = rng(5);
    let mut checked = 0;
    for m in RING_MODULI {
        let modulus = Modulus(m);
        for _ in 0..10_000 {
            let a = sample::invertible_walk(&mut rng, modulus, 8);
            let b = sample::invertible_walk(&mut rng, modulus, 8);
            let lhs = a.mul(&b)?.det();
            let rhs = modulus.reduce(&(a.det() * b.det()));
            ensure(lhs == rhs, || format!("det({a} · {b}) = {lhs}, product of dets {rhs}"))?;
            checked += 1;
        }
    }
    Ok(format!("{checked} pairs"))
}

fn unital_round_trip() -> Result<String> {
    let mut rng = rng(6);
    for q in 1..=4 {
        for _ in 0..1000 {
            let a = sample::unital(&mut rng, q);
            let tree = factor_unital(&a, q)?;
            ensure(tree.eval()? == a, || format!("tree of {a} evaluates wrongly"))?;
            ensure(tree.leaves().iter().all(|t| is_axis_elementary_of_level(t, q)), || {
                format!("tree of {a} has a leaf outside the level-{q} axis elementaries")
            })?;
        }
    }
    Ok("4000 matrices, q = 1..4".into())
}

fn congruence_round_trip() -> Result<String> {
    let mut rng = rng(7);
    for n in 1..=4 {
        for _ in 0..1000 {
            let a = sample::gamma_element(&mut rng, n, 12);
            let tree = decompose_congruence(&a, n)?;
            ensure(tree.eval()? == a, || format!("decomposition of {a} evaluates wrongly"))?;
            ensure(tree.leaves().iter().all(|t| decomposition_leaf_ok(t, n)), || {
                format!("decomposition of {a} breaks the leaf contract")
            })?;
            let split = split_gamma1_delta(&a, n)?;
            ensure(split.eval()? == a, || format!("split of {a} evaluates wrongly"))?;
            let embedded = split.leaves().iter().filter(|t| matches!(t, GeneratorTag::EmbeddedSL2(..))).count();
            ensure(embedded <= 1, || format!("split of {a} has {embedded} embedded leaves"))?;
        }
    }
    Ok("4000 elements, n = 1..4".into())
}

fn wohlfahrt() -> Result<String> {
    let mut rng = rng(8);
    let levels = [(2, 3), (3, 4), (2, 5)];
    let mut cases = [0usize; 3];
    for k in 0..200 {
        let (n1, n2) = levels[k % 3];
        let a = sample::gamma_element(&mut rng, n1, 12);
        let split = wohlfahrt_split(&a, n1, n2)?;
        let b = split.b_tree.eval()?;
        ensure(b.mul(&split.c)? == a, || format!("B·C != A for {a}"))?;
        ensure(split.b_tree.certify_level(n1), || format!("B tree for {a} not certified"))?;
        ensure(split.c.in_gamma(n2), || format!("C = {} not in Gamma({n2})", split.c))?;
        cases[split.case as usize - 1] += 1;
    }
    Ok(format!("200 splits, cases 1/2/3 = {}/{}/{}", cases[0], cases[1], cases[2]))
}

fn kernel_index() -> Result<String> {
    let l = Arc::new(enumerate_sll(4)?);
    let full = SubloopSet::full(&l);
    let k = kernel_subloop(&l, 2)?;
    ensure(k.len() == 128, || format!("kernel has {} elements", k.len()))?;
    ensure(normality_check(&full, &k)?.is_ok(), || "kernel fails normality".into())?;
    ensure(lagrange_check(&full, &k)?.is_ok(), || "kernel fails the Lagrange check".into())?;
    let index = index_or_cosets(&full, &k)?;
    ensure(index == 120, || format!("index {index}"))?;
    Ok("order 128, normal, Lagrange, index 120".into())
}

/// `H` ranges over the subloops generated by one or two elements of
/// `SLL(2, Z/2)` (which include `{I}`, the whole loop and all kernels there)
/// that have the Lagrange property; `F` over the cyclic subloops.
fn lagrange_intersections() -> Result<String> {
    let l = Arc::new(enumerate_sll(2)?);
    let full = SubloopSet::full(&l);
    let n = l.order() as u32;
    let mut subloops: Vec<SubloopSet> = Vec::new();
    let add = |s: SubloopSet, into: &mut Vec<SubloopSet>| {
        if !into.iter().any(|t| t.members() == s.members()) {
            into.push(s);
        }
    };
    let mut cyclic = Vec::new();
    for x in 0..n {
        add(closure(&l, &[x]), &mut cyclic);
    }
    for s in &cyclic {
        add(s.clone(), &mut subloops);
    }
    for x in 0..n {
        for y in x + 1..n {
            add(closure(&l, &[x, y]), &mut subloops);
        }
    }
    add(kernel_subloop(&l, 1)?, &mut subloops);
    add(kernel_subloop(&l, 2)?, &mut subloops);

    let mut lagrange_ok = Vec::new();
    for h in &subloops {
        if lagrange_check(&full, h)?.is_ok() {
            lagrange_ok.push(h);
        }
    }
    let mut pairs = 0;
    for h in &lagrange_ok {
        for f in &cyclic {
            let meet = h.intersection(f)?;
            let outcome = lagrange_check(f, &meet)?;
            ensure(outcome.is_ok(), || format!("F of order {}, H of order {}: {outcome:?}", f.len(), h.len()))?;
            pairs += 1;
        }
    }
    Ok(format!(
        "{} subloops, {} with the Lagrange property, {} cyclic F, {pairs} pairs",
        subloops.len(),
        lagrange_ok.len(),
        cyclic.len()
    ))
}

fn diassociativity() -> Result<String> {
    let mut rng = rng(11);
    for _ in 0..10_000 {
        let a = sample::invertible_walk(&mut rng, Modulus::INTEGERS, 8);
        let b = sample::invertible_walk(&mut rng, Modulus::INTEGERS, 8);
        for (p, q, r) in [(&a, &a, &b), (&a, &b, &a), (&b, &a, &a)] {
            let assoc = associator(p, q, r)?;
            ensure(assoc.is_identity(), || format!("[{p}, {q}, {r}] = {assoc}"))?;
        }
    }
    let s1 = generator(&GeneratorTag::Sj(1, BigInt::one()))?;
    let s2 = generator(&GeneratorTag::Sj(2, BigInt::one()))?;
    let l1 = generator(&GeneratorTag::lower_i64([1, 0, 0]))?;
    let comm = commutator(&s1, &s2)?;
    ensure(comm == generator(&GeneratorTag::lower_i64([0, 0, 2]))?, || format!("[S1, S2] = {comm}"))?;
    let assoc = associator(&s1, &s2, &l1)?;
    ensure(assoc == z(1, [0, -2, 0], [0, 0, -1], 1), || format!("[S1, S2, L1] = {assoc}"))?;
    Ok("10000 pairs; [S1,S2] and [S1,S2,L1] exact".into())
}

fn gamma_ns_containments(slow: bool) -> Result<String> {
    let (m, n, s) = (4u64, 2u64, 3u64);
    let l = Arc::new(enumerate_sll(m)?);
    let full = SubloopSet::full(&l);
    let kernel = kernel_subloop(&l, n)?;
    let image = gamma_ns_image_in(&l, n, s)?;
    ensure(image.is_certified(), || "Gamma(2, 3) image is partial".into())?;
    ensure(image.is_subset_of(&kernel)?, || "Gamma(2, 3) image leaves Gamma(2)".into())?;

    let delta_ns = normal_closure(&full, &elementary_image(&l, n * s))?;
    ensure(delta_ns.is_subset_of(&image)?, || "Delta(6) image is not inside Gamma(2, 3)".into())?;

    let derived = derived_subloop(&kernel);
    let delta_2nn = normal_closure(&full, &elementary_image(&l, 2 * n * n))?;
    ensure(delta_2nn.is_subset_of(&derived)?, || "Delta(8) image is not inside Gamma'(2)".into())?;

    // level-n elementaries raised to 2n lie in the derived image
    for j in 1..=3 {
        let e = Vec3::axis_scaled(j, BigInt::from(n))?;
        for mat in [ZornMatrix::upper(e.clone(), Modulus(m)), ZornMatrix::lower(e, Modulus(m))] {
            let idx = l.index_of(&mat).ok_or_else(|| Error::Internal(format!("{mat} not enumerated")))?;
            let p = l.pow(idx, 2 * n);
            ensure(derived.contains(p), || format!("({mat})^{} is not in Gamma'(2)", 2 * n))?;
        }
    }

    let (d, t, u) = delta_level_join(n * s, 2 * n * n);
    ensure(d == n, || format!("gcd({}, {}) = {d}", n * s, 2 * n * n))?;
    for x in [[1, 0, 0], [0, 1, 0], [0, 0, 1], [1, -2, 3]] {
        ensure(join_certificate_holds(n * s, 2 * n * n, &Vec3::from_i64(x))?, || {
            format!("join certificate fails for {x:?}")
        })?;
    }

    let mut detail = format!(
        "|Gamma(2,3)| = {}, |Delta(6)| = {}, |Gamma'(2)| = {}, |Delta(8)| = {}, {d} = {t}*{} + {u}*{}",
        image.len(),
        delta_ns.len(),
        derived.len(),
        delta_2nn.len(),
        n * s,
        2 * n * n
    );
    if slow {
        let l2 = Arc::new(enumerate_sll(2)?);
        let whole = SubloopSet::full(&l2);
        let derived_full = derived_subloop(&whole);
        ensure(derived_full.is_certified() && derived_full.verify_closed(), || {
            "derived subloop of SLL(2, Z/2) is not certified".into()
        })?;
        detail.push_str(&format!("; |SLL(2,Z/2)'| = {}", derived_full.len()));
    }
    Ok(detail)
}

