//! Seeded random elements for property checks.

use num_bigint::BigInt;
use num_traits::Signed;
use rand::seq::SliceRandom;
use rand::Rng;

use crate::ring::Modulus;
use crate::zorn::{GeneratorTag, Vec3, ZornMatrix};

/// Largest absolute entry accepted by [`invertible_walk`] over `Z`.
pub const ENTRY_BOUND: i64 = 9;

fn axis(rng: &mut impl Rng) -> usize {
    rng.gen_range(1..=3)
}

fn sign(rng: &mut impl Rng) -> i64 {
    if rng.gen() {
        1
    } else {
        -1
    }
}

fn diagonal(u: i64, modulus: Modulus) -> ZornMatrix {
    ZornMatrix::from_i64(u, [0; 3], [0; 3], 1, modulus)
}

fn units(m: u64) -> Vec<i64> {
    match m {
        0 => vec![1, -1],
        1 => vec![0],
        _ => (1..m as i64).filter(|&u| num_integer::Integer::gcd(&u, &(m as i64)) == 1).collect(),
    }
}

fn random_generator(rng: &mut impl Rng, modulus: Modulus) -> ZornMatrix {
    let j = axis(rng);
    let e = Vec3::axis_scaled(j, BigInt::from(sign(rng))).expect("axis in range");
    match rng.gen_range(0..5) {
        0 => ZornMatrix::upper(e, modulus),
        1 => ZornMatrix::lower(e, modulus),
        2 => GeneratorTag::Tj(j).matrix_in(modulus).expect("valid axis"),
        3 => GeneratorTag::Uj(j).matrix_in(modulus).expect("valid axis"),
        _ => diagonal(*units(modulus.value()).choose(rng).expect("a unit exists"), modulus),
    }
}

fn within_bound(a: &ZornMatrix) -> bool {
    let ok = |v: &BigInt| v.abs() <= BigInt::from(ENTRY_BOUND);
    ok(&a.a) && ok(&a.b) && a.x.0.iter().all(ok) && a.y.0.iter().all(ok)
}

/// Random element of `GLL(2, R)`: a walk over elementary, `T_j`, `U_j` and
/// diagonal unit generators, multiplied on a random side. Over `Z` steps that
/// would leave `[−9, 9]` are rejected.
pub fn invertible_walk(rng: &mut impl Rng, modulus: Modulus, steps: usize) -> ZornMatrix {
    let mut acc = ZornMatrix::identity(modulus);
    let mut taken = 0;
    let mut attempts = 0;
    while taken < steps && attempts < 50 * steps {
        attempts += 1;
        let g = random_generator(rng, modulus);
        let next = if rng.gen() { acc.mul(&g) } else { g.mul(&acc) }.expect("same modulus");
        if modulus.is_integers() && !within_bound(&next) {
            continue;
        }
        acc = next;
        taken += 1;
    }
    acc
}

/// A random factor of `Γ(n)`: a level-`n` elementary, a `Γ_(j)(n)` embedding,
/// or for `n = 1` a `T_j`.
fn gamma_factor(rng: &mut impl Rng, n: u64) -> ZornMatrix {
    let n = n as i64;
    let z = Modulus::INTEGERS;
    let j = axis(rng);
    let choice = rng.gen_range(0..if n == 1 { 5 } else { 4 });
    match choice {
        0 | 1 => {
            let v: [i64; 3] = std::array::from_fn(|_| n * rng.gen_range(-1..=1));
            let v = if v.iter().all(|c| *c == 0) {
                Vec3::axis_scaled(j, BigInt::from(n * sign(rng))).expect("axis in range")
            } else {
                Vec3::from_i64(v)
            };
            if choice == 0 {
                ZornMatrix::upper(v, z)
            } else {
                ZornMatrix::lower(v, z)
            }
        }
        2 | 3 => {
            let (k, l) = (sign(rng) * n, sign(rng) * n);
            let m = if choice == 2 { [[1 + k * l, k], [l, 1]] } else { [[1, k], [l, 1 + k * l]] };
            GeneratorTag::sl2_i64(j, m).matrix_in(z).expect("determinant one")
        }
        _ => GeneratorTag::Tj(j).matrix_in(z).expect("valid axis"),
    }
}

/// Random element of `Γ(n)` as a product of `steps` random factors, each
/// multiplied on a random side.
pub fn gamma_element(rng: &mut impl Rng, n: u64, steps: usize) -> ZornMatrix {
    let mut acc = ZornMatrix::identity(Modulus::INTEGERS);
    for _ in 0..steps {
        let g = gamma_factor(rng, n);
        acc = if rng.gen() { acc.mul(&g) } else { g.mul(&acc) }.expect("same modulus");
    }
    acc
}

/// Random `[[1, v], [u, 1 + v·u]]` with `v, u ∈ qZ³`.
pub fn unital(rng: &mut impl Rng, q: u64) -> ZornMatrix {
    let q = q as i64;
    let mut vec = || Vec3::from_i64(std::array::from_fn(|_| q * rng.gen_range(-3..=3)));
    let (v, u) = (vec(), vec());
    let b = BigInt::from(1) + v.dot(&u);
    ZornMatrix::new(BigInt::from(1), v, u, b, Modulus::INTEGERS)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn walks_stay_invertible_and_bounded() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..200 {
            let a = invertible_walk(&mut rng, Modulus::INTEGERS, 8);
            assert!(a.is_gll());
            assert!(within_bound(&a));
            let b = invertible_walk(&mut rng, Modulus(12), 8);
            assert!(b.is_gll());
        }
    }

    #[test]
    fn gamma_elements_are_in_gamma() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for n in 1..=4 {
            for _ in 0..50 {
                assert!(gamma_element(&mut rng, n, 12).in_gamma(n));
                let u = unital(&mut rng, n);
                assert!(u.in_gamma(n) && u.is_sll());
            }
        }
    }
}
