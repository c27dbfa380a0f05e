//! Exact integer and modular arithmetic: extended gcd, inverses, CRT,
//! trial-division factorization and unimodular completion over `Z/(a)`.

use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// The coefficient ring: `Z` when `m == 0`, otherwise `Z/mZ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Modulus(pub u64);

impl Modulus {
    pub const INTEGERS: Modulus = Modulus(0);

    pub fn new(m: u64) -> Self {
        Modulus(m)
    }

    pub fn value(self) -> u64 {
        self.0
    }

    pub fn is_integers(self) -> bool {
        self.0 == 0
    }

    /// Canonical representative: unchanged over `Z`, in `[0, m)` otherwise.
    pub fn reduce(self, v: &BigInt) -> BigInt {
        if self.0 == 0 {
            v.clone()
        } else {
            v.mod_floor(&BigInt::from(self.0))
        }
    }

    pub fn is_unit(self, v: &BigInt) -> bool {
        match self.0 {
            0 => v.abs().is_one(),
            1 => true,
            m => v.gcd(&BigInt::from(m)).is_one(),
        }
    }

    /// Inverse of a unit of the ring.
    pub fn inverse(self, v: &BigInt) -> Result<BigInt> {
        match self.0 {
            0 if v.abs().is_one() => Ok(v.clone()),
            0 => Err(Error::NotInvertible(v.to_string())),
            m => mod_inv(v, &BigInt::from(m)),
        }
    }
}

impl fmt::Display for Modulus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0 == 0 {
            write!(f, "Z")
        } else {
            write!(f, "Z/{}Z", self.0)
        }
    }
}

/// Factorization `n = p1^k1 * ... * pl^kl` with strictly increasing primes.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PrimePowerList {
    pub factors: Vec<(u64, u32)>,
}

impl PrimePowerList {
    pub fn primes(&self) -> impl Iterator<Item = u64> + '_ {
        self.factors.iter().map(|&(p, _)| p)
    }

    /// The prime powers `p^k` themselves.
    pub fn prime_powers(&self) -> Vec<u64> {
        self.factors.iter().map(|&(p, k)| p.pow(k)).collect()
    }

    pub fn product(&self) -> BigUint {
        self.factors
            .iter()
            .fold(BigUint::one(), |acc, &(p, k)| acc * BigUint::from(p).pow(k))
    }

    pub fn is_prime_power(&self) -> bool {
        self.factors.len() == 1
    }
}

/// Extended Euclid: `(g, x, y)` with `g = gcd(a, b) >= 0` and `a*x + b*y = g`.
///
/// Ties `|a| == |b|` resolve to `x = sign(a), y = 0`; `(0, 0)` gives `(0, 0, 0)`.
pub fn ext_gcd(a: &BigInt, b: &BigInt) -> (BigInt, BigInt, BigInt) {
    if !a.is_zero() && a.abs() == b.abs() {
        return (a.abs(), a.signum(), BigInt::zero());
    }
    let (mut old_r, mut r) = (a.clone(), b.clone());
    let (mut old_s, mut s) = (BigInt::one(), BigInt::zero());
    let (mut old_t, mut t) = (BigInt::zero(), BigInt::one());
    while !r.is_zero() {
        let q = old_r.div_floor(&r);
        let next_r = &old_r - &q * &r;
        old_r = std::mem::replace(&mut r, next_r);
        let next_s = &old_s - &q * &s;
        old_s = std::mem::replace(&mut s, next_s);
        let next_t = &old_t - &q * &t;
        old_t = std::mem::replace(&mut t, next_t);
    }
    if old_r.is_negative() {
        (-old_r, -old_s, -old_t)
    } else if old_r.is_zero() {
        (BigInt::zero(), BigInt::zero(), BigInt::zero())
    } else {
        (old_r, old_s, old_t)
    }
}

/// `ext_gcd` on machine integers.
pub fn ext_gcd_i64(a: i64, b: i64) -> (i64, i64, i64) {
    let (g, x, y) = ext_gcd(&BigInt::from(a), &BigInt::from(b));
    (
        g.to_i64().expect("gcd fits"),
        x.to_i64().expect("Bezout coefficient fits"),
        y.to_i64().expect("Bezout coefficient fits"),
    )
}

/// Inverse of `a` modulo `m >= 1`, in `[0, m)`. For `m == 1` returns 0.
pub fn mod_inv(a: &BigInt, m: &BigInt) -> Result<BigInt> {
    if !m.is_positive() {
        return Err(Error::PreconditionViolated(format!("modulus {m} must be >= 1")));
    }
    if m.is_one() {
        return Ok(BigInt::zero());
    }
    let (g, x, _) = ext_gcd(&a.mod_floor(m), m);
    if !g.is_one() {
        return Err(Error::NotInvertible(format!("{a} mod {m}")));
    }
    Ok(x.mod_floor(m))
}

/// Trial-division factorization of `n >= 1`; `1` factors as the empty list.
pub fn factor_int(n: u64) -> PrimePowerList {
    assert!(n >= 1, "factor_int requires n >= 1");
    let mut factors = Vec::new();
    let mut rest = n;
    let mut p = 2u64;
    while p.saturating_mul(p) <= rest {
        if rest % p == 0 {
            let mut k = 0;
            while rest % p == 0 {
                rest /= p;
                k += 1;
            }
            factors.push((p, k));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if rest > 1 {
        factors.push((rest, 1));
    }
    PrimePowerList { factors }
}

pub fn is_prime(n: u64) -> bool {
    n >= 2 && factor_int(n).factors == [(n, 1)]
}

/// Chinese remaindering over pairwise-coprime moduli: `(r, M)` with `0 <= r < M`.
pub fn crt(residues: &[(BigInt, BigInt)]) -> Result<(BigInt, BigInt)> {
    if residues.is_empty() {
        return Err(Error::PreconditionViolated("crt needs at least one congruence".into()));
    }
    for (i, (_, mi)) in residues.iter().enumerate() {
        if !mi.is_positive() {
            return Err(Error::PreconditionViolated(format!("modulus {mi} must be >= 1")));
        }
        for (_, mj) in &residues[i + 1..] {
            if !mi.gcd(mj).is_one() {
                return Err(Error::NotCoprime(mi.to_string(), mj.to_string()));
            }
        }
    }
    let mut r = BigInt::zero();
    let mut modulus = BigInt::one();
    for (ri, mi) in residues {
        // r + modulus * k ≡ ri (mod mi)
        let inv = mod_inv(&modulus, mi)?;
        let k = ((ri - &r) * inv).mod_floor(mi);
        r += &modulus * k;
        modulus *= mi;
        r = r.mod_floor(&modulus);
    }
    Ok((r, modulus))
}

/// Integers `0, 1, -1, 2, -2, ...` up to absolute value `bound`.
fn zigzag(bound: i64) -> impl Iterator<Item = i64> {
    std::iter::once(0).chain((1..=bound).flat_map(|k| [k, -k]))
}

/// Shift pairs `(t, s)` with `|t|, |s| <= bound`, ordered by `max(|t|, |s|)`
/// and then lexicographically in the order `0, 1, -1, 2, -2, ...`.
pub fn shift_pairs(bound: i64) -> impl Iterator<Item = (i64, i64)> {
    (0..=bound).flat_map(move |r| {
        zigzag(r).flat_map(move |t| {
            zigzag(r)
                .filter(move |s| t.abs().max(s.abs()) == r)
                .map(move |s| (t, s))
        })
    })
}

/// Finds `(t, s)` with `u1 + v2*t + v3*s` coprime to `a`.
///
/// Requires `gcd(u1, v2, v3, a) = 1`; the search is deterministic (see
/// [`shift_pairs`]) and confined to `|t|, |s| <= |a|`.
pub fn unimodular_shift(a: &BigInt, u1: &BigInt, v2: &BigInt, v3: &BigInt) -> Result<(BigInt, BigInt)> {
    if a.is_zero() {
        return Err(Error::PreconditionViolated("unimodular_shift needs a != 0".into()));
    }
    let g = a.gcd(u1).gcd(v2).gcd(v3);
    if !g.is_one() {
        return Err(Error::NotUnimodular(format!("({u1}, {v2}, {v3}) over Z/({a}), gcd {g}")));
    }
    let abs_a = a.abs();
    // Only residues mod a matter, so a window of |a| already holds a solution.
    let bound = abs_a.to_i64().unwrap_or(i64::MAX);
    let u1 = u1.mod_floor(&abs_a);
    let v2 = v2.mod_floor(&abs_a);
    let v3 = v3.mod_floor(&abs_a);
    for (t, s) in shift_pairs(bound) {
        let candidate = &u1 + &v2 * t + &v3 * s;
        if candidate.gcd(&abs_a).is_one() {
            return Ok((BigInt::from(t), BigInt::from(s)));
        }
    }
    Err(Error::Internal(format!("no unimodular shift found modulo {a}")))
}

/// Smallest `t` (order `0, 1, -1, ...`, `|t| <= m`) making `a - t*d` a unit mod `m`.
pub fn unit_shift(a: &BigInt, d: &BigInt, m: u64) -> Result<BigInt> {
    let big_m = BigInt::from(m);
    if m == 1 {
        return Ok(BigInt::zero());
    }
    if !a.gcd(d).gcd(&big_m).is_one() {
        return Err(Error::NotUnimodular(format!("({a}, {d}) over Z/{m}Z")));
    }
    for t in zigzag(m as i64) {
        if (a - d * t).gcd(&big_m).is_one() {
            return Ok(BigInt::from(t));
        }
    }
    Err(Error::Internal(format!("no unit shift found modulo {m}")))
}

/// Nonnegative gcd of a slice; `gcd() = 0`.
pub fn gcd_all(values: &[BigInt]) -> BigInt {
    values.iter().fold(BigInt::zero(), |acc, v| acc.gcd(v))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b(v: i64) -> BigInt {
        BigInt::from(v)
    }

    #[test]
    fn ext_gcd_examples() {
        assert_eq!(ext_gcd_i64(6, 4), (2, 1, -1));
        assert_eq!(ext_gcd_i64(0, 0), (0, 0, 0));
        assert_eq!(ext_gcd_i64(3, 7), (1, -2, 1));
        assert_eq!(ext_gcd_i64(4, 6), (2, -1, 1));
        assert_eq!(ext_gcd_i64(3, 3), (3, 1, 0));
        assert_eq!(ext_gcd_i64(-4, 6), (2, 1, 1));
        assert_eq!(ext_gcd_i64(0, -5), (5, 0, -1));
    }

    #[test]
    fn mod_inv_examples() {
        assert_eq!(mod_inv(&b(3), &b(5)).unwrap(), b(2));
        assert_eq!(mod_inv(&b(1), &b(7)).unwrap(), b(1));
        assert_eq!(mod_inv(&b(5), &b(1)).unwrap(), b(0));
        assert!(matches!(mod_inv(&b(6), &b(9)), Err(Error::NotInvertible(_))));
        assert_eq!(mod_inv(&b(-2), &b(7)).unwrap(), b(3));
    }

    #[test]
    fn mod_inv_matches_exhaustive_search() {
        let expected = (0..15).find(|x| (8 * x) % 15 == 1).unwrap();
        assert_eq!(expected, 2);
        assert_eq!(mod_inv(&b(8), &b(15)).unwrap(), b(expected));
    }

    #[test]
    fn factor_examples() {
        assert!(factor_int(1).factors.is_empty());
        assert_eq!(factor_int(12).factors, vec![(2, 2), (3, 1)]);
        assert_eq!(factor_int(360).factors, vec![(2, 3), (3, 2), (5, 1)]);
        assert_eq!(factor_int(999_983).factors, vec![(999_983, 1)]);
        assert!(is_prime(7) && !is_prime(9) && !is_prime(1));
    }

    #[test]
    fn crt_examples() {
        assert_eq!(crt(&[(b(1), b(2)), (b(2), b(3))]).unwrap(), (b(5), b(6)));
        assert_eq!(crt(&[(b(0), b(5))]).unwrap(), (b(0), b(5)));
        let (r, m) = crt(&[(b(1), b(2)), (b(2), b(3)), (b(3), b(5))]).unwrap();
        assert_eq!((r.clone(), m), (b(23), b(30)));
        assert!([(1, 2), (2, 3), (3, 5)].iter().all(|&(ri, mi)| r.mod_floor(&b(mi)) == b(ri)));
        assert!(matches!(crt(&[(b(1), b(4)), (b(1), b(6))]), Err(Error::NotCoprime(..))));
        assert!(crt(&[]).is_err());
    }

    /// Independent oracle: walk pairs in the documented order with i64 arithmetic.
    fn shift_oracle(a: i64, u1: i64, v2: i64, v3: i64) -> (i64, i64) {
        let mut order: Vec<i64> = vec![0];
        for k in 1..=a.abs() {
            order.push(k);
            order.push(-k);
        }
        let rank = |v: i64| order.iter().position(|&o| o == v).unwrap();
        let mut pairs: Vec<(i64, i64)> = order.iter().flat_map(|&t| order.iter().map(move |&s| (t, s))).collect();
        pairs.sort_by_key(|&(t, s)| (t.abs().max(s.abs()), rank(t), rank(s)));
        let gcd = |mut x: i64, mut y: i64| {
            x = x.abs();
            y = y.abs();
            while y != 0 {
                (x, y) = (y, x % y);
            }
            x
        };
        *pairs.iter().find(|&&(t, s)| gcd(u1 + v2 * t + v3 * s, a) == 1).unwrap()
    }

    #[test]
    fn unimodular_shift_examples() {
        let run = |a, u1, v2, v3| {
            let (t, s) = unimodular_shift(&b(a), &b(u1), &b(v2), &b(v3)).unwrap();
            (t.to_i64().unwrap(), s.to_i64().unwrap())
        };
        assert_eq!(run(4, 1, 2, 2), (0, 0));
        assert_eq!(shift_oracle(5, 0, 1, 0), (1, 0));
        assert_eq!(run(5, 0, 1, 0), (1, 0));
        assert_eq!(shift_oracle(6, 3, 2, 0), (1, 0));
        assert_eq!(run(6, 3, 2, 0), (1, 0));
        for (a, u1, v2, v3) in [(12, 4, 3, 6), (-15, 5, 3, 0), (30, 6, 10, 15), (7, 0, 0, 1)] {
            assert_eq!(run(a, u1, v2, v3), shift_oracle(a, u1, v2, v3));
        }
        assert!(matches!(
            unimodular_shift(&b(6), &b(2), &b(4), &b(0)),
            Err(Error::NotUnimodular(_))
        ));
    }

    #[test]
    fn unit_shift_finds_unit() {
        // a = 2, d = 3 mod 4: 2 is not a unit, 2 - 3 = -1 is.
        assert_eq!(unit_shift(&b(2), &b(3), 4).unwrap(), b(1));
        assert_eq!(unit_shift(&b(5), &b(0), 6).unwrap(), b(0));
        assert!(unit_shift(&b(2), &b(4), 6).is_err());
    }

    #[test]
    fn modulus_reduction() {
        let m = Modulus(5);
        assert_eq!(m.reduce(&b(-3)), b(2));
        assert_eq!(Modulus::INTEGERS.reduce(&b(-3)), b(-3));
        assert!(Modulus(1).is_unit(&b(0)));
        assert!(Modulus(0).is_unit(&b(-1)) && !Modulus(0).is_unit(&b(2)));
        assert_eq!(Modulus(7).inverse(&b(3)).unwrap(), b(5));
    }
}
