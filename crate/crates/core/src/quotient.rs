//! The finite loops `SLL(2, Z/mZ)`: enumeration, the index formula, CRT
//! decomposition and kernels of reduction maps.

use std::fmt;
use std::sync::{Arc, OnceLock};

use bitvec::prelude::*;
use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, ToPrimitive};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::floop::{ClosureStatus, SubloopSet};
use crate::ring::{factor_int, Modulus};
use crate::zorn::{Vec3, ZornMatrix};

/// Largest modulus enumerated directly.
pub const DIRECT_CAP: u64 = 9;
/// Largest loop order that will be materialized.
pub const ORDER_CAP: u64 = 10_000_000;
/// Largest order for which a full multiplication table is memoized.
pub const TABLE_CAP: usize = 4096;
/// Largest code space `m^8` backed by a dense lookup array.
const DENSE_CAP: u64 = 1 << 22;
const ABSENT: u32 = u32::MAX;

/// Components `(a, x1, x2, x3, y1, y2, y3, b)`, each in `[0, m)`.
pub type Raw = [u8; 8];

enum Lookup {
    Dense(Vec<u32>),
    /// Codes of positions `1..`, ascending.
    Sorted(Vec<u64>),
}

/// `SLL(2, Z/mZ)` with the identity at position 0 and the remaining
/// elements in ascending mixed-radix order of `(a, x, y, b)`.
pub struct FiniteLoop {
    modulus: u64,
    elems: Vec<Raw>,
    lookup: Lookup,
    inverses: Vec<u32>,
    table: OnceLock<Option<Vec<u32>>>,
}

impl fmt::Debug for FiniteLoop {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FiniteLoop")
            .field("modulus", &self.modulus)
            .field("order", &self.elems.len())
            .finish()
    }
}

/// Product of two raw elements modulo `m`.
#[inline]
pub fn mul_raw(p: &Raw, q: &Raw, m: u64) -> Raw {
    let m = m as i64;
    let g = |r: &Raw, i: usize| r[i] as i64;
    let (a1, b1, a2, b2) = (g(p, 0), g(p, 7), g(q, 0), g(q, 7));
    let x1 = [g(p, 1), g(p, 2), g(p, 3)];
    let y1 = [g(p, 4), g(p, 5), g(p, 6)];
    let x2 = [g(q, 1), g(q, 2), g(q, 3)];
    let y2 = [g(q, 4), g(q, 5), g(q, 6)];
    let dot = |u: &[i64; 3], v: &[i64; 3]| u[0] * v[0] + u[1] * v[1] + u[2] * v[2];
    let cross = |u: &[i64; 3], v: &[i64; 3]| {
        [u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2], u[0] * v[1] - u[1] * v[0]]
    };
    let yy = cross(&y1, &y2);
    let xx = cross(&x1, &x2);
    let r = |v: i64| v.rem_euclid(m) as u8;
    [
        r(a1 * a2 + dot(&x1, &y2)),
        r(a1 * x2[0] + b2 * x1[0] - yy[0]),
        r(a1 * x2[1] + b2 * x1[1] - yy[1]),
        r(a1 * x2[2] + b2 * x1[2] - yy[2]),
        r(a2 * y1[0] + b1 * y2[0] + xx[0]),
        r(a2 * y1[1] + b1 * y2[1] + xx[1]),
        r(a2 * y1[2] + b1 * y2[2] + xx[2]),
        r(b1 * b2 + dot(&y1, &x2)),
    ]
}

/// Inverse of a determinant-one raw element: `(b, −x, −y, a)`.
#[inline]
pub fn inv_raw(p: &Raw, m: u64) -> Raw {
    let n = |v: u8| ((m - v as u64) % m) as u8;
    [p[7], n(p[1]), n(p[2]), n(p[3]), n(p[4]), n(p[5]), n(p[6]), p[0]]
}

#[cfg(test)]
fn det_raw(p: &Raw, m: u64) -> u64 {
    let v = |i: usize| p[i] as u64;
    let xy = v(1) * v(4) + v(2) * v(5) + v(3) * v(6);
    (v(0) * v(7) + m * m * 3 - xy) % m
}

fn identity_raw(m: u64) -> Raw {
    let one = (1 % m) as u8;
    [one, 0, 0, 0, 0, 0, 0, one]
}

/// `n^7 ∏_{p | n} (1 − p⁻⁴)`, the order of `SLL(2, Z/nZ)`.
pub fn index_gamma(n: u64) -> Result<BigUint> {
    if n == 0 {
        return Err(Error::PreconditionViolated("index_gamma needs n >= 1".into()));
    }
    let mut out = BigUint::one();
    for &(p, k) in &factor_int(n).factors {
        let p = BigUint::from(p);
        out *= p.pow(7 * k - 4) * (p.pow(4) - 1u8);
    }
    Ok(out)
}

/// Enumerates `SLL(2, Z/mZ)`.
pub fn enumerate_sll(m: u64) -> Result<FiniteLoop> {
    if m == 0 {
        return Err(Error::PreconditionViolated("modulus must be >= 1".into()));
    }
    let expected = index_gamma(m)?;
    if expected > BigUint::from(ORDER_CAP) {
        return Err(Error::TooLarge(m));
    }
    let elems = if m <= DIRECT_CAP {
        enumerate_direct(m)
    } else {
        let powers = factor_int(m).prime_powers();
        if powers.iter().any(|&q| q > DIRECT_CAP) {
            return Err(Error::TooLarge(m));
        }
        let mut iter = powers.into_iter();
        let first = iter.next().expect("m > 9 has a factor");
        let mut acc = (first, enumerate_direct(first));
        for q in iter {
            acc = (acc.0 * q, crt_combine(acc.0, &acc.1, q, &enumerate_direct(q)));
        }
        acc.1
    };
    if BigUint::from(elems.len()) != expected {
        return Err(Error::Internal(format!(
            "enumerated {} elements mod {m}, formula gives {expected}",
            elems.len()
        )));
    }
    Ok(FiniteLoop::from_elements(m, elems))
}

/// All determinant-one tuples mod `m`, solving `ab ≡ 1 + x·y` for `b`.
fn enumerate_direct(m: u64) -> Vec<Raw> {
    let mu = m as usize;
    // solutions[a][r] lists the b with a·b ≡ r
    let solutions: Vec<Vec<Vec<u8>>> = (0..mu)
        .map(|a| {
            let mut by_r = vec![Vec::new(); mu];
            for b in 0..mu {
                by_r[(a * b) % mu].push(b as u8);
            }
            by_r
        })
        .collect();
    let per_a: Vec<Vec<Raw>> = (0..mu)
        .into_par_iter()
        .map(|a| {
            let mut out = Vec::new();
            let mut t = [0usize; 6];
            loop {
                let r = (1 + t[0] * t[3] + t[1] * t[4] + t[2] * t[5]) % mu;
                for &b in &solutions[a][r] {
                    let c = |i: usize| t[i] as u8;
                    out.push([a as u8, c(0), c(1), c(2), c(3), c(4), c(5), b]);
                }
                let mut i = 5;
                loop {
                    t[i] += 1;
                    if t[i] < mu {
                        break;
                    }
                    t[i] = 0;
                    if i == 0 {
                        return out;
                    }
                    i -= 1;
                }
            }
        })
        .collect();
    per_a.concat()
}

/// Pairs elements mod `m1` and mod `m2` componentwise by CRT.
fn crt_combine(m1: u64, l1: &[Raw], m2: u64, l2: &[Raw]) -> Vec<Raw> {
    let m = m1 * m2;
    let (_, u, v) = crate::ring::ext_gcd(&BigInt::from(m1), &BigInt::from(m2));
    let m_big = BigInt::from(m);
    let lift: Vec<Vec<u8>> = (0..m1)
        .map(|r1| {
            (0..m2)
                .map(|r2| {
                    let r = (BigInt::from(r1) * &v * m2 + BigInt::from(r2) * &u * m1).mod_floor(&m_big);
                    r.to_u8().expect("residue below 256")
                })
                .collect()
        })
        .collect();
    l1.par_iter()
        .flat_map_iter(|p| {
            let lift = &lift;
            l2.iter().map(move |q| std::array::from_fn(|i| lift[p[i] as usize][q[i] as usize]))
        })
        .collect()
}

impl FiniteLoop {
    fn from_elements(m: u64, mut elems: Vec<Raw>) -> FiniteLoop {
        let code = |r: &Raw| encode(r, m);
        elems.par_sort_unstable_by_key(code);
        let id = identity_raw(m);
        let pos = elems.binary_search_by_key(&code(&id), code).expect("identity is enumerated");
        elems[..=pos].rotate_right(1);
        let space = m.checked_pow(8).unwrap_or(u64::MAX);
        let lookup = if space <= DENSE_CAP {
            let mut dense = vec![ABSENT; space as usize];
            for (i, r) in elems.iter().enumerate() {
                dense[code(r) as usize] = i as u32;
            }
            Lookup::Dense(dense)
        } else {
            Lookup::Sorted(elems[1..].iter().map(code).collect())
        };
        let mut out = FiniteLoop { modulus: m, elems, lookup, inverses: Vec::new(), table: OnceLock::new() };
        let inverses = (0..out.order() as u32)
            .into_par_iter()
            .map(|i| out.index_of_raw(&inv_raw(out.raw(i), m)).expect("inverse is enumerated"))
            .collect();
        out.inverses = inverses;
        out
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn order(&self) -> usize {
        self.elems.len()
    }

    pub fn identity(&self) -> u32 {
        0
    }

    pub fn raw(&self, i: u32) -> &Raw {
        &self.elems[i as usize]
    }

    pub fn element(&self, i: u32) -> ZornMatrix {
        let r = self.raw(i);
        let big = |k: usize| BigInt::from(r[k]);
        ZornMatrix::new(
            big(0),
            Vec3([big(1), big(2), big(3)]),
            Vec3([big(4), big(5), big(6)]),
            big(7),
            Modulus(self.modulus),
        )
    }

    pub fn index_of_raw(&self, r: &Raw) -> Option<u32> {
        if r.iter().any(|&c| c as u64 >= self.modulus) {
            return None;
        }
        let code = encode(r, self.modulus);
        match &self.lookup {
            Lookup::Dense(d) => Some(d[code as usize]).filter(|&i| i != ABSENT),
            Lookup::Sorted(codes) => {
                if *r == self.elems[0] {
                    Some(0)
                } else {
                    codes.binary_search(&code).ok().map(|p| p as u32 + 1)
                }
            }
        }
    }

    /// Position of a matrix, after reducing it mod `m`; `None` unless it has determinant 1.
    pub fn index_of(&self, a: &ZornMatrix) -> Option<u32> {
        if !(a.modulus.is_integers() || a.modulus.value() == self.modulus) {
            return None;
        }
        let a = a.reduce_mod(self.modulus).ok()?;
        let c = |v: &BigInt| v.to_u8();
        let r = [c(&a.a)?, c(&a.x.0[0])?, c(&a.x.0[1])?, c(&a.x.0[2])?, c(&a.y.0[0])?, c(&a.y.0[1])?, c(&a.y.0[2])?, c(&a.b)?];
        self.index_of_raw(&r)
    }

    fn table(&self) -> Option<&[u32]> {
        self.table
            .get_or_init(|| {
                let n = self.order();
                (n <= TABLE_CAP).then(|| {
                    (0..n * n)
                        .into_par_iter()
                        .map(|k| self.mul_direct((k / n) as u32, (k % n) as u32))
                        .collect()
                })
            })
            .as_deref()
    }

    fn mul_direct(&self, i: u32, j: u32) -> u32 {
        let r = mul_raw(self.raw(i), self.raw(j), self.modulus);
        self.index_of_raw(&r).expect("SLL(2, Z/mZ) is closed under multiplication")
    }

    pub fn mul(&self, i: u32, j: u32) -> u32 {
        match self.table() {
            Some(t) => t[i as usize * self.order() + j as usize],
            None => self.mul_direct(i, j),
        }
    }

    pub fn inv(&self, i: u32) -> u32 {
        self.inverses[i as usize]
    }

    /// `a^e`, well defined since `⟨a⟩` is a cyclic group.
    pub fn pow(&self, i: u32, mut e: u64) -> u32 {
        let mut base = i;
        let mut acc = 0;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    /// Smallest `k ≥ 1` with `a^k = I`.
    pub fn element_order(&self, i: u32) -> u64 {
        let mut k = 1;
        let mut p = i;
        while p != 0 {
            p = self.mul(p, i);
            k += 1;
        }
        k
    }

    pub fn commutator(&self, a: u32, b: u32) -> u32 {
        self.mul(self.mul(self.mul(a, b), self.inv(a)), self.inv(b))
    }

    pub fn associator(&self, a: u32, b: u32, c: u32) -> u32 {
        let left = self.mul(self.mul(a, b), c);
        let right = self.mul(a, self.mul(b, c));
        self.mul(left, self.inv(right))
    }

    /// Image of element `i` in a loop whose modulus divides this one.
    pub fn reduce_into(&self, i: u32, target: &FiniteLoop) -> Option<u32> {
        let d = target.modulus;
        if self.modulus % d != 0 {
            return None;
        }
        let r = self.raw(i).map(|c| (c as u64 % d) as u8);
        target.index_of_raw(&r)
    }

    pub fn elements(&self) -> impl Iterator<Item = ZornMatrix> + '_ {
        (0..self.order() as u32).map(|i| self.element(i))
    }
}

fn encode(r: &Raw, m: u64) -> u64 {
    r.iter().fold(0, |acc, &c| acc * m + c as u64)
}

/// Checks that reduction `SLL(2, Z/(m1 m2)) → SLL(2, Z/m1) × SLL(2, Z/m2)` is a
/// bijective homomorphism. Bijectivity is checked on every element;
/// multiplicativity on the pairs `(i, (i·P + 1) mod N)` for a prime `P`, which
/// visits every element on both sides.
pub fn crt_iso_check(m1: u64, m2: u64) -> Result<bool> {
    if m1 == 0 || m2 == 0 {
        return Err(Error::PreconditionViolated("moduli must be >= 1".into()));
    }
    if m1.gcd(&m2) != 1 {
        return Err(Error::NotCoprime(m1.to_string(), m2.to_string()));
    }
    let big = enumerate_sll(m1 * m2)?;
    let l1 = enumerate_sll(m1)?;
    let l2 = enumerate_sll(m2)?;
    let n = big.order();
    if n != l1.order() * l2.order() {
        return Ok(false);
    }
    let images: Option<Vec<(u32, u32)>> = (0..n as u32)
        .into_par_iter()
        .map(|i| Some((big.reduce_into(i, &l1)?, big.reduce_into(i, &l2)?)))
        .collect();
    let Some(images) = images else { return Ok(false) };
    let mut seen = bitvec![0; n];
    for &(i1, i2) in &images {
        let k = i1 as usize * l2.order() + i2 as usize;
        if seen.replace(k, true) {
            return Ok(false);
        }
    }
    const STEP: u64 = 1_000_003;
    let multiplicative = (0..n as u64).into_par_iter().all(|i| {
        let j = ((i * STEP + 1) % n as u64) as u32;
        let i = i as u32;
        let (i1, i2) = images[i as usize];
        let (j1, j2) = images[j as usize];
        let (k1, k2) = images[big.mul(i, j) as usize];
        k1 == l1.mul(i1, j1) && k2 == l2.mul(i2, j2)
    });
    Ok(multiplicative)
}

/// `{A ∈ L : A ≡ I mod d}`, the image of `Γ(d)`.
pub fn kernel_subloop(l: &Arc<FiniteLoop>, d: u64) -> Result<SubloopSet> {
    let m = l.modulus();
    if d == 0 || m % d != 0 {
        return Err(Error::NotDivisor(d, m));
    }
    let id = identity_raw(d);
    let members: Vec<u32> = (0..l.order() as u32)
        .into_par_iter()
        .filter(|&i| l.raw(i).map(|c| (c as u64 % d) as u8) == id)
        .collect();
    let expected = index_gamma(m)? / index_gamma(d)?;
    if BigUint::from(members.len()) != expected {
        return Err(Error::Internal(format!("kernel mod {d} in SLL(2, Z/{m}) has {} elements", members.len())));
    }
    Ok(SubloopSet::from_members(l.clone(), members, ClosureStatus::CertifiedClosed))
}
