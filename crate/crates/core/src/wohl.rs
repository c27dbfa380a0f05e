//! Splitting `Γ(n1) ⊆ Δ(n1) · Γ(n2)` and joining elementary levels.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::expr::ExprTree;
use crate::factor::factor_unital;
use crate::ring::{ext_gcd, gcd_all, mod_inv, unit_shift};
use crate::zorn::{GeneratorTag, Vec3, ZornMatrix};

/// Result of [`wohlfahrt_split`]: `A = eval(b_tree) · c`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WohlfahrtSplit {
    /// Certified member of `Δ(n1)`.
    pub b_tree: ExprTree,
    /// `eval(b_tree)⁻¹ · A`, congruent to `I` mod `n2`.
    pub c: ZornMatrix,
    /// Which case handled the input at the top level (1, 2 or 3).
    pub case: u8,
}

struct Splitter {
    n1: u64,
    n2: u64,
}

impl Splitter {
    fn congruent_one(&self, v: &BigInt) -> bool {
        (v - 1u8).mod_floor(&BigInt::from(self.n2)).is_zero()
    }

    /// `a ≡ 1 (mod n2)`: `B = [[1, v], [u, ab]]` matches `A` modulo `n2`.
    fn case1(&self, a: &ZornMatrix) -> Result<ExprTree> {
        let b = ZornMatrix::new(BigInt::one(), a.x.clone(), a.y.clone(), &a.a * &a.b, a.modulus);
        factor_unital(&b, self.n1)
    }

    /// `a` a unit mod `n2`: shear by `X = U(a'(1 − a − c) v')`, conjugate by
    /// `T1 = L(t)` with `v'·t = 1` and finish with case 1.
    fn case2(&self, a: &ZornMatrix) -> Result<ExprTree> {
        if a.x.is_zero() {
            let shift = GeneratorTag::UpperElementary(Vec3::axis_scaled(1, BigInt::from(self.n1))?);
            let shifted = a.mul(&shift.matrix_in(a.modulus)?)?;
            let back = GeneratorTag::UpperElementary(Vec3::axis_scaled(1, -BigInt::from(self.n1))?);
            return Ok(ExprTree::mul(self.case2(&shifted)?, ExprTree::leaf(back)));
        }
        let a_inv = mod_inv(&a.a, &BigInt::from(self.n2))?;
        let c = gcd_all(&a.x.0);
        let primitive = Vec3(a.x.0.clone().map(|v| v / &c));
        if !((&a.a * &a.b - 1u8) % &c).is_zero() {
            return Err(Error::Internal(format!("{c} does not divide ab - 1 for {a}")));
        }
        let shear = primitive.scale(&(a_inv * (BigInt::one() - &a.a - &c)));
        let x_mat = ZornMatrix::upper(shear.clone(), a.modulus);

        let t = unit_dual(&primitive)?;
        let t1 = ZornMatrix::lower(t, a.modulus);
        let conjugated = t1.inv()?.mul(&a.mul(&x_mat)?.mul(&t1)?)?;
        if !self.congruent_one(&conjugated.a) {
            return Err(Error::Internal(format!("conjugate {conjugated} has corner ≢ 1 mod {}", self.n2)));
        }
        let inner = self.case1(&conjugated)?;
        Ok(ExprTree::mul(
            ExprTree::conj(t1, inner),
            ExprTree::leaf(GeneratorTag::UpperElementary(shear.neg())),
        ))
    }

    /// General corner: pick `t` with `a − t·d` a unit mod `n2`, conjugate by
    /// `T = L(−t u)` and finish with case 2.
    fn case3(&self, a: &ZornMatrix) -> Result<ExprTree> {
        let d = a.x.dot(&a.y);
        let t = unit_shift(&a.a, &d, self.n2)?;
        let t_mat = ZornMatrix::lower(a.y.scale(&-t), a.modulus);
        let conjugated = t_mat.inv()?.mul(&a.mul(&t_mat)?)?;
        if !conjugated.a.gcd(&BigInt::from(self.n2)).is_one() {
            return Err(Error::Internal(format!("conjugate {conjugated} has corner not a unit mod {}", self.n2)));
        }
        Ok(ExprTree::conj(t_mat, self.case2(&conjugated)?))
    }
}

/// A vector `t` with `v·t = 1` for primitive `v`.
fn unit_dual(v: &Vec3) -> Result<Vec3> {
    let [v1, v2, v3] = &v.0;
    let (g12, x1, y1) = ext_gcd(v1, v2);
    let (g, x2, y2) = ext_gcd(&g12, v3);
    if !g.is_one() {
        return Err(Error::DegenerateV(format!("{v} is not primitive")));
    }
    Ok(Vec3([&x2 * x1, &x2 * y1, y2]))
}

/// Splits `A ∈ Γ(n1)` as `B · C` with `B` certified in `Δ(n1)` and `C ∈ Γ(n2)`.
pub fn wohlfahrt_split(a: &ZornMatrix, n1: u64, n2: u64) -> Result<WohlfahrtSplit> {
    if n1 == 0 || n2 == 0 {
        return Err(Error::PreconditionViolated("levels must be >= 1".into()));
    }
    if !a.modulus.is_integers() || !a.in_gamma(n1) {
        return Err(Error::NotInGamma(format!("{a}, level {n1}")));
    }
    let splitter = Splitter { n1, n2 };
    let (b_tree, case) = if splitter.congruent_one(&a.a) {
        (splitter.case1(a)?, 1)
    } else if a.a.gcd(&BigInt::from(n2)).is_one() {
        (splitter.case2(a)?, 2)
    } else {
        (splitter.case3(a)?, 3)
    };
    let b = b_tree.eval()?;
    let c = b.inv()?.mul(a)?;
    if !b_tree.certify_level(n1) {
        return Err(Error::Internal(format!("B tree is not certified at level {n1}")));
    }
    if !c.in_gamma(n2) {
        return Err(Error::Internal(format!("C = {c} is not in Gamma({n2})")));
    }
    if b.mul(&c)? != *a {
        return Err(Error::Internal("B·C does not reproduce A".into()));
    }
    Ok(WohlfahrtSplit { b_tree, c, case })
}

/// `(d, t, s)` with `d = gcd(m1, m2) = t·m1 + s·m2`.
pub fn delta_level_join(m1: u64, m2: u64) -> (u64, BigInt, BigInt) {
    let (d, t, s) = ext_gcd(&BigInt::from(m1), &BigInt::from(m2));
    (u64::try_from(d).expect("gcd of u64 fits"), t, s)
}

/// Checks `U(d x) = U(m1 x)^t · U(m2 x)^s` and the lower-triangular analogue
/// by direct evaluation.
pub fn join_certificate_holds(m1: u64, m2: u64, x: &Vec3) -> Result<bool> {
    let (d, t, s) = delta_level_join(m1, m2);
    let z = crate::ring::Modulus::INTEGERS;
    let scaled = |k: u64| x.scale(&BigInt::from(k));
    for make in [ZornMatrix::upper, ZornMatrix::lower] {
        let lhs = make(scaled(d), z);
        let rhs = make(scaled(m1), z).pow(&t)?.mul(&make(scaled(m2), z).pow(&s)?)?;
        if lhs != rhs {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::Modulus;

    fn z(a: i64, x: [i64; 3], y: [i64; 3], b: i64) -> ZornMatrix {
        ZornMatrix::int(a, x, y, b)
    }

    fn check(a: &ZornMatrix, n1: u64, n2: u64) -> WohlfahrtSplit {
        let split = wohlfahrt_split(a, n1, n2).unwrap();
        assert!(split.b_tree.certify_level(n1));
        assert!(split.c.in_gamma(n2));
        assert_eq!(split.b_tree.eval().unwrap().mul(&split.c).unwrap(), *a);
        split
    }

    #[test]
    fn case1_examples() {
        let s1_sq = z(1, [2, 0, 0], [0; 3], 1);
        let split = check(&s1_sq, 2, 3);
        assert_eq!(split.b_tree, ExprTree::leaf(GeneratorTag::upper_i64([2, 0, 0])));
        assert!(split.c.is_identity());
        assert_eq!(split.case, 1);

        let split = check(&ZornMatrix::identity(Modulus::INTEGERS), 5, 7);
        assert_eq!(split.b_tree, ExprTree::identity());
        assert!(split.c.is_identity());
        assert!(!split.b_tree.has_conj());
    }

    #[test]
    fn case3_then_case2() {
        // a = 3 shares a factor with 3, so case 3 runs first.
        let split = check(&z(3, [2, 0, 0], [4, 0, 0], 3), 2, 3);
        assert_eq!(split.case, 3);
        assert!(split.b_tree.has_conj());
    }

    #[test]
    fn case2_direct_and_degenerate_top_vector() {
        // a = 5 is a unit mod 3 and ≢ 1 mod 3
        let a = z(5, [4, 4, 0], [8, 8, 4], 13);
        let split = check(&a, 4, 3);
        assert_eq!(split.case, 2);
        // x = 0 forces a = ±1 and takes the shift pre-pass
        let a = z(-1, [0; 3], [2, 4, 0], -1);
        assert!(a.in_gamma(2));
        let split = check(&a, 2, 5);
        assert_eq!(split.case, 2);
    }

    #[test]
    fn rejects_non_members() {
        assert!(matches!(wohlfahrt_split(&z(1, [1, 0, 0], [0; 3], 1), 2, 3), Err(Error::NotInGamma(_))));
    }

    #[test]
    fn join_examples() {
        assert_eq!(delta_level_join(4, 6), (2, BigInt::from(-1), BigInt::from(1)));
        assert_eq!(delta_level_join(3, 3), (3, BigInt::from(1), BigInt::from(0)));
        let n = 2u64;
        let s = 3u64;
        let (d, t, u) = delta_level_join(2 * n * n, n * s);
        assert_eq!(d, 2);
        assert_eq!(&t * BigInt::from(8) + &u * BigInt::from(6), BigInt::from(2));
        assert!(join_certificate_holds(2 * n * n, n * s, &Vec3::from_i64([1, 0, 0])).unwrap());
    }

    #[test]
    fn join_certificates_small_box() {
        for m1 in 1..=10 {
            for m2 in 1..=10 {
                for x in [[1, 0, 0], [0, 2, -1], [3, 1, 4], [-2, 5, 7]] {
                    assert!(join_certificate_holds(m1, m2, &Vec3::from_i64(x)).unwrap());
                }
            }
        }
    }
}
