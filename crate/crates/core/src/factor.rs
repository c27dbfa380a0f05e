//! Constructive factorizations of congruence elements of `SLL(2, Z)`.
//!
//! * [`factor_unital`] writes `[[1, v], [u, b]] ∈ Γ(q)` as a product of
//!   axis-aligned elementary matrices of level `q`.
//! * [`decompose_congruence`] writes any `A ∈ Γ(n)` as a product of level-`n`
//!   elementaries and elements of the axis subgroups `Γ_(j)(n) ≅ Γ_SL2(n)`.
//! * [`split_gamma1_delta`] is the same construction arranged so that at
//!   most one factor lies in `Γ_(1)(n)` and the rest lie in `Δ(n)`.
//! * [`sl2_factor`] expands an `SL(2, Z)` matrix into a word in `S` and `T`.
//!
//! Every tree is evaluated before it is returned; a mismatch is reported as
//! [`Error::Internal`] rather than returning a wrong certificate.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::expr::ExprTree;
use crate::ring::{ext_gcd, unimodular_shift};
use crate::zorn::{GeneratorTag, Vec3, ZornMatrix};

fn elementary(upper: bool, v: Vec3) -> ExprTree {
    ExprTree::leaf(if upper { GeneratorTag::UpperElementary(v) } else { GeneratorTag::LowerElementary(v) })
}

/// `[[1, c e_j], [0, 1]]` or its lower analogue; `None` for `c = 0`.
fn axis_leaf(upper: bool, j: usize, c: BigInt) -> Option<ExprTree> {
    if c.is_zero() {
        return None;
    }
    Some(elementary(upper, Vec3::axis_scaled(j, c).expect("axis in range")))
}

/// Product with identity factors dropped.
fn mul_opt(left: Option<ExprTree>, right: Option<ExprTree>) -> Option<ExprTree> {
    match (left, right) {
        (Some(l), Some(r)) => Some(ExprTree::mul(l, r)),
        (l, r) => l.or(r),
    }
}

/// `[[1, 0], [(0, u2, u3), 1]] = L(u3 e3) · (U(−u2 u3 e1) · L(u2 e2))`.
fn lower_23(u2: &BigInt, u3: &BigInt) -> Option<ExprTree> {
    if u2.is_zero() || u3.is_zero() {
        return mul_opt(axis_leaf(false, 2, u2.clone()), axis_leaf(false, 3, u3.clone()));
    }
    mul_opt(
        axis_leaf(false, 3, u3.clone()),
        mul_opt(axis_leaf(true, 1, -(u2 * u3)), axis_leaf(false, 2, u2.clone())),
    )
}

/// `[[1, (0, z2, z3)], [0, 1]] = U(z3 e3) · (L(z2 z3 e1) · U(z2 e2))`.
fn upper_23(z2: &BigInt, z3: &BigInt) -> Option<ExprTree> {
    if z2.is_zero() || z3.is_zero() {
        return mul_opt(axis_leaf(true, 2, z2.clone()), axis_leaf(true, 3, z3.clone()));
    }
    mul_opt(
        axis_leaf(true, 3, z3.clone()),
        mul_opt(axis_leaf(false, 1, z2 * z3), axis_leaf(true, 2, z2.clone())),
    )
}

/// `[[1, 0], [u, 1]] = B · (L(u1 e1) · U((0, u1 u3, −u1 u2)))` with
/// `B = [[1, 0], [(0, u2, u3), 1]]`.
fn lower_tree(u: &Vec3) -> Option<ExprTree> {
    let [u1, u2, u3] = &u.0;
    if u.is_zero() {
        return None;
    }
    if let Some((j, c)) = u.as_axis() {
        return axis_leaf(false, j, c.clone());
    }
    let b_part = lower_23(u2, u3);
    if u1.is_zero() {
        return b_part;
    }
    let correction = upper_23(&(u1 * u3), &-(u1 * u2));
    mul_opt(b_part, mul_opt(axis_leaf(false, 1, u1.clone()), correction))
}

/// Tree for a unital matrix `[[1, v], [u, 1 + v·u]]`:
/// `((C · A3) · A2) · A1` with `A_j = U(v_j e_j)` and
/// `C = L((u1 + v3 v2, u2 − v3 v1, u3 + v2 v1))`.
fn unital_tree(a: &ZornMatrix) -> ExprTree {
    let [v1, v2, v3] = &a.x.0;
    let [u1, u2, u3] = &a.y.0;
    let c = Vec3([u1 + v3 * v2, u2 - v3 * v1, u3 + v2 * v1]);
    let mut acc = lower_tree(&c);
    for (j, vj) in [(3, v3), (2, v2), (1, v1)] {
        acc = mul_opt(acc, axis_leaf(true, j, vj.clone()));
    }
    acc.unwrap_or_else(ExprTree::identity)
}

fn check_value(tree: &ExprTree, target: &ZornMatrix) -> Result<()> {
    let value = tree.eval()?;
    if &value != target {
        return Err(Error::Internal(format!("tree evaluates to {value}, expected {target}")));
    }
    Ok(())
}

/// Axis-aligned elementary (or zero) leaf whose entries lie in `nZ`.
pub fn is_axis_elementary_of_level(tag: &GeneratorTag, n: u64) -> bool {
    match tag.elementary_vector() {
        Some((_, v)) => (v.is_zero() || v.as_axis().is_some()) && v.divisible_by(&BigInt::from(n)),
        None => false,
    }
}

/// `EmbeddedSL2(j, M)` with `M ≡ I (mod n)` and `det M = 1`.
pub fn is_embedded_of_level(tag: &GeneratorTag, n: u64) -> bool {
    match tag {
        GeneratorTag::EmbeddedSL2(_, [[p, q], [r, s]]) => {
            let n = BigInt::from(n);
            let zero_mod = |v: &BigInt| (v % &n).is_zero();
            (p * s - q * r).is_one()
                && zero_mod(&(p - 1u8))
                && zero_mod(q)
                && zero_mod(r)
                && zero_mod(&(s - 1u8))
        }
        _ => false,
    }
}

/// Factors `A = [[1, v], [u, b]] ∈ Γ(q)` into axis-aligned elementaries of level `q`.
pub fn factor_unital(a: &ZornMatrix, q: u64) -> Result<ExprTree> {
    if !a.modulus.is_integers() {
        return Err(Error::PreconditionViolated("factor_unital works over Z".into()));
    }
    if q == 0 {
        return Err(Error::PreconditionViolated("level must be >= 1".into()));
    }
    if !a.a.is_one() {
        return Err(Error::PreconditionViolated(format!("{a} does not have top-left entry 1")));
    }
    if !a.in_gamma(q) {
        return Err(Error::PreconditionViolated(format!("{a} is not in Gamma({q})")));
    }
    let tree = unital_tree(a);
    check_value(&tree, a)?;
    if let Some(bad) = tree.leaves().into_iter().find(|t| !is_axis_elementary_of_level(t, q)) {
        return Err(Error::Internal(format!("leaf {bad} is not an axis elementary of level {q}")));
    }
    Ok(tree)
}

/// Axis `j` such that both off-diagonal vectors are multiples of `e_j`
/// (axis 1 when both vanish).
fn embedding_axis(a: &ZornMatrix) -> Option<usize> {
    let axis_of = |v: &Vec3| if v.is_zero() { Some(None) } else { v.as_axis().map(|(j, _)| Some(j)) };
    match (axis_of(&a.x)?, axis_of(&a.y)?) {
        (None, None) => Some(1),
        (Some(j), None) | (None, Some(j)) => Some(j),
        (Some(i), Some(j)) if i == j => Some(j),
        _ => None,
    }
}

fn embedded_tag(a: &ZornMatrix, j: usize) -> GeneratorTag {
    GeneratorTag::EmbeddedSL2(
        j,
        [[a.a.clone(), a.x.0[j - 1].clone()], [a.y.0[j - 1].clone(), a.b.clone()]],
    )
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Mode {
    /// Leaves may lie in any of the three axis subgroups.
    Axes,
    /// At most one `Γ_(1)(n)` leaf; every other leaf elementary.
    Gamma1Delta,
}

fn decompose(a: &ZornMatrix, n: u64, mode: Mode, pivoted: bool) -> Result<ExprTree> {
    if let Some(j) = embedding_axis(a) {
        if mode == Mode::Axes || j == 1 {
            return Ok(ExprTree::leaf(embedded_tag(a, j)));
        }
    }
    if a.a.is_one() {
        return factor_unital(a, n);
    }
    if a.a.is_zero() {
        // Only possible for n = 1. With T_j A = A' we have A = T_j⁻¹ A'.
        if pivoted {
            return Err(Error::Internal("pivot produced a zero corner".into()));
        }
        let j = (1..=3)
            .find(|&j| !(&a.x.0[j - 1] * &a.y.0[j - 1]).is_zero())
            .ok_or_else(|| Error::Internal(format!("no pivot axis for {a}")))?;
        let pivot = GeneratorTag::Tj(j).matrix_in(a.modulus)?;
        let rest = decompose(&pivot.mul(a)?, n, mode, true)?;
        let pivot_inv = match mode {
            Mode::Axes => ExprTree::leaf(GeneratorTag::sl2_i64(j, [[0, -1], [1, 0]])),
            // [[0, -1], [1, 0]] = (U(-1) L(1)) U(-1) inside the axis-j copy of SL(2, Z)
            Mode::Gamma1Delta => {
                let e = |c: i64| Vec3::axis_scaled(j, BigInt::from(c)).expect("axis in range");
                ExprTree::mul(ExprTree::mul(elementary(true, e(-1)), elementary(false, e(1))), elementary(true, e(-1)))
            }
        };
        return Ok(ExprTree::mul(pivot_inv, rest));
    }

    // Shift the top-right vector so that its first entry is coprime to a:
    // A = B · E with B = [[a, x'], [y, b]] and E unital.
    let (x, y) = (&a.x.0, &a.y.0);
    let (t, s) = unimodular_shift(&a.a, &x[0], &y[1], &y[2])?;
    let shifted = Vec3([&x[0] + &y[1] * &t + &y[2] * &s, &x[1] - &y[0] * &t, &x[2] - &y[0] * &s]);
    let b = ZornMatrix::new(a.a.clone(), shifted, a.y.clone(), a.b.clone(), a.modulus);
    let e = b.inv()?.mul(a)?;
    if !e.a.is_one() {
        return Err(Error::Internal(format!("B⁻¹A = {e} is not unital")));
    }
    let e_tree = factor_unital(&e, n)?;

    // a·x + n·x'1·y = 1 gives G = [[a, x'1 e1], [−n y e1, x]] ∈ Γ_(1)(n), B = F · G.
    let x1 = &b.x.0[0];
    let (g, gx, gy) = ext_gcd(&a.a, &(x1 * BigInt::from(n)));
    if !g.is_one() {
        return Err(Error::Internal(format!("gcd({}, {n}·{x1}) = {g}", a.a)));
    }
    let g_tag = GeneratorTag::EmbeddedSL2(1, [[a.a.clone(), x1.clone()], [-(gy * BigInt::from(n)), gx]]);
    let g_mat = g_tag.matrix_in(a.modulus)?;
    let f = b.mul(&g_mat.inv()?)?;
    if !f.a.is_one() {
        return Err(Error::Internal(format!("BG⁻¹ = {f} is not unital")));
    }
    let f_tree = factor_unital(&f, n)?;
    Ok(ExprTree::mul(ExprTree::mul(f_tree, ExprTree::leaf(g_tag)), e_tree))
}

fn check_gamma(a: &ZornMatrix, n: u64) -> Result<()> {
    if !a.modulus.is_integers() || n == 0 || !a.in_gamma(n) {
        return Err(Error::NotInGamma(format!("{a}, level {n}")));
    }
    Ok(())
}

/// Leaf contract of [`decompose_congruence`].
pub fn decomposition_leaf_ok(tag: &GeneratorTag, n: u64) -> bool {
    is_axis_elementary_of_level(tag, n) || is_embedded_of_level(tag, n)
}

/// Writes `A ∈ Γ(n)` as a tree whose leaves are level-`n` axis elementaries
/// or `Γ_(j)(n)` embeddings.
pub fn decompose_congruence(a: &ZornMatrix, n: u64) -> Result<ExprTree> {
    check_gamma(a, n)?;
    let tree = decompose(a, n, Mode::Axes, false)?;
    check_value(&tree, a)?;
    if let Some(bad) = tree.leaves().into_iter().find(|t| !decomposition_leaf_ok(t, n)) {
        return Err(Error::Internal(format!("leaf {bad} violates the level-{n} contract")));
    }
    Ok(tree)
}

/// Leaf contract of [`split_gamma1_delta`]: at most one `Γ_(1)(n)` leaf,
/// everything else an elementary of level `n`.
pub fn split_contract_ok(tree: &ExprTree, n: u64) -> bool {
    let mut embedded = 0;
    for tag in tree.leaves() {
        match tag {
            GeneratorTag::EmbeddedSL2(1, _) if is_embedded_of_level(tag, n) => embedded += 1,
            _ if tag
                .elementary_vector()
                .is_some_and(|(_, v)| v.divisible_by(&BigInt::from(n))) => {}
            _ => return false,
        }
    }
    embedded <= 1
}

/// `A = G · D`-style factorization with at most one `Γ_(1)(n)` leaf and all
/// other leaves in `Δ(n)`.
pub fn split_gamma1_delta(a: &ZornMatrix, n: u64) -> Result<ExprTree> {
    check_gamma(a, n)?;
    let tree = decompose(a, n, Mode::Gamma1Delta, false)?;
    check_value(&tree, a)?;
    if !split_contract_ok(&tree, n) {
        return Err(Error::Internal(format!("split of {a} violates the Γ_(1)Δ contract")));
    }
    Ok(tree)
}

/// `S = [[1, 1], [0, 1]]`, `T = [[0, 1], [−1, 0]]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sl2Gen {
    S,
    T,
}

pub type Sl2Matrix = [[BigInt; 2]; 2];

/// A word `g1^k1 g2^k2 ...` over `{S, T}`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Sl2Word(pub Vec<(Sl2Gen, BigInt)>);

fn mat2_mul(p: &Sl2Matrix, q: &Sl2Matrix) -> Sl2Matrix {
    [
        [&p[0][0] * &q[0][0] + &p[0][1] * &q[1][0], &p[0][0] * &q[0][1] + &p[0][1] * &q[1][1]],
        [&p[1][0] * &q[0][0] + &p[1][1] * &q[1][0], &p[1][0] * &q[0][1] + &p[1][1] * &q[1][1]],
    ]
}

fn mat2(m: [[i64; 2]; 2]) -> Sl2Matrix {
    m.map(|row| row.map(BigInt::from))
}

impl Sl2Word {
    pub fn eval(&self) -> Sl2Matrix {
        let mut acc = mat2([[1, 0], [0, 1]]);
        for (g, k) in &self.0 {
            let factor = match g {
                Sl2Gen::S => [[BigInt::one(), k.clone()], [BigInt::zero(), BigInt::one()]],
                Sl2Gen::T => {
                    let mut p = mat2([[1, 0], [0, 1]]);
                    let turns = k.mod_floor(&BigInt::from(4)).to_u32().expect("reduced mod 4");
                    for _ in 0..turns {
                        p = mat2_mul(&p, &mat2([[0, 1], [-1, 0]]));
                    }
                    p
                }
            };
            acc = mat2_mul(&acc, &factor);
        }
        acc
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    fn push(&mut self, g: Sl2Gen, k: BigInt) {
        let k = if g == Sl2Gen::T { k.mod_floor(&BigInt::from(4)) } else { k };
        if k.is_zero() {
            return;
        }
        match self.0.last_mut() {
            Some((last, e)) if *last == g => {
                *e += k;
                if g == Sl2Gen::T {
                    *e = e.mod_floor(&BigInt::from(4));
                }
                if e.is_zero() {
                    self.0.pop();
                }
            }
            _ => self.0.push((g, k)),
        }
    }
}

impl fmt::Display for Sl2Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "I");
        }
        let parts: Vec<String> = self
            .0
            .iter()
            .map(|(g, k)| {
                let name = match g {
                    Sl2Gen::S => "S",
                    Sl2Gen::T => "T",
                };
                if k.is_one() {
                    name.to_string()
                } else {
                    format!("{name}^{k}")
                }
            })
            .collect();
        write!(f, "{}", parts.join(" "))
    }
}

/// Euclidean (continued-fraction) decomposition of `M ∈ SL(2, Z)` into `S`, `T`.
pub fn sl2_factor(m: &Sl2Matrix) -> Result<Sl2Word> {
    let det = &m[0][0] * &m[1][1] - &m[0][1] * &m[1][0];
    if !det.is_one() {
        return Err(Error::InvalidSL2(det.to_string()));
    }
    let [[mut a, mut b], [mut c, mut d]] = m.clone();
    let mut word = Sl2Word::default();
    while !c.is_zero() {
        // S^-k M brings |a| below |c|, then T^-1 swaps rows up to sign.
        let r = a.mod_floor(&c.abs());
        let k = (&a - &r) / &c;
        b -= &k * &d;
        a = r;
        word.push(Sl2Gen::S, k);
        word.push(Sl2Gen::T, BigInt::one());
        (a, b, c, d) = (-c, -d, a, b);
    }
    // Now M = [[±1, b], [0, ±1]].
    if a.is_one() {
        word.push(Sl2Gen::S, b);
    } else {
        word.push(Sl2Gen::T, BigInt::from(2));
        word.push(Sl2Gen::S, -b);
    }
    debug_assert!(d.abs().is_one());
    Ok(word)
}

/// Number of Euclidean division steps used by [`sl2_factor`] on `M`.
pub fn euclid_steps(m: &Sl2Matrix) -> usize {
    let (mut a, mut c) = (m[0][0].clone(), m[1][0].clone());
    let mut steps = 0;
    while !c.is_zero() {
        let r = a.mod_floor(&c.abs());
        (a, c) = (-c, r);
        steps += 1;
    }
    steps
}
