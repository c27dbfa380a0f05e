//! The Zorn vector-matrix algebra.
//!
//! An element is a 2×2 array `[[a, x], [y, b]]` with scalar diagonal and
//! 3-vector off-diagonal entries. The product is
//!
//! ```text
//! [[a1, x1], [y1, b1]] [[a2, x2], [y2, b2]] =
//!   [[a1 a2 + x1·y2,              a1 x2 + b2 x1 − y1×y2],
//!    [a2 y1 + b1 y2 + x1×x2,      b1 b2 + y1·x2        ]]
//! ```
//!
//! with the right-handed cross product `e1 × e2 = e3`. The algebra is
//! alternative but not associative; `det = ab − x·y` is multiplicative.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::ring::Modulus;

/// An exact 3-vector.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Vec3(pub [BigInt; 3]);

impl Vec3 {
    pub fn zero() -> Self {
        Vec3(Default::default())
    }

    pub fn from_i64(v: [i64; 3]) -> Self {
        Vec3(v.map(BigInt::from))
    }

    /// The standard basis vector `e_j`, `j` in `1..=3`.
    pub fn axis(j: usize) -> Result<Self> {
        Self::axis_scaled(j, BigInt::one())
    }

    /// `c · e_j`.
    pub fn axis_scaled(j: usize, c: BigInt) -> Result<Self> {
        if !(1..=3).contains(&j) {
            return Err(Error::InvalidAxis(j));
        }
        let mut v = Self::zero();
        v.0[j - 1] = c;
        Ok(v)
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(Zero::is_zero)
    }

    /// `Some((j, c))` when the vector is `c·e_j` with `c != 0`.
    pub fn as_axis(&self) -> Option<(usize, &BigInt)> {
        let mut nonzero = self.0.iter().enumerate().filter(|(_, c)| !c.is_zero());
        let (i, c) = nonzero.next()?;
        nonzero.next().is_none().then_some((i + 1, c))
    }

    pub fn dot(&self, other: &Vec3) -> BigInt {
        let [a1, a2, a3] = &self.0;
        let [b1, b2, b3] = &other.0;
        a1 * b1 + a2 * b2 + a3 * b3
    }

    pub fn cross(&self, other: &Vec3) -> Vec3 {
        let [a1, a2, a3] = &self.0;
        let [b1, b2, b3] = &other.0;
        Vec3([a2 * b3 - a3 * b2, a3 * b1 - a1 * b3, a1 * b2 - a2 * b1])
    }

    pub fn add(&self, other: &Vec3) -> Vec3 {
        let [a1, a2, a3] = &self.0;
        let [b1, b2, b3] = &other.0;
        Vec3([a1 + b1, a2 + b2, a3 + b3])
    }

    pub fn sub(&self, other: &Vec3) -> Vec3 {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Vec3 {
        Vec3(self.0.clone().map(|c| -c))
    }

    pub fn scale(&self, c: &BigInt) -> Vec3 {
        Vec3(self.0.clone().map(|x| x * c))
    }

    pub fn reduce(&self, modulus: Modulus) -> Vec3 {
        Vec3(self.0.clone().map(|c| modulus.reduce(&c)))
    }

    /// Every component is divisible by `n` (`n = 0` means "is zero").
    pub fn divisible_by(&self, n: &BigInt) -> bool {
        if n.is_zero() {
            return self.is_zero();
        }
        self.0.iter().all(|c| (c % n).is_zero())
    }
}

impl fmt::Display for Vec3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a, b, c] = &self.0;
        write!(f, "({a},{b},{c})")
    }
}

/// An element `[[a, x], [y, b]]` of the Zorn algebra over `Z` or `Z/mZ`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ZornMatrix {
    pub a: BigInt,
    /// Top-right vector.
    pub x: Vec3,
    /// Bottom-left vector.
    pub y: Vec3,
    pub b: BigInt,
    pub modulus: Modulus,
}

impl ZornMatrix {
    /// Builds a matrix and reduces its components under `modulus`.
    pub fn new(a: BigInt, x: Vec3, y: Vec3, b: BigInt, modulus: Modulus) -> Self {
        ZornMatrix {
            a: modulus.reduce(&a),
            x: x.reduce(modulus),
            y: y.reduce(modulus),
            b: modulus.reduce(&b),
            modulus,
        }
    }

    pub fn from_i64(a: i64, x: [i64; 3], y: [i64; 3], b: i64, modulus: Modulus) -> Self {
        Self::new(a.into(), Vec3::from_i64(x), Vec3::from_i64(y), b.into(), modulus)
    }

    /// Integer matrix `Z[a | x | y | b]`.
    pub fn int(a: i64, x: [i64; 3], y: [i64; 3], b: i64) -> Self {
        Self::from_i64(a, x, y, b, Modulus::INTEGERS)
    }

    pub fn identity(modulus: Modulus) -> Self {
        Self::new(BigInt::one(), Vec3::zero(), Vec3::zero(), BigInt::one(), modulus)
    }

    pub fn zero(modulus: Modulus) -> Self {
        Self::new(BigInt::zero(), Vec3::zero(), Vec3::zero(), BigInt::zero(), modulus)
    }

    /// `[[1, v], [0, 1]]`.
    pub fn upper(v: Vec3, modulus: Modulus) -> Self {
        Self::new(BigInt::one(), v, Vec3::zero(), BigInt::one(), modulus)
    }

    /// `[[1, 0], [v, 1]]`.
    pub fn lower(v: Vec3, modulus: Modulus) -> Self {
        Self::new(BigInt::one(), Vec3::zero(), v, BigInt::one(), modulus)
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::identity(self.modulus)
    }

    fn check_moduli(&self, other: &ZornMatrix) -> Result<()> {
        if self.modulus != other.modulus {
            return Err(Error::ModulusMismatch(self.modulus.0, other.modulus.0));
        }
        Ok(())
    }

    /// The product rule of the algebra.
    pub fn mul(&self, other: &ZornMatrix) -> Result<ZornMatrix> {
        self.check_moduli(other)?;
        let (a1, x1, y1, b1) = (&self.a, &self.x, &self.y, &self.b);
        let (a2, x2, y2, b2) = (&other.a, &other.x, &other.y, &other.b);
        let a = a1 * a2 + x1.dot(y2);
        let x = x2.scale(a1).add(&x1.scale(b2)).sub(&y1.cross(y2));
        let y = y1.scale(a2).add(&y2.scale(b1)).add(&x1.cross(x2));
        let b = b1 * b2 + y1.dot(x2);
        Ok(ZornMatrix::new(a, x, y, b, self.modulus))
    }

    pub fn add(&self, other: &ZornMatrix) -> Result<ZornMatrix> {
        self.check_moduli(other)?;
        Ok(ZornMatrix::new(
            &self.a + &other.a,
            self.x.add(&other.x),
            self.y.add(&other.y),
            &self.b + &other.b,
            self.modulus,
        ))
    }

    pub fn neg(&self) -> ZornMatrix {
        ZornMatrix::new(-&self.a, self.x.neg(), self.y.neg(), -&self.b, self.modulus)
    }

    pub fn scale(&self, c: &BigInt) -> ZornMatrix {
        ZornMatrix::new(&self.a * c, self.x.scale(c), self.y.scale(c), &self.b * c, self.modulus)
    }

    /// `ab − x·y`, reduced under the modulus.
    pub fn det(&self) -> BigInt {
        self.modulus.reduce(&(&self.a * &self.b - self.x.dot(&self.y)))
    }

    /// `(1/det) [[b, −x], [−y, a]]`.
    pub fn inv(&self) -> Result<ZornMatrix> {
        let det = self.det();
        let det_inv = self
            .modulus
            .inverse(&det)
            .map_err(|_| Error::NotInvertible(format!("{self} has determinant {det}")))?;
        let adj = ZornMatrix::new(self.b.clone(), self.x.neg(), self.y.neg(), self.a.clone(), self.modulus);
        Ok(adj.scale(&det_inv))
    }

    /// Componentwise reduction of an integer matrix into `Z/mZ`.
    pub fn reduce_mod(&self, m: u64) -> Result<ZornMatrix> {
        if m == 0 {
            return Err(Error::PreconditionViolated("reduction modulus must be >= 1".into()));
        }
        if !self.modulus.is_integers() && self.modulus.0 % m != 0 {
            return Err(Error::NotDivisor(m, self.modulus.0));
        }
        let target = Modulus(m);
        Ok(ZornMatrix::new(self.a.clone(), self.x.clone(), self.y.clone(), self.b.clone(), target))
    }

    /// Determinant one.
    pub fn is_sll(&self) -> bool {
        self.det() == self.modulus.reduce(&BigInt::one())
    }

    /// Determinant a unit.
    pub fn is_gll(&self) -> bool {
        self.modulus.is_unit(&self.det())
    }

    /// `A ∈ Γ(n)`: determinant one and `A ≡ I (mod n)` componentwise.
    pub fn in_gamma(&self, n: u64) -> bool {
        if n == 0 || !self.is_sll() {
            return false;
        }
        let big_n = BigInt::from(n);
        let one_mod = |v: &BigInt| ((v - 1u8) % &big_n).is_zero();
        one_mod(&self.a) && one_mod(&self.b) && self.x.divisible_by(&big_n) && self.y.divisible_by(&big_n)
    }

    /// `A^e` inside the cyclic group generated by `A`; negative `e` uses the inverse.
    pub fn pow(&self, e: &BigInt) -> Result<ZornMatrix> {
        let mut base = if e.is_negative() { self.inv()? } else { self.clone() };
        let mut e = e.abs();
        let mut acc = ZornMatrix::identity(self.modulus);
        let two = BigInt::from(2);
        while !e.is_zero() {
            if (&e % &two).is_one() {
                acc = acc.mul(&base)?;
            }
            base = base.mul(&base)?;
            e /= &two;
        }
        Ok(acc)
    }

    /// Canonical JSON object `{"a", "x", "y", "b", "mod"}` with integer values.
    pub fn to_json(&self) -> Value {
        let vec = |v: &Vec3| Value::Array(v.0.iter().map(int_value).collect());
        json!({
            "a": int_value(&self.a),
            "x": vec(&self.x),
            "y": vec(&self.y),
            "b": int_value(&self.b),
            "mod": self.modulus.0,
        })
    }

    pub fn from_json(value: &Value) -> Result<ZornMatrix> {
        let obj = value
            .as_object()
            .ok_or_else(|| Error::Malformed(format!("matrix must be a JSON object, got {value}")))?;
        for key in obj.keys() {
            if !["a", "x", "y", "b", "mod"].contains(&key.as_str()) {
                return Err(Error::Malformed(format!("unknown matrix field {key:?}")));
            }
        }
        let field = |k: &str| obj.get(k).ok_or_else(|| Error::Malformed(format!("matrix is missing {k:?}")));
        let vec = |k: &str| -> Result<Vec3> {
            let arr = field(k)?
                .as_array()
                .filter(|a| a.len() == 3)
                .ok_or_else(|| Error::Malformed(format!("{k:?} must be an array of 3 integers")))?;
            Ok(Vec3([parse_int(&arr[0])?, parse_int(&arr[1])?, parse_int(&arr[2])?]))
        };
        let modulus = match obj.get("mod") {
            None => Modulus::INTEGERS,
            Some(v) => {
                let m = parse_int(v)?;
                let m: u64 = (&m)
                    .try_into()
                    .map_err(|_| Error::Malformed(format!("\"mod\" must be a nonnegative 64-bit integer, got {m}")))?;
                Modulus(m)
            }
        };
        Ok(ZornMatrix::new(parse_int(field("a")?)?, vec("x")?, vec("y")?, parse_int(field("b")?)?, modulus))
    }

    pub fn to_canonical_string(&self) -> String {
        self.to_json().to_string()
    }
}

impl FromStr for ZornMatrix {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let value: Value = serde_json::from_str(s).map_err(|e| Error::Malformed(e.to_string()))?;
        ZornMatrix::from_json(&value)
    }
}

impl fmt::Display for ZornMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Z[{}|{}|{}|{}]", self.a, self.x, self.y, self.b)?;
        if !self.modulus.is_integers() {
            write!(f, " mod {}", self.modulus.0)?;
        }
        Ok(())
    }
}

/// Exact JSON integer (arbitrary precision).
pub(crate) fn int_value(v: &BigInt) -> Value {
    Value::Number(serde_json::Number::from_str(&v.to_string()).expect("integers are valid JSON numbers"))
}

/// Accepts JSON integers of any size or decimal strings.
pub(crate) fn parse_int(value: &Value) -> Result<BigInt> {
    let text = match value {
        Value::Number(n) => n.to_string(),
        Value::String(s) => s.clone(),
        other => return Err(Error::Malformed(format!("expected an integer, got {other}"))),
    };
    BigInt::from_str(&text).map_err(|_| Error::Malformed(format!("expected an integer, got {text}")))
}

pub fn zmul(a: &ZornMatrix, b: &ZornMatrix) -> Result<ZornMatrix> {
    a.mul(b)
}

pub fn zadd(a: &ZornMatrix, b: &ZornMatrix) -> Result<ZornMatrix> {
    a.add(b)
}

pub fn zneg(a: &ZornMatrix) -> ZornMatrix {
    a.neg()
}

pub fn zdet(a: &ZornMatrix) -> BigInt {
    a.det()
}

pub fn zinv(a: &ZornMatrix) -> Result<ZornMatrix> {
    a.inv()
}

pub fn reduce_mod(a: &ZornMatrix, m: u64) -> Result<ZornMatrix> {
    a.reduce_mod(m)
}

pub fn is_sll(a: &ZornMatrix) -> bool {
    a.is_sll()
}

pub fn is_gll(a: &ZornMatrix) -> bool {
    a.is_gll()
}

/// True iff `A` has determinant one and is congruent to `I` modulo `n`.
pub fn gamma_membership(a: &ZornMatrix, n: u64) -> bool {
    a.in_gamma(n)
}

/// Named generators and their embeddings.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum GeneratorTag {
    /// `[[1, v], [0, 1]]`.
    UpperElementary(Vec3),
    /// `[[1, 0], [v, 1]]`.
    LowerElementary(Vec3),
    /// `S_j^a = [[1, a e_j], [0, 1]]`.
    Sj(usize, BigInt),
    /// `T_j = [[0, e_j], [−e_j, 0]]`.
    Tj(usize),
    /// `U_j = [[0, e_j], [−e_j, 1]]`.
    Uj(usize),
    /// `[[p, q], [r, s]] ∈ SL(2, Z)` placed along axis `j`: `Z[p | q e_j | r e_j | s]`.
    EmbeddedSL2(usize, [[BigInt; 2]; 2]),
}

impl GeneratorTag {
    pub fn upper_i64(v: [i64; 3]) -> Self {
        GeneratorTag::UpperElementary(Vec3::from_i64(v))
    }

    pub fn lower_i64(v: [i64; 3]) -> Self {
        GeneratorTag::LowerElementary(Vec3::from_i64(v))
    }

    pub fn sl2_i64(j: usize, m: [[i64; 2]; 2]) -> Self {
        GeneratorTag::EmbeddedSL2(j, m.map(|row| row.map(BigInt::from)))
    }

    /// The matrix over the given ring.
    pub fn matrix_in(&self, modulus: Modulus) -> Result<ZornMatrix> {
        let one = BigInt::one();
        Ok(match self {
            GeneratorTag::UpperElementary(v) => ZornMatrix::upper(v.clone(), modulus),
            GeneratorTag::LowerElementary(v) => ZornMatrix::lower(v.clone(), modulus),
            GeneratorTag::Sj(j, a) => ZornMatrix::upper(Vec3::axis_scaled(*j, a.clone())?, modulus),
            GeneratorTag::Tj(j) => {
                let e = Vec3::axis(*j)?;
                ZornMatrix::new(BigInt::zero(), e.clone(), e.neg(), BigInt::zero(), modulus)
            }
            GeneratorTag::Uj(j) => {
                let e = Vec3::axis(*j)?;
                ZornMatrix::new(BigInt::zero(), e.clone(), e.neg(), one, modulus)
            }
            GeneratorTag::EmbeddedSL2(j, [[p, q], [r, s]]) => {
                let det = p * s - q * r;
                if !det.is_one() {
                    return Err(Error::InvalidSL2(det.to_string()));
                }
                ZornMatrix::new(
                    p.clone(),
                    Vec3::axis_scaled(*j, q.clone())?,
                    Vec3::axis_scaled(*j, r.clone())?,
                    s.clone(),
                    modulus,
                )
            }
        })
    }

    /// Elementary vector `(is_upper, v)` for the unipotent tags.
    pub fn elementary_vector(&self) -> Option<(bool, Vec3)> {
        match self {
            GeneratorTag::UpperElementary(v) => Some((true, v.clone())),
            GeneratorTag::LowerElementary(v) => Some((false, v.clone())),
            GeneratorTag::Sj(j, a) => Vec3::axis_scaled(*j, a.clone()).ok().map(|v| (true, v)),
            _ => None,
        }
    }

    pub fn to_json(&self) -> Value {
        let vec = |v: &Vec3| Value::Array(v.0.iter().map(int_value).collect());
        match self {
            GeneratorTag::UpperElementary(v) => json!({ "upper": vec(v) }),
            GeneratorTag::LowerElementary(v) => json!({ "lower": vec(v) }),
            GeneratorTag::Sj(j, a) => json!({ "s": { "j": j, "a": int_value(a) } }),
            GeneratorTag::Tj(j) => json!({ "t": { "j": j } }),
            GeneratorTag::Uj(j) => json!({ "u": { "j": j } }),
            GeneratorTag::EmbeddedSL2(j, m) => {
                let rows: Vec<Value> = m.iter().map(|row| Value::Array(row.iter().map(int_value).collect())).collect();
                json!({ "sl2": { "j": j, "m": rows } })
            }
        }
    }

    pub fn from_json(value: &Value) -> Result<GeneratorTag> {
        let obj = value
            .as_object()
            .filter(|o| o.len() == 1)
            .ok_or_else(|| Error::Malformed(format!("generator tag must be a one-key object, got {value}")))?;
        let (kind, body) = obj.iter().next().expect("one key");
        let vec = |v: &Value| -> Result<Vec3> {
            let arr = v
                .as_array()
                .filter(|a| a.len() == 3)
                .ok_or_else(|| Error::Malformed(format!("expected 3 integers, got {v}")))?;
            Ok(Vec3([parse_int(&arr[0])?, parse_int(&arr[1])?, parse_int(&arr[2])?]))
        };
        let axis = |v: &Value| -> Result<usize> {
            let j = v
                .get("j")
                .and_then(Value::as_u64)
                .ok_or_else(|| Error::Malformed(format!("missing axis \"j\" in {v}")))?;
            if !(1..=3).contains(&j) {
                return Err(Error::InvalidAxis(j as usize));
            }
            Ok(j as usize)
        };
        match kind.as_str() {
            "upper" => Ok(GeneratorTag::UpperElementary(vec(body)?)),
            "lower" => Ok(GeneratorTag::LowerElementary(vec(body)?)),
            "s" => {
                let a = body.get("a").ok_or_else(|| Error::Malformed("S tag needs \"a\"".into()))?;
                Ok(GeneratorTag::Sj(axis(body)?, parse_int(a)?))
            }
            "t" => Ok(GeneratorTag::Tj(axis(body)?)),
            "u" => Ok(GeneratorTag::Uj(axis(body)?)),
            "sl2" => {
                let rows = body
                    .get("m")
                    .and_then(Value::as_array)
                    .filter(|r| r.len() == 2)
                    .ok_or_else(|| Error::Malformed("sl2 tag needs a 2x2 \"m\"".into()))?;
                let row = |r: &Value| -> Result<[BigInt; 2]> {
                    let r = r
                        .as_array()
                        .filter(|r| r.len() == 2)
                        .ok_or_else(|| Error::Malformed("sl2 rows must have 2 entries".into()))?;
                    Ok([parse_int(&r[0])?, parse_int(&r[1])?])
                };
                Ok(GeneratorTag::EmbeddedSL2(axis(body)?, [row(&rows[0])?, row(&rows[1])?]))
            }
            other => Err(Error::Malformed(format!("unknown generator kind {other:?}"))),
        }
    }
}

impl fmt::Display for GeneratorTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GeneratorTag::UpperElementary(v) => write!(f, "U{v}"),
            GeneratorTag::LowerElementary(v) => write!(f, "L{v}"),
            GeneratorTag::Sj(j, a) => write!(f, "S{j}^{a}"),
            GeneratorTag::Tj(j) => write!(f, "T{j}"),
            GeneratorTag::Uj(j) => write!(f, "U{j}"),
            GeneratorTag::EmbeddedSL2(j, [[p, q], [r, s]]) => write!(f, "G{j}[[{p},{q}],[{r},{s}]]"),
        }
    }
}

/// The integer matrix of a generator tag.
pub fn generator(tag: &GeneratorTag) -> Result<ZornMatrix> {
    tag.matrix_in(Modulus::INTEGERS)
}

/// `[A, B] = ((A·B)·A⁻¹)·B⁻¹`.
pub fn commutator(a: &ZornMatrix, b: &ZornMatrix) -> Result<ZornMatrix> {
    a.mul(b)?.mul(&a.inv()?)?.mul(&b.inv()?)
}

/// `[A, B, C] = ((A·B)·C)·(A·(B·C))⁻¹`.
pub fn associator(a: &ZornMatrix, b: &ZornMatrix, c: &ZornMatrix) -> Result<ZornMatrix> {
    let left = a.mul(b)?.mul(c)?;
    let right = a.mul(&b.mul(c)?)?;
    left.mul(&right.inv()?)
}

/// Outcome of the alternativity and Moufang identity checks on one triple.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MoufangReport {
    /// `(AA)B = A(AB)`
    pub left_alternative: bool,
    /// `A(BB) = (AB)B`
    pub right_alternative: bool,
    /// `(AB)A = A(BA)`
    pub flexible: bool,
    /// `((AB)A)C = A(B(AC))`
    pub moufang: bool,
}

impl MoufangReport {
    pub fn all(&self) -> bool {
        self.left_alternative && self.right_alternative && self.flexible && self.moufang
    }
}

pub fn moufang_report(a: &ZornMatrix, b: &ZornMatrix, c: &ZornMatrix) -> Result<MoufangReport> {
    for m in [a, b, c] {
        if !m.is_gll() {
            return Err(Error::NotInvertible(m.to_string()));
        }
    }
    let ab = a.mul(b)?;
    Ok(MoufangReport {
        left_alternative: a.mul(a)?.mul(b)? == a.mul(&ab)?,
        right_alternative: a.mul(&b.mul(b)?)? == ab.mul(b)?,
        flexible: ab.mul(a)? == a.mul(&b.mul(a)?)?,
        moufang: ab.mul(a)?.mul(c)? == a.mul(&b.mul(&a.mul(c)?)?)?,
    })
}
