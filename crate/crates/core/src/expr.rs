//! Parenthesized products of generators.
//!
//! The loop is not associative, so factorizations are recorded as binary
//! trees. A `Conj(T, t)` node stands for `(T · t) · T⁻¹`; keeping it as its
//! own node lets [`ExprTree::certify_level`] recognize membership in a
//! normal closure syntactically.

use std::fmt;

use num_bigint::BigInt;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::ring::Modulus;
use crate::zorn::{GeneratorTag, ZornMatrix};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ExprTree {
    Leaf(GeneratorTag),
    Mul(Box<ExprTree>, Box<ExprTree>),
    Conj { outer: ZornMatrix, inner: Box<ExprTree> },
}

impl ExprTree {
    pub fn leaf(tag: GeneratorTag) -> Self {
        ExprTree::Leaf(tag)
    }

    pub fn mul(left: ExprTree, right: ExprTree) -> Self {
        ExprTree::Mul(Box::new(left), Box::new(right))
    }

    pub fn conj(outer: ZornMatrix, inner: ExprTree) -> Self {
        ExprTree::Conj { outer, inner: Box::new(inner) }
    }

    /// The empty product, written as `[[1, 0], [0, 1]]` via a zero upper leaf.
    pub fn identity() -> Self {
        ExprTree::Leaf(GeneratorTag::UpperElementary(Default::default()))
    }

    /// Evaluates over `Z`.
    pub fn eval(&self) -> Result<ZornMatrix> {
        self.eval_in(Modulus::INTEGERS)
    }

    /// Evaluates bottom-up over the given ring, respecting the tree shape.
    pub fn eval_in(&self, modulus: Modulus) -> Result<ZornMatrix> {
        match self {
            ExprTree::Leaf(tag) => tag.matrix_in(modulus),
            ExprTree::Mul(l, r) => l.eval_in(modulus)?.mul(&r.eval_in(modulus)?),
            ExprTree::Conj { outer, inner } => {
                if outer.modulus != modulus {
                    return Err(Error::ModulusMismatch(outer.modulus.0, modulus.0));
                }
                let outer_inv = outer.inv()?;
                outer.mul(&inner.eval_in(modulus)?)?.mul(&outer_inv)
            }
        }
    }

    /// The same tree with every conjugating matrix reduced mod `m`; evaluate
    /// it with `eval_in(Modulus(m))`.
    pub fn reduce_mod(&self, m: u64) -> Result<ExprTree> {
        Ok(match self {
            ExprTree::Leaf(tag) => ExprTree::Leaf(tag.clone()),
            ExprTree::Mul(l, r) => ExprTree::mul(l.reduce_mod(m)?, r.reduce_mod(m)?),
            ExprTree::Conj { outer, inner } => ExprTree::conj(outer.reduce_mod(m)?, inner.reduce_mod(m)?),
        })
    }

    /// True iff every leaf is an upper or lower elementary matrix whose vector
    /// lies in `(nZ)^3`; conjugating matrices are unrestricted. A true result
    /// certifies that the value lies in `Δ(nZ)`.
    pub fn certify_level(&self, n: u64) -> bool {
        let n = BigInt::from(n);
        self.leaves().iter().all(|tag| match tag.elementary_vector() {
            Some((_, v)) => v.divisible_by(&n),
            None => false,
        }) && self.conj_outers_invertible()
    }

    fn conj_outers_invertible(&self) -> bool {
        match self {
            ExprTree::Leaf(_) => true,
            ExprTree::Mul(l, r) => l.conj_outers_invertible() && r.conj_outers_invertible(),
            ExprTree::Conj { outer, inner } => outer.is_gll() && inner.conj_outers_invertible(),
        }
    }

    /// Leaves from left to right.
    pub fn leaves(&self) -> Vec<&GeneratorTag> {
        let mut out = Vec::new();
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves<'a>(&'a self, out: &mut Vec<&'a GeneratorTag>) {
        match self {
            ExprTree::Leaf(tag) => out.push(tag),
            ExprTree::Mul(l, r) => {
                l.collect_leaves(out);
                r.collect_leaves(out);
            }
            ExprTree::Conj { inner, .. } => inner.collect_leaves(out),
        }
    }

    /// Node count.
    pub fn size(&self) -> usize {
        match self {
            ExprTree::Leaf(_) => 1,
            ExprTree::Mul(l, r) => 1 + l.size() + r.size(),
            ExprTree::Conj { inner, .. } => 1 + inner.size(),
        }
    }

    pub fn has_conj(&self) -> bool {
        match self {
            ExprTree::Leaf(_) => false,
            ExprTree::Mul(l, r) => l.has_conj() || r.has_conj(),
            ExprTree::Conj { .. } => true,
        }
    }

    /// `{"leaf": tag} | {"mul": [l, r]} | {"conj": {"outer": matrix, "inner": t}}`.
    pub fn to_json(&self) -> Value {
        match self {
            ExprTree::Leaf(tag) => json!({ "leaf": tag.to_json() }),
            ExprTree::Mul(l, r) => json!({ "mul": [l.to_json(), r.to_json()] }),
            ExprTree::Conj { outer, inner } => {
                json!({ "conj": { "outer": outer.to_json(), "inner": inner.to_json() } })
            }
        }
    }

    pub fn from_json(value: &Value) -> Result<ExprTree> {
        let obj = value
            .as_object()
            .filter(|o| o.len() == 1)
            .ok_or_else(|| Error::Malformed(format!("tree node must be a one-key object, got {value}")))?;
        let (kind, body) = obj.iter().next().expect("one key");
        match kind.as_str() {
            "leaf" => Ok(ExprTree::Leaf(GeneratorTag::from_json(body)?)),
            "mul" => {
                let pair = body
                    .as_array()
                    .filter(|a| a.len() == 2)
                    .ok_or_else(|| Error::Malformed("\"mul\" needs exactly two children".into()))?;
                Ok(ExprTree::mul(ExprTree::from_json(&pair[0])?, ExprTree::from_json(&pair[1])?))
            }
            "conj" => {
                let outer = body.get("outer").ok_or_else(|| Error::Malformed("\"conj\" needs \"outer\"".into()))?;
                let inner = body.get("inner").ok_or_else(|| Error::Malformed("\"conj\" needs \"inner\"".into()))?;
                Ok(ExprTree::conj(ZornMatrix::from_json(outer)?, ExprTree::from_json(inner)?))
            }
            other => Err(Error::Malformed(format!("unknown tree node {other:?}"))),
        }
    }
}

impl fmt::Display for ExprTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExprTree::Leaf(tag) => write!(f, "{tag}"),
            ExprTree::Mul(l, r) => write!(f, "({l} {r})"),
            ExprTree::Conj { outer, inner } => write!(f, "conj[{outer}]({inner})"),
        }
    }
}

pub fn eval(t: &ExprTree) -> Result<ZornMatrix> {
    t.eval()
}

pub fn certify_level(t: &ExprTree, n: u64) -> bool {
    t.certify_level(n)
}

pub fn leaves(t: &ExprTree) -> Vec<&GeneratorTag> {
    t.leaves()
}

pub fn tree_size(t: &ExprTree) -> usize {
    t.size()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn up(v: [i64; 3]) -> ExprTree {
        ExprTree::leaf(GeneratorTag::upper_i64(v))
    }

    fn low(v: [i64; 3]) -> ExprTree {
        ExprTree::leaf(GeneratorTag::lower_i64(v))
    }

    #[test]
    fn eval_examples() {
        let s1 = ExprTree::leaf(GeneratorTag::Sj(1, BigInt::from(1)));
        assert_eq!(s1.eval().unwrap(), ZornMatrix::int(1, [1, 0, 0], [0; 3], 1));

        let t = ExprTree::mul(low([0, 2, 0]), ExprTree::mul(low([2, 0, 0]), up([0, 0, -4])));
        assert_eq!(t.eval().unwrap(), ZornMatrix::int(1, [0; 3], [2, 2, 0], 1));

        let outer = ZornMatrix::int(2, [1, 1, 0], [1, 0, 1], 1);
        let c = ExprTree::conj(outer, ExprTree::identity());
        assert!(c.eval().unwrap().is_identity());

        let singular = ExprTree::conj(ZornMatrix::int(2, [0; 3], [0; 3], 1), ExprTree::identity());
        assert!(matches!(singular.eval(), Err(Error::NotInvertible(_))));
        let mixed = ExprTree::conj(ZornMatrix::identity(Modulus(3)), ExprTree::identity());
        assert!(matches!(mixed.eval(), Err(Error::ModulusMismatch(..))));
    }

    #[test]
    fn conj_uses_documented_association() {
        let outer = ZornMatrix::int(0, [1, 1, 0], [0, -1, 1], 0);
        let inner = ExprTree::mul(low([1, 0, 0]), up([0, 2, 0]));
        let value = inner.eval().unwrap();
        let expected = outer.mul(&value).unwrap().mul(&outer.inv().unwrap()).unwrap();
        assert_eq!(ExprTree::conj(outer, inner).eval().unwrap(), expected);
    }

    #[test]
    fn certify_level_examples() {
        assert!(up([2, 0, 4]).certify_level(2));
        assert!(!ExprTree::leaf(GeneratorTag::Sj(1, BigInt::from(1))).certify_level(2));
        assert!(ExprTree::leaf(GeneratorTag::Sj(1, BigInt::from(4))).certify_level(2));
        let c = ExprTree::conj(ZornMatrix::int(1, [1, 0, 0], [1, 0, 0], 2), low([0, 6, 0]));
        assert!(c.certify_level(3));
        assert!(c.certify_level(6) && c.certify_level(1) && !c.certify_level(4));
        assert!(!ExprTree::leaf(GeneratorTag::Tj(1)).certify_level(1));
        assert!(!ExprTree::leaf(GeneratorTag::sl2_i64(1, [[1, 2], [0, 1]])).certify_level(2));
    }

    #[test]
    fn leaves_and_size() {
        let t = ExprTree::leaf(GeneratorTag::Tj(1));
        assert_eq!(t.leaves(), vec![&GeneratorTag::Tj(1)]);
        assert_eq!(t.size(), 1);
        let m = ExprTree::mul(up([1, 0, 0]), low([0, 1, 0]));
        assert_eq!(m.leaves(), vec![&GeneratorTag::upper_i64([1, 0, 0]), &GeneratorTag::lower_i64([0, 1, 0])]);
        assert_eq!(m.size(), 3);
        let fundamental = ExprTree::mul(low([0, 2, 0]), ExprTree::mul(low([2, 0, 0]), up([0, 0, -4])));
        assert_eq!(fundamental.leaves().len(), 3);
        assert_eq!(fundamental.size(), 5);
    }

    #[test]
    fn reduction_commutes_with_eval() {
        let outer = ZornMatrix::int(2, [1, 1, 0], [1, 0, 1], 1);
        let t = ExprTree::mul(
            ExprTree::conj(outer, ExprTree::mul(up([3, -1, 2]), low([0, 5, 7]))),
            ExprTree::leaf(GeneratorTag::sl2_i64(2, [[2, 3], [1, 2]])),
        );
        let value = t.eval().unwrap();
        for m in 1..=9 {
            let reduced = t.reduce_mod(m).unwrap().eval_in(Modulus(m)).unwrap();
            assert_eq!(value.reduce_mod(m).unwrap(), reduced);
        }
    }

    #[test]
    fn json_round_trip() {
        let t = ExprTree::mul(
            ExprTree::conj(ZornMatrix::int(1, [0; 3], [-2, 0, 0], 1), up([0, 4, 0])),
            ExprTree::leaf(GeneratorTag::sl2_i64(1, [[3, 2], [4, 3]])),
        );
        let text = t.to_json().to_string();
        let back = ExprTree::from_json(&serde_json::from_str(&text).unwrap()).unwrap();
        assert_eq!(back, t);
        assert_eq!(back.to_json().to_string(), text);
        assert!(ExprTree::from_json(&json!({"mul": [ {"leaf": {"t": {"j": 1}}} ]})).is_err());
    }
}
