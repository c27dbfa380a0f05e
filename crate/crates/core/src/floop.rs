//! Subloop analysis inside a finite loop: closure, cosets, the Lagrange
//! property, normality, derived and power subloops.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use bitvec::prelude::*;
use num_integer::Integer;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::quotient::{enumerate_sll, kernel_subloop, FiniteLoop};

/// Largest number of triples scanned exhaustively by [`derived_subloop`].
pub const TRIPLE_BUDGET: u64 = 300_000_000;
/// Consecutive sampling epochs without a new generator before stopping.
pub const QUIET_EPOCHS: usize = 10;
const EPOCH_SIZE: usize = 1 << 14;
const SAMPLE_SEED: u64 = 0x5a6f_726e;
/// Largest coset count for which the quotient table is precomputed.
const QUOTIENT_TABLE_CAP: usize = 1 << 22;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ClosureStatus {
    /// Closed under products and inverses.
    CertifiedClosed,
    /// A closed lower bound for a set whose generators were sampled.
    Partial,
}

impl fmt::Display for ClosureStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ClosureStatus::CertifiedClosed => "certified-closed",
            ClosureStatus::Partial => "partial",
        })
    }
}

/// A sorted set of element indices of a parent loop.
#[derive(Clone)]
pub struct SubloopSet {
    parent: Arc<FiniteLoop>,
    members: Vec<u32>,
    mask: BitVec,
    status: ClosureStatus,
}

impl fmt::Debug for SubloopSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SubloopSet")
            .field("modulus", &self.parent.modulus())
            .field("order", &self.members.len())
            .field("status", &self.status)
            .finish()
    }
}

impl PartialEq for SubloopSet {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.parent, &other.parent) && self.members == other.members
    }
}

impl SubloopSet {
    /// Builds a set from arbitrary indices; sorts and deduplicates.
    pub fn from_members(parent: Arc<FiniteLoop>, mut members: Vec<u32>, status: ClosureStatus) -> SubloopSet {
        members.sort_unstable();
        members.dedup();
        let mut mask = bitvec![0; parent.order()];
        for &i in &members {
            mask.set(i as usize, true);
        }
        SubloopSet { parent, members, mask, status }
    }

    pub fn full(parent: &Arc<FiniteLoop>) -> SubloopSet {
        let members = (0..parent.order() as u32).collect();
        SubloopSet::from_members(parent.clone(), members, ClosureStatus::CertifiedClosed)
    }

    pub fn trivial(parent: &Arc<FiniteLoop>) -> SubloopSet {
        SubloopSet::from_members(parent.clone(), vec![0], ClosureStatus::CertifiedClosed)
    }

    pub fn parent(&self) -> &Arc<FiniteLoop> {
        &self.parent
    }

    pub fn members(&self) -> &[u32] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, i: u32) -> bool {
        self.mask.get(i as usize).is_some_and(|b| *b)
    }

    pub fn status(&self) -> ClosureStatus {
        self.status
    }

    pub fn is_certified(&self) -> bool {
        self.status == ClosureStatus::CertifiedClosed
    }

    fn same_parent(&self, other: &SubloopSet) -> Result<()> {
        if Arc::ptr_eq(&self.parent, &other.parent) {
            Ok(())
        } else {
            Err(Error::ParentMismatch)
        }
    }

    pub fn is_subset_of(&self, other: &SubloopSet) -> Result<bool> {
        self.same_parent(other)?;
        Ok(self.members.iter().all(|&i| other.contains(i)))
    }

    /// Intersection; certified when both operands are.
    pub fn intersection(&self, other: &SubloopSet) -> Result<SubloopSet> {
        self.same_parent(other)?;
        let members = self.members.iter().copied().filter(|&i| other.contains(i)).collect();
        let status = if self.is_certified() && other.is_certified() {
            ClosureStatus::CertifiedClosed
        } else {
            ClosureStatus::Partial
        };
        Ok(SubloopSet::from_members(self.parent.clone(), members, status))
    }

    /// Exhaustive check of closure under products and inverses.
    pub fn verify_closed(&self) -> bool {
        let l = &self.parent;
        self.contains(0)
            && self.members.par_iter().all(|&a| {
                self.contains(l.inv(a)) && self.members.iter().all(|&b| self.contains(l.mul(a, b)))
            })
    }
}

/// Smallest subloop containing `seed`.
pub fn closure(parent: &Arc<FiniteLoop>, seed: &[u32]) -> SubloopSet {
    let l = parent.as_ref();
    let mut mask = bitvec![0; l.order()];
    let mut list = Vec::new();
    let mut push = |i: u32, list: &mut Vec<u32>| {
        if !mask.replace(i as usize, true) {
            list.push(i);
        }
    };
    push(0, &mut list);
    for &s in seed {
        push(s, &mut list);
    }
    let mut k = 0;
    while k < list.len() {
        let a = list[k];
        push(l.inv(a), &mut list);
        for idx in 0..=k {
            let b = list[idx];
            push(l.mul(a, b), &mut list);
            push(l.mul(b, a), &mut list);
        }
        k += 1;
    }
    SubloopSet::from_members(parent.clone(), list, ClosureStatus::CertifiedClosed)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// `x·H`
    Left,
    /// `H·x`
    Right,
}

/// `x·H` or `H·x` as a sorted index list.
pub fn coset(h: &SubloopSet, x: u32, side: Side) -> Vec<u32> {
    let l = &h.parent;
    let mut out: Vec<u32> = h
        .members
        .iter()
        .map(|&e| match side {
            Side::Left => l.mul(x, e),
            Side::Right => l.mul(e, x),
        })
        .collect();
    out.sort_unstable();
    out.dedup();
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LagrangeWitness {
    pub h: u32,
    pub x: u32,
    /// `H·(h·x)`
    pub coset_hx: Vec<u32>,
    /// `H·x`
    pub coset_x: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LagrangeOutcome {
    Ok,
    Fails(LagrangeWitness),
}

impl LagrangeOutcome {
    pub fn is_ok(&self) -> bool {
        matches!(self, LagrangeOutcome::Ok)
    }
}

fn check_inside(ambient: &SubloopSet, h: &SubloopSet) -> Result<()> {
    if !ambient.is_certified() || !h.is_certified() {
        return Err(Error::PreconditionViolated("subloops must be certified closed".into()));
    }
    if !h.is_subset_of(ambient)? {
        return Err(Error::PreconditionViolated("H is not contained in the ambient subloop".into()));
    }
    Ok(())
}

/// Right-coset ids of every ambient element, indexed by parent position.
fn right_coset_ids(ambient: &SubloopSet, h: &SubloopSet) -> (Vec<u32>, Vec<Vec<u32>>) {
    let cosets: Vec<Vec<u32>> = ambient.members.par_iter().map(|&x| coset(h, x, Side::Right)).collect();
    let mut ids = vec![u32::MAX; ambient.parent.order()];
    let mut seen: HashMap<&[u32], u32> = HashMap::new();
    let mut reps = Vec::new();
    for (&x, c) in ambient.members.iter().zip(&cosets) {
        let next = seen.len() as u32;
        let id = *seen.entry(c.as_slice()).or_insert_with(|| {
            reps.push(c.clone());
            next
        });
        ids[x as usize] = id;
    }
    (ids, reps)
}

/// Checks `H·(h·x) = H·x` for all `h ∈ H` and `x` in the ambient subloop.
pub fn lagrange_check(ambient: &SubloopSet, h: &SubloopSet) -> Result<LagrangeOutcome> {
    lagrange_with_count(ambient, h).map(|(outcome, _)| outcome)
}

fn lagrange_with_count(ambient: &SubloopSet, h: &SubloopSet) -> Result<(LagrangeOutcome, usize)> {
    check_inside(ambient, h)?;
    // singleton cosets, or a single coset
    if h.len() == 1 {
        return Ok((LagrangeOutcome::Ok, ambient.len()));
    }
    if h.len() == ambient.len() {
        return Ok((LagrangeOutcome::Ok, 1));
    }
    let l = &ambient.parent;
    let (ids, reps) = right_coset_ids(ambient, h);
    let failure = ambient.members.par_iter().find_map_first(|&x| {
        h.members.iter().find(|&&e| ids[l.mul(e, x) as usize] != ids[x as usize]).map(|&e| (e, x))
    });
    Ok(match failure {
        None => (LagrangeOutcome::Ok, reps.len()),
        Some((e, x)) => (
            LagrangeOutcome::Fails(LagrangeWitness {
                h: e,
                x,
                coset_hx: coset(h, l.mul(e, x), Side::Right),
                coset_x: coset(h, x, Side::Right),
            }),
            reps.len(),
        ),
    })
}

/// Number of right cosets of `H` in the ambient subloop.
pub fn index_or_cosets(ambient: &SubloopSet, h: &SubloopSet) -> Result<u64> {
    match lagrange_with_count(ambient, h)? {
        (LagrangeOutcome::Ok, count) => Ok(count as u64),
        (LagrangeOutcome::Fails(w), _) => Err(Error::LagrangeFails(format!(
            "h = {}, x = {}: H(hx) has {} elements not all in Hx",
            w.h,
            w.x,
            w.coset_hx.len()
        ))),
    }
}

/// First violation of normality found in canonical order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormalityWitness {
    /// `x·h ∉ H·x`
    LeftRight { x: u32, h: u32 },
    /// `x·(y·h) ∉ (x·y)·H`
    LeftAssoc { x: u32, y: u32, h: u32 },
    /// `(h·x)·y ∉ H·(x·y)`
    RightAssoc { x: u32, y: u32, h: u32 },
}

impl NormalityWitness {
    /// An element of every normal subloop containing `H` that is missing from `H`.
    pub fn missing_element(&self, l: &FiniteLoop) -> u32 {
        match *self {
            NormalityWitness::LeftRight { x, h } => l.mul(l.mul(x, h), l.inv(x)),
            NormalityWitness::LeftAssoc { x, y, h } => l.mul(l.inv(l.mul(x, y)), l.mul(x, l.mul(y, h))),
            NormalityWitness::RightAssoc { x, y, h } => l.mul(l.mul(l.mul(h, x), y), l.inv(l.mul(x, y))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormalityOutcome {
    Ok,
    Fails(NormalityWitness),
}

impl NormalityOutcome {
    pub fn is_ok(&self) -> bool {
        matches!(self, NormalityOutcome::Ok)
    }
}

/// Checks `xH = Hx`, `(xy)H = x(yH)` and `H(xy) = (Hx)y` for all ambient `x, y`.
///
/// Once `xH = Hx` holds, the last two conditions are equivalent to the cosets
/// partitioning the ambient subloop with a well-defined induced product, which
/// is what is scanned.
pub fn normality_check(ambient: &SubloopSet, h: &SubloopSet) -> Result<NormalityOutcome> {
    check_inside(ambient, h)?;
    let l = ambient.parent.as_ref();
    if h.len() == 1 || h.len() == ambient.len() {
        return Ok(NormalityOutcome::Ok);
    }

    let (ids, reps) = right_coset_ids(ambient, h);
    let left_right = ambient.members.par_iter().find_map_first(|&x| {
        let right = &reps[ids[x as usize] as usize];
        h.members
            .iter()
            .find(|&&e| right.binary_search(&l.mul(x, e)).is_err())
            .map(|&e| NormalityWitness::LeftRight { x, h: e })
    });
    if let Some(w) = left_right {
        return Ok(NormalityOutcome::Fails(w));
    }

    let find_left_assoc = |x: u32, y: u32| {
        let target = &reps[ids[l.mul(x, y) as usize] as usize];
        h.members
            .iter()
            .find(|&&e| target.binary_search(&l.mul(x, l.mul(y, e))).is_err())
            .map(|&e| NormalityWitness::LeftAssoc { x, y, h: e })
    };
    let find_right_assoc = |x: u32, y: u32| {
        let target = &reps[ids[l.mul(x, y) as usize] as usize];
        h.members
            .iter()
            .find(|&&e| target.binary_search(&l.mul(l.mul(e, x), y)).is_err())
            .map(|&e| NormalityWitness::RightAssoc { x, y, h: e })
    };

    // Cosets partition: x·h lies in x·H.
    let partition = ambient.members.par_iter().find_map_first(|&x| {
        h.members.iter().find(|&&e| ids[l.mul(x, e) as usize] != ids[x as usize]).map(|&e| (x, e))
    });
    if let Some((x, e)) = partition {
        let w = find_left_assoc(x, e).ok_or_else(|| Error::Internal("partition witness not found".into()))?;
        return Ok(NormalityOutcome::Fails(w));
    }

    let count = reps.len();
    let rep: Vec<u32> = reps.iter().map(|c| c[0]).collect();
    let rep_of = |x: u32| rep[ids[x as usize] as usize];
    let table: Option<Vec<u32>> = (count * count <= QUOTIENT_TABLE_CAP).then(|| {
        (0..count * count)
            .into_par_iter()
            .map(|k| ids[l.mul(rep[k / count], rep[k % count]) as usize])
            .collect()
    });
    let product_id = |cx: u32, cz: u32| match &table {
        Some(t) => t[cx as usize * count + cz as usize],
        None => ids[l.mul(rep[cx as usize], rep[cz as usize]) as usize],
    };
    let induced = ambient.members.par_iter().find_map_first(|&x| {
        let cx = ids[x as usize];
        ambient
            .members
            .iter()
            .find(|&&z| ids[l.mul(x, z) as usize] != product_id(cx, ids[z as usize]))
            .map(|&z| (x, z))
    });
    let Some((x, z)) = induced else {
        return Ok(NormalityOutcome::Ok);
    };
    let rz = rep_of(z);
    let w = if ids[l.mul(x, z) as usize] != ids[l.mul(x, rz) as usize] {
        find_left_assoc(x, rz)
    } else {
        find_right_assoc(rep_of(x), rz)
    };
    w.map(NormalityOutcome::Fails)
        .ok_or_else(|| Error::Internal("induced-product witness not found".into()))
}

/// Smallest normal subloop of the ambient subloop containing `seed`.
pub fn normal_closure(ambient: &SubloopSet, seed: &[u32]) -> Result<SubloopSet> {
    let l = ambient.parent.clone();
    let mut gens: Vec<u32> = seed.to_vec();
    loop {
        let h = closure(&l, &gens);
        check_inside(ambient, &h)?;
        let conjugates: Vec<u32> = ambient
            .members
            .par_iter()
            .flat_map_iter(|&x| {
                let l = &l;
                h.members.iter().map(move |&e| l.mul(l.mul(x, e), l.inv(x)))
            })
            .filter(|&k| !h.contains(k))
            .collect();
        if !conjugates.is_empty() {
            gens = h.members.clone();
            gens.extend(conjugates);
            continue;
        }
        match normality_check(ambient, &h)? {
            NormalityOutcome::Ok => return Ok(h),
            NormalityOutcome::Fails(w) => {
                gens = h.members.clone();
                gens.push(w.missing_element(&l));
            }
        }
    }
}

fn merge_masks(mut a: BitVec, b: BitVec) -> BitVec {
    a |= b;
    a
}

/// Subloop generated by all commutators and associators of `S`.
pub fn derived_subloop(s: &SubloopSet) -> SubloopSet {
    let l = s.parent.as_ref();
    let n = l.order();
    let members = &s.members;
    let pairs = members
        .par_iter()
        .fold(
            || bitvec![0; n],
            |mut acc, &a| {
                for &b in members {
                    acc.set(l.commutator(a, b) as usize, true);
                }
                acc
            },
        )
        .reduce(|| bitvec![0; n], merge_masks);
    let size = members.len() as u64;
    let (gens, status) = if size.saturating_pow(3) <= TRIPLE_BUDGET {
        let triples = members
            .par_iter()
            .fold(
                || bitvec![0; n],
                |mut acc, &a| {
                    for &b in members {
                        let ab = l.mul(a, b);
                        for &c in members {
                            let left = l.mul(ab, c);
                            let right = l.mul(a, l.mul(b, c));
                            acc.set(l.mul(left, l.inv(right)) as usize, true);
                        }
                    }
                    acc
                },
            )
            .reduce(|| bitvec![0; n], merge_masks);
        (merge_masks(pairs, triples), s.status)
    } else {
        (sample_associators(s, pairs), ClosureStatus::Partial)
    };
    let seed: Vec<u32> = gens.iter_ones().map(|i| i as u32).collect();
    let mut out = closure(&s.parent, &seed);
    out.status = status;
    out
}

/// Adds associators of random triples until [`QUIET_EPOCHS`] epochs in a row find nothing new.
fn sample_associators(s: &SubloopSet, mut gens: BitVec) -> BitVec {
    let l = s.parent.as_ref();
    let mut rng = ChaCha8Rng::seed_from_u64(SAMPLE_SEED);
    let mut quiet = 0;
    let pick = |rng: &mut ChaCha8Rng| s.members[rng.gen_range(0..s.members.len())];
    while quiet < QUIET_EPOCHS {
        let mut fresh = false;
        for _ in 0..EPOCH_SIZE {
            let (a, b, c) = (pick(&mut rng), pick(&mut rng), pick(&mut rng));
            let k = l.associator(a, b, c) as usize;
            if !gens.replace(k, true) {
                fresh = true;
            }
        }
        quiet = if fresh { 0 } else { quiet + 1 };
    }
    gens
}

/// Subloop generated by the `e`-th powers of the elements of `S`.
pub fn power_closure(s: &SubloopSet, e: u64) -> SubloopSet {
    let l = s.parent.as_ref();
    let seed: Vec<u32> = s.members.par_iter().map(|&a| l.pow(a, e)).collect();
    closure(&s.parent, &seed)
}

/// Image of `Γ(n, s)` in `SLL(2, Z/mZ)`.
pub fn gamma_ns_image(m: u64, n: u64, s: u64) -> Result<SubloopSet> {
    let l = Arc::new(enumerate_sll(m)?);
    gamma_ns_image_in(&l, n, s)
}

/// [`gamma_ns_image`] inside an already enumerated loop.
pub fn gamma_ns_image_in(l: &Arc<FiniteLoop>, n: u64, s: u64) -> Result<SubloopSet> {
    if s == 0 {
        return Err(Error::PreconditionViolated("power must be >= 1".into()));
    }
    let k = kernel_subloop(l, n)?;
    let derived = derived_subloop(&k);
    let mut seed = derived.members.clone();
    seed.extend(k.members.iter().map(|&a| l.pow(a, s)));
    let mut out = closure(l, &seed);
    out.status = derived.status;
    Ok(out)
}

/// Upper and lower elementary matrices of the given level, reduced mod `m`.
pub fn elementary_image(l: &FiniteLoop, level: u64) -> Vec<u32> {
    let m = l.modulus();
    let g = level.gcd(&m);
    let steps: Vec<u8> = (0..m).step_by(g.max(1) as usize).map(|v| v as u8).collect();
    let one = (1 % m) as u8;
    let mut out = Vec::new();
    for &v1 in &steps {
        for &v2 in &steps {
            for &v3 in &steps {
                let upper = [one, v1, v2, v3, 0, 0, 0, one];
                let lower = [one, 0, 0, 0, v1, v2, v3, one];
                out.extend(l.index_of_raw(&upper));
                out.extend(l.index_of_raw(&lower));
            }
        }
    }
    out.sort_unstable();
    out.dedup();
    out
}
