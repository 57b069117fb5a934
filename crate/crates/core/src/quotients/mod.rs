//! Finite quotients: generator matrices reduced into a residue ring, breadth-first
//! closure of the generated group over packed integer states, predicted orders of the
//! full linear or unitary group, lifting to prime powers, and Cayley-graph gaps.
//!
//! A state is a `dim × dim` matrix over a ring with `R` elements, packed row-major as
//! `Σ e_{ij} R^{i·dim + j}`. Projective states are scaled so that their first unit
//! entry (always in row 0 for an invertible matrix) is 1.

mod spectral;

pub use spectral::{cayley_gap, normalized_lambda2, GapReport, SpectralResult};

use std::sync::Arc;
use std::time::{Duration, Instant};

use bitvec::vec::BitVec;
use num_integer::Integer;
use rayon::prelude::*;
use rustc_hash::FxHashSet;
use serde::Serialize;
use thiserror::Error;

use crate::cyclo::{is_prime, residue_contexts, ResidueContext, ResidueError, ResidueRing, RingElem};
use crate::linalg::{LinalgError, RepMatrix};

pub type Key = u64;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum QuotientError {
    #[error(transparent)]
    Residue(#[from] ResidueError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("no generators")]
    NoGenerators,
    #[error("generators have different dimensions")]
    DimensionMismatch,
    #[error("generator {index} is not invertible over the residue ring")]
    NotInvertible { index: usize },
    #[error("{dim}×{dim} matrices over a ring of size {ring_size} do not fit a 64-bit key")]
    KeySpaceTooLarge { ring_size: u64, dim: usize },
    #[error("state budget must be at least 1")]
    ZeroBudget,
    #[error("closure was truncated")]
    IncompleteClosure,
    #[error("group order {order} exceeds the spectral budget {budget}")]
    SpectralBudgetExceeded { order: u64, budget: u64 },
}

/// Key spaces up to this size use a bit vector for the visited set.
const BITSET_LIMIT: u128 = 1 << 28;
/// Row tables are built when a ring has at most this many rows.
const ROW_TABLE_LIMIT: u64 = 1 << 22;
/// Successors are generated in chunks of this many frontier states.
const CHUNK: usize = 1 << 20;

#[derive(Debug, Clone)]
pub struct ReducedGenSet {
    pub ctx: ResidueContext,
    pub k: u32,
    pub ring: Arc<ResidueRing>,
    pub dim: usize,
    /// The given generators followed by their inverses, row-major.
    pub generators: Vec<Vec<RingElem>>,
    pub base_count: usize,
    pub projective: bool,
    /// Order of the subgroup of units generated by the generators' determinants.
    pub det_image_order: u64,
}

/// Reduces exact matrices modulo `(q^k, factor)`, appends inverses and normalizes
/// projectively if requested.
pub fn reduce_generator_set(
    gens: &[RepMatrix],
    ctx: &ResidueContext,
    k: u32,
    projective: bool,
) -> Result<ReducedGenSet, QuotientError> {
    let first = gens.first().ok_or(QuotientError::NoGenerators)?;
    let dim = first.dim();
    if gens.iter().any(|g| g.dim() != dim) {
        return Err(QuotientError::DimensionMismatch);
    }
    let ring = ctx.ring(k)?;
    let mats = gens
        .iter()
        .map(|g| reduce_matrix(&ring, g))
        .collect::<Result<Vec<_>, _>>()?;
    ReducedGenSet::from_ring_matrices(ctx.clone(), ring, dim, mats, projective)
}

pub fn reduce_matrix(ring: &ResidueRing, m: &RepMatrix) -> Result<Vec<RingElem>, QuotientError> {
    Ok(m.entries().iter().map(|x| ring.reduce(x)).collect::<Result<Vec<_>, _>>()?)
}

impl ReducedGenSet {
    /// Builds a generator set from matrices already over `ring`.
    pub fn from_ring_matrices(
        ctx: ResidueContext,
        ring: Arc<ResidueRing>,
        dim: usize,
        mats: Vec<Vec<RingElem>>,
        projective: bool,
    ) -> Result<Self, QuotientError> {
        if mats.is_empty() {
            return Err(QuotientError::NoGenerators);
        }
        if mats.iter().any(|m| m.len() != dim * dim) {
            return Err(QuotientError::DimensionMismatch);
        }
        if (ring.size as u128).checked_pow((dim * dim) as u32).is_none_or(|s| s > u64::MAX as u128) {
            return Err(QuotientError::KeySpaceTooLarge { ring_size: ring.size, dim });
        }
        let mut rgs = ReducedGenSet {
            k: ring.k,
            ctx,
            ring,
            dim,
            generators: vec![],
            base_count: mats.len(),
            projective,
            det_image_order: 1,
        };
        let mut dets = Vec::with_capacity(mats.len());
        let mut inverses = Vec::with_capacity(mats.len());
        for (index, m) in mats.iter().enumerate() {
            let d = rgs.det(m);
            let inv = rgs.ring.inv(d).ok_or(QuotientError::NotInvertible { index })?;
            dets.push(d);
            let adj = rgs.adjugate(m);
            inverses.push(adj.iter().map(|&x| rgs.ring.mul(x, inv)).collect::<Vec<_>>());
        }
        rgs.det_image_order = rgs.unit_subgroup_order(&dets);
        rgs.generators = mats.into_iter().chain(inverses).map(|m| rgs.normalize(m)).collect();
        Ok(rgs)
    }

    pub fn identity(&self) -> Vec<RingElem> {
        let mut m = vec![0; self.dim * self.dim];
        for i in 0..self.dim {
            m[i * self.dim + i] = self.ring.one();
        }
        m
    }

    pub fn mat_mul(&self, a: &[RingElem], b: &[RingElem]) -> Vec<RingElem> {
        let n = self.dim;
        let r = &self.ring;
        let mut out = vec![0; n * n];
        for i in 0..n {
            for t in 0..n {
                let x = a[i * n + t];
                if x == 0 {
                    continue;
                }
                for j in 0..n {
                    out[i * n + j] = r.add(out[i * n + j], r.mul(x, b[t * n + j]));
                }
            }
        }
        out
    }

    fn minor(&self, m: &[RingElem], n: usize, skip_r: usize, skip_c: usize) -> Vec<RingElem> {
        let mut out = Vec::with_capacity((n - 1) * (n - 1));
        for i in (0..n).filter(|&i| i != skip_r) {
            for j in (0..n).filter(|&j| j != skip_c) {
                out.push(m[i * n + j]);
            }
        }
        out
    }

    fn det_n(&self, m: &[RingElem], n: usize) -> RingElem {
        let r = &self.ring;
        match n {
            0 => r.one(),
            1 => m[0],
            2 => r.sub(r.mul(m[0], m[3]), r.mul(m[1], m[2])),
            _ => (0..n).fold(r.zero(), |acc, j| {
                let t = r.mul(m[j], self.det_n(&self.minor(m, n, 0, j), n - 1));
                if j % 2 == 0 {
                    r.add(acc, t)
                } else {
                    r.sub(acc, t)
                }
            }),
        }
    }

    pub fn det(&self, m: &[RingElem]) -> RingElem {
        self.det_n(m, self.dim)
    }

    fn adjugate(&self, m: &[RingElem]) -> Vec<RingElem> {
        let n = self.dim;
        let r = &self.ring;
        let mut out = vec![0; n * n];
        for i in 0..n {
            for j in 0..n {
                let c = if n == 1 { r.one() } else { self.det_n(&self.minor(m, n, i, j), n - 1) };
                out[j * n + i] = if (i + j) % 2 == 0 { c } else { r.neg(c) };
            }
        }
        out
    }

    fn unit_subgroup_order(&self, gens: &[RingElem]) -> u64 {
        let r = &self.ring;
        let mut seen = FxHashSet::default();
        seen.insert(r.one());
        let mut frontier = vec![r.one()];
        while let Some(x) = frontier.pop() {
            for &g in gens {
                let y = r.mul(x, g);
                if seen.insert(y) {
                    frontier.push(y);
                }
            }
        }
        seen.len() as u64
    }

    /// Scales by the inverse of the first unit entry in projective mode; identity otherwise.
    pub fn normalize(&self, mut m: Vec<RingElem>) -> Vec<RingElem> {
        if !self.projective {
            return m;
        }
        let r = &self.ring;
        if let Some(&u) = m.iter().find(|&&x| r.is_unit(x)) {
            if u != r.one() {
                let s = r.inv(u).expect("unit");
                for x in &mut m {
                    *x = r.mul(*x, s);
                }
            }
        }
        m
    }

    pub fn pack(&self, m: &[RingElem]) -> Key {
        m.iter().rev().fold(0, |acc, &x| acc * self.ring.size + x)
    }

    pub fn unpack(&self, mut key: Key) -> Vec<RingElem> {
        let mut m = Vec::with_capacity(self.dim * self.dim);
        for _ in 0..self.dim * self.dim {
            m.push(key % self.ring.size);
            key /= self.ring.size;
        }
        m
    }

    /// The residue field size `s` and the family of the predicted full group.
    pub fn family(&self) -> GroupFamily {
        family_of(&self.ctx)
    }

    pub fn target_order(&self) -> Option<u128> {
        target_order_at_level(self.dim, &self.ctx, self.k, self.projective, self.det_image_order)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum GroupFamily {
    /// `SL(dim, s)`.
    Linear { field_size: u64 },
    /// `SU(dim, s0)` inside `GL(dim, s0²)`.
    Unitary { base_field_size: u64 },
}

impl GroupFamily {
    /// Size of the field the group scheme is defined over.
    pub fn base_field_size(&self) -> u64 {
        match *self {
            GroupFamily::Linear { field_size } => field_size,
            GroupFamily::Unitary { base_field_size } => base_field_size,
        }
    }
}

pub fn family_of(ctx: &ResidueContext) -> GroupFamily {
    if ctx.conjugation_descends {
        GroupFamily::Unitary { base_field_size: ctx.field_size.isqrt() }
    } else {
        GroupFamily::Linear { field_size: ctx.field_size }
    }
}

fn checked_pow(b: u64, e: u32) -> Option<u128> {
    (b as u128).checked_pow(e)
}

/// `|SL(n, s)|` or `|SU(n, s0)|`, `None` on overflow.
pub fn special_group_order(n: usize, family: GroupFamily) -> Option<u128> {
    let n32 = n as u32;
    match family {
        GroupFamily::Linear { field_size: s } => {
            let mut acc = checked_pow(s, n32 * (n32 - 1) / 2)?;
            for i in 2..=n32 {
                acc = acc.checked_mul(checked_pow(s, i)? - 1)?;
            }
            Some(acc)
        }
        GroupFamily::Unitary { base_field_size: s0 } => {
            let mut acc = checked_pow(s0, n32 * (n32 - 1) / 2)?;
            for i in 2..=n32 {
                let t = checked_pow(s0, i)?;
                acc = acc.checked_mul(if i % 2 == 0 { t - 1 } else { t + 1 })?;
            }
            Some(acc)
        }
    }
}

/// Order of `{g ∈ G : det g ∈ D}` for the special group `G` of the family and a
/// determinant subgroup of order `det_image_order`, divided by its scalars when
/// projective. Scalars `λ` lie in a cyclic group of order `s − 1` (linear) or `s0 + 1`
/// (unitary); `λ^dim ∈ D` holds for exactly `gcd(dim·|D|, that order)` of them.
pub fn family_order(dim: usize, family: GroupFamily, projective: bool, det_image_order: u64) -> Option<u128> {
    let full = special_group_order(dim, family)?.checked_mul(det_image_order as u128)?;
    if !projective {
        return Some(full);
    }
    let c = match family {
        GroupFamily::Linear { field_size } => field_size - 1,
        GroupFamily::Unitary { base_field_size } => base_field_size + 1,
    };
    Some(full / (dim as u128 * det_image_order as u128).gcd(&(c as u128)))
}

/// Predicted order of the full group mod `q`, for `dim ∈ {2, 3}`.
pub fn target_order(dim: usize, ctx: &ResidueContext, projective: bool, det_image_order: u64) -> Option<u128> {
    if !(2..=3).contains(&dim) {
        return None;
    }
    family_order(dim, family_of(ctx), projective, det_image_order)
}

/// Level-`k` prediction: the level-1 order times the congruence kernel
/// `s0^{(dim²−1)(k−1)}`. Only made when neither `dim` nor `|D|` is divisible by `q`, so
/// that scalars and determinants do not grow with `k`.
pub fn target_order_at_level(
    dim: usize,
    ctx: &ResidueContext,
    k: u32,
    projective: bool,
    det_image_order: u64,
) -> Option<u128> {
    let base = target_order(dim, ctx, projective, det_image_order)?;
    if k == 1 {
        return Some(base);
    }
    if dim as u64 % ctx.prime == 0 || det_image_order % ctx.prime == 0 {
        return None;
    }
    base.checked_mul(kernel_size(dim, family_of(ctx), k - 1)?)
}

/// `s0^{(dim²−1)·levels}`: the kernel of reduction across `levels` prime-power steps.
pub fn kernel_size(dim: usize, family: GroupFamily, levels: u32) -> Option<u128> {
    checked_pow(family.base_field_size(), (dim * dim - 1) as u32 * levels)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Full,
    Proper,
    Unknown,
}

#[derive(Debug, Clone, Serialize)]
pub struct ClosureReport {
    pub order: u64,
    pub truncated: bool,
    pub target_order: Option<u128>,
    pub verdict: Verdict,
    pub state_count: u64,
    pub det_image_order: u64,
    #[serde(skip)]
    pub wall_time: Duration,
}

#[derive(Debug, Clone)]
pub struct Closure {
    pub report: ClosureReport,
    /// Packed elements in breadth-first order, identity first.
    pub elements: Vec<Key>,
}

/// Multiplies packed states by generators on the right.
pub(crate) struct Stepper<'a> {
    rgs: &'a ReducedGenSet,
    row_radix: u64,
    /// Per generator, packed row ↦ packed row · g.
    tables: Option<Vec<Vec<u64>>>,
    /// Per packed row, inverse of its first unit entry (projective only).
    row_scale: Option<Vec<RingElem>>,
}

impl<'a> Stepper<'a> {
    pub(crate) fn new(rgs: &'a ReducedGenSet) -> Self {
        let n = rgs.dim;
        let row_radix = rgs.ring.size.pow(n as u32);
        let small = row_radix <= ROW_TABLE_LIMIT;
        let mut stepper = Stepper { rgs, row_radix, tables: None, row_scale: None };
        if small {
            let rows: Vec<Vec<RingElem>> = (0..row_radix).map(|c| stepper.unpack_row(c)).collect();
            let tables = rgs
                .generators
                .par_iter()
                .map(|g| rows.iter().map(|row| stepper.pack_row(&stepper.row_times(row, g))).collect())
                .collect();
            stepper.tables = Some(tables);
            if rgs.projective {
                let r = &rgs.ring;
                stepper.row_scale = Some(
                    rows.iter()
                        .map(|row| row.iter().find(|&&x| r.is_unit(x)).map_or(r.one(), |&u| r.inv(u).unwrap()))
                        .collect(),
                );
            }
        }
        stepper
    }

    fn unpack_row(&self, mut c: u64) -> Vec<RingElem> {
        (0..self.rgs.dim)
            .map(|_| {
                let x = c % self.rgs.ring.size;
                c /= self.rgs.ring.size;
                x
            })
            .collect()
    }

    fn pack_row(&self, row: &[RingElem]) -> u64 {
        row.iter().rev().fold(0, |acc, &x| acc * self.rgs.ring.size + x)
    }

    fn row_times(&self, row: &[RingElem], g: &[RingElem]) -> Vec<RingElem> {
        let n = self.rgs.dim;
        let r = &self.rgs.ring;
        (0..n)
            .map(|j| (0..n).fold(r.zero(), |acc, t| r.add(acc, r.mul(row[t], g[t * n + j]))))
            .collect()
    }

    pub(crate) fn step(&self, key: Key, g: usize) -> Key {
        let rgs = self.rgs;
        let Some(tables) = &self.tables else {
            let m = rgs.mat_mul(&rgs.unpack(key), &rgs.generators[g]);
            return rgs.pack(&rgs.normalize(m));
        };
        let table = &tables[g];
        let mut out = 0u64;
        let mut mult = 1u64;
        let mut rest = key;
        for i in 0..rgs.dim {
            out += table[(rest % self.row_radix) as usize] * mult;
            rest /= self.row_radix;
            if i + 1 < rgs.dim {
                mult *= self.row_radix;
            }
        }
        if let Some(scale) = &self.row_scale {
            let s = scale[(out % self.row_radix) as usize];
            if s != rgs.ring.one() {
                let m: Vec<RingElem> = rgs.unpack(out).into_iter().map(|x| rgs.ring.mul(x, s)).collect();
                return rgs.pack(&m);
            }
        }
        out
    }
}

enum Visited {
    Bits(BitVec<u64>),
    Hash(FxHashSet<Key>),
}

impl Visited {
    fn new(key_space: u128) -> Self {
        if key_space <= BITSET_LIMIT {
            Visited::Bits(BitVec::repeat(false, key_space as usize))
        } else {
            Visited::Hash(FxHashSet::default())
        }
    }

    fn insert(&mut self, k: Key) -> bool {
        match self {
            Visited::Bits(b) => !b.replace(k as usize, true),
            Visited::Hash(h) => h.insert(k),
        }
    }
}

/// Breadth-first closure under right multiplication by the given generators. In a
/// finite group the monoid they generate is the whole group, so the appended inverses
/// are not needed here.
pub fn group_closure(rgs: &ReducedGenSet, state_budget: u64) -> Result<Closure, QuotientError> {
    if state_budget == 0 {
        return Err(QuotientError::ZeroBudget);
    }
    let start = Instant::now();
    let stepper = Stepper::new(rgs);
    let key_space = (rgs.ring.size as u128).pow((rgs.dim * rgs.dim) as u32);
    let mut visited = Visited::new(key_space);
    let id = rgs.pack(&rgs.identity());
    visited.insert(id);
    let mut elements = vec![id];
    let mut frontier_start = 0;
    let mut truncated = false;
    let gens: Vec<usize> = (0..rgs.base_count).collect();
    'outer: while frontier_start < elements.len() {
        let frontier_end = elements.len();
        let mut pos = frontier_start;
        while pos < frontier_end {
            let chunk_end = (pos + CHUNK).min(frontier_end);
            let succ: Vec<Key> = elements[pos..chunk_end]
                .par_iter()
                .flat_map_iter(|&s| gens.iter().map(move |&g| (s, g)))
                .map(|(s, g)| stepper.step(s, g))
                .collect();
            for x in succ {
                if visited.insert(x) {
                    if elements.len() as u64 >= state_budget {
                        truncated = true;
                        break 'outer;
                    }
                    elements.push(x);
                }
            }
            pos = chunk_end;
        }
        frontier_start = frontier_end;
    }
    let order = elements.len() as u64;
    let target = rgs.target_order();
    let verdict = match (truncated, target) {
        (true, _) | (false, None) => Verdict::Unknown,
        (false, Some(t)) if t == order as u128 => Verdict::Full,
        _ => Verdict::Proper,
    };
    Ok(Closure {
        report: ClosureReport {
            order,
            truncated,
            target_order: target,
            verdict,
            state_count: order,
            det_image_order: rgs.det_image_order,
            wall_time: start.elapsed(),
        },
        elements,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct LiftReport {
    pub prime: u64,
    pub low_level: u32,
    pub high_level: u32,
    pub low_order: u64,
    pub high_order: u64,
    /// `high_order / low_order` when both closures are complete and the division is exact.
    pub ratio: Option<u128>,
    pub predicted_kernel: Option<u128>,
    pub verdict: Verdict,
}

/// Compares orders across two levels against the predicted congruence kernel.
pub fn lift_check(
    low: &ReducedGenSet,
    low_closure: &ClosureReport,
    high: &ReducedGenSet,
    high_closure: &ClosureReport,
) -> Result<LiftReport, QuotientError> {
    if low.dim != high.dim {
        return Err(QuotientError::DimensionMismatch);
    }
    if low.ctx != high.ctx {
        return Err(ResidueError::FieldMismatch { want: low.ctx.order, got: high.ctx.order }.into());
    }
    let levels = high.k.saturating_sub(low.k);
    let predicted = kernel_size(low.dim, low.family(), levels);
    let complete = !low_closure.truncated && !high_closure.truncated;
    let ratio = (complete && high_closure.order % low_closure.order == 0)
        .then(|| (high_closure.order / low_closure.order) as u128);
    let verdict = if !complete {
        Verdict::Unknown
    } else if ratio.is_some() && ratio == predicted {
        Verdict::Full
    } else {
        Verdict::Proper
    };
    Ok(LiftReport {
        prime: low.ctx.prime,
        low_level: low.k,
        high_level: high.k,
        low_order: low_closure.order,
        high_order: high_closure.order,
        ratio,
        predicted_kernel: predicted,
        verdict,
    })
}

/// Primes `q ≤ max_prime` not dividing the field order whose first residue context gives
/// a predicted level-1 order of at most `max_target`, with that prediction.
pub fn usable_contexts(
    gens: &[RepMatrix],
    max_prime: u64,
    max_target: u128,
    projective: bool,
) -> Vec<(ResidueContext, u128)> {
    let Some(first) = gens.first() else {
        return vec![];
    };
    let n = first.order();
    (2..=max_prime)
        .filter(|&q| is_prime(q) && n as u64 % q != 0)
        .filter_map(|q| {
            let ctx = residue_contexts(n, q).ok()?.into_iter().next()?;
            let family = family_of(&ctx);
            // cheap lower bound before reducing anything
            if special_group_order(first.dim(), family).is_none_or(|o| o / (first.dim() as u128) > max_target) {
                return None;
            }
            let rgs = reduce_generator_set(gens, &ctx, 1, projective).ok()?;
            let t = rgs.target_order()?;
            (t <= max_target).then_some((ctx, t))
        })
        .collect()
}
