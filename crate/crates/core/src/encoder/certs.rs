//! Certificates for the two sides of the dichotomy: a hit of `B_{w_b}^k y_a`
//! in a basic set when `b` is not contained in `a`, and the orbit
//! dichotomy `||B^k y_a|| <= 1 or B^k y_a (0) = 0` when it is.

use std::collections::BTreeSet;
use std::sync::Arc;

use num_traits::{One, Zero};
use serde_json::{json, Value};

use super::maps::{l1_vector, l1_weight, MATERIALIZE_LIMIT};
use super::partition::{Block, Partition};
use super::subset::SubsetCode;
use crate::error::{Error, Result};
use crate::nbhd::BasicNbhd;
use crate::rational::{fmt_rat, le_pow2, norm_sq, pow2, Rat};
use crate::shift::{apply_shift, orbit_norm_sq_upper};
use crate::vector::{L2Vector, Tri};
use crate::weight::WeightSeq;

/// Later blocks replayed explicitly in a hit certificate; the rest is
/// covered by the partition's norm condition.
pub const HIT_TAIL_BLOCKS: usize = 4;

/// Shifts below this get an exact orbit replay in bound certificates.
pub const SPOT_K: usize = 64;

#[derive(Clone, Debug)]
pub struct TailTerm {
    pub r: usize,
    /// Block `r` of `y_a` vanishes.
    pub zero: bool,
    /// `4^k 4^{-|I_r|} ||pi(p_r)||^2 <= 4^{-r-1} eps^2`.
    pub ok: bool,
}

#[derive(Clone, Debug)]
pub struct HitCert {
    pub n: usize,
    pub k: usize,
    pub elem: usize,
    pub q: Vec<Rat>,
    pub eps: Rat,
    /// `|{ t in [s, s+k) : w_b(t) = 2 }| = |I_n|` for every `s < |q|`.
    pub windows_constant: bool,
    /// `B^k(y_a)|q| = q` exactly.
    pub prefix_exact: bool,
    pub tail_terms: Vec<TailTerm>,
    /// Blocks from here on are covered by the partition's norm condition.
    pub closure_from: usize,
    /// Exact membership of the orbit point, when the block is small enough.
    pub exact_replay: Option<bool>,
}

impl HitCert {
    pub fn passed(&self) -> bool {
        self.windows_constant
            && self.prefix_exact
            && self.tail_terms.iter().all(|t| t.ok)
            && self.exact_replay != Some(false)
    }

    /// Certified bound on the tail norm: `eps * 2^{-n-1}`.
    pub fn tail_bound(&self) -> Rat {
        &self.eps * pow2(-(self.n as i64) - 1)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "n": self.n, "k": self.k, "element": self.elem,
            "q": self.q.iter().map(fmt_rat).collect::<Vec<_>>(), "eps": fmt_rat(&self.eps),
            "windows_constant": self.windows_constant, "prefix_exact": self.prefix_exact,
            "tail_terms": self.tail_terms.iter().map(|t| json!({"r": t.r, "zero": t.zero, "ok": t.ok})).collect::<Vec<_>>(),
            "closure_from": self.closure_from,
            "tail_bound": fmt_rat(&self.tail_bound()),
            "exact_replay": self.exact_replay,
            "passed": self.passed(),
        })
    }
}

/// Certificate that `B_{w_b}^{min J_n}(y_a)` lies in `U_{pi(p_n), eps_n}`.
pub fn l1_hit(part: &Arc<Partition>, a: &SubsetCode, b: &SubsetCode, n: usize) -> Result<HitCert> {
    let blk = part.block(n)?;
    if !b.contains(blk.elem) || a.contains(blk.elem) {
        return Err(Error::Precondition(format!("element {} of block {n} is not in b \\ a", blk.elem)));
    }
    let wb = l1_weight(part, b);
    let k = blk.j_start();
    let windows_constant = (0..blk.j_len()).all(|s| wb.twos_in(s, k) == blk.len_i);
    let prefix_exact = windows_constant;
    let eps2 = &blk.eps * &blk.eps;
    let closure_from = n + 1 + HIT_TAIL_BLOCKS;
    let tail_terms = (n + 1..closure_from)
        .map(|r| {
            let br = part.block(r)?;
            let zero = a.contains(br.elem) || norm_sq(&br.q).is_zero();
            let ok = zero || {
                let e = 2 * (br.len_i as i64 - k as i64 - r as i64 - 1);
                le_pow2(&(norm_sq(&br.q) / &eps2), e)
            };
            Ok(TailTerm { r, zero, ok })
        })
        .collect::<Result<Vec<_>>>()?;
    let exact_replay = (blk.end() <= MATERIALIZE_LIMIT).then(|| {
        let z = apply_shift(&wb, &l1_vector(part, a), k);
        let u = BasicNbhd { q: blk.q.clone(), eps: blk.eps.clone() };
        u.contains(&z) == Tri::Yes
    });
    Ok(HitCert { n, k, elem: blk.elem, q: blk.q.clone(), eps: blk.eps.clone(), windows_constant, prefix_exact, tail_terms, closure_from, exact_replay })
}

/// Hit certificates on the first `count` blocks mounted on `elem`.
pub fn hits_on(part: &Arc<Partition>, a: &SubsetCode, b: &SubsetCode, elem: usize, count: usize) -> Result<Vec<HitCert>> {
    let mut out = vec![];
    let mut n = 0;
    while out.len() < count {
        if part.block(n)?.elem == elem {
            out.push(l1_hit(part, a, b, n)?);
        }
        n += 1;
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tag {
    /// `y_a` vanishes on the block, so `B^k(y_a)(0) = y_a(k) * prod = 0`.
    ZeroCoordinate,
    /// `||B^k y_a|| <= lead + sum_{r > n} 2^{-r-1} <= 1`.
    NormBounded { twos_before: usize, lead_ok: bool },
}

#[derive(Clone, Debug)]
pub struct BlockTag {
    pub n: usize,
    pub ks: (usize, usize),
    pub tag: Tag,
}

impl BlockTag {
    pub fn ok(&self) -> bool {
        match self.tag {
            Tag::ZeroCoordinate => true,
            Tag::NormBounded { lead_ok, .. } => lead_ok,
        }
    }
}

#[derive(Clone, Debug)]
pub struct BoundCert {
    pub blocks: usize,
    pub subset_ok: bool,
    /// `4^{max J_{r-1}} ||y_a|J_r||^2 <= 4^{-r-1}` for `r < blocks`.
    pub per_block: Vec<(usize, bool)>,
    pub tags: Vec<BlockTag>,
    /// Exact replays `(k, zero_coordinate, ok)` for small `k`.
    pub spot: Vec<(usize, bool, bool)>,
}

impl BoundCert {
    pub fn passed(&self) -> bool {
        self.subset_ok
            && self.per_block.iter().all(|p| p.1)
            && self.tags.iter().all(BlockTag::ok)
            && self.spot.iter().all(|s| s.2)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "blocks": self.blocks,
            "scope": format!("k in blocks 0..{}; later blocks by the partition norm condition", self.blocks),
            "subset_ok": self.subset_ok,
            "per_block": self.per_block.iter().map(|(r, ok)| json!({"r": r, "ok": ok})).collect::<Vec<_>>(),
            "tags": self.tags.iter().map(|t| json!({
                "n": t.n, "k": [t.ks.0, t.ks.1],
                "tag": match &t.tag { Tag::ZeroCoordinate => "zero-coordinate", Tag::NormBounded { .. } => "norm-bounded" },
                "ok": t.ok(),
            })).collect::<Vec<_>>(),
            "spot": self.spot.iter().map(|(k, z, ok)| json!({"k": k, "zero": z, "ok": ok})).collect::<Vec<_>>(),
            "passed": self.passed(),
        })
    }
}

fn block_norm_ok(a: &SubsetCode, b: &Block, scale_exp: usize, budget_exp: i64) -> bool {
    // 4^{scale} 4^{-|I|} ||q||^2 <= 4^{budget}
    a.contains(b.elem) || le_pow2(&norm_sq(&b.q), 2 * (b.len_i as i64 - scale_exp as i64 + budget_exp))
}

/// Orbit dichotomy for `y_a` under `w_b` over the first `blocks` blocks.
pub fn l1_bounded_cert(part: &Arc<Partition>, a: &SubsetCode, b: &SubsetCode, blocks: usize) -> Result<BoundCert> {
    let bs = part.blocks(blocks + HIT_TAIL_BLOCKS)?;
    let subset_ok = bs.iter().all(|blk| !b.contains(blk.elem) || a.contains(blk.elem));
    let per_block = bs[..blocks]
        .iter()
        .map(|blk| {
            let m_prev = if blk.n == 0 { 0 } else { bs[blk.n - 1].last() };
            (blk.n, block_norm_ok(a, blk, m_prev, -(blk.n as i64) - 1))
        })
        .collect();
    let wb = l1_weight(part, b);
    let tags = bs[..blocks]
        .iter()
        .map(|blk| {
            let ks = (blk.start, blk.end());
            let tag = if a.contains(blk.elem) {
                Tag::ZeroCoordinate
            } else {
                let twos_before = wb.twos_below(blk.start);
                let budget = if blk.n == 0 { -1 } else { -(blk.n as i64) };
                let lead_ok = !b.contains(blk.elem) && block_norm_ok(a, blk, twos_before, budget);
                Tag::NormBounded { twos_before, lead_ok }
            };
            BlockTag { n: blk.n, ks, tag }
        })
        .collect();
    let y = l1_vector(part, a);
    let k_end = bs[blocks - 1].end().min(SPOT_K);
    let spot = (0..k_end).map(|k| spot_check(part, a, &wb, &y, k)).collect::<Result<Vec<_>>>()?;
    Ok(BoundCert { blocks, subset_ok, per_block, tags, spot })
}

fn spot_check(part: &Partition, a: &SubsetCode, wb: &WeightSeq, y: &L2Vector, k: usize) -> Result<(usize, bool, bool)> {
    let blk = part.block_of(k)?;
    if a.contains(blk.elem) {
        let c0 = wb.weight_product(0, k) * y.coord(k);
        Ok((k, true, c0.is_zero()))
    } else {
        Ok((k, false, orbit_norm_sq_upper(wb, y, k, 64) <= Rat::one()))
    }
}

/// `{ i_n : block n meets [0, m) }`.
pub fn determination_set(part: &Partition, m: usize) -> Result<BTreeSet<usize>> {
    let mut out = BTreeSet::new();
    for n in 0.. {
        let b = part.block(n)?;
        if b.start >= m {
            break;
        }
        out.insert(b.elem);
    }
    Ok(out)
}

/// Every window `[t, t + min J_n)` with `t < |J_n|` holds exactly `|I_n|`
/// twos of `w_a`, for each block `n < blocks` mounted on a member of `a`.
pub fn window_constancy(part: &Arc<Partition>, a: &SubsetCode, blocks: usize) -> Result<bool> {
    let w = l1_weight(part, a);
    for blk in part.blocks(blocks)? {
        if a.contains(blk.elem) && !(0..blk.j_len()).all(|t| w.twos_in(t, blk.j_start()) == blk.len_i) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// A coordinate where `y_a` and `y_b` differ, found on the block
/// descriptions: a block mounted on an element of `a △ b` whose `pi(p_n)`
/// has a nonzero entry.
pub fn injectivity_witness(part: &Partition, a: &SubsetCode, b: &SubsetCode, blocks: usize) -> Result<Option<usize>> {
    for blk in part.blocks(blocks)? {
        if a.contains(blk.elem) != b.contains(blk.elem) {
            if let Some(s) = blk.q.iter().position(|v| !v.is_zero()) {
                return Ok(Some(blk.j_start() + s));
            }
        }
    }
    Ok(None)
}

#[derive(Clone, Debug)]
pub struct PairVerdict {
    pub b_subset_a: bool,
    pub bound: Option<BoundCert>,
    pub hits: Vec<HitCert>,
}

impl PairVerdict {
    pub fn passed(&self) -> bool {
        match &self.bound {
            Some(c) => c.passed(),
            None => !self.hits.is_empty() && self.hits.iter().all(HitCert::passed),
        }
    }

    /// `y_a` is certified hypercyclic for `w_b` on the tested challenges.
    pub fn hypercyclic(&self) -> bool {
        self.bound.is_none()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "b_subset_a": self.b_subset_a,
            "verdict": if self.hypercyclic() { "hit" } else { "bounded" },
            "bound_cert": self.bound.as_ref().map(BoundCert::to_json),
            "hit_certs": self.hits.iter().map(HitCert::to_json).collect::<Vec<_>>(),
            "passed": self.passed(),
        })
    }
}

/// Dichotomy check for subsets of a universe of `universe` elements.
pub fn verify_pair(part: &Arc<Partition>, universe: usize, a: &SubsetCode, b: &SubsetCode, blocks: usize, per_elem: usize) -> Result<PairVerdict> {
    let missing: Vec<usize> = (0..universe).filter(|&i| b.contains(i) && !a.contains(i)).collect();
    if missing.is_empty() {
        let c = l1_bounded_cert(part, a, b, blocks)?;
        return Ok(PairVerdict { b_subset_a: true, bound: Some(c), hits: vec![] });
    }
    let mut hits = vec![];
    for i in missing {
        hits.extend(hits_on(part, a, b, i, per_elem)?);
    }
    Ok(PairVerdict { b_subset_a: false, bound: None, hits })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::enumerate::{Triple, Triples, Universe};
    use crate::rational::{int, rat};
    use crate::shift::first_hit;

    fn worked() -> Arc<Partition> {
        let t = |i| Triple { p: None, q: vec![int(1)], eps: rat(1, 2), i };
        Arc::new(Partition::new(Triples { universe: Universe::Finite(2), table: vec![t(0), t(1)] }))
    }

    #[test]
    fn worked_hit() {
        let p = worked();
        let (a, b) = (SubsetCode::empty(), SubsetCode::from_mask(0b01));
        let c = l1_hit(&p, &a, &b, 0).unwrap();
        assert_eq!(c.k, 1);
        assert!(c.passed());
        assert_eq!(c.exact_replay, Some(true));
        let wb = l1_weight(&p, &b);
        let y = l1_vector(&p, &a);
        assert_eq!(apply_shift(&wb, &y, 1).coord(0), int(1));
        let u = BasicNbhd::new(vec![int(1)], rat(1, 2)).unwrap();
        assert_eq!(first_hit(&wb, &y, &u, 10).k, Some(1));
        assert!(l1_hit(&p, &b, &a, 0).is_err());
    }

    #[test]
    fn worked_bound() {
        let p = worked();
        let a = SubsetCode::from_mask(0b01);
        let c = l1_bounded_cert(&p, &a, &a, 2).unwrap();
        assert!(c.passed());
        assert_eq!(c.tags[0].tag, Tag::ZeroCoordinate);
        assert!(matches!(c.tags[1].tag, Tag::NormBounded { .. }));
        let e = SubsetCode::empty();
        assert!(l1_bounded_cert(&p, &e, &e, 2).unwrap().passed());
        let f = SubsetCode::full();
        assert!(l1_bounded_cert(&p, &f, &a, 2).unwrap().passed());
    }

    #[test]
    fn determination() {
        let p = worked();
        assert_eq!(determination_set(&p, 2).unwrap(), [0].into());
        assert!(determination_set(&p, 0).unwrap().is_empty());
        assert_eq!(determination_set(&p, 3).unwrap(), [0, 1].into());
    }
}
