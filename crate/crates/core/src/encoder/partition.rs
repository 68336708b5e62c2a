//! The interval partition `I_0, J_0, I_1, J_1, ...` of the naturals.
//!
//! Positions are machine integers; the lengths grow geometrically, so all
//! inequalities involving `2^{-|I_n|}` are decided on exponents.

use std::sync::{Arc, Mutex};

use num_traits::Zero;
use serde_json::{json, Value};

use crate::enumerate::Triples;
use crate::error::{Error, Result};
use crate::rational::{ceil_log4, fmt_rat, le_pow2, norm_sq, Rat};

/// Positions beyond this are refused so that sums of positions never wrap.
pub const POSITION_LIMIT: usize = usize::MAX / 8;

#[derive(Clone, Debug)]
pub struct Block {
    pub n: usize,
    /// `min I_n`.
    pub start: usize,
    /// `|I_n|`.
    pub len_i: usize,
    /// `pi(p_n)`; `|J_n| = |q|`.
    pub q: Vec<Rat>,
    pub eps: Rat,
    pub rho: Rat,
    /// `i_n`, the element the block is mounted on.
    pub elem: usize,
    pub p: Option<usize>,
}

impl Block {
    /// `min J_n`.
    pub fn j_start(&self) -> usize {
        self.start + self.len_i
    }

    pub fn j_len(&self) -> usize {
        self.q.len()
    }

    /// One past the last position of the block.
    pub fn end(&self) -> usize {
        self.j_start() + self.j_len()
    }

    /// Last position of the block: `max J_n`, or `max I_n` when `J_n` is empty.
    pub fn last(&self) -> usize {
        self.end() - 1
    }

    pub fn to_json(&self) -> Value {
        json!({
            "n": self.n,
            "I": [self.start, self.j_start()],
            "J": [self.j_start(), self.end()],
            "q": self.q.iter().map(fmt_rat).collect::<Vec<_>>(),
            "eps": fmt_rat(&self.eps),
            "rho": fmt_rat(&self.rho),
            "element": self.elem,
        })
    }
}

/// Replay of the three length conditions for one block.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConditionReplay {
    pub n: usize,
    pub non_decreasing: bool,
    pub exceeds_prev_max: bool,
    pub norm_condition: bool,
    /// Every shorter length fails one of the conditions.
    pub minimal: bool,
}

impl ConditionReplay {
    pub fn passed(&self) -> bool {
        self.non_decreasing && self.exceeds_prev_max && self.norm_condition && self.minimal
    }
}

#[derive(Debug)]
pub struct Partition {
    triples: Triples,
    blocks: Mutex<Vec<Arc<Block>>>,
}

/// `2^{-L} ||q|| <= 2^{-n-1} rho 2^{-M} 2^{-L'}` in squared form, on exponents.
fn norm_condition(q_sq: &Rat, rho: &Rat, n: usize, len: usize, prev_last: usize, prev_len: usize) -> bool {
    if q_sq.is_zero() {
        return true;
    }
    let e = 2 * (len as i64 - n as i64 - 1 - prev_last as i64 - prev_len as i64);
    le_pow2(&(q_sq / (rho * rho)), e)
}

impl Partition {
    pub fn new(triples: Triples) -> Self {
        Partition { triples, blocks: Mutex::new(vec![]) }
    }

    pub fn triples(&self) -> &Triples {
        &self.triples
    }

    fn make(&self, prev: Option<&Block>, n: usize) -> Result<Block> {
        let t = self.triples.get(n);
        let rho = self.triples.rho(n);
        let (start, len_i) = match prev {
            None => (0, 1),
            Some(b) => {
                let start = b.end();
                let q_sq = norm_sq(&t.q);
                let mut len = b.len_i.max(b.last() + 1);
                if !q_sq.is_zero() {
                    let e = ceil_log4(&(&q_sq / (&rho * &rho)));
                    let need = e + n as i64 + 1 + b.last() as i64 + b.len_i as i64;
                    len = len.max(need.max(0) as usize);
                }
                (start, len)
            }
        };
        let fits = start.checked_add(len_i).and_then(|x| x.checked_add(t.q.len())).is_some_and(|e| e < POSITION_LIMIT);
        if !fits {
            return Err(Error::Horizon { horizon: n, what: "partition positions exceed machine range".into() });
        }
        Ok(Block { n, start, len_i, q: t.q, eps: t.eps, rho, elem: t.i, p: t.p })
    }

    pub fn block(&self, n: usize) -> Result<Arc<Block>> {
        let mut b = self.blocks.lock().expect("partition lock");
        while b.len() <= n {
            let next = self.make(b.last().map(|x| x.as_ref()), b.len())?;
            b.push(Arc::new(next));
        }
        Ok(b[n].clone())
    }

    pub fn blocks(&self, count: usize) -> Result<Vec<Arc<Block>>> {
        (0..count).map(|n| self.block(n)).collect()
    }

    /// The block containing position `pos`.
    pub fn block_of(&self, pos: usize) -> Result<Arc<Block>> {
        {
            let b = self.blocks.lock().expect("partition lock");
            if let Some(last) = b.last() {
                if pos < last.end() {
                    let idx = b.partition_point(|x| x.end() <= pos);
                    return Ok(b[idx].clone());
                }
            }
        }
        let mut n = 0;
        loop {
            let blk = self.block(n)?;
            if pos < blk.end() {
                return Ok(blk);
            }
            n += 1;
        }
    }

    /// Replays the length conditions of block `n >= 1`.
    pub fn replay(&self, n: usize) -> Result<ConditionReplay> {
        let b = self.block(n)?;
        if n == 0 {
            return Ok(ConditionReplay {
                n,
                non_decreasing: true,
                exceeds_prev_max: true,
                norm_condition: true,
                minimal: b.len_i == 1,
            });
        }
        let p = self.block(n - 1)?;
        let q_sq = norm_sq(&b.q);
        let ok = |len: usize| {
            (
                len >= p.len_i,
                len > p.last(),
                norm_condition(&q_sq, &b.rho, n, len, p.last(), p.len_i),
            )
        };
        let (c1, c2, c3) = ok(b.len_i);
        let shorter = ok(b.len_i - 1);
        let minimal = b.len_i == 0 || !(shorter.0 && shorter.1 && shorter.2);
        Ok(ConditionReplay { n, non_decreasing: c1, exceeds_prev_max: c2, norm_condition: c3, minimal })
    }

    pub fn to_json(&self, count: usize) -> Result<Value> {
        Ok(Value::Array(self.blocks(count)?.iter().map(|b| b.to_json()).collect()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::enumerate::{Triple, Universe};
    use crate::rational::{int, rat};

    pub fn worked() -> Partition {
        let t = |i| Triple { p: None, q: vec![int(1)], eps: rat(1, 2), i };
        Partition::new(Triples { universe: Universe::Finite(2), table: vec![t(0), t(1)] })
    }

    #[test]
    fn worked_partition() {
        let p = worked();
        let b0 = p.block(0).unwrap();
        assert_eq!((b0.start, b0.j_start(), b0.end()), (0, 1, 2));
        let b1 = p.block(1).unwrap();
        assert_eq!((b1.start, b1.len_i, b1.j_start(), b1.end()), (2, 5, 7, 8));
        assert!(p.replay(1).unwrap().passed());
        assert_eq!(p.block_of(7).unwrap().n, 1);
        assert_eq!(p.block_of(1).unwrap().n, 0);
    }

    #[test]
    fn canonical_growth() {
        let p = Partition::new(Triples::canonical(Universe::Finite(8)));
        let bs = p.blocks(30).unwrap();
        for w in bs.windows(2) {
            assert!(w[1].len_i >= w[0].len_i);
            assert_eq!(w[1].start, w[0].end());
        }
        for n in 0..30 {
            assert!(p.replay(n).unwrap().passed(), "block {n}");
        }
    }
}
