//! The vectors `y_a` and weights `w_a` attached to a subset `a`.

use std::sync::{Arc, Mutex};

use num_traits::Zero;
use serde_json::{json, Value};

use super::partition::{Block, Partition};
use super::subset::SubsetCode;
use crate::enumerate::Universe;
use crate::rational::{norm_sq, pow2, pow4, Rat};
use crate::vector::{L2Vector, TailSource};
use crate::weight::{WeightSeq, WeightSource};

/// Blocks ending at or below this position are summed exactly in tail
/// bounds; later blocks are covered by the closed-form geometric closure.
pub const MATERIALIZE_LIMIT: usize = 4096;

#[derive(Debug)]
pub struct VectorSource {
    part: Arc<Partition>,
    a: SubsetCode,
}

impl VectorSource {
    fn block_sq(&self, b: &Block, from: usize) -> Rat {
        if self.a.contains(b.elem) {
            return Rat::zero();
        }
        let lo = from.max(b.j_start()) - b.j_start();
        norm_sq(&b.q[lo.min(b.q.len())..]) * pow4(-(b.len_i as i64))
    }
}

impl TailSource for VectorSource {
    fn coord(&self, i: usize) -> Rat {
        let b = self.part.block_of(i).expect("position within machine range");
        if i < b.j_start() || self.a.contains(b.elem) {
            Rat::zero()
        } else {
            pow2(-(b.len_i as i64)) * &b.q[i - b.j_start()]
        }
    }

    /// Exact sum over blocks ending below `MATERIALIZE_LIMIT`, then
    /// `sum_{r >= R} 2^{-r-1} rho_r 2^{-max J_{r-1} - |I_{r-1}|} <= rho_R 2^{-R - max J_{R-1} - |I_{R-1}|}`,
    /// squared.
    fn norm_sq_bound(&self, m: usize) -> Rat {
        let mut acc = Rat::zero();
        let mut b = match self.part.block_of(m) {
            Ok(b) => b,
            Err(_) => return Rat::zero(),
        };
        loop {
            if b.end() > MATERIALIZE_LIMIT {
                break;
            }
            acc += self.block_sq(&b, m);
            b = self.part.block(b.n + 1).expect("next block");
        }
        let r = b.n;
        if r == 0 {
            // the whole vector is beyond the limit; use Claim 1 directly
            return acc + Rat::from_integer(1.into());
        }
        let prev = self.part.block(r - 1).expect("previous block");
        let e = r + prev.last() + prev.len_i;
        let closure = if prev.end() <= MATERIALIZE_LIMIT {
            pow4(-(e as i64)) * &b.rho * &b.rho
        } else {
            pow4(-(r as i64))
        };
        acc + closure
    }

    fn describe(&self) -> Value {
        json!({ "kind": "encoder", "subset": self.a.to_json() })
    }
}

/// `y_a`: zero on every `I_n`, zero on `J_n` when `i_n` is in `a`, and
/// `2^{-|I_n|} pi(p_n)` on `J_n` otherwise.
pub fn l1_vector(part: &Arc<Partition>, a: &SubsetCode) -> L2Vector {
    L2Vector::with_tail(vec![], Arc::new(VectorSource { part: part.clone(), a: a.clone() }))
}

#[derive(Debug)]
pub struct WeightGen {
    part: Arc<Partition>,
    a: SubsetCode,
    /// Twos strictly before block `n`.
    before: Mutex<Vec<usize>>,
}

impl WeightGen {
    pub fn new(part: &Arc<Partition>, a: &SubsetCode) -> Self {
        WeightGen { part: part.clone(), a: a.clone(), before: Mutex::new(vec![0]) }
    }

    /// Number of twos before block `n`.
    pub fn twos_before_block(&self, n: usize) -> usize {
        loop {
            let (len, last) = {
                let b = self.before.lock().expect("weight memo lock");
                if n < b.len() {
                    return b[n];
                }
                (b.len(), b[b.len() - 1])
            };
            let blk = self.part.block(len - 1).expect("block within range");
            let next = if self.a.contains(blk.elem) { blk.len_i + self.count(blk.j_len()) } else { last };
            let mut b = self.before.lock().expect("weight memo lock");
            if b.len() == len {
                b.push(next);
            }
        }
    }

    /// `|{ t < x : w_a(t) = 2 }|`.
    fn count(&self, x: usize) -> usize {
        if x == 0 {
            return 0;
        }
        let b = self.part.block_of(x - 1).expect("position within range");
        let c = self.twos_before_block(b.n);
        if !self.a.contains(b.elem) {
            return c;
        }
        if x <= b.j_start() {
            c + (x - b.start).min(b.len_i - c)
        } else {
            b.len_i + self.count(x - b.j_start())
        }
    }
}

impl WeightSource for WeightGen {
    fn at(&self, i: usize) -> u8 {
        let b = self.part.block_of(i).expect("position within range");
        if !self.a.contains(b.elem) {
            return 1;
        }
        if i < b.j_start() {
            if i - b.start < b.len_i - self.twos_before_block(b.n) {
                2
            } else {
                1
            }
        } else {
            self.at(i - b.j_start())
        }
    }

    fn twos_below(&self, k: usize) -> usize {
        self.count(k)
    }

    fn describe(&self) -> Value {
        json!({ "kind": "encoder", "subset": self.a.to_json() })
    }

    fn infinitely_many_twos(&self) -> Option<bool> {
        match self.part.triples().universe {
            Universe::Finite(u) => Some((0..u).any(|i| self.a.contains(i))),
            Universe::Countable => None,
        }
    }
}

/// `w_a`: all ones on blocks whose element is outside `a`; on the others,
/// twos left-justified in `I_n` topping the count below `min J_n` up to
/// `|I_n|`, and `w_a(min J_n + s) = w_a(s)` on `J_n`.
pub fn l1_weight(part: &Arc<Partition>, a: &SubsetCode) -> WeightSeq {
    WeightSeq::generated(vec![], Arc::new(WeightGen::new(part, a))).expect("generated weight")
}
