//! The weighted backward shift `B_w(x)(i) = w(i) x(i+1)` and its iterates
//! `B_w^k(x)(i) = 2^{#twos of w in [i, i+k)} x(i+k)`.

use std::sync::Arc;

use num_traits::Zero;
use serde_json::{json, Value};

use crate::nbhd::BasicNbhd;
use crate::rational::{pow2, pow4, Rat};
use crate::vector::{L2Vector, Tail, TailSource, Tri};
use crate::weight::WeightSeq;

#[derive(Debug)]
struct ShiftSource {
    w: WeightSeq,
    x: L2Vector,
    k: usize,
}

impl TailSource for ShiftSource {
    fn coord(&self, i: usize) -> Rat {
        self.w.weight_product(i, self.k) * self.x.coord(i + self.k)
    }

    fn norm_sq_bound(&self, m: usize) -> Rat {
        let win = self.w.max_window_twos(self.k, m + self.k);
        pow4(win as i64) * self.x.tail_norm_sq_upper(m + self.k)
    }

    fn describe(&self) -> Value {
        json!({ "kind": "shift", "k": self.k, "weight": self.w.to_json(), "of": self.x.to_json() })
    }
}

/// `B_w^k(x)`. Finitely supported inputs give finitely supported outputs.
pub fn apply_shift(w: &WeightSeq, x: &L2Vector, k: usize) -> L2Vector {
    if k == 0 {
        return x.clone();
    }
    let prefix = shift_finite(w, x.prefix(), k);
    match x.tail() {
        Tail::Zero => L2Vector::finite(prefix),
        Tail::Blocks(_) => L2Vector::with_tail(prefix, Arc::new(ShiftSource { w: w.clone(), x: x.clone(), k })),
    }
}

/// `twos_in(i, k)` for `i < len`, by a sliding window.
fn window_counts(w: &WeightSeq, k: usize, len: usize) -> Vec<usize> {
    let mut out = Vec::with_capacity(len);
    let mut t = w.twos_below(k);
    for i in 0..len {
        out.push(t);
        t = t + usize::from(w.at(i + k) == 2) - usize::from(w.at(i) == 2);
    }
    out
}

/// `B_w^k` applied to the finite string `x`, as a finite string.
pub fn shift_finite(w: &WeightSeq, x: &[Rat], k: usize) -> Vec<Rat> {
    let len = x.len().saturating_sub(k);
    let counts = window_counts(w, k, len);
    (0..len)
        .map(|i| if x[i + k].is_zero() { Rat::zero() } else { pow2(counts[i] as i64) * &x[i + k] })
        .collect()
}

/// Exact `||B_w^k(x)||^2` for a finite string `x`.
pub fn orbit_norm_sq(w: &WeightSeq, x: &[Rat], k: usize) -> Rat {
    let len = x.len().saturating_sub(k);
    let counts = window_counts(w, k, len);
    (0..len).fold(Rat::zero(), |acc, i| {
        let c = &x[i + k];
        if c.is_zero() {
            acc
        } else {
            acc + pow4(counts[i] as i64) * c * c
        }
    })
}

/// Sound upper bound on `||B_w^k(x)||^2`: exact over the coordinates of
/// `x` below `max(|prefix|, k) + extra`, crude `4^k` scaling beyond.
pub fn orbit_norm_sq_upper(w: &WeightSeq, x: &L2Vector, k: usize, extra: usize) -> Rat {
    if let Some(e) = x.support_end() {
        return orbit_norm_sq(w, &x.take(e), k);
    }
    let h = x.prefix().len().max(k) + extra;
    let head: Rat = (k..h).fold(Rat::zero(), |acc, j| {
        let c = x.coord(j);
        acc + pow4(w.twos_in(j - k, k) as i64) * &c * &c
    });
    head + pow4(w.max_window_twos(k, h) as i64) * x.tail_norm_sq_upper(h)
}

/// One orbit point summarized: exact squared norm of the explicit part and
/// a sound bound on the squared norm beyond it.
#[derive(Clone, Debug, PartialEq)]
pub struct OrbitRow {
    pub k: usize,
    pub prefix_norm_sq: Rat,
    pub tail_bound_sq: Rat,
}

/// Orbit rows for `k in [0, K]`; the explicit part is the first `window`
/// coordinates of each iterate.
pub fn orbit_trace(w: &WeightSeq, x: &L2Vector, big_k: usize, window: usize) -> Vec<OrbitRow> {
    (0..=big_k)
        .map(|k| {
            let y = apply_shift(w, x, k);
            let span = match y.support_end() {
                Some(e) => e,
                None => window,
            };
            OrbitRow { k, prefix_norm_sq: y.l2_norm_sq(0, span), tail_bound_sq: y.tail_norm_sq_upper(span) }
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Hit {
    /// Least certified `k`.
    pub k: Option<usize>,
    /// Some `k` below the answer (or the horizon) was left undecided.
    pub undecided: bool,
}

/// Least `k <= K` with `B_w^k(x)` certified inside `u`.
pub fn first_hit(w: &WeightSeq, x: &L2Vector, u: &BasicNbhd, big_k: usize) -> Hit {
    let mut undecided = false;
    for k in 0..=big_k {
        match u.contains(&apply_shift(w, x, k)) {
            Tri::Yes => return Hit { k: Some(k), undecided },
            Tri::Undecided => undecided = true,
            Tri::No => {}
        }
    }
    Hit { k: None, undecided }
}

/// `2^k`, the crude operator-norm bound of `B_w^k`.
pub fn norm_bound(k: usize) -> Rat {
    pow2(k as i64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};
    use crate::weight::WeightTail;

    #[test]
    fn shift_examples() {
        let x = L2Vector::finite(vec![int(1), int(2), int(3), int(4)]);
        let y = apply_shift(&WeightSeq::ones(), &x, 2);
        assert_eq!(y, L2Vector::finite(vec![int(3), int(4)]));
        let e3 = L2Vector::unit(3, int(1));
        assert_eq!(apply_shift(&WeightSeq::twos(), &e3, 3), L2Vector::unit(0, int(8)));
        let p = WeightSeq::periodic(vec![1, 2]).unwrap();
        assert_eq!(apply_shift(&p, &L2Vector::unit(4, int(1)), 1), L2Vector::unit(3, int(2)));
    }

    #[test]
    fn hits() {
        let e5 = L2Vector::unit(5, int(1));
        let u = BasicNbhd::new(vec![int(32)], int(1)).unwrap();
        assert_eq!(first_hit(&WeightSeq::twos(), &e5, &u, 10).k, Some(5));
        let b = BasicNbhd::ball(int(1)).unwrap();
        assert_eq!(first_hit(&WeightSeq::periodic(vec![1, 2]).unwrap(), &L2Vector::zero(), &b, 3).k, Some(0));
    }

    #[test]
    fn lazy_shift_bound_is_sound() {
        let g = L2Vector::geometric(vec![], int(1), rat(1, 2)).unwrap();
        let w = WeightSeq::new(vec![2, 1], WeightTail::Periodic(vec![1, 1, 2])).unwrap();
        let y = apply_shift(&w, &g, 3);
        for m in 0..8 {
            let partial = y.l2_norm_sq(m, m + 60);
            assert!(partial <= y.tail_norm_sq_upper(m));
        }
        assert_eq!(y.coord(0), w.weight_product(0, 3) * rat(1, 8));
    }

    #[test]
    fn orbit_norms_match_shifted_vectors() {
        let x = vec![int(1), rat(-1, 3), int(0), rat(5, 7)];
        let w = WeightSeq::periodic(vec![1, 2, 2]).unwrap();
        for k in 0..6 {
            let y = apply_shift(&w, &L2Vector::finite(x.clone()), k);
            assert_eq!(orbit_norm_sq(&w, &x, k), y.l2_norm_sq(0, 10));
        }
        let rows = orbit_trace(&WeightSeq::twos(), &L2Vector::unit(5, int(1)), 8, 16);
        assert_eq!(rows[5].prefix_norm_sq, int(1024));
    }
}
