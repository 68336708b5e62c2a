//! Explicit constructions: a hypercyclic vector for a weight with infinitely
//! many twos, a weight defeating a given vector, and the index map `y -> f(y)`
//! with its orbit-boundedness certificate.

use std::sync::{Arc, Mutex};

use num_traits::{One, Zero};
use serde_json::{json, Value};

use crate::enumerate::Challenges;
use crate::error::{Error, Result};
use crate::nbhd::BasicNbhd;
use crate::rational::{fmt_rat, norm_sq, pow2, pow4, Rat};
use crate::shift::{apply_shift, orbit_norm_sq, orbit_norm_sq_upper};
use crate::vector::{L2Vector, Tri};
use crate::weight::{WeightSeq, WeightSource, WeightTail};

/// Growth condition actually enforced by `build_hc_vector`.
pub const GROWTH_CONDITION: &str = "repaired: ||qbar_n||_2 <= 2^(-n-1-k_(n-1)) * rho_n for n >= 1";

/// Largest shift index the schedule search will consider.
pub const K_SEARCH_LIMIT: usize = 1 << 26;

#[derive(Clone, Debug)]
pub struct HcSchedule {
    pub ks: Vec<usize>,
    pub qbars: Vec<Vec<Rat>>,
    pub challenges: Vec<(Vec<Rat>, Rat)>,
    pub rhos: Vec<Rat>,
}

impl HcSchedule {
    /// `p_n = k_{n+1} - k_n - |qbar_n|`.
    pub fn gaps(&self) -> Vec<usize> {
        self.ks.windows(2).zip(&self.qbars).map(|(k, q)| k[1] - k[0] - q.len()).collect()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "growth_condition": GROWTH_CONDITION,
            "ks": self.ks,
            "gaps": self.gaps(),
            "qbars": self.qbars.iter().map(|q| q.iter().map(fmt_rat).collect::<Vec<_>>()).collect::<Vec<_>>(),
            "rhos": self.rhos.iter().map(fmt_rat).collect::<Vec<_>>(),
        })
    }
}

/// `qbar(i) = 2^{-#twos in [i, i+k)} q(i)`.
pub fn scaled_block(w: &WeightSeq, q: &[Rat], k: usize) -> Vec<Rat> {
    q.iter().enumerate().map(|(i, v)| pow2(-(w.twos_in(i, k) as i64)) * v).collect()
}

fn check_twos(w: &WeightSeq) -> Result<()> {
    match w.infinitely_many_twos() {
        Some(false) => Err(Error::Precondition("weight has only finitely many twos".into())),
        _ => Ok(()),
    }
}

/// Least `k >= lo` with `pred(k)`, for `pred` monotone in `k`.
fn least_monotone(lo: usize, pred: impl Fn(usize) -> bool, what: &str) -> Result<usize> {
    if pred(lo) {
        return Ok(lo);
    }
    let mut step = 1;
    let mut bad = lo;
    loop {
        let hi = lo + step;
        if hi > K_SEARCH_LIMIT {
            return Err(Error::Horizon { horizon: K_SEARCH_LIMIT, what: what.into() });
        }
        if pred(hi) {
            let (mut a, mut b) = (bad, hi);
            while b - a > 1 {
                let m = a + (b - a) / 2;
                if pred(m) {
                    b = m;
                } else {
                    a = m;
                }
            }
            return Ok(b);
        }
        bad = hi;
        step *= 2;
    }
}

/// Builds `y = qbar_0 0^{p_0} qbar_1 0^{p_1} ...` for the first `n`
/// challenges so that `B_w^{k_j}(y)` starts with exactly `q_j`.
pub fn build_hc_vector(w: &WeightSeq, ch: &Challenges, n: usize) -> Result<(L2Vector, HcSchedule)> {
    check_twos(w)?;
    let mut s = HcSchedule { ks: vec![], qbars: vec![], challenges: vec![], rhos: vec![] };
    for j in 0..n {
        let (q, eps) = ch.get(j);
        let rho = ch.rho(j);
        let k = if j == 0 {
            0
        } else {
            let prev = s.ks[j - 1];
            let lo = prev + s.challenges[j - 1].0.len().max(1);
            let budget = pow4(-((j + 1 + prev) as i64)) * &rho * &rho;
            least_monotone(lo, |k| norm_sq(&scaled_block(w, &q, k)) <= budget, "growth condition search")?
        };
        s.qbars.push(scaled_block(w, &q, k));
        s.ks.push(k);
        s.challenges.push((q, eps));
        s.rhos.push(rho);
    }
    let len = match (s.ks.last(), s.qbars.last()) {
        (Some(k), Some(q)) => k + q.len(),
        _ => 0,
    };
    let mut y = vec![Rat::zero(); len];
    for (k, qb) in s.ks.iter().zip(&s.qbars) {
        for (i, v) in qb.iter().enumerate() {
            y[k + i] = v.clone();
        }
    }
    Ok((L2Vector::finite(y), s))
}

#[derive(Clone, Debug)]
pub struct HcHit {
    pub n: usize,
    pub k: usize,
    pub prefix_exact: bool,
    pub tail_sq: Rat,
    pub tail_ok: bool,
    /// `4^{k_n} ||qbar_i||^2 <= 4^{-i-1} rho_n^2` for every later block `i`.
    pub chain_ok: bool,
}

impl HcHit {
    pub fn passed(&self) -> bool {
        self.prefix_exact && self.tail_ok && self.chain_ok
    }

    pub fn to_json(&self) -> Value {
        json!({
            "n": self.n, "k": self.k, "prefix_exact": self.prefix_exact,
            "tail_sq": fmt_rat(&self.tail_sq), "tail_ok": self.tail_ok, "chain_ok": self.chain_ok,
        })
    }
}

/// Replays every hit of a schedule on the built vector.
pub fn verify_hc(w: &WeightSeq, y: &L2Vector, s: &HcSchedule) -> Vec<HcHit> {
    let n_all = s.ks.len();
    (0..n_all)
        .map(|n| {
            let k = s.ks[n];
            let (q, eps) = &s.challenges[n];
            let z = apply_shift(w, y, k);
            let prefix_exact = z.take(q.len()) == *q;
            let tail_sq = z.tail_norm_sq_upper(q.len());
            let tail_ok = BasicNbhd::new(q.clone(), eps.clone()).map(|u| u.contains(&z) == Tri::Yes).unwrap_or(false);
            let scale = pow4(k as i64);
            let rho2 = &s.rhos[n] * &s.rhos[n];
            let chain_ok = ((n + 1)..n_all)
                .all(|i| &scale * norm_sq(&s.qbars[i]) <= pow4(-(i as i64) - 1) * &rho2)
                && &s.rhos[n] * pow2(-(n as i64) - 1) < *eps;
            HcHit { n, k, prefix_exact, tail_sq, tail_ok, chain_ok }
        })
        .collect()
}

#[derive(Debug)]
struct DefeatSource {
    y: L2Vector,
    positions: Mutex<Vec<usize>>,
}

impl DefeatSource {
    fn next_position(&self, prev: usize, k: usize) -> usize {
        let thr = pow4(-(k as i64));
        (prev + 1..).find(|&n| self.y.tail_norm_sq_upper(n) < thr).expect("tail bound tends to zero")
    }

    /// Extends the memo until a position `>= i` is known.
    fn upto(&self, i: usize) -> Vec<usize> {
        let mut p = self.positions.lock().expect("memo lock");
        while p.last().is_none_or(|&l| l < i) {
            let prev = p.last().copied().unwrap_or(0);
            let k = p.len() + 1;
            let n = self.next_position(prev, k);
            p.push(n);
        }
        p.clone()
    }
}

impl WeightSource for DefeatSource {
    fn at(&self, i: usize) -> u8 {
        if self.upto(i).binary_search(&i).is_ok() {
            2
        } else {
            1
        }
    }

    fn twos_below(&self, k: usize) -> usize {
        self.upto(k).partition_point(|&p| p < k)
    }

    fn describe(&self) -> Value {
        json!({ "kind": "defeat", "of": self.y.to_json() })
    }

    fn infinitely_many_twos(&self) -> Option<bool> {
        Some(true)
    }
}

#[derive(Clone, Debug)]
pub struct DefeatSchedule {
    /// `n_1 < n_2 < ...` as far as they were materialized.
    pub positions: Vec<usize>,
    /// From this position on every coordinate of the weight is 2.
    pub all_twos_from: Option<usize>,
}

impl DefeatSchedule {
    pub fn to_json(&self) -> Value {
        json!({ "positions": self.positions, "all_twos_from": self.all_twos_from })
    }
}

/// Weight with twos exactly at `n_k = min { n > n_{k-1} : ||y|[n, inf)||^2 < 4^{-k} }`,
/// `n_0 = 0`. Positions are minimal with respect to the certified tail bound.
pub fn defeating_weight(y: &L2Vector) -> Result<(WeightSeq, DefeatSchedule)> {
    match y.support_end() {
        Some(end) => {
            let src = DefeatSource { y: y.clone(), positions: Mutex::new(vec![]) };
            let positions = src.upto(end.max(1));
            let last = *positions.last().expect("non-empty");
            let prefix: Vec<u8> = (0..last).map(|i| if positions.contains(&i) { 2 } else { 1 }).collect();
            let w = WeightSeq::new(prefix, WeightTail::Twos)?;
            Ok((w, DefeatSchedule { positions, all_twos_from: Some(last) }))
        }
        None => {
            if y.tail_norm_sq_upper(y.prefix().len()).is_zero() {
                return defeating_weight(&L2Vector::finite(y.prefix().to_vec()));
            }
            let src = Arc::new(DefeatSource { y: y.clone(), positions: Mutex::new(vec![]) });
            let positions = src.upto(y.prefix().len().max(1) + 16);
            let w = WeightSeq::generated(vec![], src)?;
            Ok((w, DefeatSchedule { positions, all_twos_from: None }))
        }
    }
}

#[derive(Clone, Debug)]
pub struct DefeatRow {
    pub n: usize,
    pub twos_below: usize,
    /// `4^{twos_below(n)} * tail_upper(y, n)`.
    pub scaled_tail: Rat,
    /// Exact `||B_w^n y||^2` for finitely supported `y`, else a sound bound.
    pub orbit_sq: Rat,
}

impl DefeatRow {
    pub fn passed(&self) -> bool {
        self.scaled_tail <= Rat::one() && self.orbit_sq <= Rat::one()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "n": self.n, "twos_below": self.twos_below,
            "scaled_tail": fmt_rat(&self.scaled_tail), "orbit_norm_sq": fmt_rat(&self.orbit_sq), "passed": self.passed(),
        })
    }
}

pub fn defeat_certificate(y: &L2Vector, w: &WeightSeq, s: &DefeatSchedule, big_k: usize) -> Vec<DefeatRow> {
    let n1 = s.positions.first().copied().unwrap_or(1);
    let fin = y.support_end().map(|e| y.take(e));
    (n1..=big_k)
        .map(|n| {
            let tb = w.twos_below(n);
            let scaled_tail = pow4(tb as i64) * y.tail_norm_sq_upper(n);
            let orbit_sq = match &fin {
                Some(x) => orbit_norm_sq(w, x, n),
                None => orbit_norm_sq_upper(w, y, n, 64),
            };
            DefeatRow { n, twos_below: tb, scaled_tail, orbit_sq }
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FIndices {
    pub indices: Vec<usize>,
}

fn f_threshold(n: usize) -> Rat {
    pow4(-1 - n as i64)
}

/// `i_n = min { i > 2 i_{n-1} : ||y|[i, inf)||^2 < 4^{-1-n} }` with
/// `i_{-1} = 0`, for `n < count`. The weight has twos exactly at the `i_n`
/// and ones beyond the last of them.
pub fn f_map(y: &L2Vector, count: usize) -> Result<(FIndices, WeightSeq)> {
    let mut indices = Vec::with_capacity(count);
    let mut prev = 0usize;
    for n in 0..count {
        let thr = f_threshold(n);
        let mut i = 2 * prev + 1;
        loop {
            match y.tail_norm_sq_lt(i, &thr) {
                Tri::Yes => break,
                Tri::No => i += 1,
                Tri::Undecided => {
                    return Err(Error::Horizon { horizon: i, what: format!("minimality of i_{n} is not certified") })
                }
            }
        }
        indices.push(i);
        prev = i;
    }
    Ok((FIndices { indices: indices.clone() }, f_weight(&indices)?))
}

pub fn f_weight(indices: &[usize]) -> Result<WeightSeq> {
    let len = indices.last().map_or(0, |l| l + 1);
    let prefix = (0..len).map(|i| if indices.contains(&i) { 2 } else { 1 }).collect();
    WeightSeq::new(prefix, WeightTail::Ones)
}

/// Checks that `idx` is exactly what `f_map` prescribes for `y`.
pub fn check_f_indices(y: &L2Vector, idx: &FIndices) -> Result<()> {
    let mut prev = 0usize;
    for (n, &i) in idx.indices.iter().enumerate() {
        let thr = f_threshold(n);
        if i <= 2 * prev {
            return Err(Error::Precondition(format!("i_{n} = {i} does not exceed 2 i_(n-1) = {}", 2 * prev)));
        }
        if y.tail_norm_sq_lt(i, &thr) != Tri::Yes {
            return Err(Error::Precondition(format!("tail of y at i_{n} = {i} is not below 4^(-1-{n})")));
        }
        if i - 1 > 2 * prev && y.tail_norm_sq_lt(i - 1, &thr) != Tri::No {
            return Err(Error::Precondition(format!("i_{n} = {i} is not minimal")));
        }
        prev = i;
    }
    Ok(())
}

#[derive(Clone, Debug)]
pub struct WindowRow {
    pub n: usize,
    /// Lengths `k in [i_n, i_{n+1})` that were scanned.
    pub lengths: (usize, usize),
    /// Most twos seen in an interval `[t, t+k)` with `t >= i_n`.
    pub max_twos: usize,
}

impl WindowRow {
    /// The claimed bound: at most `n` twos.
    pub fn holds(&self) -> bool {
        self.max_twos <= self.n
    }
}

#[derive(Clone, Debug)]
pub struct FCert {
    pub orbit: Vec<(usize, Rat)>,
    pub windows: Vec<WindowRow>,
}

impl FCert {
    pub fn orbit_ok(&self) -> bool {
        self.orbit.iter().all(|(_, v)| v <= &Rat::one())
    }

    pub fn windows_ok(&self) -> bool {
        self.windows.iter().all(WindowRow::holds)
    }

    pub fn first_violation(&self) -> Option<usize> {
        self.orbit.iter().find(|(_, v)| v > &Rat::one()).map(|(k, _)| *k)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "orbit_ok": self.orbit_ok(),
            "first_violation": self.first_violation(),
            "orbit": self.orbit.iter().map(|(k, v)| json!({"k": k, "norm_sq": fmt_rat(v), "ok": v <= &Rat::one()})).collect::<Vec<_>>(),
            "window_count": self.windows.iter().map(|r| json!({
                "n": r.n, "lengths": [r.lengths.0, r.lengths.1], "max_twos": r.max_twos, "claimed_max": r.n, "holds": r.holds(),
            })).collect::<Vec<_>>(),
        })
    }
}

/// Most twos of a weight with twos exactly at `idx` inside `[t, t+k)`, over
/// `t >= from`. A window achieving the maximum can be slid to start at
/// `from` or at one of the indices.
fn max_twos_in_windows(idx: &[usize], k: usize, from: usize) -> usize {
    let count = |t: usize| idx.iter().filter(|&&i| i >= t && i < t + k).count();
    std::iter::once(from).chain(idx.iter().copied().filter(|&i| i >= from)).map(count).max().unwrap_or(0)
}

/// Orbit norms `||B^k_{f(y)} y||^2` for `k in [i_0, K]` and the interval
/// two-count claim for consecutive indices.
pub fn f_bound_certificate(y: &L2Vector, idx: &FIndices, big_k: usize) -> Result<FCert> {
    check_f_indices(y, idx)?;
    let w = f_weight(&idx.indices)?;
    let i0 = idx.indices.first().copied().unwrap_or(0);
    let fin = y.support_end().map(|e| y.take(e));
    let orbit = (i0..=big_k)
        .map(|k| {
            let v = match &fin {
                Some(x) => orbit_norm_sq(&w, x, k),
                None => orbit_norm_sq_upper(&w, y, k, 64),
            };
            (k, v)
        })
        .collect();
    let windows = idx
        .indices
        .windows(2)
        .enumerate()
        .map(|(n, p)| {
            let max_twos = (p[0]..p[1]).map(|k| max_twos_in_windows(&idx.indices, k, p[0])).max().unwrap_or(0);
            WindowRow { n, lengths: (p[0], p[1]), max_twos }
        })
        .collect();
    Ok(FCert { orbit, windows })
}
