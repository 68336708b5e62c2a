//! Nice points of weights, the nicely-maps relation and the constructions
//! built on it: witness weights for a single vector, the dense-open
//! refinement, and a common nicely hypercyclic vector for finitely many
//! nice weights.

use num_traits::{One, Signed, Zero};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::nbhd::{sample_members, BasicNbhd};
use crate::rational::{fmt_rat, int, norm_sq, pow2, pow4, sqrt_upper, Rat, SQRT_PRECISIONS};
use crate::shift::apply_shift;
use crate::vector::{L2Vector, Tri};
use crate::weight::{WeightSeq, WeightTail};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct NicePoint {
    pub n: usize,
    pub k: usize,
}

/// `w(i) = w(k + i)` for all `i < n`.
pub fn is_nice_at(w: &WeightSeq, n: usize, k: usize) -> bool {
    (0..n).all(|i| w.at(i) == w.at(k + i))
}

pub fn nice_points(w: &WeightSeq, n: usize, big_k: usize) -> Vec<NicePoint> {
    (0..=big_k).filter(|&k| is_nice_at(w, n, k)).map(|k| NicePoint { n, k }).collect()
}

/// `(v(i) - q(i))^2 |q| < eps^2` for every `i < |q|`.
fn sup_close(v: &[Rat], q: &[Rat], eps: &Rat) -> bool {
    BasicNbhd { q: q.to_vec(), eps: eps.clone() }.prefix_ok(v)
}

/// Transcript of the three nicely-maps conditions.
#[derive(Clone, Debug)]
pub struct NiceMapCert {
    pub k: usize,
    pub q: Vec<Rat>,
    pub eps: Rat,
    /// `B_w^k(y)|q|`.
    pub image_prefix: Vec<Rat>,
    pub in_nbhd: Tri,
    pub nice: bool,
    /// Upper bound on `||y|[k + |q|, inf)||^2` and the outcome against
    /// `eps^2 4^{-k}`.
    pub strong_tail_sq: Rat,
    pub strong_tail: Tri,
}

impl NiceMapCert {
    pub fn passed(&self) -> bool {
        self.in_nbhd.is_yes() && self.nice && self.strong_tail.is_yes()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "k": self.k,
            "q": self.q.iter().map(fmt_rat).collect::<Vec<_>>(),
            "eps": fmt_rat(&self.eps),
            "image_prefix": self.image_prefix.iter().map(fmt_rat).collect::<Vec<_>>(),
            "in_nbhd": format!("{:?}", self.in_nbhd),
            "nice": self.nice,
            "strong_tail_sq": fmt_rat(&self.strong_tail_sq),
            "strong_tail_threshold_sq": fmt_rat(&(&self.eps * &self.eps * pow4(-(self.k as i64)))),
            "strong_tail": format!("{:?}", self.strong_tail),
            "passed": self.passed(),
        })
    }
}

/// Evaluates all three conditions, passing or not.
pub fn nicely_transcript(w: &WeightSeq, y: &L2Vector, k: usize, q: &[Rat], eps: &Rat) -> NiceMapCert {
    let z = apply_shift(w, y, k);
    let u = BasicNbhd { q: q.to_vec(), eps: eps.clone() };
    let thr = eps * eps * pow4(-(k as i64));
    NiceMapCert {
        k,
        q: q.to_vec(),
        eps: eps.clone(),
        image_prefix: z.take(q.len()),
        in_nbhd: u.contains(&z),
        nice: is_nice_at(w, q.len(), k),
        strong_tail_sq: y.tail_norm_sq_upper(k + q.len()),
        strong_tail: y.tail_norm_sq_lt(k + q.len(), &thr),
    }
}

/// Certificate that `B_w^k` maps `y` nicely into `U_{q,eps}`.
pub fn maps_nicely(w: &WeightSeq, y: &L2Vector, k: usize, q: &[Rat], eps: &Rat) -> Option<NiceMapCert> {
    Some(nicely_transcript(w, y, k, q, eps)).filter(NiceMapCert::passed)
}

/// Equal two-counts below `k` and `|q|`-niceness of `v` at `k`.
pub fn transfer_hypotheses(w: &WeightSeq, v: &WeightSeq, k: usize, q_len: usize) -> bool {
    w.twos_below(k) == v.twos_below(k) && is_nice_at(v, q_len, k)
}

/// Moves a nicely-maps certificate from `w` to `v`: the hypotheses of the
/// transfer plus a full replay for `v`.
pub fn count_transfer_check(w: &WeightSeq, v: &WeightSeq, y: &L2Vector, k: usize, q: &[Rat], eps: &Rat) -> bool {
    maps_nicely(w, y, k, q, eps).is_some() && transfer_hypotheses(w, v, k, q.len()) && maps_nicely(v, y, k, q, eps).is_some()
}

/// Suffix sums of squares for finite vectors, or the tail oracle otherwise.
struct TailOracle<'a> {
    y: &'a L2Vector,
    suffix: Option<Vec<Rat>>,
}

impl<'a> TailOracle<'a> {
    fn new(y: &'a L2Vector) -> Self {
        let suffix = y.support_end().map(|e| {
            let mut s = vec![Rat::zero(); e + 1];
            for i in (0..e).rev() {
                let c = y.coord(i);
                s[i] = &s[i + 1] + &c * &c;
            }
            s
        });
        TailOracle { y, suffix }
    }

    fn lt(&self, m: usize, thr: &Rat) -> Tri {
        match &self.suffix {
            Some(s) => Tri::from_bool(s.get(m).is_none_or(|v| v < thr)),
            None => self.y.tail_norm_sq_lt(m, thr),
        }
    }
}

/// Least `k <= K`, then least `n`, with `m <= n`, `n + m <= k`,
/// `||2^n y|[k, k+|q|) - q||_inf < eps |q|^{-1/2}` and
/// `||y|[k+|q|, inf)|| < eps 2^{-k}`.
pub fn nhc_witness_search(y: &L2Vector, q: &[Rat], eps: &Rat, m: usize, big_k: usize) -> Option<(usize, usize)> {
    let tails = TailOracle::new(y);
    let any_nonzero = q.iter().any(|v| !v.is_zero());
    for k in 2 * m..=big_k {
        let window: Vec<Rat> = (k..k + q.len()).map(|i| y.coord(i)).collect();
        if any_nonzero && window.iter().all(Zero::is_zero) {
            continue;
        }
        let thr = eps * eps * pow4(-(k as i64));
        if !tails.lt(k + q.len(), &thr).is_yes() {
            continue;
        }
        for n in m..=k - m {
            let scaled: Vec<Rat> = window.iter().map(|v| v * pow2(n as i64)).collect();
            if sup_close(&scaled, q, eps) {
                return Some((n, k));
            }
        }
    }
    None
}

#[derive(Clone, Debug)]
pub struct NiceWitness {
    pub prefix: Vec<u8>,
    /// `(n, k)` per challenge.
    pub points: Vec<(usize, usize)>,
    pub certs: Vec<NiceMapCert>,
}

impl NiceWitness {
    pub fn weight(&self) -> WeightSeq {
        WeightSeq::alpha_plus(&self.prefix).expect("bits are 1 or 2")
    }

    pub fn passed(&self) -> bool {
        let w = self.weight();
        self.certs.iter().all(NiceMapCert::passed)
            && self.points.iter().zip(&self.certs).all(|(&(n, k), c)| w.twos_below(k) == n && c.k == k)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "prefix": self.prefix.iter().map(|b| char::from(b'0' + b)).collect::<String>(),
            "points": self.points.iter().map(|(n, k)| json!({"n": n, "k": k})).collect::<Vec<_>>(),
            "certs": self.certs.iter().map(NiceMapCert::to_json).collect::<Vec<_>>(),
            "passed": self.passed(),
        })
    }
}

/// Grows a weight prefix for which `y` maps nicely into each challenge in
/// turn: twos left-justified in `[m, k)` until `n` twos lie below `k`, then
/// `w(k + i) = w(i)` for `i < |q|`. Certificates are evaluated on the
/// final prefix continued by twos.
pub fn build_nice_witness(y: &L2Vector, challenges: &[BasicNbhd], big_k: usize) -> Result<NiceWitness> {
    let mut w: Vec<u8> = vec![];
    let mut points = vec![];
    for u in challenges {
        let m = w.len();
        let (n, k) = nhc_witness_search(y, &u.q, &u.eps, m, big_k)
            .ok_or_else(|| Error::Horizon { horizon: big_k, what: format!("no nice witness for challenge {}", u.to_json()) })?;
        let have = w.iter().filter(|&&b| b == 2).count();
        let extra = n - have;
        w.extend((m..k).map(|i| if i - m < extra { 2 } else { 1 }));
        // at k = 0 the copy condition w(k + i) = w(i) is vacuous
        if k > 0 {
            for i in 0..u.q.len() {
                let b = w[i];
                w.push(b);
            }
        }
        points.push((n, k));
    }
    let wf = WeightSeq::alpha_plus(&w)?;
    let certs = challenges
        .iter()
        .zip(&points)
        .map(|(u, &(_, k))| nicely_transcript(&wf, y, k, &u.q, &u.eps))
        .collect();
    Ok(NiceWitness { prefix: w, points, certs })
}

/// Output of the dense-open refinement: `U_{s,rho}` sits inside `U_{r,delta}`
/// and every member meets the witness inequalities at `(n, k)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Refinement {
    pub s: Vec<Rat>,
    pub rho: Rat,
    pub n: usize,
    pub k: usize,
}

impl Refinement {
    pub fn to_json(&self) -> Value {
        json!({ "s": self.s.iter().map(fmt_rat).collect::<Vec<_>>(), "rho": fmt_rat(&self.rho), "n": self.n, "k": self.k })
    }
}

/// `n` least with `n >= m` and `4^n delta^2 > 9 ||q||^2`; `k = max(n + m, |r| + 1)`;
/// `s = r, 0^{k-|r|}, 2^{-n} q`; `rho = min(eps 2^{-k}, delta/3) / 2`.
pub fn dense_refinement(r: &[Rat], delta: &Rat, q: &[Rat], eps: &Rat, m: usize) -> Result<Refinement> {
    if !delta.is_positive() || !eps.is_positive() {
        return Err(Error::Domain("radii must be positive".into()));
    }
    let lhs = int(9) * norm_sq(q);
    let d2 = delta * delta;
    let n = (m..).find(|&n| pow4(n as i64) * &d2 > lhs).expect("powers of four are unbounded");
    let k = (n + m).max(r.len() + 1);
    let mut s = r.to_vec();
    s.resize(k, Rat::zero());
    s.extend(q.iter().map(|v| v * pow2(-(n as i64))));
    let a = eps * pow2(-(k as i64));
    let b = delta / int(3);
    let rho = a.min(b) / int(2);
    Ok(Refinement { s, rho, n, k })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RefinementCheck {
    pub in_source: bool,
    pub hits_target: bool,
    pub strong_tail: bool,
}

impl RefinementCheck {
    pub fn passed(&self) -> bool {
        self.in_source && self.hits_target && self.strong_tail
    }
}

/// The three promised inequalities on the finitely supported point `z`.
pub fn check_refinement_point(f: &Refinement, r: &[Rat], delta: &Rat, q: &[Rat], eps: &Rat, z: &[Rat]) -> RefinementCheck {
    let at = |i: usize| z.get(i).cloned().unwrap_or_else(Rat::zero);
    let src = BasicNbhd { q: r.to_vec(), eps: delta.clone() };
    let window: Vec<Rat> = (f.k..f.k + q.len()).map(|i| at(i) * pow2(f.n as i64)).collect();
    let rest = z.get(f.k + q.len()..).map(norm_sq).unwrap_or_else(Rat::zero);
    RefinementCheck {
        in_source: src.contains_finite(z),
        hits_target: sup_close(&window, q, eps),
        strong_tail: rest < eps * eps * pow4(-(f.k as i64)),
    }
}

/// Deterministic members of `U_{s,rho}`.
pub fn refinement_samples(f: &Refinement, count: usize) -> Vec<Vec<Rat>> {
    sample_members(&f.s, &f.rho, count)
}

/// Both values occur infinitely often and every initial segment recurs
/// infinitely often. Decided for eventually periodic weights and for
/// generated weights that expose a niceness oracle.
pub fn is_nice_weight(w: &WeightSeq) -> Result<bool> {
    let pat = match w.tail() {
        WeightTail::Ones => return Ok(false),
        WeightTail::Twos => return Ok(false),
        WeightTail::Periodic(p) => p.clone(),
        WeightTail::Generated(g) => {
            return g.niceness().ok_or_else(|| Error::Precondition("generated weight has no niceness oracle".into()))
        }
    };
    if !(pat.contains(&1) && pat.contains(&2)) {
        return Ok(false);
    }
    // every prefix recurs iff the prefix continues the pattern backwards
    let l = w.prefix().len();
    let p = pat.len();
    Ok((0..l).all(|i| w.at(i) == pat[(i + p * l - l) % p]))
}

#[derive(Clone, Debug)]
pub struct CommonStep {
    pub weight: usize,
    pub q: Vec<Rat>,
    pub eps: Rat,
    pub m: usize,
    pub n: usize,
    pub k: usize,
    pub rho_before: Rat,
    pub rho_after: Rat,
}

#[derive(Clone, Debug)]
pub struct CommonNice {
    pub y: Vec<Rat>,
    pub steps: Vec<CommonStep>,
    pub certs: Vec<NiceMapCert>,
}

impl CommonNice {
    pub fn vector(&self) -> L2Vector {
        L2Vector::finite(self.y.clone())
    }

    /// Every certificate passes and `||y||^2 < rho_0^2 = 1`.
    pub fn passed(&self) -> bool {
        self.certs.iter().all(NiceMapCert::passed) && norm_sq(&self.y) < Rat::one()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "y": self.y.iter().map(fmt_rat).collect::<Vec<_>>(),
            "steps": self.steps.iter().map(|s| json!({
                "weight": s.weight, "q": s.q.iter().map(fmt_rat).collect::<Vec<_>>(), "eps": fmt_rat(&s.eps),
                "m": s.m, "n": s.n, "k": s.k, "rho_before": fmt_rat(&s.rho_before), "rho_after": fmt_rat(&s.rho_after),
            })).collect::<Vec<_>>(),
            "certs": self.certs.iter().map(NiceMapCert::to_json).collect::<Vec<_>>(),
            "norm_sq": fmt_rat(&norm_sq(&self.y)),
            "passed": self.passed(),
        })
    }
}

/// Builds one vector nicely hypercyclic for each weight on its challenges.
/// Challenges are served round-robin across weights; each step places
/// `2^{-n} q` at the least `|q|`-nice point `k >= m` of the weight with
/// `4^{-n} ||q||^2 < rho_m^2`, `n` the two-count below `k`, then sets
/// `rho = min(eps 2^{-k}, rho_m - 2^{-n} ||q||) / 2` using an upper
/// bracket for `||q||`.
pub fn common_nice_builder(ws: &[WeightSeq], challenges: &[Vec<BasicNbhd>], horizon: usize) -> Result<CommonNice> {
    if ws.len() != challenges.len() {
        return Err(Error::Precondition("one challenge list per weight".into()));
    }
    for (i, w) in ws.iter().enumerate() {
        if !is_nice_weight(w)? {
            return Err(Error::Precondition(format!("weight {i} is not nice")));
        }
    }
    let mut y: Vec<Rat> = vec![];
    let mut rho = Rat::one();
    let mut steps = vec![];
    let rounds = challenges.iter().map(Vec::len).max().unwrap_or(0);
    for j in 0..rounds {
        for (wi, w) in ws.iter().enumerate() {
            let Some(u) = challenges[wi].get(j) else { continue };
            let m = y.len();
            let qn = norm_sq(&u.q);
            let r2 = &rho * &rho;
            let k = (m..m + horizon)
                .find(|&k| is_nice_at(w, u.q.len(), k) && qn.clone() * pow4(-(w.twos_below(k) as i64)) < r2)
                .ok_or_else(|| Error::Horizon { horizon, what: format!("no nice point for weight {wi}") })?;
            let n = w.twos_below(k);
            let scale = pow2(-(n as i64));
            let room = SQRT_PRECISIONS
                .iter()
                .map(|&p| &rho - &scale * sqrt_upper(&qn, p))
                .find(Rat::is_positive)
                .ok_or_else(|| Error::Certificate(format!("rho underflow at step {}", steps.len())))?;
            let next = (u.eps.clone() * pow2(-(k as i64))).min(room) / int(2);
            y.resize(k, Rat::zero());
            y.extend(u.q.iter().map(|v| v * &scale));
            steps.push(CommonStep { weight: wi, q: u.q.clone(), eps: u.eps.clone(), m, n, k, rho_before: rho.clone(), rho_after: next.clone() });
            rho = next;
        }
    }
    let yv = L2Vector::finite(y.clone());
    let certs = steps.iter().map(|s| nicely_transcript(&ws[s.weight], &yv, s.k, &s.q, &s.eps)).collect();
    Ok(CommonNice { y, steps, certs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    fn y5() -> L2Vector {
        L2Vector::finite(vec![int(1), int(0), int(0), int(0), rat(1, 8)])
    }

    #[test]
    fn nice_point_examples() {
        let per = WeightSeq::periodic(vec![1, 2]).unwrap();
        assert!(is_nice_at(&per, 2, 2));
        assert!(is_nice_at(&WeightSeq::twos_at_squares(), 7, 0));
        let w = WeightSeq::new(vec![1, 2], WeightTail::Twos).unwrap();
        assert!(!is_nice_at(&w, 1, 1));
        assert_eq!(nice_points(&per, 2, 6).iter().map(|p| p.k).collect::<Vec<_>>(), vec![0, 2, 4, 6]);
    }

    #[test]
    fn maps_nicely_examples() {
        let c = maps_nicely(&WeightSeq::twos(), &y5(), 4, &[int(2)], &rat(1, 2)).unwrap();
        assert_eq!(c.image_prefix, vec![int(2)]);
        let w = WeightSeq::new(vec![1], WeightTail::Twos).unwrap();
        let y = L2Vector::finite(vec![int(0), int(1)]);
        assert!(maps_nicely(&w, &y, 1, &[int(1)], &rat(1, 2)).is_none());
        // strong tail exactly at the threshold
        let y = L2Vector::finite(vec![int(0), rat(1, 2)]);
        let t = nicely_transcript(&WeightSeq::twos(), &y, 1, &[], &int(1));
        assert_eq!(t.strong_tail, Tri::No);
    }

    #[test]
    fn transfer() {
        let w = WeightSeq::twos();
        assert!(count_transfer_check(&w, &w, &y5(), 4, &[int(2)], &rat(1, 2)));
        let v = WeightSeq::new(vec![1, 2, 2, 2, 2], WeightTail::Twos).unwrap();
        assert!(!count_transfer_check(&v, &w, &y5(), 4, &[int(2)], &rat(1, 2)));
    }

    #[test]
    fn witness_search_examples() {
        assert_eq!(nhc_witness_search(&y5(), &[int(2)], &rat(1, 2), 0, 20), Some((4, 4)));
        assert_eq!(nhc_witness_search(&L2Vector::zero(), &[int(1)], &rat(1, 2), 0, 50), None);
        // empty q: first k past the support with the strong tail, n = m
        assert_eq!(nhc_witness_search(&y5(), &[], &rat(1, 2), 1, 20), Some((1, 5)));
    }

    #[test]
    fn witness_builder_example() {
        let u = BasicNbhd::new(vec![int(2)], rat(1, 2)).unwrap();
        let w = build_nice_witness(&y5(), &[u], 20).unwrap();
        assert_eq!(w.prefix, vec![2, 2, 2, 2, 2]);
        assert!(w.passed());
        assert!(build_nice_witness(&y5(), &[], 20).unwrap().prefix.is_empty());
    }

    #[test]
    fn refinement_example() {
        let f = dense_refinement(&[int(0)], &rat(1, 2), &[int(1)], &rat(1, 2), 1).unwrap();
        assert_eq!((f.n, f.k), (3, 4));
        assert_eq!(f.s, vec![int(0), int(0), int(0), int(0), rat(1, 8)]);
        assert_eq!(f.rho, rat(1, 64));
        for z in refinement_samples(&f, 100) {
            assert!(BasicNbhd { q: f.s.clone(), eps: f.rho.clone() }.contains_finite(&z));
            assert!(check_refinement_point(&f, &[int(0)], &rat(1, 2), &[int(1)], &rat(1, 2), &z).passed());
        }
    }

    #[test]
    fn nice_weights() {
        assert!(!is_nice_weight(&WeightSeq::ones()).unwrap());
        assert!(is_nice_weight(&WeightSeq::periodic(vec![1, 2]).unwrap()).unwrap());
        assert!(is_nice_weight(&WeightSeq::new(vec![2], WeightTail::Periodic(vec![1, 2])).unwrap()).unwrap());
        assert!(!is_nice_weight(&WeightSeq::new(vec![1], WeightTail::Periodic(vec![1, 2])).unwrap()).unwrap());
        assert!(!is_nice_weight(&WeightSeq::twos_at_squares()).unwrap());
        let part = std::sync::Arc::new(crate::encoder::Partition::new(crate::enumerate::Triples::canonical(
            crate::enumerate::Universe::Finite(2),
        )));
        let opaque = crate::encoder::l1_weight(&part, &crate::encoder::SubsetCode::full());
        assert!(is_nice_weight(&opaque).is_err());
    }

    #[test]
    fn common_builder() {
        let per = WeightSeq::periodic(vec![1, 2]).unwrap();
        let c = common_nice_builder(std::slice::from_ref(&per), &[vec![BasicNbhd::ball(rat(1, 2)).unwrap()]], 100).unwrap();
        assert!(c.passed());
        let ws = vec![WeightSeq::periodic(vec![2, 2, 1]).unwrap(), per];
        let u = |v: i64| BasicNbhd::new(vec![int(v)], rat(1, 2)).unwrap();
        let c = common_nice_builder(&ws, &[vec![u(1), u(-1)], vec![u(3)]], 10_000).unwrap();
        assert!(c.passed(), "{}", c.to_json());
        assert!(c.steps.windows(2).all(|p| p[1].rho_after < p[0].rho_after));
    }
}
