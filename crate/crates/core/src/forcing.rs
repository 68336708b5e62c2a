//! Partial witnesses `(alpha, r, delta)`: a finite weight prefix and a basic
//! set whose shift images stay in the unit ball, the extension relation
//! between them, and a finite-stage engine that meets a list of requests
//! along a descending chain.

use std::fmt;
use std::sync::Arc;

use num_traits::{One, Signed, Zero};
use serde_json::{json, Value};

use crate::enumerate::Challenges;
use crate::error::{Error, Result};
use crate::nbhd::BasicNbhd;
use crate::niceness::{maps_nicely, nicely_transcript, NiceMapCert};
use crate::rational::{certify_root_sum_lt, fmt_rat, int, norm_sq, parse_rat, pow2, pow4, sqrt_upper, Rat};
use crate::shift::{orbit_norm_sq, shift_finite};
use crate::vector::L2Vector;
use crate::weight::{parse_bits, WeightSeq};

/// Bits of precision for square-root brackets in norm bounds.
const ROOT_BITS: u32 = 64;
/// Halvings of a radius tried before a construction gives up.
const HALVINGS: usize = 96;

/// `|alpha| >= |r|` and `0 < delta < 2^{-|alpha|}`.
pub fn is_condition(alpha: &[u8], r: &[Rat], delta: &Rat) -> bool {
    delta.is_positive() && alpha.len() >= r.len() && *delta < pow2(-(alpha.len() as i64))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Condition {
    pub alpha: Vec<u8>,
    pub r: Vec<Rat>,
    pub delta: Rat,
}

impl Condition {
    pub fn new(alpha: Vec<u8>, r: Vec<Rat>, delta: Rat) -> Result<Self> {
        WeightSeq::alpha_plus(&alpha)?;
        if !is_condition(&alpha, &r, &delta) {
            return Err(Error::Domain("not a condition: need |alpha| >= |r| and 0 < delta < 2^-|alpha|".into()));
        }
        Ok(Condition { alpha, r, delta })
    }

    /// `alpha` followed by twos.
    pub fn weight(&self) -> WeightSeq {
        WeightSeq::alpha_plus(&self.alpha).expect("validated bits")
    }

    /// Bound on `||B^{|alpha|}_{alpha+} x||` over `x in U_{r,delta}`.
    pub fn unit_ball_bound(&self) -> Rat {
        cert_shift_ball_bound(&self.weight(), self.alpha.len(), &self.r, &self.delta)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "alpha": self.alpha.iter().map(|b| char::from(b'0' + b)).collect::<String>(),
            "r": self.r.iter().map(fmt_rat).collect::<Vec<_>>(),
            "delta": fmt_rat(&self.delta),
        })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let bad = |m: &str| Error::Parse(format!("condition JSON: {m}"));
        let alpha = parse_bits(v.get("alpha").and_then(Value::as_str).ok_or_else(|| bad("missing alpha"))?)?;
        let r = v
            .get("r")
            .and_then(Value::as_array)
            .ok_or_else(|| bad("missing r"))?
            .iter()
            .map(|e| e.as_str().ok_or_else(|| bad("r entries must be strings")).and_then(parse_rat))
            .collect::<Result<Vec<_>>>()?;
        let delta = parse_rat(v.get("delta").and_then(Value::as_str).ok_or_else(|| bad("missing delta"))?)?;
        Self::new(alpha, r, delta)
    }
}

fn root_up(x: &Rat) -> Rat {
    if x.is_zero() {
        Rat::zero()
    } else {
        sqrt_upper(x, ROOT_BITS)
    }
}

/// Upper bound on `||x|[j0, |s|)||` over `x in U_{s,eta}`.
fn segment_norm_up(s: &[Rat], eta: &Rat, j0: usize) -> Rat {
    if j0 >= s.len() {
        return Rat::zero();
    }
    let spread = int((s.len() - j0) as i64) * eta * eta / int(s.len() as i64);
    root_up(&norm_sq(&s[j0..])) + root_up(&spread)
}

/// Sound bound on `||(B_w^k x)|[j0 - k, inf)||` over `x in U_{s,eta}`, for `j0 >= k`.
/// Minimum of the global form `2^M (A + eta)` and the form split at `|s|`,
/// `2^{M1} A + 2^{M2} eta`, where `A` bounds `||x|[j0, |s|)||` and the `M`s
/// are the largest two-counts of the windows feeding each part.
fn image_tail_bound(w: &WeightSeq, k: usize, j0: usize, s: &[Rat], eta: &Rat) -> Rat {
    let a = segment_norm_up(s, eta, j0);
    let m_all = w.max_window_twos(k, j0);
    let global = pow2(m_all as i64) * (&a + eta);
    if j0 >= s.len() {
        return global;
    }
    let m1 = (j0..s.len()).map(|j| w.twos_in(j - k, k)).max().unwrap_or(0);
    let m2 = w.max_window_twos(k, s.len());
    let split = pow2(m1 as i64) * &a + pow2(m2 as i64) * eta;
    global.min(split)
}

/// Sound upper bound on `sup { ||B_w^k x|| : x in U_{s,eta} }`.
pub fn cert_shift_ball_bound(w: &WeightSeq, k: usize, s: &[Rat], eta: &Rat) -> Rat {
    image_tail_bound(w, k, k, s, eta)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InclusionCert {
    pub len_ok: bool,
    pub coords_ok: bool,
    pub tail_ok: bool,
}

impl InclusionCert {
    pub fn passed(&self) -> bool {
        self.len_ok && self.coords_ok && self.tail_ok
    }

    pub fn to_json(&self) -> Value {
        json!({ "len_ok": self.len_ok, "coords_ok": self.coords_ok, "tail_ok": self.tail_ok, "passed": self.passed() })
    }
}

/// Sufficient test for `closure(U_{s,eta}) ⊆ U_{r,delta}`: `|s| >= |r|`,
/// `|s(i) - r(i)| + eta |s|^{-1/2} < delta |r|^{-1/2}` for `i < |r|`, and
/// `||s|[|r|,|s|)|| + (|s| - |r|)^{1/2} eta |s|^{-1/2} + eta < delta`.
pub fn closure_inclusion(s: &[Rat], eta: &Rat, r: &[Rat], delta: &Rat) -> InclusionCert {
    let len_ok = s.len() >= r.len();
    if !len_ok {
        return InclusionCert { len_ok, coords_ok: false, tail_ok: false };
    }
    let ls = int(s.len().max(1) as i64);
    let lr = int(r.len().max(1) as i64);
    let e2 = eta * eta;
    let d2 = delta * delta;
    let coords_ok = r.iter().zip(s).all(|(ri, si)| {
        let d = si - ri;
        certify_root_sum_lt(&[&d * &d, &e2 / &ls], &[&d2 / &lr]).is_some()
    });
    let spread = int((s.len() - r.len()) as i64) * &e2 / &ls;
    let tail_ok = certify_root_sum_lt(&[norm_sq(&s[r.len()..]), spread, e2.clone()], &[d2]).is_some();
    InclusionCert { len_ok, coords_ok, tail_ok }
}

#[derive(Clone, Debug)]
pub struct ExtendCert {
    pub prefix_ok: bool,
    pub inclusion: InclusionCert,
    /// `(k, bound)` for `k in [|alpha_1|, |alpha_2|)`.
    pub bounds: Vec<(usize, Rat)>,
}

impl ExtendCert {
    pub fn passed(&self) -> bool {
        self.prefix_ok && self.inclusion.passed() && self.bounds.iter().all(|(_, b)| *b < Rat::one())
    }

    pub fn bound_at(&self, k: usize) -> Option<&Rat> {
        self.bounds.iter().find(|(j, _)| *j == k).map(|(_, b)| b)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "prefix_ok": self.prefix_ok,
            "inclusion": self.inclusion.to_json(),
            "bounds": self.bounds.iter().map(|(k, b)| json!({"k": k, "bound": fmt_rat(b)})).collect::<Vec<_>>(),
            "passed": self.passed(),
        })
    }
}

/// All checks for `p2 < p1`, passing or not.
pub fn extends_transcript(p2: &Condition, p1: &Condition) -> ExtendCert {
    let prefix_ok = p2.alpha.starts_with(&p1.alpha);
    // equal conditions are related by convention; the closure test is strict
    let inclusion = if p2 == p1 {
        InclusionCert { len_ok: true, coords_ok: true, tail_ok: true }
    } else {
        closure_inclusion(&p2.r, &p2.delta, &p1.r, &p1.delta)
    };
    let w = p2.weight();
    let bounds = if prefix_ok {
        (p1.alpha.len()..p2.alpha.len()).map(|k| (k, cert_shift_ball_bound(&w, k, &p2.r, &p2.delta))).collect()
    } else {
        vec![]
    };
    ExtendCert { prefix_ok, inclusion, bounds }
}

/// Certificate for `p2 < p1`; `None` means not certified.
pub fn extends(p2: &Condition, p1: &Condition) -> Option<ExtendCert> {
    Some(extends_transcript(p2, p1)).filter(ExtendCert::passed)
}

/// Stand-in for a dense open set `D`: maps a basic set to a basic subset
/// whose closure lies inside it, with `U_{s,eta} ⊆ D`.
pub trait Refiner: Send + Sync + fmt::Debug {
    fn refine(&self, r: &[Rat], delta: &Rat) -> Result<(Vec<Rat>, Rat)>;

    /// Sound test of `U_{s,eta} ⊆ D`.
    fn certify(&self, s: &[Rat], eta: &Rat) -> bool;

    /// Direct membership of a finitely supported point in `D`, when decidable.
    fn member(&self, _x: &[Rat]) -> Option<bool> {
        None
    }

    fn describe(&self) -> Value;
}

/// Shrinks `eta` until `accept` holds.
fn shrink_until(eta: Rat, mut accept: impl FnMut(&Rat) -> bool) -> Option<Rat> {
    let mut e = eta;
    for _ in 0..HALVINGS {
        if accept(&e) {
            return Some(e);
        }
        e /= int(2);
    }
    None
}

/// `D` is the whole space.
#[derive(Debug, Clone, Copy)]
pub struct WholeSpace;

impl Refiner for WholeSpace {
    fn refine(&self, r: &[Rat], delta: &Rat) -> Result<(Vec<Rat>, Rat)> {
        Ok((r.to_vec(), delta / int(2)))
    }

    fn certify(&self, _s: &[Rat], _eta: &Rat) -> bool {
        true
    }

    fn member(&self, _x: &[Rat]) -> Option<bool> {
        Some(true)
    }

    fn describe(&self) -> Value {
        json!({ "kind": "whole" })
    }
}

/// `D = U_{s0,eta0}` with a fixed answer; a test fixture more than a dense set.
#[derive(Debug, Clone)]
pub struct Fixed {
    pub s: Vec<Rat>,
    pub eta: Rat,
}

impl Refiner for Fixed {
    fn refine(&self, _r: &[Rat], _delta: &Rat) -> Result<(Vec<Rat>, Rat)> {
        Ok((self.s.clone(), self.eta.clone()))
    }

    fn certify(&self, s: &[Rat], eta: &Rat) -> bool {
        (s == self.s.as_slice() && eta <= &self.eta) || closure_inclusion(s, eta, &self.s, &self.eta).passed()
    }

    fn member(&self, x: &[Rat]) -> Option<bool> {
        Some(BasicNbhd { q: self.s.clone(), eps: self.eta.clone() }.contains_finite(x))
    }

    fn describe(&self) -> Value {
        json!({ "kind": "fixed", "s": self.s.iter().map(fmt_rat).collect::<Vec<_>>(), "eta": fmt_rat(&self.eta) })
    }
}

/// `D = l2 minus {x0}`.
#[derive(Debug, Clone)]
pub struct AvoidPoint {
    pub x0: Vec<Rat>,
}

impl Refiner for AvoidPoint {
    fn refine(&self, r: &[Rat], delta: &Rat) -> Result<(Vec<Rat>, Rat)> {
        let j = r.len();
        let target = self.x0.get(j).cloned().unwrap_or_else(Rat::zero);
        let v = if target.is_zero() { delta / int(4) } else { Rat::zero() };
        let gap = (&v - &target).abs();
        let mut s = r.to_vec();
        s.push(v);
        let eta = (delta / int(4)).min(gap / int(2)) / int(2);
        Ok((s, eta))
    }

    fn certify(&self, s: &[Rat], eta: &Rat) -> bool {
        !BasicNbhd { q: s.to_vec(), eps: eta.clone() }.contains_finite(&self.x0)
            && (0..s.len()).any(|i| {
                // strict separation so that the closure misses x0 as well
                let d = self.x0.get(i).cloned().unwrap_or_else(Rat::zero) - &s[i];
                &d * &d * int(s.len() as i64) > eta * eta
            })
    }

    fn member(&self, x: &[Rat]) -> Option<bool> {
        let n = x.len().max(self.x0.len());
        let at = |v: &[Rat], i: usize| v.get(i).cloned().unwrap_or_else(Rat::zero);
        Some((0..n).any(|i| at(x, i) != at(&self.x0, i)))
    }

    fn describe(&self) -> Value {
        json!({ "kind": "avoid-point", "x0": self.x0.iter().map(fmt_rat).collect::<Vec<_>>() })
    }
}

/// `D = { x : B_w^k x in U_{q,eps} for some k }`, one set of the `G_delta`
/// of hypercyclic vectors for `w`.
#[derive(Debug, Clone)]
pub struct OrbitEntry {
    pub w: WeightSeq,
    pub u: BasicNbhd,
    /// Shifts tried beyond `|r|` when refining.
    pub reach: usize,
}

impl OrbitEntry {
    pub fn new(w: WeightSeq, u: BasicNbhd) -> Self {
        OrbitEntry { w, u, reach: 512 }
    }

    /// Entry into the `n`-th canonical challenge.
    pub fn nth(w: WeightSeq, n: usize) -> Self {
        let (q, eps) = Challenges::canonical().get(n);
        Self::new(w, BasicNbhd { q, eps })
    }

    /// `B_w^k[U_{s,eta}] ⊆ U_{q,eps}`, soundly.
    fn certify_at(&self, s: &[Rat], eta: &Rat, k: usize) -> bool {
        let q = &self.u.q;
        let eps = &self.u.eps;
        let lq = int(q.len().max(1) as i64);
        let ls = int(s.len().max(1) as i64);
        let coords = q.iter().enumerate().all(|(i, qi)| {
            let t = pow4(self.w.twos_in(i, k) as i64);
            let (d2, slack) = match s.get(i + k) {
                Some(v) => {
                    let d = pow2(self.w.twos_in(i, k) as i64) * v - qi;
                    (&d * &d, &t * eta * eta / &ls)
                }
                None => (qi * qi, &t * eta * eta),
            };
            certify_root_sum_lt(&[d2, slack], &[eps * eps / &lq]).is_some()
        });
        coords && image_tail_bound(&self.w, k, k + q.len(), s, eta) < *eps
    }
}

impl Refiner for OrbitEntry {
    fn refine(&self, r: &[Rat], delta: &Rat) -> Result<(Vec<Rat>, Rat)> {
        let d2 = delta * delta;
        for k in r.len()..=r.len() + self.reach {
            let mut s = r.to_vec();
            s.resize(k, Rat::zero());
            s.extend(self.u.q.iter().enumerate().map(|(i, qi)| qi * pow2(-(self.w.twos_in(i, k) as i64))));
            if norm_sq(&s[r.len()..]) >= d2 {
                continue;
            }
            let found = shrink_until(delta / int(2), |e| closure_inclusion(&s, e, r, delta).passed() && self.certify_at(&s, e, k));
            if let Some(e) = found {
                return Ok((s, e));
            }
        }
        Err(Error::Horizon { horizon: self.reach, what: "no shift carries the basic set into the target".into() })
    }

    fn certify(&self, s: &[Rat], eta: &Rat) -> bool {
        (0..=s.len()).any(|k| self.certify_at(s, eta, k))
    }

    fn member(&self, x: &[Rat]) -> Option<bool> {
        Some((0..=x.len()).any(|k| self.u.contains_finite(&shift_finite(&self.w, x, k))))
    }

    fn describe(&self) -> Value {
        json!({ "kind": "orbit-entry", "weight": self.w.to_json(), "target": self.u.to_json() })
    }
}

#[derive(Clone, Debug)]
pub struct AvoidStep {
    /// `delta` had to be shrunk below `2^{-|alpha|-1}` first.
    pub shrunk: bool,
    /// The refiner's answer before padding and shrinking.
    pub refined: (Vec<Rat>, Rat),
    pub p2: Condition,
    pub cert: ExtendCert,
}

impl AvoidStep {
    pub fn to_json(&self) -> Value {
        json!({
            "shrunk": self.shrunk,
            "refined": { "s": self.refined.0.iter().map(fmt_rat).collect::<Vec<_>>(), "eta": fmt_rat(&self.refined.1) },
            "p2": self.p2.to_json(),
            "cert": self.cert.to_json(),
        })
    }
}

/// `p2 = (beta, s, eta) < p1` with `U_{s,eta} ⊆ D` and `|beta| > N`;
/// `beta` is `alpha` padded with ones to length `max(N, |s|) + 1`.
pub fn avoid_extension(p1: &Condition, d: &dyn Refiner, big_n: usize) -> Result<AvoidStep> {
    let a = p1.alpha.len();
    let half = pow2(-(a as i64) - 1);
    let shrunk = p1.delta >= half;
    let delta = if shrunk { pow2(-(a as i64) - 2) } else { p1.delta.clone() };
    let (s0, eta0) = d.refine(&p1.r, &delta)?;
    if !closure_inclusion(&s0, &eta0, &p1.r, &delta).passed() || !d.certify(&s0, &eta0) {
        return Err(Error::Certificate(format!("refiner {} broke its contract", d.describe())));
    }
    let mut s = s0.clone();
    let mut eta = eta0.clone();
    if s.len() < a {
        s.resize(a, Rat::zero());
        eta /= int(2);
    }
    let blen = big_n.max(s.len()) + 1;
    let mut beta = p1.alpha.clone();
    beta.resize(blen, 1);
    let start = eta.min(pow2(-(blen as i64) - 2));
    let mut last = None;
    let eta = shrink_until(start, |e| {
        if !is_condition(&beta, &s, e) || !d.certify(&s, e) {
            return false;
        }
        let p2 = Condition { alpha: beta.clone(), r: s.clone(), delta: e.clone() };
        let c = extends_transcript(&p2, p1);
        let ok = c.passed();
        last = Some(c);
        ok
    })
    .ok_or_else(|| Error::Certificate("no radius certifies the extension".into()))?;
    let p2 = Condition { alpha: beta, r: s, delta: eta };
    Ok(AvoidStep { shrunk, refined: (s0, eta0), p2, cert: last.expect("set on success") })
}

#[derive(Clone, Debug)]
pub struct NiceStep {
    pub padded: Option<AvoidStep>,
    pub k: usize,
    pub p2: Condition,
    pub nice: NiceMapCert,
    pub cert: ExtendCert,
}

impl NiceStep {
    pub fn to_json(&self) -> Value {
        json!({
            "padded": self.padded.as_ref().map(AvoidStep::to_json),
            "k": self.k,
            "p2": self.p2.to_json(),
            "nice": self.nice.to_json(),
            "cert": self.cert.to_json(),
        })
    }
}

/// `p2 < p1` with `B^k_{beta+}` mapping `y` nicely into `U_{q,eps}`, copied
/// from a nice hit of `v`: `k > |alpha|` least with
/// `twos_below(v, k) >= twos(alpha)` and room for the deficit; `alpha` is
/// extended to length `k` with the deficit twos first, then `alpha|q|` is
/// appended, and `eta = min(delta / 2, 2^{-|beta|-1})`.
pub fn nice_extension(p1: &Condition, y: &L2Vector, v: &WeightSeq, q: &[Rat], eps: &Rat, horizon: usize) -> Result<NiceStep> {
    let (base, padded) = if p1.alpha.len() < q.len() {
        let st = avoid_extension(p1, &WholeSpace, q.len())?;
        (st.p2.clone(), Some(st))
    } else {
        (p1.clone(), None)
    };
    let a = base.alpha.len();
    let ca = base.alpha.iter().filter(|&&b| b == 2).count();
    let k = (a + 1..=horizon)
        .find(|&k| {
            let cv = v.twos_below(k);
            cv >= ca && k - a >= cv - ca && maps_nicely(v, y, k, q, eps).is_some()
        })
        .ok_or_else(|| Error::Horizon { horizon, what: "no nice hit of the witness weight past |alpha|".into() })?;
    let deficit = v.twos_below(k) - ca;
    let mut beta = base.alpha.clone();
    beta.extend((0..k - a).map(|i| if i < deficit { 2 } else { 1 }));
    beta.extend_from_slice(&base.alpha[..q.len()]);
    let eta = (&base.delta / int(2)).min(pow2(-(beta.len() as i64) - 1));
    let p2 = Condition::new(beta, base.r.clone(), eta)?;
    let nice = nicely_transcript(&p2.weight(), y, k, q, eps);
    let cert = extends_transcript(&p2, p1);
    if !nice.passed() || !cert.passed() {
        return Err(Error::Certificate(format!("nice extension at k = {k} did not replay")));
    }
    Ok(NiceStep { padded, k, p2, nice, cert })
}

#[derive(Clone, Debug)]
pub enum Request {
    Avoid { refiner: Arc<dyn Refiner>, n: usize },
    Nice { y: L2Vector, v: WeightSeq, q: Vec<Rat>, eps: Rat },
}

#[derive(Clone, Debug)]
pub enum Step {
    Avoid(Box<AvoidStep>),
    Nice(Box<NiceStep>),
}

impl Step {
    pub fn condition(&self) -> &Condition {
        match self {
            Step::Avoid(s) => &s.p2,
            Step::Nice(s) => &s.p2,
        }
    }

    pub fn cert(&self) -> &ExtendCert {
        match self {
            Step::Avoid(s) => &s.cert,
            Step::Nice(s) => &s.cert,
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            Step::Avoid(s) => json!({ "avoid": s.to_json() }),
            Step::Nice(s) => json!({ "nice": s.to_json() }),
        }
    }
}

#[derive(Clone, Debug)]
pub struct EngineRun {
    pub chain: Vec<Condition>,
    pub steps: Vec<Step>,
    pub requests: Vec<Request>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OrbitCheck {
    pub k: usize,
    pub stage: usize,
    pub bound: Rat,
    pub exact_sq: Rat,
}

impl OrbitCheck {
    /// The exact value sits under the certified bound and inside the unit ball.
    pub fn ok(&self) -> bool {
        self.exact_sq < Rat::one() && self.exact_sq <= &self.bound * &self.bound
    }
}

#[derive(Clone, Debug)]
pub struct Replay {
    pub chain_ok: Vec<bool>,
    pub avoid_ok: Vec<bool>,
    pub orbit: Vec<OrbitCheck>,
    pub nice_ok: Vec<bool>,
}

impl Replay {
    pub fn passed(&self) -> bool {
        self.chain_ok.iter().chain(&self.avoid_ok).chain(&self.nice_ok).all(|&b| b) && self.orbit.iter().all(OrbitCheck::ok)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "chain_ok": self.chain_ok,
            "avoid_ok": self.avoid_ok,
            "nice_ok": self.nice_ok,
            "orbit": self.orbit.iter().map(|o| json!({
                "k": o.k, "stage": o.stage, "bound": fmt_rat(&o.bound), "exact_norm_sq": fmt_rat(&o.exact_sq), "ok": o.ok(),
            })).collect::<Vec<_>>(),
            "passed": self.passed(),
        })
    }
}

impl EngineRun {
    pub fn last(&self) -> &Condition {
        self.chain.last().expect("chain holds p0")
    }

    /// Final weight prefix.
    pub fn prefix(&self) -> &[u8] {
        &self.last().alpha
    }

    /// Center of the final basic set, extended by zeros.
    pub fn x(&self) -> Vec<Rat> {
        self.last().r.clone()
    }

    /// Re-verifies every claim of the run from scratch.
    pub fn replay(&self) -> Replay {
        let chain_ok = self
            .chain
            .windows(2)
            .map(|p| is_condition(&p[1].alpha, &p[1].r, &p[1].delta) && extends(&p[1], &p[0]).is_some())
            .collect();
        let x = self.x();
        let w = self.last().weight();
        let mut avoid_ok = vec![];
        let mut nice_ok = vec![];
        for (req, step) in self.requests.iter().zip(&self.steps) {
            match (req, step) {
                (Request::Avoid { refiner, .. }, Step::Avoid(st)) => {
                    let c = &st.p2;
                    let inside = BasicNbhd { q: c.r.clone(), eps: c.delta.clone() }.contains_finite(&x);
                    avoid_ok.push(inside && refiner.certify(&c.r, &c.delta) && refiner.member(&x) != Some(false));
                }
                (Request::Nice { y, q, eps, .. }, Step::Nice(st)) => {
                    nice_ok.push(maps_nicely(&w, y, st.k, q, eps).is_some());
                }
                _ => avoid_ok.push(false),
            }
        }
        let mut orbit = vec![];
        for (j, step) in self.steps.iter().enumerate() {
            let lo = self.chain[j].alpha.len();
            for k in lo..step.condition().alpha.len() {
                let bound = step.cert().bound_at(k).cloned().unwrap_or_else(|| int(1));
                orbit.push(OrbitCheck { k, stage: j + 1, bound, exact_sq: orbit_norm_sq(&w, &x, k) });
            }
        }
        Replay { chain_ok, avoid_ok, orbit, nice_ok }
    }

    pub fn to_json(&self) -> Value {
        json!({
            "chain": self.chain.iter().map(Condition::to_json).collect::<Vec<_>>(),
            "steps": self.steps.iter().map(Step::to_json).collect::<Vec<_>>(),
            "weight_prefix": self.prefix().iter().map(|b| char::from(b'0' + b)).collect::<String>(),
            "x": self.x().iter().map(fmt_rat).collect::<Vec<_>>(),
            "replay": self.replay().to_json(),
        })
    }

    /// `step,alpha_len,delta,bound` with the largest certified bound of the
    /// step (the unit-ball bound of the condition for the start).
    pub fn to_csv(&self) -> String {
        let mut out = String::from("step,alpha_len,delta,bound\n");
        for (j, c) in self.chain.iter().enumerate() {
            let bound = if j == 0 {
                c.unit_ball_bound()
            } else {
                let b = &self.steps[j - 1].cert().bounds;
                b.iter().map(|(_, v)| v.clone()).max().unwrap_or_else(|| c.unit_ball_bound())
            };
            out.push_str(&format!("{},{},{},{}\n", j, c.alpha.len(), fmt_rat(&c.delta), fmt_rat(&bound)));
        }
        out
    }
}

/// Meets each request in order along a descending chain from `p0`.
pub fn generic_engine(p0: &Condition, requests: &[Request], horizon: usize) -> Result<EngineRun> {
    let mut run = EngineRun { chain: vec![p0.clone()], steps: vec![], requests: vec![] };
    for (i, req) in requests.iter().enumerate() {
        let cur = run.last().clone();
        let step = match req {
            Request::Avoid { refiner, n } => avoid_extension(&cur, refiner.as_ref(), *n).map(|s| Step::Avoid(Box::new(s))),
            Request::Nice { y, v, q, eps } => nice_extension(&cur, y, v, q, eps, horizon).map(|s| Step::Nice(Box::new(s))),
        };
        match step {
            Ok(s) => {
                run.chain.push(s.condition().clone());
                run.steps.push(s);
                run.requests.push(req.clone());
            }
            Err(e) => {
                return Err(Error::Certificate(format!("request {i} failed: {e}; partial transcript: {}", run.to_json())));
            }
        }
    }
    Ok(run)
}
