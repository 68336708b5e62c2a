//! Elements of l2 as an explicit rational prefix plus a tail descriptor.
//!
//! A `Zero` tail makes the vector finitely supported and every norm exact.
//! A `Blocks` tail is a lazily generated coordinate stream that carries a
//! sound bound `m -> bound(m)` on the squared norm of the coordinates at
//! positions `>= m`. Generators may report that their bound is exact.

use std::fmt;
use std::sync::Arc;

use num_traits::{One, Signed, Zero};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::rational::{fmt_rat, parse_rat, Rat};

/// Three-valued answer for queries on lazily generated vectors.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Tri {
    Yes,
    No,
    Undecided,
}

impl Tri {
    pub fn from_bool(b: bool) -> Tri {
        if b {
            Tri::Yes
        } else {
            Tri::No
        }
    }

    pub fn and(self, other: Tri) -> Tri {
        match (self, other) {
            (Tri::No, _) | (_, Tri::No) => Tri::No,
            (Tri::Yes, Tri::Yes) => Tri::Yes,
            _ => Tri::Undecided,
        }
    }

    pub fn is_yes(self) -> bool {
        self == Tri::Yes
    }
}

/// Coordinates at global positions `>= start`, where `start` is the length
/// of the owning vector's prefix.
pub trait TailSource: Send + Sync + fmt::Debug {
    fn coord(&self, i: usize) -> Rat;

    /// Upper bound on `sum_{i >= m} coord(i)^2`, for `m >= start`.
    /// Must be non-increasing in `m` and tend to zero.
    fn norm_sq_bound(&self, m: usize) -> Rat;

    /// True when `norm_sq_bound` is the exact tail value.
    fn is_exact(&self) -> bool {
        false
    }

    fn describe(&self) -> Value;
}

#[derive(Clone, Debug)]
pub enum Tail {
    Zero,
    Blocks(Arc<dyn TailSource>),
}

#[derive(Clone, Debug)]
pub struct L2Vector {
    prefix: Vec<Rat>,
    tail: Tail,
}

/// Horizon (past the query point) over which exact partial sums are taken
/// when a sound bound alone cannot decide a strict inequality.
pub const REFUTE_WINDOW: usize = 256;

impl L2Vector {
    pub fn zero() -> Self {
        Self::finite(vec![])
    }

    pub fn finite(prefix: Vec<Rat>) -> Self {
        L2Vector { prefix, tail: Tail::Zero }
    }

    pub fn with_tail(prefix: Vec<Rat>, tail: Arc<dyn TailSource>) -> Self {
        L2Vector { prefix, tail: Tail::Blocks(tail) }
    }

    /// `c * e_i`.
    pub fn unit(i: usize, c: Rat) -> Self {
        let mut p = vec![Rat::zero(); i + 1];
        p[i] = c;
        Self::finite(p)
    }

    /// `prefix` followed by `coeff * ratio^j` at position `prefix.len() + j`.
    pub fn geometric(prefix: Vec<Rat>, coeff: Rat, ratio: Rat) -> Result<Self> {
        if ratio.abs() >= Rat::one() {
            return Err(Error::Domain(format!("geometric ratio {ratio} is not in (-1, 1)")));
        }
        let start = prefix.len();
        Ok(Self::with_tail(prefix, Arc::new(Geometric { start, coeff, ratio })))
    }

    pub fn prefix(&self) -> &[Rat] {
        &self.prefix
    }

    pub fn tail(&self) -> &Tail {
        &self.tail
    }

    pub fn is_finite(&self) -> bool {
        matches!(self.tail, Tail::Zero)
    }

    /// Exact tails: `Zero`, or a generator whose bound is the true value.
    pub fn has_exact_tail(&self) -> bool {
        match &self.tail {
            Tail::Zero => true,
            Tail::Blocks(b) => b.is_exact(),
        }
    }

    pub fn coord(&self, i: usize) -> Rat {
        match self.prefix.get(i) {
            Some(v) => v.clone(),
            None => match &self.tail {
                Tail::Zero => Rat::zero(),
                Tail::Blocks(b) => b.coord(i),
            },
        }
    }

    pub fn take(&self, n: usize) -> Vec<Rat> {
        (0..n).map(|i| self.coord(i)).collect()
    }

    /// One past the last nonzero coordinate, for finitely supported vectors.
    pub fn support_end(&self) -> Option<usize> {
        match self.tail {
            Tail::Zero => Some(self.prefix.iter().rposition(|v| !v.is_zero()).map_or(0, |p| p + 1)),
            Tail::Blocks(_) => None,
        }
    }

    /// Exact `sum_{i in [lo, hi)} x(i)^2`.
    pub fn l2_norm_sq(&self, lo: usize, hi: usize) -> Rat {
        let hi = match self.tail {
            Tail::Zero => hi.min(self.prefix.len()),
            Tail::Blocks(_) => hi,
        };
        (lo..hi).fold(Rat::zero(), |acc, i| {
            let c = self.coord(i);
            acc + &c * &c
        })
    }

    /// Sound upper bound on `sum_{i >= m} x(i)^2`; exact for exact tails.
    pub fn tail_norm_sq_upper(&self, m: usize) -> Rat {
        let l = self.prefix.len();
        match &self.tail {
            Tail::Zero => self.l2_norm_sq(m, l),
            Tail::Blocks(b) => {
                if m >= l {
                    b.norm_sq_bound(m)
                } else {
                    self.l2_norm_sq(m, l) + b.norm_sq_bound(l)
                }
            }
        }
    }

    pub fn tail_norm_sq_exact(&self, m: usize) -> Option<Rat> {
        self.has_exact_tail().then(|| self.tail_norm_sq_upper(m))
    }

    /// Decides `sum_{i >= m} x(i)^2 < thr`: `Yes` when the sound bound
    /// certifies it, `No` when an exact value or an exact partial sum over
    /// `[m, m + REFUTE_WINDOW)` refutes it.
    pub fn tail_norm_sq_lt(&self, m: usize, thr: &Rat) -> Tri {
        let ub = self.tail_norm_sq_upper(m);
        if &ub < thr {
            return Tri::Yes;
        }
        if self.has_exact_tail() {
            return Tri::No;
        }
        if &self.l2_norm_sq(m, m + REFUTE_WINDOW) >= thr {
            Tri::No
        } else {
            Tri::Undecided
        }
    }

    /// `x + s^0`: adds `s` to the first `|s|` coordinates.
    pub fn translate(&self, s: &[Rat]) -> L2Vector {
        let n = self.prefix.len().max(s.len());
        let mut p = self.take(n);
        for (a, b) in p.iter_mut().zip(s) {
            *a += b;
        }
        L2Vector { prefix: p, tail: self.retail(n) }
    }

    /// Same coordinates with the prefix materialized to length `n`.
    pub fn extend_prefix(&self, n: usize) -> L2Vector {
        if n <= self.prefix.len() {
            return self.clone();
        }
        L2Vector { prefix: self.take(n), tail: self.retail(n) }
    }

    fn retail(&self, _new_len: usize) -> Tail {
        // sources index globally, so the same generator keeps serving
        self.tail.clone()
    }

    pub fn to_json(&self) -> Value {
        let prefix: Vec<String> = self.prefix.iter().map(fmt_rat).collect();
        let tail = match &self.tail {
            Tail::Zero => json!("zero"),
            Tail::Blocks(b) => b.describe(),
        };
        json!({ "prefix": prefix, "tail": tail })
    }

    /// Parses the `zero` and `geometric` tail kinds; other generators are
    /// built programmatically.
    pub fn from_json(v: &Value) -> Result<Self> {
        let bad = |m: &str| Error::Parse(format!("vector JSON: {m}"));
        let prefix = v
            .get("prefix")
            .and_then(Value::as_array)
            .ok_or_else(|| bad("missing prefix array"))?
            .iter()
            .map(|e| e.as_str().ok_or_else(|| bad("rationals must be strings")).and_then(parse_rat))
            .collect::<Result<Vec<_>>>()?;
        match v.get("tail") {
            None => Ok(Self::finite(prefix)),
            Some(Value::String(s)) if s == "zero" => Ok(Self::finite(prefix)),
            Some(t) if t.get("kind").and_then(Value::as_str) == Some("geometric") => {
                let get = |k: &str| {
                    t.get(k).and_then(Value::as_str).ok_or_else(|| bad(&format!("geometric.{k}"))).and_then(parse_rat)
                };
                Self::geometric(prefix, get("coeff")?, get("ratio")?)
            }
            Some(t) => Err(bad(&format!("unsupported tail {t}"))),
        }
    }
}

impl PartialEq for L2Vector {
    /// Equality of finitely supported vectors; lazy tails never compare equal.
    fn eq(&self, other: &Self) -> bool {
        match (self.support_end(), other.support_end()) {
            (Some(a), Some(b)) => a == b && self.prefix[..a] == other.prefix[..b],
            _ => false,
        }
    }
}

#[derive(Debug)]
struct Geometric {
    start: usize,
    coeff: Rat,
    ratio: Rat,
}

fn rpow(r: &Rat, e: usize) -> Rat {
    num_traits::pow(r.clone(), e)
}

impl TailSource for Geometric {
    fn coord(&self, i: usize) -> Rat {
        &self.coeff * rpow(&self.ratio, i - self.start)
    }

    fn norm_sq_bound(&self, m: usize) -> Rat {
        let r2 = &self.ratio * &self.ratio;
        &self.coeff * &self.coeff * rpow(&r2, m - self.start) / (Rat::one() - r2)
    }

    fn is_exact(&self) -> bool {
        true
    }

    fn describe(&self) -> Value {
        json!({ "kind": "geometric", "coeff": fmt_rat(&self.coeff), "ratio": fmt_rat(&self.ratio) })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, pow4, rat};

    #[test]
    fn norm_examples() {
        let x = L2Vector::finite(vec![int(3), int(4)]);
        assert_eq!(x.l2_norm_sq(0, 2), int(25));
        let g = L2Vector::finite(vec![int(1), rat(1, 2), rat(1, 4)]);
        assert_eq!(g.l2_norm_sq(1, 3), rat(5, 16));
        assert_eq!(g.l2_norm_sq(2, 2), int(0));
    }

    #[test]
    fn tail_bounds() {
        let x = L2Vector::finite(vec![int(1), int(0)]);
        assert_eq!(x.tail_norm_sq_upper(5), int(0));
        // geometric truncated at 10, tail from 2 is sum_{i=2}^{9} 4^-i
        let trunc = L2Vector::finite((0..10).map(|i| rat(1, 1 << i)).collect());
        let expect: Rat = (2..10).map(|i| pow4(-i)).sum();
        assert_eq!(trunc.tail_norm_sq_upper(2), expect);
        // infinite geometric tail 2^-i: (4/3) 4^-m
        let geo = L2Vector::geometric(vec![], int(1), rat(1, 2)).unwrap();
        assert_eq!(geo.tail_norm_sq_upper(3), rat(4, 3) * pow4(-3));
        assert_eq!(geo.coord(4), rat(1, 16));
        let brute: Rat = (3..40).map(|i| pow4(-i)).sum();
        assert!(brute < geo.tail_norm_sq_upper(3));
    }

    #[test]
    fn translate_examples() {
        let z = L2Vector::zero().translate(&[int(7)]);
        assert_eq!(z, L2Vector::unit(0, int(7)));
        let x = L2Vector::finite(vec![int(1), int(1)]);
        assert_eq!(x.translate(&[]), x);
        assert_eq!(x.translate(&[int(-1)]), L2Vector::finite(vec![int(0), int(1)]));
    }

    #[test]
    fn json_forms() {
        let g = L2Vector::geometric(vec![int(2)], int(1), rat(-1, 3)).unwrap();
        let v = g.to_json();
        assert_eq!(v["tail"]["kind"], "geometric");
        let back = L2Vector::from_json(&v).unwrap();
        assert_eq!(back.take(6), g.take(6));
        let f = L2Vector::finite(vec![rat(1, 2)]);
        assert_eq!(f.to_json(), serde_json::json!({"prefix": ["1/2"], "tail": "zero"}));
        assert!(L2Vector::from_json(&serde_json::json!({"prefix": [1]})).is_err());
    }

    #[test]
    fn strict_tail_tests() {
        let x = L2Vector::finite(vec![int(1), rat(1, 2)]);
        assert_eq!(x.tail_norm_sq_lt(1, &rat(1, 4)), Tri::No);
        assert_eq!(x.tail_norm_sq_lt(1, &rat(1, 3)), Tri::Yes);
    }
}
