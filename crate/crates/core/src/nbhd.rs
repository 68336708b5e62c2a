//! Basic neighborhoods `U_{q,eps}`: a sup-norm window on the first `|q|`
//! coordinates and an l2 ball on the rest.

use num_traits::{Signed, Zero};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::rational::{fmt_rat, int, norm_sq, parse_rat, Rat};
use crate::vector::{L2Vector, Tri};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BasicNbhd {
    pub q: Vec<Rat>,
    pub eps: Rat,
}

impl BasicNbhd {
    pub fn new(q: Vec<Rat>, eps: Rat) -> Result<Self> {
        if !eps.is_positive() {
            return Err(Error::Domain(format!("radius {eps} is not positive")));
        }
        Ok(BasicNbhd { q, eps })
    }

    /// `U_{(),eps}`, the open ball of radius `eps` at 0.
    pub fn ball(eps: Rat) -> Result<Self> {
        Self::new(vec![], eps)
    }

    /// Squared prefix test `(x(i) - q(i))^2 * |q| < eps^2` on every `i < |q|`.
    pub fn prefix_ok(&self, head: &[Rat]) -> bool {
        let n = int(self.q.len() as i64);
        let e2 = &self.eps * &self.eps;
        self.q.iter().zip(head).all(|(qi, xi)| {
            let d = xi - qi;
            &d * &d * &n < e2
        })
    }

    /// Membership of `x`; on lazy tails a `Yes` is backed by the sound tail
    /// bound and a `No` by an exact finite computation.
    pub fn contains(&self, x: &L2Vector) -> Tri {
        let head = x.take(self.q.len());
        if !self.prefix_ok(&head) {
            return Tri::No;
        }
        x.tail_norm_sq_lt(self.q.len(), &(&self.eps * &self.eps))
    }

    /// Membership of the finitely supported vector `z`, exactly.
    pub fn contains_finite(&self, z: &[Rat]) -> bool {
        let l = self.q.len();
        let head: Vec<Rat> = (0..l).map(|i| z.get(i).cloned().unwrap_or_else(Rat::zero)).collect();
        self.prefix_ok(&head) && norm_sq(z.get(l..).unwrap_or(&[])) < &self.eps * &self.eps
    }

    pub fn to_json(&self) -> Value {
        json!({ "q": self.q.iter().map(fmt_rat).collect::<Vec<_>>(), "eps": fmt_rat(&self.eps) })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let bad = |m: &str| Error::Parse(format!("neighborhood JSON: {m}"));
        let q = v
            .get("q")
            .and_then(Value::as_array)
            .ok_or_else(|| bad("missing q"))?
            .iter()
            .map(|e| e.as_str().ok_or_else(|| bad("q entries must be strings")).and_then(parse_rat))
            .collect::<Result<Vec<_>>>()?;
        let eps = parse_rat(v.get("eps").and_then(Value::as_str).ok_or_else(|| bad("missing eps"))?)?;
        Self::new(q, eps)
    }
}

pub fn ball_contains(u: &BasicNbhd, x: &L2Vector) -> Tri {
    u.contains(x)
}

/// Basic neighborhood around the finitely supported `x0` that fits inside
/// the ball of radius `eps`: `q` is `x0` cut at the least `n` with
/// `||x0|[n, inf)|| < eps/4`, and the radius is `eps/4`.
pub fn basic_from_ball(x0: &L2Vector, eps: &Rat) -> Result<BasicNbhd> {
    if !eps.is_positive() {
        return Err(Error::Domain(format!("radius {eps} is not positive")));
    }
    let end = x0
        .support_end()
        .ok_or_else(|| Error::Precondition("basic_from_ball needs a finitely supported center".into()))?;
    let r = eps / int(4);
    let r2 = &r * &r;
    let n = (0..=end).find(|&n| x0.l2_norm_sq(n, end) < r2).unwrap_or(end);
    BasicNbhd::new(x0.take(n), r)
}

/// Exact check of `||z - x0||^2 < eps^2` for finitely supported points.
pub fn in_ball(x0: &L2Vector, eps: &Rat, z: &[Rat]) -> bool {
    let n = z.len().max(x0.support_end().unwrap_or(0));
    let d: Rat = (0..n)
        .map(|i| {
            let v = z.get(i).cloned().unwrap_or_else(Rat::zero) - x0.coord(i);
            &v * &v
        })
        .sum();
    d < eps * eps
}

/// Deterministic exact members of `U_{q,eps}`: the center, then points with
/// every coordinate of `q` moved by less than `eps / (|q| + 1)` and two tail
/// coordinates of size below `eps / 2`.
pub fn sample_members(q: &[Rat], eps: &Rat, count: usize) -> Vec<Vec<Rat>> {
    let l = q.len();
    let step = eps / int(l as i64 + 1);
    let frac = |a: usize, m: usize, c: i64| Rat::new(((a % m) as i64 - c).into(), 10.into());
    (0..count)
        .map(|j| {
            if j == 0 {
                return q.to_vec();
            }
            let mut z: Vec<Rat> = q.iter().enumerate().map(|(i, v)| v + frac(j * 7 + i * 13, 19, 9) * &step).collect();
            z.resize(l + 5, Rat::zero());
            z[l + j % 5] += frac(j * 11, 17, 8) * eps / int(2);
            z[l + (j + 2) % 5] += frac(j * 5, 13, 6) * eps / int(2);
            z
        })
        .collect()
}
