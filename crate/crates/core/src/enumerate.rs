//! Canonical enumerations: rationals, rationals in (0,1), rational strings,
//! challenges `(q, eps)` and encoder triples `(p, eps, i)`. Every map is a
//! bijection onto the naturals with an explicit inverse.
//!
//! Rationals are ordered by `|num| + den`, then by numerator. Strings are
//! ordered by `len + sum of coordinate ranks`, then by length, then
//! lexicographically on ranks; this is an omega-order, which ordering by
//! length first is not.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::rational::{fmt_rat, parse_rat, Rat};

fn gcd(a: usize, b: usize) -> usize {
    a.gcd(&b)
}

fn height_count(h: usize) -> usize {
    if h == 1 {
        1
    } else {
        2 * (1..h).filter(|&q| gcd(h, q) == 1).count()
    }
}

/// The `n`-th rational.
pub fn rational_at(n: usize) -> Rat {
    let mut h = 1;
    let mut left = n;
    loop {
        let c = height_count(h);
        if left < c {
            break;
        }
        left -= c;
        h += 1;
    }
    if h == 1 {
        return Rat::zero();
    }
    let neg: Vec<usize> = (1..h).filter(|&q| gcd(h, q) == 1).collect();
    let m = neg.len();
    let (num, den) = if left < m {
        let q = neg[left];
        (-((h - q) as i64), q)
    } else {
        let q = neg[m - 1 - (left - m)];
        ((h - q) as i64, q)
    };
    Rat::new(BigInt::from(num), BigInt::from(den))
}

fn small(x: &BigInt) -> Result<usize> {
    x.abs().to_usize().ok_or_else(|| Error::Domain(format!("{x} is too large to index")))
}

pub fn rational_index(x: &Rat) -> Result<usize> {
    if x.is_zero() {
        return Ok(0);
    }
    let p = small(x.numer())?;
    let q = small(x.denom())?;
    let h = p + q;
    let base: usize = (1..h).map(height_count).sum();
    let neg: Vec<usize> = (1..h).filter(|&d| gcd(h, d) == 1).collect();
    let pos = neg.iter().position(|&d| d == q).expect("reduced fraction");
    Ok(base + if x.is_negative() { pos } else { 2 * neg.len() - 1 - pos })
}

fn unit_height_count(h: usize) -> usize {
    (1..h).filter(|&p| 2 * p < h && gcd(p, h) == 1).count()
}

/// The `n`-th rational in `(0,1)`: `1/2, 1/3, 1/4, 2/3, 1/5, ...`.
pub fn unit_rational_at(n: usize) -> Rat {
    let mut h = 3;
    let mut left = n;
    loop {
        let c = unit_height_count(h);
        if left < c {
            let p = (1..h).filter(|&p| 2 * p < h && gcd(p, h) == 1).nth(left).unwrap();
            return Rat::new(BigInt::from(p), BigInt::from(h - p));
        }
        left -= c;
        h += 1;
    }
}

pub fn unit_rational_index(x: &Rat) -> Result<usize> {
    if !x.is_positive() || x >= &Rat::from_integer(1.into()) {
        return Err(Error::Domain(format!("{x} is not in (0,1)")));
    }
    let p = small(x.numer())?;
    let h = p + small(x.denom())?;
    let base: usize = (3..h).map(unit_height_count).sum();
    Ok(base + (1..p).filter(|&t| gcd(t, h) == 1).count())
}

fn binom(n: u128, k: u128) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) / (i + 1))
}

/// Strings of length `l` whose ranks sum to `s`.
fn compositions(s: usize, l: usize) -> u128 {
    if l == 0 {
        u128::from(s == 0)
    } else {
        binom((s + l - 1) as u128, (l - 1) as u128)
    }
}

/// Strings of total weight `w`.
fn weight_count(w: usize) -> u128 {
    if w == 0 {
        1
    } else {
        1u128 << (w - 1)
    }
}

/// The `n`-th rational string.
pub fn string_at(n: usize) -> Vec<Rat> {
    let mut left = n as u128;
    let mut w = 0;
    while left >= weight_count(w) {
        left -= weight_count(w);
        w += 1;
    }
    let mut len = 0;
    loop {
        let c = compositions(w - len, len);
        if left < c {
            break;
        }
        left -= c;
        len += 1;
    }
    let mut s = w - len;
    let mut out = Vec::with_capacity(len);
    for j in 0..len {
        let mut r = 0;
        loop {
            let c = compositions(s - r, len - j - 1);
            if left < c {
                break;
            }
            left -= c;
            r += 1;
        }
        out.push(rational_at(r));
        s -= r;
    }
    out
}

pub fn string_index(q: &[Rat]) -> Result<usize> {
    let ranks = q.iter().map(rational_index).collect::<Result<Vec<_>>>()?;
    let len = ranks.len();
    let w = len + ranks.iter().sum::<usize>();
    let mut idx: u128 = (0..w).map(weight_count).sum();
    idx += (0..len).map(|l| compositions(w - l, l)).sum::<u128>();
    let mut s = w - len;
    for (j, &r) in ranks.iter().enumerate() {
        idx += (0..r).map(|t| compositions(s - t, len - j - 1)).sum::<u128>();
        s -= r;
    }
    usize::try_from(idx).map_err(|_| Error::Domain("string index overflows".into()))
}

/// Cantor pairing.
pub fn pair(x: usize, y: usize) -> usize {
    (x + y) * (x + y + 1) / 2 + y
}

pub fn unpair(n: usize) -> (usize, usize) {
    let mut s = ((((8 * n as u128 + 1) as f64).sqrt() as usize).saturating_sub(1)) / 2;
    while (s + 1) * (s + 2) / 2 <= n {
        s += 1;
    }
    while s * (s + 1) / 2 > n {
        s -= 1;
    }
    let y = n - s * (s + 1) / 2;
    (s - y, y)
}

/// The `n`-th challenge `(q_n, eps_n)`: pairs a string index with an index
/// into `(0,1)`.
pub fn challenge_at(n: usize) -> (Vec<Rat>, Rat) {
    let (s, e) = unpair(n);
    (string_at(s), unit_rational_at(e))
}

pub fn challenge_index(q: &[Rat], eps: &Rat) -> Result<usize> {
    Ok(pair(string_index(q)?, unit_rational_index(eps)?))
}

/// Elements of the encoder's universe are identified with naturals.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Universe {
    Finite(usize),
    Countable,
}

impl Universe {
    pub fn contains(&self, i: usize) -> bool {
        match self {
            Universe::Finite(u) => i < *u,
            Universe::Countable => true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Triple {
    /// Index of `pi(p)` in the string enumeration; `None` for table entries
    /// given by value.
    pub p: Option<usize>,
    pub q: Vec<Rat>,
    pub eps: Rat,
    pub i: usize,
}

impl Triple {
    pub fn to_json(&self) -> Value {
        json!({
            "p": self.p,
            "q": self.q.iter().map(fmt_rat).collect::<Vec<_>>(),
            "eps": fmt_rat(&self.eps),
            "i": self.i,
        })
    }
}

/// Source of challenges for the constructions: the canonical order, or an
/// explicit table whose entries take the first indices and fall back to the
/// canonical order afterwards.
#[derive(Clone, Debug, Default)]
pub struct Challenges {
    pub table: Vec<(Vec<Rat>, Rat)>,
}

impl Challenges {
    pub fn canonical() -> Self {
        Self::default()
    }

    pub fn get(&self, n: usize) -> (Vec<Rat>, Rat) {
        self.table.get(n).cloned().unwrap_or_else(|| challenge_at(n))
    }

    /// `rho_n = min { eps_r : r <= n }`.
    pub fn rho(&self, n: usize) -> Rat {
        (0..=n).map(|r| self.get(r).1).min().expect("non-empty")
    }
}

#[derive(Clone, Debug)]
pub struct Triples {
    pub universe: Universe,
    pub table: Vec<Triple>,
}

impl Triples {
    pub fn canonical(universe: Universe) -> Self {
        Triples { universe, table: vec![] }
    }

    pub fn get(&self, n: usize) -> Triple {
        if let Some(t) = self.table.get(n) {
            return t.clone();
        }
        triple_at(self.universe, n)
    }

    pub fn rho(&self, n: usize) -> Rat {
        (0..=n).map(|r| self.get(r).eps).min().expect("non-empty")
    }

    /// Index of the `j`-th (from 0) block whose triple mounts on element `i`.
    pub fn nth_block_on(&self, i: usize, j: usize, horizon: usize) -> Option<usize> {
        (0..horizon).filter(|&n| self.get(n).i == i).nth(j)
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let bad = |m: &str| Error::Parse(format!("triples config: {m}"));
        let universe = match v.get("universe") {
            None => Universe::Countable,
            Some(Value::String(s)) if s == "countable" => Universe::Countable,
            Some(u) => Universe::Finite(u.as_u64().ok_or_else(|| bad("universe"))? as usize),
        };
        let mut table = vec![];
        for e in v.get("table").and_then(Value::as_array).into_iter().flatten() {
            let q = e
                .get("q")
                .and_then(Value::as_array)
                .ok_or_else(|| bad("q"))?
                .iter()
                .map(|x| x.as_str().ok_or_else(|| bad("q entry")).and_then(parse_rat))
                .collect::<Result<Vec<_>>>()?;
            let eps = parse_rat(e.get("eps").and_then(Value::as_str).ok_or_else(|| bad("eps"))?)?;
            if !eps.is_positive() || eps >= Rat::from_integer(1.into()) {
                return Err(bad("eps must lie in (0,1)"));
            }
            let i = e.get("i").and_then(Value::as_u64).unwrap_or(0) as usize;
            table.push(Triple { p: None, q, eps, i });
        }
        Ok(Triples { universe, table })
    }
}

/// The canonical `n`-th triple. A finite universe of size `u` mounts block
/// `n` on element `n mod u`; a countable one unpairs the element.
pub fn triple_at(universe: Universe, n: usize) -> Triple {
    let (m, i) = match universe {
        Universe::Finite(u) => (n / u, n % u),
        Universe::Countable => unpair(n),
    };
    let (p, e) = unpair(m);
    Triple { p: Some(p), q: string_at(p), eps: unit_rational_at(e), i }
}

pub fn triple_index(universe: Universe, p: usize, eps: &Rat, i: usize) -> Result<usize> {
    let m = pair(p, unit_rational_index(eps)?);
    match universe {
        Universe::Finite(u) => {
            if i >= u {
                return Err(Error::Domain(format!("element {i} is outside a universe of size {u}")));
            }
            Ok(m * u + i)
        }
        Universe::Countable => Ok(pair(m, i)),
    }
}
