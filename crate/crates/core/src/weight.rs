//! `{1,2}`-valued weight sequences: an explicit prefix followed by a tail
//! rule.

use std::fmt;
use std::sync::Arc;

use num_integer::Roots;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::rational::{pow2, Rat};

/// Lazily generated weights, indexed globally from 0.
pub trait WeightSource: Send + Sync + fmt::Debug {
    fn at(&self, i: usize) -> u8;

    fn twos_below(&self, k: usize) -> usize {
        (0..k).filter(|&i| self.at(i) == 2).count()
    }

    fn describe(&self) -> Value;

    /// `Some(answer)` when the source can decide niceness of the sequence.
    fn niceness(&self) -> Option<bool> {
        None
    }

    fn infinitely_many_twos(&self) -> Option<bool> {
        None
    }
}

#[derive(Clone, Debug)]
pub enum WeightTail {
    Ones,
    Twos,
    /// Repeats `pattern` starting right after the prefix.
    Periodic(Vec<u8>),
    Generated(Arc<dyn WeightSource>),
}

#[derive(Clone, Debug)]
pub struct WeightSeq {
    prefix: Vec<u8>,
    tail: WeightTail,
}

fn check_bits(s: &[u8]) -> Result<()> {
    match s.iter().find(|&&b| b != 1 && b != 2) {
        Some(b) => Err(Error::Domain(format!("weight value {b} is not 1 or 2"))),
        None => Ok(()),
    }
}

impl WeightSeq {
    pub fn new(prefix: Vec<u8>, tail: WeightTail) -> Result<Self> {
        check_bits(&prefix)?;
        if let WeightTail::Periodic(p) = &tail {
            if p.is_empty() {
                return Err(Error::Domain("empty periodic pattern".into()));
            }
            check_bits(p)?;
        }
        Ok(WeightSeq { prefix, tail })
    }

    pub fn ones() -> Self {
        WeightSeq { prefix: vec![], tail: WeightTail::Ones }
    }

    pub fn twos() -> Self {
        WeightSeq { prefix: vec![], tail: WeightTail::Twos }
    }

    pub fn periodic(pattern: Vec<u8>) -> Result<Self> {
        Self::new(vec![], WeightTail::Periodic(pattern))
    }

    /// `alpha^+`: the finite string followed by all twos.
    pub fn alpha_plus(alpha: &[u8]) -> Result<Self> {
        Self::new(alpha.to_vec(), WeightTail::Twos)
    }

    pub fn generated(prefix: Vec<u8>, src: Arc<dyn WeightSource>) -> Result<Self> {
        Self::new(prefix, WeightTail::Generated(src))
    }

    /// Twos exactly at the perfect squares `0, 1, 4, 9, ...`.
    pub fn twos_at_squares() -> Self {
        WeightSeq { prefix: vec![], tail: WeightTail::Generated(Arc::new(TwosAtSquares)) }
    }

    pub fn prefix(&self) -> &[u8] {
        &self.prefix
    }

    pub fn tail(&self) -> &WeightTail {
        &self.tail
    }

    pub fn at(&self, i: usize) -> u8 {
        if let Some(&b) = self.prefix.get(i) {
            return b;
        }
        let j = i - self.prefix.len();
        match &self.tail {
            WeightTail::Ones => 1,
            WeightTail::Twos => 2,
            WeightTail::Periodic(p) => p[j % p.len()],
            WeightTail::Generated(g) => g.at(i),
        }
    }

    /// `|{ i < k : w(i) = 2 }|`.
    pub fn twos_below(&self, k: usize) -> usize {
        let l = self.prefix.len();
        if k <= l {
            return self.prefix[..k].iter().filter(|&&b| b == 2).count();
        }
        let head = self.prefix.iter().filter(|&&b| b == 2).count();
        let m = k - l;
        head + match &self.tail {
            WeightTail::Ones => 0,
            WeightTail::Twos => m,
            WeightTail::Periodic(p) => {
                let per = p.iter().filter(|&&b| b == 2).count();
                (m / p.len()) * per + p[..m % p.len()].iter().filter(|&&b| b == 2).count()
            }
            WeightTail::Generated(g) => g.twos_below(k) - g.twos_below(l),
        }
    }

    /// Number of twos in `[i, i + k)`.
    pub fn twos_in(&self, i: usize, k: usize) -> usize {
        self.twos_below(i + k) - self.twos_below(i)
    }

    /// `prod_{j in [i, i+k)} w(j)`, always a power of two.
    pub fn weight_product(&self, i: usize, k: usize) -> Rat {
        pow2(self.twos_in(i, k) as i64)
    }

    pub fn take(&self, n: usize) -> Vec<u8> {
        (0..n).map(|i| self.at(i)).collect()
    }

    pub fn infinitely_many_twos(&self) -> Option<bool> {
        match &self.tail {
            WeightTail::Ones => Some(false),
            WeightTail::Twos => Some(true),
            WeightTail::Periodic(p) => Some(p.contains(&2)),
            WeightTail::Generated(g) => g.infinitely_many_twos(),
        }
    }

    /// Largest number of twos in a window `[j - k, j)` over `j >= from`.
    /// Generated tails report the trivial bound `k`.
    pub fn max_window_twos(&self, k: usize, from: usize) -> usize {
        if k == 0 {
            return 0;
        }
        let start = from.max(k);
        let l = self.prefix.len();
        let scan_to = |end: usize| (start..=end.max(start)).map(|j| self.twos_in(j - k, k)).max().unwrap_or(0);
        match &self.tail {
            WeightTail::Twos => {
                // windows entirely inside the tail carry k twos
                k
            }
            WeightTail::Ones => scan_to(l + k),
            WeightTail::Periodic(p) => scan_to(l + k + p.len()),
            WeightTail::Generated(_) => k,
        }
    }

    pub fn to_json(&self) -> Value {
        let prefix: String = self.prefix.iter().map(|b| char::from(b'0' + b)).collect();
        let tail = match &self.tail {
            WeightTail::Ones => json!("ones"),
            WeightTail::Twos => json!("twos"),
            WeightTail::Periodic(p) => {
                json!({ "periodic": p.iter().map(|b| char::from(b'0' + b)).collect::<String>() })
            }
            WeightTail::Generated(g) => json!({ "generated": g.describe() }),
        };
        json!({ "prefix": prefix, "tail": tail })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let bad = |m: &str| Error::Parse(format!("weight JSON: {m}"));
        let prefix = parse_bits(v.get("prefix").and_then(Value::as_str).unwrap_or(""))?;
        let tail = match v.get("tail").ok_or_else(|| bad("missing tail"))? {
            Value::String(s) if s == "ones" => WeightTail::Ones,
            Value::String(s) if s == "twos" => WeightTail::Twos,
            Value::Object(o) if o.contains_key("periodic") => {
                let p = o["periodic"].as_str().ok_or_else(|| bad("periodic must be a string"))?;
                WeightTail::Periodic(parse_bits(p)?)
            }
            Value::Object(o) if o.contains_key("generated") => {
                match o["generated"].get("kind").and_then(Value::as_str) {
                    Some("squares") => WeightTail::Generated(Arc::new(TwosAtSquares)),
                    other => return Err(bad(&format!("unsupported generated kind {other:?}"))),
                }
            }
            other => return Err(bad(&format!("unknown tail {other}"))),
        };
        Self::new(prefix, tail)
    }
}

pub fn parse_bits(s: &str) -> Result<Vec<u8>> {
    s.chars()
        .map(|c| match c {
            '1' => Ok(1),
            '2' => Ok(2),
            _ => Err(Error::Parse(format!("weight digit {c:?} is not 1 or 2"))),
        })
        .collect()
}

#[derive(Debug)]
pub struct TwosAtSquares;

impl WeightSource for TwosAtSquares {
    fn at(&self, i: usize) -> u8 {
        let r = i.sqrt();
        if r * r == i {
            2
        } else {
            1
        }
    }

    fn twos_below(&self, k: usize) -> usize {
        if k == 0 {
            0
        } else {
            (k - 1).sqrt() + 1
        }
    }

    fn describe(&self) -> Value {
        json!({ "kind": "squares" })
    }

    fn niceness(&self) -> Option<bool> {
        // 0, 1, k, k+1 cannot all be squares for k > 0
        Some(false)
    }

    fn infinitely_many_twos(&self) -> Option<bool> {
        Some(true)
    }
}
