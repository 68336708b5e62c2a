//! Decidable subsets of a countable universe identified with the naturals,
//! and the coding of finite sequences of naturals (tree nodes) as naturals.

use std::collections::BTreeSet;

use serde_json::{json, Value};

use crate::error::{Error, Result};

/// An infinite sequence of naturals that is eventually periodic.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Branch {
    pub prefix: Vec<usize>,
    pub period: Vec<usize>,
}

impl Branch {
    pub fn new(prefix: Vec<usize>, period: Vec<usize>) -> Result<Self> {
        if period.is_empty() {
            return Err(Error::Domain("branch period must be non-empty".into()));
        }
        Ok(Branch { prefix, period })
    }

    /// The constant branch `c c c ...`.
    pub fn constant(c: usize) -> Self {
        Branch { prefix: vec![], period: vec![c] }
    }

    pub fn at(&self, i: usize) -> usize {
        match self.prefix.get(i) {
            Some(&v) => v,
            None => self.period[(i - self.prefix.len()) % self.period.len()],
        }
    }

    pub fn take(&self, n: usize) -> Vec<usize> {
        (0..n).map(|i| self.at(i)).collect()
    }

    /// `s` is an initial segment of the branch.
    pub fn has_node(&self, s: &[usize]) -> bool {
        s.iter().enumerate().all(|(i, &v)| self.at(i) == v)
    }

    /// Equality as infinite sequences.
    pub fn same_as(&self, other: &Branch) -> bool {
        let n = self.prefix.len().max(other.prefix.len()) + self.period.len() * other.period.len();
        self.take(n) == other.take(n)
    }

    pub fn to_json(&self) -> Value {
        json!({ "prefix": self.prefix, "period": self.period })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let list = |k: &str| -> Result<Vec<usize>> {
            Ok(v.get(k)
                .and_then(Value::as_array)
                .map(|a| a.iter().filter_map(Value::as_u64).map(|x| x as usize).collect())
                .unwrap_or_default())
        };
        Branch::new(list("prefix")?, list("period")?)
    }
}

/// Code of a finite sequence: bit `P_i = s_0 + ... + s_i + i` is set for
/// each `i`. This is a bijection between finite sequences and naturals.
pub fn node_code(s: &[usize]) -> Result<usize> {
    let mut pos = 0usize;
    let mut code = 0usize;
    for (i, &v) in s.iter().enumerate() {
        pos = if i == 0 { v } else { pos + v + 1 };
        if pos >= usize::BITS as usize {
            return Err(Error::Domain(format!("node {s:?} has no machine-sized code")));
        }
        code |= 1 << pos;
    }
    Ok(code)
}

pub fn node_decode(mut code: usize) -> Vec<usize> {
    let mut out = vec![];
    let mut prev: Option<usize> = None;
    while code != 0 {
        let p = code.trailing_zeros() as usize;
        out.push(match prev {
            None => p,
            Some(q) => p - q - 1,
        });
        prev = Some(p);
        code &= code - 1;
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SubsetCode {
    Finite(BTreeSet<usize>),
    Cofinite(BTreeSet<usize>),
    /// Membership bits for the first elements, then a constant.
    Table { bits: Vec<bool>, tail: bool },
    /// The nodes (as codes) lying on one branch.
    Chain(Branch),
    /// Downward closure of finitely many nodes together with the nodes of
    /// finitely many branches.
    Tree { nodes: Vec<Vec<usize>>, branches: Vec<Branch> },
}

impl SubsetCode {
    pub fn empty() -> Self {
        SubsetCode::Finite(BTreeSet::new())
    }

    pub fn full() -> Self {
        SubsetCode::Cofinite(BTreeSet::new())
    }

    pub fn from_mask(mask: u64) -> Self {
        SubsetCode::Finite((0..64).filter(|i| mask >> i & 1 == 1).collect())
    }

    pub fn contains(&self, i: usize) -> bool {
        match self {
            SubsetCode::Finite(s) => s.contains(&i),
            SubsetCode::Cofinite(s) => !s.contains(&i),
            SubsetCode::Table { bits, tail } => bits.get(i).copied().unwrap_or(*tail),
            SubsetCode::Chain(b) => b.has_node(&node_decode(i)),
            SubsetCode::Tree { nodes, branches } => {
                let s = node_decode(i);
                nodes.iter().any(|t| t.starts_with(&s)) || branches.iter().any(|b| b.has_node(&s))
            }
        }
    }

    /// Flips membership of `i`, producing a table code up to `i`.
    pub fn toggled(&self, i: usize, horizon: usize) -> SubsetCode {
        let n = horizon.max(i + 1);
        let mut bits: Vec<bool> = (0..n).map(|j| self.contains(j)).collect();
        bits[i] = !bits[i];
        match self {
            SubsetCode::Finite(_) => SubsetCode::Table { bits, tail: false },
            SubsetCode::Cofinite(_) => SubsetCode::Table { bits, tail: true },
            SubsetCode::Table { tail, .. } => SubsetCode::Table { bits, tail: *tail },
            _ => SubsetCode::Table { bits, tail: false },
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            SubsetCode::Finite(s) => json!({ "kind": "finite", "members": s }),
            SubsetCode::Cofinite(s) => json!({ "kind": "cofinite", "missing": s }),
            SubsetCode::Table { bits, tail } => json!({
                "kind": "table",
                "bits": bits.iter().map(|&b| if b { '1' } else { '0' }).collect::<String>(),
                "tail": u8::from(*tail),
            }),
            SubsetCode::Chain(b) => json!({ "kind": "branch", "branch": b.to_json() }),
            SubsetCode::Tree { nodes, branches } => json!({
                "kind": "tree", "nodes": nodes,
                "branches": branches.iter().map(Branch::to_json).collect::<Vec<_>>(),
            }),
        }
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let bad = |m: &str| Error::Parse(format!("subset JSON: {m}"));
        let set = |k: &str| -> BTreeSet<usize> {
            v.get(k).and_then(Value::as_array).into_iter().flatten().filter_map(Value::as_u64).map(|x| x as usize).collect()
        };
        match v.get("kind").and_then(Value::as_str) {
            Some("finite") => Ok(SubsetCode::Finite(set("members"))),
            Some("cofinite") => Ok(SubsetCode::Cofinite(set("missing"))),
            Some("table") => {
                let bits = v.get("bits").and_then(Value::as_str).unwrap_or("");
                let bits = bits
                    .chars()
                    .map(|c| match c {
                        '0' => Ok(false),
                        '1' => Ok(true),
                        _ => Err(bad("table bits must be 0 or 1")),
                    })
                    .collect::<Result<Vec<_>>>()?;
                let tail = v.get("tail").and_then(Value::as_u64).unwrap_or(0) == 1;
                Ok(SubsetCode::Table { bits, tail })
            }
            Some("branch") => Ok(SubsetCode::Chain(Branch::from_json(v.get("branch").ok_or_else(|| bad("branch"))?)?)),
            Some("tree") => {
                let nodes = v
                    .get("nodes")
                    .and_then(Value::as_array)
                    .into_iter()
                    .flatten()
                    .map(|n| {
                        n.as_array()
                            .map(|a| a.iter().filter_map(Value::as_u64).map(|x| x as usize).collect())
                            .ok_or_else(|| bad("tree nodes are arrays"))
                    })
                    .collect::<Result<Vec<Vec<usize>>>>()?;
                let branches = v
                    .get("branches")
                    .and_then(Value::as_array)
                    .into_iter()
                    .flatten()
                    .map(Branch::from_json)
                    .collect::<Result<Vec<_>>>()?;
                Ok(SubsetCode::Tree { nodes, branches })
            }
            other => Err(bad(&format!("unknown kind {other:?}"))),
        }
    }
}

/// `a ⊆ b` on the elements `< horizon`.
pub fn subset_upto(a: &SubsetCode, b: &SubsetCode, horizon: usize) -> bool {
    (0..horizon).all(|i| !a.contains(i) || b.contains(i))
}

/// `{ 2n + bits(n) : n < |bits| }`.
pub fn antichain_embed(bits: &[bool]) -> SubsetCode {
    SubsetCode::Finite(bits.iter().enumerate().map(|(n, &b)| 2 * n + usize::from(b)).collect())
}

/// A chain-contained-in-tree test decided on the descriptions: a branch lies
/// in a finitely described tree iff it is one of the tree's branches.
pub fn chain_in_tree(p: &Branch, t: &SubsetCode) -> bool {
    match t {
        SubsetCode::Tree { branches, .. } => branches.iter().any(|b| b.same_as(p)),
        SubsetCode::Chain(b) => b.same_as(p),
        SubsetCode::Cofinite(_) | SubsetCode::Table { tail: true, .. } => {
            // codes of longer initial segments are larger, so only nodes up to
            // the last excluded code need checking
            let last = match t {
                SubsetCode::Cofinite(s) => s.iter().max().copied().unwrap_or(0),
                SubsetCode::Table { bits, .. } => bits.len(),
                _ => unreachable!(),
            };
            for len in 0.. {
                match node_code(&p.take(len)) {
                    Ok(c) if c > last => return true,
                    Ok(c) if !t.contains(c) => return false,
                    Ok(_) => {}
                    Err(_) => return true,
                }
            }
            unreachable!()
        }
        SubsetCode::Finite(_) | SubsetCode::Table { tail: false, .. } => false,
    }
}

/// First node of the branch not in `t`, as a code, scanning `max_len` nodes.
pub fn first_node_outside(p: &Branch, t: &SubsetCode, max_len: usize) -> Option<usize> {
    (0..max_len).filter_map(|l| node_code(&p.take(l)).ok()).find(|&c| !t.contains(c))
}
