//! Trees and branches over finite sequences of naturals, encoded through the
//! subset machinery: a tree `T` and a branch `p` give `y_T` and `w_p`.

use std::sync::Arc;

use serde_json::{json, Value};

use super::certs::{l1_bounded_cert, l1_hit, BoundCert, HitCert};
use super::partition::Partition;
use super::subset::{chain_in_tree, first_node_outside, Branch, SubsetCode};
use crate::enumerate::{triple_index, Universe};
use crate::error::{Error, Result};

/// Nodes of the branch scanned when looking for one outside the tree.
pub const NODE_SCAN: usize = 64;

#[derive(Clone, Debug)]
pub enum T2Cert {
    Bound(BoundCert),
    Hit(HitCert),
}

#[derive(Clone, Debug)]
pub struct T2Verdict {
    /// `p ⊆ T`, decided on the descriptions.
    pub chain_in_tree: bool,
    pub cert: T2Cert,
}

impl T2Verdict {
    pub fn passed(&self) -> bool {
        match &self.cert {
            T2Cert::Bound(c) => c.passed(),
            T2Cert::Hit(c) => c.passed(),
        }
    }

    /// The certificate kind matches the containment test.
    pub fn agrees(&self) -> bool {
        matches!(self.cert, T2Cert::Bound(_)) == self.chain_in_tree
    }

    pub fn to_json(&self) -> Value {
        let (kind, cert) = match &self.cert {
            T2Cert::Bound(c) => ("bound", c.to_json()),
            T2Cert::Hit(c) => ("hit", c.to_json()),
        };
        json!({ "chain_in_tree": self.chain_in_tree, "kind": kind, "cert": cert, "agrees": self.agrees(), "passed": self.passed() })
    }
}

/// Certificate for the tree/branch pair: a bound certificate when the
/// branch lies in the tree, otherwise a hit mounted on a node of the branch
/// outside the tree. The partition must use the countable universe.
pub fn t2_check(part: &Arc<Partition>, t: &SubsetCode, p: &Branch, blocks: usize) -> Result<T2Verdict> {
    if part.triples().universe != Universe::Countable {
        return Err(Error::Precondition("tree checks need the countable universe".into()));
    }
    let chain = SubsetCode::Chain(p.clone());
    let inside = chain_in_tree(p, t);
    let cert = if inside {
        T2Cert::Bound(l1_bounded_cert(part, t, &chain, blocks)?)
    } else {
        let node = first_node_outside(p, t, NODE_SCAN)
            .ok_or_else(|| Error::Horizon { horizon: NODE_SCAN, what: "no node of the branch outside the tree".into() })?;
        // the first canonical block mounted on this node
        let n = (0..)
            .map(crate::enumerate::unpair)
            .find_map(|(p, e)| {
                let eps = crate::enumerate::unit_rational_at(e);
                let n = triple_index(Universe::Countable, p, &eps, node).ok()?;
                (part.triples().table.len() <= n).then_some(n)
            })
            .expect("some canonical block");
        T2Cert::Hit(l1_hit(part, t, &chain, n)?)
    };
    Ok(T2Verdict { chain_in_tree: inside, cert })
}
