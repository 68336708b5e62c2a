//! Encoding subsets `a` of a countable set as pairs `(y_a, w_a)` so that
//! `y_a` is hypercyclic for `w_b` exactly when `b` is not contained in `a`.

pub mod certs;
pub mod maps;
pub mod partition;
pub mod subset;
pub mod tree;

pub use certs::{
    determination_set, hits_on, injectivity_witness, l1_bounded_cert, l1_hit, verify_pair, window_constancy, BoundCert,
    HitCert, PairVerdict,
};
pub use maps::{l1_vector, l1_weight};
pub use partition::{Block, Partition};
pub use subset::{antichain_embed, Branch, SubsetCode};
pub use tree::{t2_check, T2Verdict};
