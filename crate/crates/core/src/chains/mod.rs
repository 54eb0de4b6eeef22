//! The four bundled chains on bipartite graphs, their canonical path
//! schemes, and the closed-form mixing bounds known for them.

mod bounds;
mod canonical;
mod matching;
mod switch;

pub use bounds::{broder_bound, greenhill_bound};
pub use canonical::{matching_canonical_scheme, switch_canonical_scheme, CanonicalScheme};
pub use matching::{holes, maximum_matching, MatchingChainOne, MatchingChainTwo};
pub use switch::{SwitchChainOne, SwitchChainTwo};

use crate::edge_set::EdgeSet;

type Cell = (usize, usize);

/// Outcome of one random choice that leaves the current state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Edit {
    Remove(Cell),
    Add(Cell),
    Replace { remove: Cell, add: Cell },
    Switch { remove: [Cell; 2], add: [Cell; 2] },
}

impl Edit {
    pub(crate) fn apply(self, state: &EdgeSet) -> EdgeSet {
        let mut next = state.clone();
        match self {
            Edit::Remove((r, c)) => next.remove(r, c),
            Edit::Add((r, c)) => next.insert(r, c),
            Edit::Replace { remove, add } => {
                next.remove(remove.0, remove.1);
                next.insert(add.0, add.1);
            }
            Edit::Switch { remove, add } => {
                for (r, c) in remove {
                    next.remove(r, c);
                }
                for (r, c) in add {
                    next.insert(r, c);
                }
            }
        }
        next
    }
}
