use std::collections::VecDeque;

use serde::Serialize;

use super::forest::{HaloId, HaloRecord, MergerForest};
use crate::error::{Error, Result};

/// A root halo and everything that merged into it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HaloSubtree {
    pub root: HaloId,
    /// Breadth-first from the root, progenitors in descending-mass order.
    pub nodes: Vec<HaloRecord>,
    /// `(progenitor, descendant)` pairs, in the order they were discovered.
    pub edges: Vec<(HaloId, HaloId)>,
}

impl HaloSubtree {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn contains(&self, id: HaloId) -> bool {
        self.nodes.iter().any(|n| n.halo_id == id)
    }
}

pub fn extract_subtree(forest: &MergerForest, root: HaloId) -> Result<HaloSubtree> {
    let root_index = forest.index_of(root).ok_or(Error::NoSuchHalo(root))?;
    let mut nodes = Vec::new();
    let mut edges = Vec::new();
    let mut queue = VecDeque::from([root_index]);
    // descendant links are acyclic after load, so each node is seen once
    while let Some(i) = queue.pop_front() {
        let h = forest.halo_at(i);
        nodes.push(h.clone());
        for &p in forest.progenitor_indices(i) {
            edges.push((forest.halo_at(p).halo_id, h.halo_id));
            queue.push_back(p);
        }
    }
    Ok(HaloSubtree { root, nodes, edges })
}
