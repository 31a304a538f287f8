//! Level-wise merger tree layout: time runs downward, root at the bottom.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::colormap::Rgb;
use super::discs::{encode_disc, AttributeRanges, DiscAttributes, DiscStyle};
use crate::halo::{HaloId, HaloSubtree};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TreeSpacing {
    pub row_height: f64,
    pub column_width: f64,
    pub margin: f64,
}

impl Default for TreeSpacing {
    fn default() -> Self {
        TreeSpacing {
            row_height: 24.0,
            column_width: 20.0,
            margin: 32.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TreeNode {
    pub halo_id: HaloId,
    pub level: u32,
    pub x: f64,
    pub y: f64,
    #[serde(flatten)]
    pub disc: DiscAttributes,
}

/// Gradient edge from a progenitor (`c0`) to its descendant (`c1`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TreeEdge {
    pub from: HaloId,
    pub to: HaloId,
    pub c0: Rgb,
    pub c1: Rgb,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeLayout {
    pub root: HaloId,
    pub width: f64,
    pub height: f64,
    pub nodes: Vec<TreeNode>,
    pub edges: Vec<TreeEdge>,
}

impl TreeLayout {
    pub fn node(&self, id: HaloId) -> Option<&TreeNode> {
        self.nodes.iter().find(|n| n.halo_id == id)
    }
}

pub fn layout_merger_tree(subtree: &HaloSubtree, style: &DiscStyle, spacing: &TreeSpacing) -> TreeLayout {
    let index: HashMap<HaloId, usize> = subtree.nodes.iter().enumerate().map(|(i, n)| (n.halo_id, i)).collect();
    // Edges were discovered breadth-first with progenitors in descending
    // mass order, so grouping by descendant keeps that order.
    let mut children: Vec<Vec<usize>> = vec![Vec::new(); subtree.nodes.len()];
    for (from, to) in &subtree.edges {
        children[index[to]].push(index[from]);
    }
    let t_min = subtree.nodes.iter().map(|n| n.timestep).min().unwrap_or(0);
    let t_max = subtree.nodes.iter().map(|n| n.timestep).max().unwrap_or(0);

    // Post-order walk from the root: leaves take the next slot, internal
    // nodes the mean of their progenitors.
    let mut x = vec![0.0; subtree.nodes.len()];
    let mut slot = 0usize;
    if let Some(&root) = index.get(&subtree.root) {
        let mut stack = vec![(root, false)];
        while let Some((i, expanded)) = stack.pop() {
            if children[i].is_empty() {
                x[i] = spacing.margin + slot as f64 * spacing.column_width;
                slot += 1;
            } else if expanded {
                x[i] = children[i].iter().map(|&c| x[c]).sum::<f64>() / children[i].len() as f64;
            } else {
                stack.push((i, true));
                stack.extend(children[i].iter().rev().map(|&c| (c, false)));
            }
        }
    }

    let ranges = AttributeRanges::of(&subtree.nodes);
    let nodes: Vec<TreeNode> = subtree
        .nodes
        .iter()
        .zip(&x)
        .map(|(h, &x)| TreeNode {
            halo_id: h.halo_id,
            level: h.timestep,
            x,
            y: spacing.margin + (h.timestep - t_min) as f64 * spacing.row_height,
            disc: encode_disc(h, &ranges, style),
        })
        .collect();
    let edges = subtree
        .edges
        .iter()
        .map(|&(from, to)| TreeEdge {
            from,
            to,
            c0: nodes[index[&from]].disc.color,
            c1: nodes[index[&to]].disc.color,
        })
        .collect();
    TreeLayout {
        root: subtree.root,
        width: 2.0 * spacing.margin + slot.saturating_sub(1) as f64 * spacing.column_width,
        height: 2.0 * spacing.margin + (t_max - t_min) as f64 * spacing.row_height,
        nodes,
        edges,
    }
}
