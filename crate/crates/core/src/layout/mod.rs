//! Two-dimensional views: MDS disc scatter, merger tree layout, colors.

pub mod colormap;
pub mod discs;
pub mod mds;
pub mod tree;

pub use colormap::{time_colormap, ColorMap, Rgb};
pub use discs::{
    encode_disc, encode_discs, layout_halos, pick_halo, AttributeRanges, DiscAttributes, DiscStyle,
    Layout2D, LayoutEntry,
};
pub use mds::mds_project;
pub use tree::{layout_merger_tree, TreeEdge, TreeLayout, TreeNode, TreeSpacing};
