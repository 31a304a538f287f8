//! Structure-aware lasso selection of particle clusters in cosmology point
//! clouds, plus merger-forest queries and 2D layouts for exploring the halos
//! found inside a selection.
//!
//! The crate is organised around the exploration loop:
//!
//! * [`selection`] turns a 2D lasso over a rendered view into split, labelled
//!   3D particle clusters and picks the one with the largest projected area.
//! * [`halo`] loads a merger forest from a halo catalog and answers subtree,
//!   membership and trace queries.
//! * [`layout`] produces the MDS disc layout, the level-wise merger-tree
//!   layout, the time colormap and cursor picking.
//! * [`service`] hosts datasets and sessions behind an HTTP API.
//! * [`synth`] generates deterministic synthetic datasets.

pub mod error;
pub mod geom;
pub mod halo;
pub mod layout;
pub mod selection;
pub mod service;
pub mod snapshot;
pub mod synth;

pub use error::{Error, ErrorKind, Result};
pub use geom::Vec3;
pub use snapshot::{Particle, ParticleSnapshot};
