//! Halo catalogs, merger forests and their traversals.

pub mod catalog;
pub mod forest;
pub mod membership;
pub mod subtree;
pub mod trace;

pub use catalog::{read_catalog, read_catalog_file, write_catalog, write_catalog_file, CATALOG_HEADER};
pub use forest::{validate_forest, HaloId, HaloRecord, MergerForest, Violation};
pub use membership::halos_in_selection;
pub use subtree::{extract_subtree, HaloSubtree};
pub use trace::{
    main_progenitor_line, trace_halo, trace_particles, ParticleTracer, TracePath, TraceSegment, TraceSubject,
    TraceTarget, TraceVertex,
};
