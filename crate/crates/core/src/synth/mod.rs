//! Deterministic synthetic data: particle blob datasets and large forests.

pub mod blobs;
pub mod forest;

pub use blobs::{generate_synthetic_dataset, BlobSpec, BlobUniverse, Merge};
pub use forest::{generate_forest, ForestSpec, GeneratedForest};
