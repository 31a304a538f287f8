//! Datasets, sessions and the HTTP API.

pub mod dataset;
pub mod explorer;
pub mod http;

pub use dataset::{Dataset, DatasetDescriptor};
pub use explorer::{
    parse_subject, ClusterSummary, ColoredTrace, ColoredVertex, Explorer, ExplorerConfig, SelectRequest, Session,
    SelectionSummary,
};
pub use http::{router, serve, SelectReply, TraceReply};
