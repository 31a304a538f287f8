use std::fmt;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Coarse error classes, stable across the HTTP and C interfaces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ErrorKind {
    InvalidLasso,
    InvalidCamera,
    InvalidParams,
    DimensionMismatch,
    EmptySelection,
    OutOfDomain,
    DuplicateId,
    BrokenLink,
    BadLink,
    FofViolation,
    Cycle,
    NoSuchHalo,
    NoSuchCluster,
    EmptyTrace,
    InvalidPoint,
    InvalidSpec,
    IncompleteDataset,
    NoActiveSelection,
    NoSuchSession,
    NoSuchDataset,
    Superseded,
    Format,
    Io,
}

impl ErrorKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ErrorKind::InvalidLasso => "invalid-lasso",
            ErrorKind::InvalidCamera => "invalid-camera",
            ErrorKind::InvalidParams => "invalid-params",
            ErrorKind::DimensionMismatch => "dimension-mismatch",
            ErrorKind::EmptySelection => "empty-selection",
            ErrorKind::OutOfDomain => "out-of-domain",
            ErrorKind::DuplicateId => "duplicate-id",
            ErrorKind::BrokenLink => "broken-link",
            ErrorKind::BadLink => "bad-link",
            ErrorKind::FofViolation => "fof-violation",
            ErrorKind::Cycle => "cycle",
            ErrorKind::NoSuchHalo => "no-such-halo",
            ErrorKind::NoSuchCluster => "no-such-cluster",
            ErrorKind::EmptyTrace => "empty-trace",
            ErrorKind::InvalidPoint => "invalid-point",
            ErrorKind::InvalidSpec => "invalid-spec",
            ErrorKind::IncompleteDataset => "incomplete-dataset",
            ErrorKind::NoActiveSelection => "no-active-selection",
            ErrorKind::NoSuchSession => "no-such-session",
            ErrorKind::NoSuchDataset => "no-such-dataset",
            ErrorKind::Superseded => "superseded",
            ErrorKind::Format => "format",
            ErrorKind::Io => "io",
        }
    }
}

impl fmt::Display for ErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid lasso: {0}")]
    InvalidLasso(String),
    #[error("invalid camera: {0}")]
    InvalidCamera(String),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("mask is {mask:?} but viewport is {viewport:?}")]
    DimensionMismatch {
        mask: (u32, u32),
        viewport: (u32, u32),
    },
    #[error("no structure found in the selected region")]
    EmptySelection,
    #[error("position {0:?} lies outside the grid domain")]
    OutOfDomain([f64; 3]),
    #[error("duplicate halo id {0}")]
    DuplicateId(u64),
    #[error("halo {halo} links to missing descendant {descendant}")]
    BrokenLink { halo: u64, descendant: u64 },
    #[error("halo {halo} at t={timestep} links to descendant {descendant} at t={descendant_timestep}")]
    BadLink {
        halo: u64,
        timestep: u32,
        descendant: u64,
        descendant_timestep: u32,
    },
    #[error("fof group {group} at t={timestep}: {reason} (halos {halos:?})")]
    FofViolation {
        timestep: u32,
        group: u64,
        halos: Vec<u64>,
        reason: String,
    },
    #[error("descendant links form a cycle through halos {0:?}")]
    Cycle(Vec<u64>),
    #[error("no such halo {0}")]
    NoSuchHalo(u64),
    #[error("no such cluster {0}")]
    NoSuchCluster(u32),
    #[error("subject not found in any snapshot")]
    EmptyTrace,
    #[error("invalid point at index {0}")]
    InvalidPoint(usize),
    #[error("invalid dataset spec: {0}")]
    InvalidSpec(String),
    #[error("incomplete dataset: {0}")]
    IncompleteDataset(String),
    #[error("session has no active selection")]
    NoActiveSelection,
    #[error("no such session {0}")]
    NoSuchSession(String),
    #[error("no such dataset {0}")]
    NoSuchDataset(String),
    #[error("request superseded by a newer one")]
    Superseded,
    #[error("format error: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::InvalidLasso(_) => ErrorKind::InvalidLasso,
            Error::InvalidCamera(_) => ErrorKind::InvalidCamera,
            Error::InvalidParams(_) => ErrorKind::InvalidParams,
            Error::DimensionMismatch { .. } => ErrorKind::DimensionMismatch,
            Error::EmptySelection => ErrorKind::EmptySelection,
            Error::OutOfDomain(_) => ErrorKind::OutOfDomain,
            Error::DuplicateId(_) => ErrorKind::DuplicateId,
            Error::BrokenLink { .. } => ErrorKind::BrokenLink,
            Error::BadLink { .. } => ErrorKind::BadLink,
            Error::FofViolation { .. } => ErrorKind::FofViolation,
            Error::Cycle(_) => ErrorKind::Cycle,
            Error::NoSuchHalo(_) => ErrorKind::NoSuchHalo,
            Error::NoSuchCluster(_) => ErrorKind::NoSuchCluster,
            Error::EmptyTrace => ErrorKind::EmptyTrace,
            Error::InvalidPoint(_) => ErrorKind::InvalidPoint,
            Error::InvalidSpec(_) => ErrorKind::InvalidSpec,
            Error::IncompleteDataset(_) => ErrorKind::IncompleteDataset,
            Error::NoActiveSelection => ErrorKind::NoActiveSelection,
            Error::NoSuchSession(_) => ErrorKind::NoSuchSession,
            Error::NoSuchDataset(_) => ErrorKind::NoSuchDataset,
            Error::Superseded => ErrorKind::Superseded,
            Error::Format(_) => ErrorKind::Format,
            Error::Io(_) => ErrorKind::Io,
        }
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Format(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Format(e.to_string())
    }
}
