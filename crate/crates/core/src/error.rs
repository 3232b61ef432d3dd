use std::path::PathBuf;

use thiserror::Error;

use crate::lattice::{DualVertex, Site};

#[derive(Debug, Error)]
pub enum Error {
    #[error("boundary condition does not cover exterior vertex {0:?}")]
    VertexNotCovered(Site),

    #[error("invalid strip: x_w = {x_w} > x_e = {x_e}")]
    InvalidStrip { x_w: i32, x_e: i32 },

    #[error("invalid region: {0}")]
    InvalidRegion(String),

    #[error("coupled chains are not ordered (site {0:?})")]
    OrderViolation(Site),

    #[error("region too large for exact enumeration: {size} > cap {cap}")]
    RegionTooLarge { size: usize, cap: usize },

    #[error("boundary set must have even cardinality, got {0}")]
    OddBoundary(usize),

    #[error("malformed edge set at dual vertex {0:?}")]
    MalformedInput(DualVertex),

    #[error("internal invariant violated: {0}")]
    InternalInvariant(String),

    #[error("interface is not admissible: {0}")]
    NonAdmissible(String),

    #[error("no spin configuration realizes the contour collection")]
    InconsistentCollection,

    #[error("identity violated: {0}")]
    IdentityViolation(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
