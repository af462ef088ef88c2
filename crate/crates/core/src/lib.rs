//! Dynamic mode decomposition with truncated total least squares.
//!
//! The crate provides four DMD variants (exact, TLS, truncated TLS and
//! subspace DMD), snapshot file formats, a synthetic data generator with
//! planted spectra, and Monte Carlo tools for studying eigenvalue bias and
//! variance under observation noise.

pub mod dmd;
pub mod error;
pub mod kv;
mod linalg;
pub mod snapshots;
pub mod stats;
pub mod synth;

pub use dmd::{
    decompose, exact_dmd, subspace_dmd, tls_dmd, ttls_dmd, Algorithm, AlgorithmSpec, DmdResult,
    EkNorm, TruncationLevel, TtlsConfig,
};
pub use error::{DmdError, ErrorClass, Result};
pub use snapshots::{
    load_snapshots, save_snapshots, shifted_pair, subtract_mean, ShiftedPair, SnapshotFormat,
    SnapshotMatrix,
};

pub use faer::c64;
