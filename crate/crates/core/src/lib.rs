//! Lightmorphic signature analysis toolkit.
//!
//! The crate is organised bottom-up:
//!
//! - [`tensors`]: weak-field spacetime algebra (Minkowski metric, TT strain,
//!   finite-difference curvature, Einstein constant, wave residuals).
//! - [`propagation`]: light phase accumulated along a path through space,
//!   atmosphere and Earth-noise domains.
//! - [`signature`]: the binned intensity/trajectory/channel tensor, its
//!   weighted signature value and dataset aggregation.
//! - [`segments`]: isochronous segmentation, graph chords and their
//!   vibrational amplitude, alternative-profile prediction.
//! - [`spectral`]: DFT and spectrograms.
//! - [`inference`]: grid posteriors, segment-weighted prediction and a ridge
//!   regression baseline.
//! - [`store`]: versioned line-delimited stores, CSV ingestion and the
//!   weather provider abstraction.
//! - [`fixtures`]: deterministic synthetic weather for testing at scale.
//! - [`cli`]: the `lsat` command-line orchestrator.

// index loops mirror the tensor notation
#![allow(clippy::needless_range_loop)]

pub mod cli;
pub mod fixtures;
pub mod inference;
pub mod propagation;
pub mod segments;
pub mod signature;
pub mod spectral;
pub mod store;
pub mod tensors;
