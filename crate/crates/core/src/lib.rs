//! Link-level simulation of a bi-static MIMO sensing and downlink system in
//! which a dual-antenna repeater near the target hotspot amplifies both the
//! target echo and the downlink signal.
//!
//! The crate is organized along the signal chain:
//!
//! - [`scenario`]: configuration, entity placement, path loss, noise powers.
//! - [`channel`]: one realization of every propagation channel, the target
//!   RCS and the clutter statistics.
//! - [`precoding`]: regularized zero-forcing user beams, the sensing beam and
//!   the per-slot transmit frame.
//! - [`propagation`]: received signals at the repeater, the sensing BS and the
//!   downlink users.
//! - [`detector`]: the GLRT with joint MAP estimation of the RCS and the
//!   clutter channel, threshold calibration and an independent oracle.
//! - [`comm_metrics`]: downlink SINR and spectral efficiency.
//! - [`harness`]: Monte Carlo studies, CSV output and the CLI plumbing.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod comm_metrics;
pub mod detector;
mod error;
pub mod harness;
pub mod linalg;
pub mod precoding;
pub mod propagation;
pub mod scenario;

pub use error::{IsacError, Result};
