//! Monostatic 5G NR radar simulator built around the positioning reference
//! signal (PRS).
//!
//! A single base station transmits standardized PRS occasions through a
//! uniform planar array, receives the echoes through 3GPP-style urban aerial
//! channels (UMi-AV / UMa-AV) with background clutter, and runs the receive
//! chain: clutter suppression, beam-sweep angle estimation, matched-filter
//! channel estimation, IDFT range profiling, peak-to-average-ratio detection,
//! and 3D position reconstruction. Monte Carlo campaigns aggregate
//! miss-detection, false-alarm, and position-error statistics.
//!
//! Module map:
//! - [`prs`]: Gold sequence, QPSK mapping, comb resource grid.
//! - [`array`]: planar array geometry, steering vectors, DFT codebook.
//! - [`channel`]: LoS probability, aerial path loss, shadow fading, RCS
//!   target echo, clutter reference points, per-tone observations.
//! - [`chain`]: the receive-side processing stages and the per-drop pipeline.
//! - [`montecarlo`]: target drops, link budget, campaign driver, metrics.

pub mod array;
pub mod chain;
pub mod channel;
pub mod error;
pub mod montecarlo;
pub mod prs;

pub use error::{Result, SimError};

/// Speed of light in vacuum (m/s).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
