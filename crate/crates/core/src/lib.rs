//! Spatially consistent small-scale fading path generation.
//!
//! Given a TX/RX position pair and per-frequency large-scale parameters
//! (delay spread, four angular spreads, K-factor), [`ssf::generate_paths`]
//! produces one set of frequency-independent path delays and departure /
//! arrival angles together with per-frequency path powers. All random
//! variables come from spatially correlated fields ([`corr_field`]), so
//! moving either end of the link changes the paths smoothly, and swapping
//! TX and RX swaps departure and arrival roles exactly.
//!
//! The [`lsf`] module samples large-scale parameters from a scenario config,
//! [`metrics`] recomputes spreads from generated paths, and [`cli`] holds
//! the command-line harness.

pub mod cli;
pub mod corr_field;
pub mod error;
pub mod geom;
pub mod lsf;
pub mod metrics;
pub mod seed;
pub mod ssf;

pub use error::{Error, Result};
pub use geom::{LinkGeometry, Position};
