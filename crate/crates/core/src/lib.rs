//! Exact and Monte Carlo simulation of repeated collective magnetization
//! measurements on an ensemble of `N` spin-½ particles.
//!
//! The ensemble is measured along `z` either projectively (PVM) or through a
//! Gaussian-smeared POVM, and evolves between measurements under a CPTP map.
//! Every map supported here acts on populations of the magnetization sectors
//! only, so the whole measurement–evolution sequence reduces to a hidden
//! Markov chain over the `N + 1` sectors:
//!
//! - [`sector`]: sector indexing in doubled-magnetization units, log-domain
//!   binomials, and [`SectorDistribution`].
//! - [`measurement`]: the outcome kernel `D(m, l)`, its validation, outcome
//!   distributions and the `√E_m` state update.
//! - [`channels`]: sector transition kernels for collective mixing maps and
//!   product single-spin maps.
//! - [`chain`]: trajectory sampling, exact joint distributions and
//!   covariance functions.
//! - [`oracle`]: a brute-force `2^N`-dimensional density-matrix simulator
//!   used to cross-check the sector reduction for small `N`.
//!
//! Magnetizations are exchanged as *doubled* integers `d = 2m` so odd `N`
//! never needs fractional keys.
//!
//! ```
//! use spinnoise::{ChainModel, ChannelSpec, InitialState, RunConfig};
//!
//! let config = RunConfig {
//!     n: 20,
//!     width: 0.0,
//!     channel: ChannelSpec::CollectiveDepolarizing { lambda: 0.3 },
//!     initial: InitialState::Mixed,
//!     steps: 4,
//!     trajectories: 0,
//!     seed: 7,
//! };
//! let model = ChainModel::new(&config).unwrap();
//! let joint = model.exact_joint(3, 1).unwrap();
//! // N/4 (1 - λ)^2
//! assert!((joint.covariance() - 5.0 * 0.49).abs() < 1e-10);
//! ```

pub mod chain;
pub mod channels;
mod error;
pub mod measurement;
pub mod oracle;
pub mod sector;

pub use chain::{
    break_even_spin_count, covariance_closed_form, covariance_empirical, eta, BreakEven,
    ChainModel, CovarianceEstimate, InitialState, JointDistribution, RunConfig, Trajectory,
};
pub use channels::{conditional_moments, flip_probs_from_rotation, ChannelSpec, TransitionKernel};
pub use error::{Error, Result};
pub use measurement::{MeasurementKernel, MeasurementRecord, ValidationReport};
pub use sector::{Moments, SectorDistribution, SectorIndex};

/// Version string recorded in emitted artifacts.
pub const ENGINE_VERSION: &str = env!("CARGO_PKG_VERSION");
