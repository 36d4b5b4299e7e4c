//! Shared fixtures for the benchmarks.

use std::f64::consts::PI;

use spinnoise::{ChannelSpec, InitialState, RunConfig};

/// The appendix setup (`λ = 0.1`, `θ = π/32`, maximally mixed start) at
/// ensemble size `n` and kernel width `width`.
pub fn appendix_config(n: usize, width: f64, steps: usize) -> RunConfig {
    RunConfig {
        n,
        width,
        channel: ChannelSpec::DepolarizedRotation {
            lambda: 0.1,
            theta: PI / 32.0,
        },
        initial: InitialState::Mixed,
        steps,
        trajectories: 0,
        seed: 1,
    }
}
