//! The measurement–evolution sequence.
//!
//! Step `k` measures with kernel `D`, then the channel acts for one interval.
//! Averaged over an unobserved outcome a measurement leaves the sector
//! populations unchanged (the columns of `D` sum to one), so the hidden
//! sector follows a Markov chain with transition `T` and emits outcomes
//! through `D`. Outcomes alone are not Markov once `D` is not the identity.

mod covariance;
mod joint;
mod sampling;

pub use covariance::{correlation_empirical, covariance_empirical, CovarianceEstimate};
pub use joint::JointDistribution;
pub use sampling::{empirical_distribution, Trajectory};

use nalgebra::{Complex, DMatrix};

use crate::channels::{ChannelSpec, TransitionKernel};
use crate::measurement::MeasurementKernel;
use crate::sector::SectorDistribution;
use crate::{Error, Result};

/// Initial ensemble state.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialState {
    /// `𝟙 / 2^N`.
    Mixed,
    /// `ϱ^{⊗N}` with `ϱ = a|↑⟩⟨↑| + (1-a)|↓⟩⟨↓| + b|↑⟩⟨↓| + b*|↓⟩⟨↑|`.
    ///
    /// The coherence `b` is invisible to `z` measurements; only the dense
    /// oracle uses it.
    Product {
        up_probability: f64,
        coherence: Complex<f64>,
    },
    /// `Σ_k q₀(k) Π_k / Tr Π_k`.
    SectorDensity(SectorDistribution),
}

impl InitialState {
    pub fn product(up_probability: f64) -> Self {
        Self::Product {
            up_probability,
            coherence: Complex::new(0.0, 0.0),
        }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        match self {
            Self::Mixed => Ok(()),
            Self::Product {
                up_probability: a,
                coherence: b,
            } => {
                if !(0.0..=1.0).contains(a) {
                    return Err(Error::ProbabilityOutOfRange {
                        name: "a",
                        value: *a,
                    });
                }
                if b.norm_sqr() > a * (1.0 - a) + 1e-15 {
                    return Err(Error::InvalidConfig(format!(
                        "|b|^2 = {} exceeds a(1-a) = {}; single-spin state is not positive",
                        b.norm_sqr(),
                        a * (1.0 - a)
                    )));
                }
                Ok(())
            }
            Self::SectorDensity(q) => q.check_same_n(n),
        }
    }

    /// Sector populations before the first measurement.
    pub fn sector_distribution(&self, n: usize) -> Result<SectorDistribution> {
        self.validate(n)?;
        match self {
            Self::Mixed => Ok(SectorDistribution::mixed(n)),
            Self::Product { up_probability, .. } => SectorDistribution::binomial(n, *up_probability),
            Self::SectorDensity(q) => Ok(q.clone()),
        }
    }
}

/// Everything needed to run or evaluate a measurement chain.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub n: usize,
    /// Gaussian kernel width; `0` is projective, `f64::INFINITY` uniform.
    pub width: f64,
    pub channel: ChannelSpec,
    pub initial: InitialState,
    /// Number of measurements `K`.
    pub steps: usize,
    pub trajectories: usize,
    pub seed: u64,
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.steps == 0 {
            return Err(Error::InvalidConfig("steps must be at least 1".into()));
        }
        if self.width.is_nan() || self.width < 0.0 {
            return Err(Error::InvalidWidth(self.width));
        }
        self.channel.validate()?;
        if let ChannelSpec::EpsilonPolarizing { reference, .. } = &self.channel {
            reference.check_same_n(self.n)?;
        }
        self.initial.validate(self.n)
    }
}

/// Sector-level model of a measurement chain.
#[derive(Debug, Clone)]
pub struct ChainModel {
    kernel: MeasurementKernel,
    transition: TransitionKernel,
    initial: SectorDistribution,
}

impl ChainModel {
    pub fn new(config: &RunConfig) -> Result<Self> {
        config.validate()?;
        Self::from_parts(
            MeasurementKernel::gaussian(config.n, config.width)?,
            config.channel.transition_kernel(config.n)?,
            config.initial.sector_distribution(config.n)?,
        )
    }

    pub fn from_parts(
        kernel: MeasurementKernel,
        transition: TransitionKernel,
        initial: SectorDistribution,
    ) -> Result<Self> {
        let n = kernel.n();
        if transition.n() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: transition.n(),
            });
        }
        initial.check_same_n(n)?;
        Ok(Self {
            kernel,
            transition,
            initial,
        })
    }

    pub fn n(&self) -> usize {
        self.kernel.n()
    }

    pub fn kernel(&self) -> &MeasurementKernel {
        &self.kernel
    }

    pub fn transition(&self) -> &TransitionKernel {
        &self.transition
    }

    pub fn initial(&self) -> &SectorDistribution {
        &self.initial
    }

    /// Sector populations just before measurement `step` (1-based),
    /// marginalized over all earlier outcomes.
    pub fn sector_before(&self, step: usize) -> Result<SectorDistribution> {
        if step == 0 {
            return Err(Error::StepOutOfRange {
                step,
                reason: "steps are numbered from 1",
            });
        }
        let mut q = self.initial.clone();
        for _ in 1..step {
            q = self.transition.apply(&q)?;
        }
        Ok(q)
    }

    /// `P(M; t_step)`.
    pub fn outcome_marginal(&self, step: usize) -> Result<SectorDistribution> {
        self.kernel.outcome_distribution(&self.sector_before(step)?)
    }

    /// `P(M; t₂ | m₁)`: the next outcome law after recording `m₁` at step 1.
    pub fn conditional_next(&self, m1_doubled: i64) -> Result<SectorDistribution> {
        let post = self.kernel.posterior(&self.initial, m1_doubled)?;
        self.kernel.outcome_distribution(&self.transition.apply(&post)?)
    }

    /// Joint law of the outcomes at steps `later > earlier >= 1`:
    /// `J = D · T^{later-earlier} · diag(q_earlier) · Dᵀ`.
    pub fn exact_joint(&self, later: usize, earlier: usize) -> Result<JointDistribution> {
        if earlier == 0 {
            return Err(Error::StepOutOfRange {
                step: earlier,
                reason: "steps are numbered from 1",
            });
        }
        if later <= earlier {
            return Err(Error::StepOutOfRange {
                step: later,
                reason: "the later step must exceed the earlier one",
            });
        }
        let q = self.sector_before(earlier)?;
        let d = self.kernel.matrix();
        let dim = self.n() + 1;
        // conditioned[l][m_j] = q(l) D(m_j, l)
        let mut propagated = DMatrix::from_fn(dim, dim, |l, mj| q.probs()[l] * d[(mj, l)]);
        for _ in earlier..later {
            propagated = self.transition.matrix() * propagated;
        }
        let matrix = d * propagated;
        Ok(JointDistribution::new(self.n(), later, earlier, matrix))
    }
}

/// `η_k = 1 - (1 - λ)^k`, the weight of the independent part of the joint
/// law at lag `k` (`η₀ = 0`, `η_k = λ + (1 - λ) η_{k-1}`).
pub fn eta(lambda: f64, lag: u32) -> f64 {
    if lambda == 1.0 {
        return if lag == 0 { 0.0 } else { 1.0 };
    }
    -(f64::from(lag) * (-lambda).ln_1p()).exp_m1()
}

/// `R(k) = (N/4)(1 - λ)^k + (η_k - 1) E₁²` for mixing channels, where `E₁`
/// is the mean first outcome. Exact for a maximally mixed start.
pub fn covariance_closed_form(n: usize, lambda: f64, lag: u32, first_mean: f64) -> f64 {
    let survive = 1.0 - eta(lambda, lag);
    n as f64 / 4.0 * survive + (eta(lambda, lag) - 1.0) * first_mean * first_mean
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BreakEven {
    /// Largest `N` at which spin noise exceeds the steady-state signal.
    Finite(u64),
    Unbounded,
}

/// Largest ensemble size for which spin noise `~√N` beats the Ernst-angle
/// steady-state polarization signal `N ε tan(β/2)`:
/// `⌊(tan(β/2) ε)^{-2}⌋`.
pub fn break_even_spin_count(nutation_angle: f64, polarization: f64) -> Result<BreakEven> {
    if !(nutation_angle > 0.0 && nutation_angle <= std::f64::consts::FRAC_PI_2) {
        return Err(Error::InvalidConfig(format!(
            "nutation angle must lie in (0, π/2], got {nutation_angle}"
        )));
    }
    if !(0.0..1.0).contains(&polarization) {
        return Err(Error::InvalidConfig(format!(
            "polarization must lie in [0, 1), got {polarization}"
        )));
    }
    if polarization == 0.0 {
        return Ok(BreakEven::Unbounded);
    }
    let r = (nutation_angle / 2.0).tan() * polarization;
    let bound = 1.0 / (r * r);
    if !bound.is_finite() || bound >= u64::MAX as f64 {
        return Ok(BreakEven::Unbounded);
    }
    // absorb representation error when the bound is an integer, e.g. tan(π/4)
    let nearest = bound.round();
    let count = if (bound - nearest).abs() <= 1e-12 * bound {
        nearest
    } else {
        bound.floor()
    };
    Ok(BreakEven::Finite(count as u64))
}
