use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::ChainModel;
use crate::measurement::MeasurementRecord;
use crate::sector::{doubled_of, SectorDistribution, SectorIndex};
use crate::{Error, Result};

/// One sampled outcome sequence `m₁ … m_K`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    /// Trajectory index; also the RNG stream id.
    pub id: u64,
    pub records: Vec<MeasurementRecord>,
}

impl Trajectory {
    pub fn outcomes(&self) -> impl Iterator<Item = i64> + '_ {
        self.records.iter().map(|r| r.outcome_doubled)
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

/// Counter-based stream: the key comes from `seed`, the stream word from the
/// trajectory index, so every trajectory is reproducible in isolation.
fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

/// Inverse CDF. Never returns a zero-probability index for `u ∈ [0, 1)`.
fn inverse_cdf(probs: &[f64], u: f64) -> usize {
    let total: f64 = probs.iter().sum();
    let target = u * total;
    let mut acc = 0.0;
    let mut last_positive = 0;
    for (i, &p) in probs.iter().enumerate() {
        if p > 0.0 {
            acc += p;
            last_positive = i;
            if acc > target {
                return i;
            }
        }
    }
    last_positive
}

impl ChainModel {
    /// Filter-based sampling: predict, draw, condition, evolve.
    ///
    /// With `postselect_m1` the first outcome is fixed to the given doubled
    /// value instead of drawn, which samples from `P(· | m₁)` afterwards.
    pub fn sample_trajectory(
        &self,
        seed: u64,
        id: u64,
        steps: usize,
        postselect_m1: Option<i64>,
    ) -> Result<Trajectory> {
        let n = self.n();
        let mut rng = stream(seed, id);
        let mut q: SectorDistribution = self.initial.clone();
        let mut records = Vec::with_capacity(steps);
        for step in 1..=steps {
            let predictive = self.kernel.outcome_distribution(&q)?;
            let outcome = match postselect_m1.filter(|_| step == 1) {
                Some(d) => SectorIndex::from_doubled(n, d)?.index(),
                None => inverse_cdf(predictive.probs(), rng.gen::<f64>()),
            };
            let probability = predictive.probs()[outcome];
            let outcome_doubled = doubled_of(n, outcome);
            if probability <= 0.0 {
                return Err(Error::ImpossibleOutcome {
                    doubled: outcome_doubled,
                });
            }
            records.push(MeasurementRecord {
                step,
                outcome_doubled,
                probability,
            });
            q = self.kernel.posterior(&q, outcome_doubled)?;
            if step < steps {
                q = self.transition.apply(&q)?;
            }
        }
        Ok(Trajectory { id, records })
    }

    /// Samples trajectories `0..count` in parallel on the current rayon pool.
    /// Output is independent of the number of worker threads.
    pub fn sample(
        &self,
        seed: u64,
        count: usize,
        steps: usize,
        postselect_m1: Option<i64>,
    ) -> Result<Vec<Trajectory>> {
        if steps == 0 {
            return Err(Error::InvalidConfig("steps must be at least 1".into()));
        }
        (0..count as u64)
            .into_par_iter()
            .map(|id| self.sample_trajectory(seed, id, steps, postselect_m1))
            .collect()
    }
}

/// Normalized histogram of the outcomes recorded at `step` (1-based).
pub fn empirical_distribution(
    n: usize,
    trajectories: &[Trajectory],
    step: usize,
) -> Result<SectorDistribution> {
    let mut counts = vec![0.0; n + 1];
    for t in trajectories {
        let r = t.records.get(step - 1).ok_or(Error::StepOutOfRange {
            step,
            reason: "trajectory is shorter than the requested step",
        })?;
        counts[SectorIndex::from_doubled(n, r.outcome_doubled)?.index()] += 1.0;
    }
    SectorDistribution::from_weights(n, counts)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_cdf_skips_zero_mass() {
        let p = [0.0, 0.5, 0.0, 0.5, 0.0];
        assert_eq!(inverse_cdf(&p, 0.0), 1);
        assert_eq!(inverse_cdf(&p, 0.49), 1);
        assert_eq!(inverse_cdf(&p, 0.5), 3);
        assert_eq!(inverse_cdf(&p, 0.999_999_999), 3);
    }

    #[test]
    fn streams_are_independent_of_order() {
        let a: f64 = stream(9, 3).gen();
        let _ = stream(9, 2).gen::<f64>();
        let b: f64 = stream(9, 3).gen();
        assert_eq!(a, b);
        assert_ne!(a, stream(9, 4).gen::<f64>());
    }
}
