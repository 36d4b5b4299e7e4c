use rayon::prelude::*;

use super::{
    check_size, dense_outcome_probabilities, dense_posterior, DenseChannel, DensePovm, DenseState,
};
use crate::chain::{ChainModel, RunConfig};
use crate::sector::{doubled_of, SectorDistribution};
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrosscheckOptions {
    /// Number of measurements along each branch.
    pub rounds: usize,
    pub tolerance: f64,
    /// Branches whose path probability falls below this are not expanded.
    pub min_branch_probability: f64,
}

impl Default for CrosscheckOptions {
    fn default() -> Self {
        Self {
            rounds: 3,
            tolerance: 1e-10,
            min_branch_probability: 1e-9,
        }
    }
}

/// Largest disagreements between the dense and sector engines over the
/// full outcome tree.
#[derive(Debug, Clone, PartialEq)]
pub struct CrosscheckReport {
    pub n: usize,
    pub rounds: usize,
    pub tolerance: f64,
    /// Total variation between outcome laws, per measurement round.
    pub total_variation_by_round: Vec<f64>,
    /// Entrywise deviation of dense posteriors from the sector-uniform
    /// mixture the sector engine predicts, per measurement round.
    pub posterior_deviation_by_round: Vec<f64>,
    pub branches: usize,
    pub pruned: usize,
}

impl CrosscheckReport {
    pub fn max_total_variation(&self) -> f64 {
        self.total_variation_by_round.iter().copied().fold(0.0, f64::max)
    }

    pub fn max_posterior_deviation(&self) -> f64 {
        self.posterior_deviation_by_round.iter().copied().fold(0.0, f64::max)
    }

    pub fn total_variation_passed(&self) -> bool {
        self.max_total_variation() < self.tolerance
    }

    pub fn posterior_passed(&self) -> bool {
        self.max_posterior_deviation() < self.tolerance
    }

    pub fn passed(&self) -> bool {
        self.total_variation_passed() && self.posterior_passed()
    }

    fn empty(n: usize, options: &CrosscheckOptions) -> Self {
        Self {
            n,
            rounds: options.rounds,
            tolerance: options.tolerance,
            total_variation_by_round: vec![0.0; options.rounds],
            posterior_deviation_by_round: vec![0.0; options.rounds],
            branches: 0,
            pruned: 0,
        }
    }

    fn merge(mut self, other: Self) -> Self {
        for (a, b) in self.total_variation_by_round.iter_mut().zip(&other.total_variation_by_round) {
            *a = a.max(*b);
        }
        for (a, b) in self
            .posterior_deviation_by_round
            .iter_mut()
            .zip(&other.posterior_deviation_by_round)
        {
            *a = a.max(*b);
        }
        self.branches += other.branches;
        self.pruned += other.pruned;
        self
    }
}

struct Engines<'a> {
    model: &'a ChainModel,
    povm: DensePovm,
    channel: DenseChannel,
    options: CrosscheckOptions,
}

impl Engines<'_> {
    /// Compares the outcome laws at `round` (0-based), then expands every
    /// outcome into its posterior pair.
    fn explore(
        &self,
        round: usize,
        dense: &DenseState,
        sector: &SectorDistribution,
        path_probability: f64,
    ) -> Result<CrosscheckReport> {
        let n = self.model.n();
        let mut report = CrosscheckReport::empty(n, &self.options);
        report.branches = 1;

        let dense_p = dense_outcome_probabilities(dense, &self.povm)?;
        let sector_p = self.model.kernel().outcome_distribution(sector)?;
        report.total_variation_by_round[round] = 0.5
            * dense_p
                .iter()
                .zip(sector_p.probs())
                .map(|(a, b)| (a - b).abs())
                .sum::<f64>();

        let outcomes: Vec<usize> = (0..=n).filter(|&m| sector_p.probs()[m] > 0.0).collect();
        let children = |m: usize| -> Result<CrosscheckReport> {
            let mut child = CrosscheckReport::empty(n, &self.options);
            let p = sector_p.probs()[m];
            if path_probability * p < self.options.min_branch_probability || dense_p[m] <= 0.0 {
                child.pruned = 1;
                return Ok(child);
            }
            let dense_post = dense_posterior(dense, &self.povm, m)?;
            let sector_post = self.model.kernel().posterior(sector, doubled_of(n, m))?;
            child.posterior_deviation_by_round[round] =
                dense_post.deviation_from_sector_uniform(&sector_post);
            if round + 1 < self.options.rounds {
                let next_dense = self.channel.apply(&dense_post);
                let next_sector = self.model.transition().apply(&sector_post)?;
                child = child.merge(self.explore(
                    round + 1,
                    &next_dense,
                    &next_sector,
                    path_probability * p,
                )?);
            }
            Ok(child)
        };

        let results: Vec<CrosscheckReport> = if round == 0 {
            outcomes.par_iter().map(|&m| children(m)).collect::<Result<_>>()?
        } else {
            outcomes.iter().map(|&m| children(m)).collect::<Result<_>>()?
        };
        Ok(results.into_iter().fold(report, CrosscheckReport::merge))
    }
}

/// Runs the dense and sector engines side by side over every outcome branch.
pub fn crosscheck(config: &RunConfig, options: CrosscheckOptions) -> Result<CrosscheckReport> {
    let model = ChainModel::new(config)?;
    crosscheck_model(config, &model, options)
}

/// As [`crosscheck`], but against a caller-supplied sector model (for
/// example one with a deliberately altered kernel).
pub fn crosscheck_model(
    config: &RunConfig,
    model: &ChainModel,
    options: CrosscheckOptions,
) -> Result<CrosscheckReport> {
    config.validate()?;
    check_size(config.n)?;
    let dense = DenseState::from_initial(&config.initial, config.n)?;
    let engines = Engines {
        model,
        povm: DensePovm::from_kernel(&crate::MeasurementKernel::gaussian(config.n, config.width)?)?,
        channel: DenseChannel::from_spec(&config.channel, config.n)?,
        options,
    };
    if options.rounds == 0 {
        return Ok(CrosscheckReport::empty(config.n, &options));
    }
    engines.explore(0, &dense, model.initial(), 1.0)
}
