//! Magnetization sectors and distributions over them.
//!
//! Sector `i ∈ [0, N]` holds the states with `i` spins up; its magnetization
//! is `m = i - N/2`, exchanged externally as the doubled integer `d = 2i - N`.

mod binomial;

pub use binomial::{exact_choose, log_binomial_pmf, log_choose};
pub(crate) use binomial::binomial_pmf_vec;

use crate::{Error, Result};

/// Normalization tolerance accepted by [`SectorDistribution::new`].
pub const NORMALIZATION_TOLERANCE: f64 = 1e-12;

/// Position of a sector in the dense `[0, N]` index space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SectorIndex {
    n: usize,
    index: usize,
}

impl SectorIndex {
    pub fn from_index(n: usize, index: usize) -> Result<Self> {
        if index > n {
            return Err(Error::SectorOutOfRange {
                n,
                doubled: 2 * index as i64 - n as i64,
            });
        }
        Ok(Self { n, index })
    }

    pub fn from_doubled(n: usize, doubled: i64) -> Result<Self> {
        let n_i = n as i64;
        if doubled < -n_i || doubled > n_i {
            return Err(Error::SectorOutOfRange { n, doubled });
        }
        if (doubled + n_i) % 2 != 0 {
            return Err(Error::ParityMismatch { n, doubled });
        }
        Ok(Self {
            n,
            index: ((doubled + n_i) / 2) as usize,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of up spins.
    pub fn index(&self) -> usize {
        self.index
    }

    pub fn doubled(&self) -> i64 {
        doubled_of(self.n, self.index)
    }

    /// `m = d / 2` in units of ħ.
    pub fn magnetization(&self) -> f64 {
        self.doubled() as f64 / 2.0
    }
}

#[inline]
pub(crate) fn doubled_of(n: usize, index: usize) -> i64 {
    2 * index as i64 - n as i64
}

#[inline]
pub(crate) fn magnetization_of(n: usize, index: usize) -> f64 {
    doubled_of(n, index) as f64 / 2.0
}

/// Mean and standard deviation of a magnetization distribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments {
    pub mean: f64,
    pub std: f64,
}

impl Moments {
    pub fn variance(&self) -> f64 {
        self.std * self.std
    }
}

/// Probability vector over the `N + 1` magnetization sectors.
#[derive(Debug, Clone, PartialEq)]
pub struct SectorDistribution {
    n: usize,
    probs: Vec<f64>,
}

impl SectorDistribution {
    /// Validated constructor: `probs.len() == n + 1`, entries finite and
    /// non-negative, sum within [`NORMALIZATION_TOLERANCE`] of one.
    pub fn new(n: usize, probs: Vec<f64>) -> Result<Self> {
        if probs.len() != n + 1 {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: probs.len().saturating_sub(1),
            });
        }
        if let Some((index, &value)) = probs
            .iter()
            .enumerate()
            .find(|(_, p)| !p.is_finite() || **p < 0.0)
        {
            return Err(Error::InvalidProbability { index, value });
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > NORMALIZATION_TOLERANCE {
            return Err(Error::NotNormalized { sum });
        }
        Ok(Self { n, probs })
    }

    /// Rescales non-negative weights to unit mass. Fails on zero total mass.
    pub fn from_weights(n: usize, mut weights: Vec<f64>) -> Result<Self> {
        if weights.len() != n + 1 {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: weights.len().saturating_sub(1),
            });
        }
        if let Some((index, &value)) = weights
            .iter()
            .enumerate()
            .find(|(_, p)| !p.is_finite() || **p < 0.0)
        {
            return Err(Error::InvalidProbability { index, value });
        }
        let sum: f64 = weights.iter().sum();
        if sum <= 0.0 || !sum.is_finite() {
            return Err(Error::NotNormalized { sum });
        }
        weights.iter_mut().for_each(|w| *w /= sum);
        Ok(Self { n, probs: weights })
    }

    /// Construct from `(doubled magnetization, probability)` pairs; sectors
    /// not listed get probability zero.
    pub fn from_doubled_pairs(n: usize, pairs: &[(i64, f64)]) -> Result<Self> {
        let mut probs = vec![0.0; n + 1];
        for &(d, p) in pairs {
            let idx = SectorIndex::from_doubled(n, d)?.index();
            probs[idx] += p;
        }
        Self::new(n, probs)
    }

    pub fn delta(n: usize, doubled: i64) -> Result<Self> {
        let idx = SectorIndex::from_doubled(n, doubled)?.index();
        let mut probs = vec![0.0; n + 1];
        probs[idx] = 1.0;
        Ok(Self { n, probs })
    }

    /// `Tr[Π_m] / 2^N`, the outcome law of the maximally mixed state.
    pub fn mixed(n: usize) -> Self {
        Self::binomial(n, 0.5).expect("1/2 is a valid probability")
    }

    /// `Bin(N, N/2 + m, a)`: every spin independently up with probability `a`.
    pub fn binomial(n: usize, a: f64) -> Result<Self> {
        let probs = binomial_pmf_vec(n, a)?;
        Self::from_weights(n, probs)
    }

    pub fn uniform(n: usize) -> Self {
        Self {
            n,
            probs: vec![1.0 / (n + 1) as f64; n + 1],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Probabilities indexed by number of up spins.
    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn into_probs(self) -> Vec<f64> {
        self.probs
    }

    pub fn prob(&self, doubled: i64) -> Result<f64> {
        Ok(self.probs[SectorIndex::from_doubled(self.n, doubled)?.index()])
    }

    /// `(doubled magnetization, probability)` in increasing magnetization.
    pub fn iter_doubled(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        self.probs
            .iter()
            .enumerate()
            .map(move |(i, &p)| (doubled_of(self.n, i), p))
    }

    pub fn moments(&self) -> Moments {
        let mean: f64 = self
            .probs
            .iter()
            .enumerate()
            .map(|(i, p)| magnetization_of(self.n, i) * p)
            .sum();
        let var: f64 = self
            .probs
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let dev = magnetization_of(self.n, i) - mean;
                dev * dev * p
            })
            .sum();
        Moments {
            mean,
            std: var.max(0.0).sqrt(),
        }
    }

    /// Half the L1 distance.
    pub fn total_variation(&self, other: &Self) -> Result<f64> {
        self.check_same_n(other.n)?;
        Ok(0.5
            * self
                .probs
                .iter()
                .zip(&other.probs)
                .map(|(a, b)| (a - b).abs())
                .sum::<f64>())
    }

    pub(crate) fn check_same_n(&self, n: usize) -> Result<()> {
        if self.n == n {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected: n,
                found: self.n,
            })
        }
    }
}

/// Dimension of a sector, `Tr[Π_m] = C(N, N/2 + m)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Multiplicity {
    /// Natural log of the count.
    pub log: f64,
    /// The exact count, available for `N <= 64`.
    pub exact: Option<u128>,
}

impl Multiplicity {
    pub fn value(&self) -> f64 {
        self.exact.map_or_else(|| self.log.exp(), |e| e as f64)
    }
}

const EXACT_COUNT_MAX_N: usize = 64;

pub fn sector_multiplicity(n: usize, doubled: i64) -> Result<Multiplicity> {
    let up = SectorIndex::from_doubled(n, doubled)?.index() as u64;
    Ok(Multiplicity {
        log: log_choose(n as u64, up)?,
        exact: if n <= EXACT_COUNT_MAX_N {
            exact_choose(n as u64, up)
        } else {
            None
        },
    })
}

/// Number of copies `A_j = C(N, N/2 + j) - C(N, N/2 + j + 1)` of the spin-`j`
/// irrep in `N` spin-½ particles; `j_doubled = 2j`.
pub fn degeneracy(n: usize, j_doubled: i64) -> Result<Multiplicity> {
    let n_i = n as i64;
    if j_doubled < 0 || j_doubled > n_i {
        return Err(Error::SectorOutOfRange {
            n,
            doubled: j_doubled,
        });
    }
    let upper = SectorIndex::from_doubled(n, j_doubled)?.index() as u64;
    let base = log_choose(n as u64, upper)?;
    // C(N, u+1) / C(N, u) = (N - u) / (u + 1)
    let ratio = (n as u64 - upper) as f64 / (upper + 1) as f64;
    let exact = if n <= EXACT_COUNT_MAX_N {
        let hi = exact_choose(n as u64, upper).expect("n <= 64 fits");
        let lo = exact_choose(n as u64, upper + 1).expect("n <= 64 fits");
        Some(hi - lo)
    } else {
        None
    };
    Ok(Multiplicity {
        log: base + (-ratio).ln_1p(),
        exact,
    })
}
