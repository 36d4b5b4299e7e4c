use nalgebra::DMatrix;

use crate::sector::{magnetization_of, SectorDistribution, SectorIndex};
use crate::Result;

/// `P(m_later, m_earlier)`; rows index the later outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct JointDistribution {
    n: usize,
    later: usize,
    earlier: usize,
    matrix: DMatrix<f64>,
}

impl JointDistribution {
    pub(crate) fn new(n: usize, later: usize, earlier: usize, matrix: DMatrix<f64>) -> Self {
        Self {
            n,
            later,
            earlier,
            matrix,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn lag(&self) -> usize {
        self.later - self.earlier
    }

    pub fn steps(&self) -> (usize, usize) {
        (self.later, self.earlier)
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn entry(&self, later_doubled: i64, earlier_doubled: i64) -> Result<f64> {
        let a = SectorIndex::from_doubled(self.n, later_doubled)?.index();
        let b = SectorIndex::from_doubled(self.n, earlier_doubled)?.index();
        Ok(self.matrix[(a, b)])
    }

    pub fn total(&self) -> f64 {
        self.matrix.sum()
    }

    pub fn later_marginal(&self) -> Result<SectorDistribution> {
        SectorDistribution::from_weights(
            self.n,
            self.matrix.row_iter().map(|r| r.sum()).collect(),
        )
    }

    pub fn earlier_marginal(&self) -> Result<SectorDistribution> {
        SectorDistribution::from_weights(
            self.n,
            self.matrix.column_iter().map(|c| c.sum()).collect(),
        )
    }

    /// `P(m_later | m_earlier)`.
    pub fn conditional_on_earlier(&self, earlier_doubled: i64) -> Result<SectorDistribution> {
        let b = SectorIndex::from_doubled(self.n, earlier_doubled)?.index();
        SectorDistribution::from_weights(self.n, self.matrix.column(b).iter().copied().collect())
    }

    fn centered_moments(&self) -> (f64, f64, f64) {
        let dim = self.n + 1;
        let mut mean_a = 0.0;
        let mut mean_b = 0.0;
        for a in 0..dim {
            for b in 0..dim {
                let p = self.matrix[(a, b)];
                mean_a += magnetization_of(self.n, a) * p;
                mean_b += magnetization_of(self.n, b) * p;
            }
        }
        let (mut cov, mut var_a, mut var_b) = (0.0, 0.0, 0.0);
        for a in 0..dim {
            let da = magnetization_of(self.n, a) - mean_a;
            for b in 0..dim {
                let db = magnetization_of(self.n, b) - mean_b;
                let p = self.matrix[(a, b)];
                cov += da * db * p;
                var_a += da * da * p;
                var_b += db * db * p;
            }
        }
        (cov, var_a, var_b)
    }

    /// `E[M_i M_j] - E[M_i] E[M_j]` in units of ħ².
    pub fn covariance(&self) -> f64 {
        self.centered_moments().0
    }

    /// Pearson correlation of the two outcomes; `NaN` if either is constant.
    pub fn correlation(&self) -> f64 {
        let (cov, va, vb) = self.centered_moments();
        cov / (va * vb).sqrt()
    }
}
