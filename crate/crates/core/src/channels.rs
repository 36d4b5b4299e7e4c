//! Evolution maps between measurements, reduced to sector transition kernels.

use nalgebra::{DMatrix, DVector};

use crate::sector::{binomial_pmf_vec, magnetization_of, Moments, SectorDistribution, SectorIndex};
use crate::{Error, Result};

/// Column-sum tolerance for transition kernels.
pub const STOCHASTIC_TOLERANCE: f64 = 1e-12;

/// The CPTP map applied during one evolution interval.
#[derive(Debug, Clone, PartialEq)]
pub enum ChannelSpec {
    /// `ρ ↦ (1 - λ) ρ + λ 𝟙 / 2^N`.
    CollectiveDepolarizing { lambda: f64 },
    /// `ρ ↦ (1 - λ) ρ + λ ρ_ref` with `ρ_ref = Σ_k q_ref(k) Π_k / Tr Π_k`.
    EpsilonPolarizing {
        lambda: f64,
        reference: SectorDistribution,
    },
    /// `Φ^{⊗N}` with up→down flip probability `alpha` and down→up `beta`.
    ProductMap { alpha: f64, beta: f64 },
    /// `Φ^{⊗N}` with `Φ[ϱ] = (1 - λ) U ϱ U† + λ 𝟙/2`, `U = exp(-iθσ_x)`.
    DepolarizedRotation { lambda: f64, theta: f64 },
}

/// `λ = 1 - exp(-δt / T)`.
pub fn lambda_from_interval(dt: f64, relaxation_time: f64) -> Result<f64> {
    if !(dt >= 0.0 && relaxation_time > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "need dt >= 0 and T > 0, got dt = {dt}, T = {relaxation_time}"
        )));
    }
    Ok(-(-dt / relaxation_time).exp_m1())
}

/// Flip probabilities `α = β = (1 - λ) sin²θ + λ/2` of the depolarized rotation.
pub fn flip_probs_from_rotation(lambda: f64, theta: f64) -> (f64, f64) {
    let s = theta.sin();
    let p = (1.0 - lambda) * s * s + lambda / 2.0;
    (p, p)
}

fn check_probability(name: &'static str, value: f64) -> Result<()> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(Error::ProbabilityOutOfRange { name, value })
    }
}

impl ChannelSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            Self::CollectiveDepolarizing { lambda } => check_probability("lambda", *lambda),
            Self::EpsilonPolarizing { lambda, .. } => check_probability("lambda", *lambda),
            Self::ProductMap { alpha, beta } => {
                check_probability("alpha", *alpha)?;
                check_probability("beta", *beta)
            }
            Self::DepolarizedRotation { lambda, theta } => {
                check_probability("lambda", *lambda)?;
                if theta.is_finite() {
                    Ok(())
                } else {
                    Err(Error::InvalidConfig(format!("theta must be finite, got {theta}")))
                }
            }
        }
    }

    /// Mixing maps (collective depolarizing and ε-polarizing) have a
    /// closed-form covariance; product maps do not.
    pub fn mixing_parts(&self, n: usize) -> Option<(f64, SectorDistribution)> {
        match self {
            Self::CollectiveDepolarizing { lambda } => Some((*lambda, SectorDistribution::mixed(n))),
            Self::EpsilonPolarizing { lambda, reference } => Some((*lambda, reference.clone())),
            _ => None,
        }
    }

    /// `(α, β)` for product maps.
    pub fn flip_probs(&self) -> Option<(f64, f64)> {
        match *self {
            Self::ProductMap { alpha, beta } => Some((alpha, beta)),
            Self::DepolarizedRotation { lambda, theta } => Some(flip_probs_from_rotation(lambda, theta)),
            _ => None,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Self::CollectiveDepolarizing { .. } => "collective_depolarizing",
            Self::EpsilonPolarizing { .. } => "epsilon_polarizing",
            Self::ProductMap { .. } => "product",
            Self::DepolarizedRotation { .. } => "depolarized_rotation",
        }
    }

    pub fn transition_kernel(&self, n: usize) -> Result<TransitionKernel> {
        self.validate()?;
        if let Some((lambda, reference)) = self.mixing_parts(n) {
            return TransitionKernel::mixing(n, lambda, &reference);
        }
        let (alpha, beta) = self.flip_probs().expect("non-mixing maps are product maps");
        TransitionKernel::product(n, alpha, beta)
    }
}

/// Column-stochastic matrix `T[m'][m]`: probability of landing in sector
/// `m'` after one interval when starting from `Π_m / Tr Π_m`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionKernel {
    n: usize,
    matrix: DMatrix<f64>,
}

impl TransitionKernel {
    pub fn identity(n: usize) -> Self {
        Self {
            n,
            matrix: DMatrix::identity(n + 1, n + 1),
        }
    }

    /// Wraps an arbitrary matrix after checking it is column stochastic.
    pub fn from_matrix(n: usize, matrix: DMatrix<f64>) -> Result<Self> {
        if matrix.nrows() != n + 1 || matrix.ncols() != n + 1 {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: matrix.nrows().saturating_sub(1),
            });
        }
        let k = Self { n, matrix };
        k.check_stochastic()?;
        Ok(k)
    }

    /// Double-binomial kernel of `Φ^{⊗N}`: of the `N/2 + m` up spins `k`
    /// flip down (`Bin(·, α)`), of the `N/2 - m` down spins `l` flip up
    /// (`Bin(·, β)`), landing in `m' = m + l - k`.
    pub fn product(n: usize, alpha: f64, beta: f64) -> Result<Self> {
        check_probability("alpha", alpha)?;
        check_probability("beta", beta)?;
        let dim = n + 1;
        let mut matrix = DMatrix::zeros(dim, dim);
        for up in 0..dim {
            let down_flips = binomial_pmf_vec(up, alpha)?;
            let up_flips = binomial_pmf_vec(n - up, beta)?;
            let mut column = vec![0.0; dim];
            for (k, pk) in down_flips.iter().enumerate().filter(|(_, p)| **p > 0.0) {
                for (l, pl) in up_flips.iter().enumerate() {
                    column[up - k + l] += pk * pl;
                }
            }
            let sum: f64 = column.iter().sum();
            for (target, v) in column.into_iter().enumerate() {
                matrix[(target, up)] = v / sum;
            }
        }
        Ok(Self { n, matrix })
    }

    /// `T = (1 - λ) 𝟙 + λ q_ref 1ᵀ`.
    pub fn mixing(n: usize, lambda: f64, reference: &SectorDistribution) -> Result<Self> {
        check_probability("lambda", lambda)?;
        reference.check_same_n(n)?;
        let dim = n + 1;
        let q = reference.probs();
        let matrix = DMatrix::from_fn(dim, dim, |r, c| {
            let stay = if r == c { 1.0 - lambda } else { 0.0 };
            stay + lambda * q[r]
        });
        Ok(Self { n, matrix })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// Transition probability by doubled magnetizations.
    pub fn entry(&self, to_doubled: i64, from_doubled: i64) -> Result<f64> {
        let to = SectorIndex::from_doubled(self.n, to_doubled)?.index();
        let from = SectorIndex::from_doubled(self.n, from_doubled)?.index();
        Ok(self.matrix[(to, from)])
    }

    pub fn apply(&self, q: &SectorDistribution) -> Result<SectorDistribution> {
        q.check_same_n(self.n)?;
        let out = &self.matrix * DVector::from_column_slice(q.probs());
        SectorDistribution::from_weights(self.n, out.as_slice().to_vec())
    }

    /// `self ∘ first`: apply `first`, then `self`.
    pub fn after(&self, first: &Self) -> Result<Self> {
        if self.n != first.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: first.n,
            });
        }
        Ok(Self {
            n: self.n,
            matrix: &self.matrix * &first.matrix,
        })
    }

    /// Mean and standard deviation of the column for doubled source `from`.
    pub fn column_moments(&self, from_doubled: i64) -> Result<Moments> {
        let from = SectorIndex::from_doubled(self.n, from_doubled)?.index();
        let column: Vec<f64> = self.matrix.column(from).iter().copied().collect();
        Ok(SectorDistribution::from_weights(self.n, column)?.moments())
    }

    pub fn check_stochastic(&self) -> Result<()> {
        for column in self.matrix.column_iter() {
            if let Some(r) = column.iter().position(|v| !v.is_finite() || *v < 0.0) {
                return Err(Error::InvalidProbability {
                    index: r,
                    value: column[r],
                });
            }
            let sum: f64 = column.iter().sum();
            if (sum - 1.0).abs() > STOCHASTIC_TOLERANCE {
                return Err(Error::NotNormalized { sum });
            }
        }
        Ok(())
    }
}

/// Mean and standard deviation of `m₂` given `m₁` under a product map.
///
/// The mean is `m₁(1 - α - β) + (N/2)(β - α)`; the variance is the sum of
/// the two independent binomial variances,
/// `(N/2 + m₁) α(1 - α) + (N/2 - m₁) β(1 - β)`.
pub fn conditional_moments(n: usize, alpha: f64, beta: f64, m1_doubled: i64) -> Result<Moments> {
    check_probability("alpha", alpha)?;
    check_probability("beta", beta)?;
    let index = SectorIndex::from_doubled(n, m1_doubled)?.index();
    let m1 = magnetization_of(n, index);
    let half_n = n as f64 / 2.0;
    let mean = m1 * (1.0 - (alpha + beta)) + half_n * (beta - alpha);
    let var_up = alpha * (1.0 - alpha);
    let var_down = beta * (1.0 - beta);
    let variance = half_n * (var_up + var_down) + m1 * (var_up - var_down);
    Ok(Moments {
        mean,
        std: variance.max(0.0).sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rotation_flip_probs() {
        assert_eq!(flip_probs_from_rotation(0.0, 0.0), (0.0, 0.0));
        assert_eq!(flip_probs_from_rotation(1.0, 0.4), (0.5, 0.5));
        let (a, b) = flip_probs_from_rotation(0.1, std::f64::consts::PI / 32.0);
        assert_eq!(a, b);
        assert!((a - 0.058_647_6).abs() < 1e-6, "{a}");
    }

    #[test]
    fn product_kernel_small_cases() {
        let t = TransitionKernel::product(5, 0.0, 0.0).unwrap();
        assert_eq!(t.matrix(), &DMatrix::identity(6, 6));

        let t = TransitionKernel::product(1, 0.3, 0.2).unwrap();
        assert!((t.entry(-1, 1).unwrap() - 0.3).abs() < 1e-15);
        assert!((t.entry(1, -1).unwrap() - 0.2).abs() < 1e-15);

        let p = 0.25;
        let t = TransitionKernel::product(2, p, p).unwrap();
        assert!((t.entry(2, 2).unwrap() - (1.0 - p) * (1.0 - p)).abs() < 1e-15);
        assert!((t.entry(0, 2).unwrap() - 2.0 * p * (1.0 - p)).abs() < 1e-15);
        assert!((t.entry(-2, 2).unwrap() - p * p).abs() < 1e-15);

        let out = t.apply(&SectorDistribution::delta(2, 2).unwrap()).unwrap();
        let want = [1.0 / 16.0, 6.0 / 16.0, 9.0 / 16.0];
        for (g, w) in out.probs().iter().zip(want) {
            assert!((g - w).abs() < 1e-15);
        }
    }

    #[test]
    fn conditional_moments_examples() {
        let m = conditional_moments(2, 0.25, 0.25, 2).unwrap();
        assert!((m.mean - 0.5).abs() < 1e-15);
        assert!((m.variance() - 3.0 / 8.0).abs() < 1e-15);
        let m = conditional_moments(10, 0.0, 0.0, -4).unwrap();
        assert_eq!(m, Moments { mean: -2.0, std: 0.0 });
        let m = conditional_moments(10, 0.3, 0.3, 0).unwrap();
        assert_eq!(m.mean, 0.0);
    }

    #[test]
    fn mixing_kernel_examples() {
        let q = SectorDistribution::mixed(20);
        assert_eq!(
            TransitionKernel::mixing(20, 0.0, &q).unwrap(),
            TransitionKernel::identity(20)
        );
        let t = TransitionKernel::mixing(20, 1.0, &q).unwrap();
        for c in 0..21 {
            for r in 0..21 {
                assert_eq!(t.matrix()[(r, c)], q.probs()[r]);
            }
        }
        let t = TransitionKernel::mixing(20, 0.3, &q).unwrap();
        for d in (-20..=20).step_by(2) {
            let want = 0.7 + 0.3 * q.prob(d).unwrap();
            assert!((t.entry(d, d).unwrap() - want).abs() < 1e-15);
        }
        assert!(TransitionKernel::mixing(19, 0.3, &q).is_err());
        assert!(TransitionKernel::mixing(20, 1.3, &q).is_err());
    }

    #[test]
    fn apply_limits() {
        let q = SectorDistribution::binomial(8, 0.8).unwrap();
        let same = TransitionKernel::identity(8).apply(&q).unwrap();
        assert!(same.total_variation(&q).unwrap() < 1e-15);
        let r = SectorDistribution::mixed(8);
        let out = TransitionKernel::mixing(8, 1.0, &r).unwrap().apply(&q).unwrap();
        assert!(out.total_variation(&r).unwrap() < 1e-15);
        assert!(TransitionKernel::identity(7).apply(&q).is_err());
    }

    #[test]
    fn interval_parameterization() {
        let l = lambda_from_interval(1.0, 2.0).unwrap();
        assert!((l - (1.0 - (-0.5f64).exp())).abs() < 1e-15);
        assert!(lambda_from_interval(1.0, 0.0).is_err());
    }

    #[test]
    fn pure_rotation_still_mixes() {
        let (a, b) = flip_probs_from_rotation(0.0, 0.2);
        let t = TransitionKernel::product(10, a, b).unwrap();
        assert!(t.entry(0, 0).unwrap() < 1.0);
        assert!(t.entry(2, 0).unwrap() > 0.0);
    }
}
