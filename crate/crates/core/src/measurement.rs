//! Sector-level measurement kernels.
//!
//! A kernel is the matrix `D(m, l)` giving the probability of recording
//! outcome `m` when the ensemble sits in sector `l`; the POVM elements are
//! `E_m = Σ_l D(m, l) Π_l`. Rows index outcomes, columns index sectors, both
//! in up-spin index order.

use nalgebra::{DMatrix, DVector};

use crate::sector::{doubled_of, SectorDistribution, SectorIndex};
use crate::{Error, Result};

/// Column-sum tolerance for trace preservation.
pub const TRACE_TOLERANCE: f64 = 1e-12;

/// One recorded outcome of a measurement sequence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasurementRecord {
    /// 1-based position in the sequence.
    pub step: usize,
    pub outcome_doubled: i64,
    /// Probability of this outcome under the pre-measurement predictive law.
    pub probability: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementKernel {
    n: usize,
    width: Option<f64>,
    matrix: DMatrix<f64>,
    normalizers: Vec<f64>,
}

impl MeasurementKernel {
    /// Projective kernel, `D(m, l) = δ_{ml}`.
    pub fn strong(n: usize) -> Self {
        Self {
            n,
            width: Some(0.0),
            matrix: DMatrix::identity(n + 1, n + 1),
            normalizers: vec![1.0; n + 1],
        }
    }

    /// Truncated Gaussian kernel `D(m, l) = A_l exp(-(m - l)² / 2w²)` with
    /// `A_l` normalizing each column over the finite outcome range.
    ///
    /// `w = 0` gives the projective kernel and `w = ∞` the uniform one.
    pub fn gaussian(n: usize, width: f64) -> Result<Self> {
        if width.is_nan() || width < 0.0 {
            return Err(Error::InvalidWidth(width));
        }
        if width == 0.0 {
            return Ok(Self::strong(n));
        }
        let dim = n + 1;
        if width.is_infinite() {
            let u = 1.0 / dim as f64;
            return Ok(Self {
                n,
                width: Some(width),
                matrix: DMatrix::from_element(dim, dim, u),
                normalizers: vec![u; dim],
            });
        }

        let two_w2 = 2.0 * width * width;
        let mut matrix = DMatrix::zeros(dim, dim);
        let mut normalizers = Vec::with_capacity(dim);
        for l in 0..dim {
            let mut sum = 0.0;
            for m in 0..dim {
                // index distance equals magnetization distance
                let delta = m as f64 - l as f64;
                let g = (-delta * delta / two_w2).exp();
                matrix[(m, l)] = g;
                sum += g;
            }
            let a = 1.0 / sum;
            for m in 0..dim {
                matrix[(m, l)] *= a;
            }
            normalizers.push(a);
        }
        Ok(Self {
            n,
            width: Some(width),
            matrix,
            normalizers,
        })
    }

    /// Wraps an arbitrary matrix without checking it; see [`Self::validate`].
    pub fn from_matrix(n: usize, matrix: DMatrix<f64>) -> Result<Self> {
        if matrix.nrows() != n + 1 || matrix.ncols() != n + 1 {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: matrix.nrows().saturating_sub(1),
            });
        }
        Ok(Self {
            n,
            width: None,
            normalizers: vec![f64::NAN; n + 1],
            matrix,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `None` for kernels built with [`Self::from_matrix`].
    pub fn width(&self) -> Option<f64> {
        self.width
    }

    pub fn is_strong(&self) -> bool {
        self.width == Some(0.0)
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn normalizers(&self) -> &[f64] {
        &self.normalizers
    }

    /// `D(m, l)` by doubled magnetizations.
    pub fn entry(&self, outcome_doubled: i64, sector_doubled: i64) -> Result<f64> {
        let m = SectorIndex::from_doubled(self.n, outcome_doubled)?.index();
        let l = SectorIndex::from_doubled(self.n, sector_doubled)?.index();
        Ok(self.matrix[(m, l)])
    }

    /// `P(m) = Σ_l D(m, l) q(l)`.
    pub fn outcome_distribution(&self, q: &SectorDistribution) -> Result<SectorDistribution> {
        q.check_same_n(self.n)?;
        let p = &self.matrix * DVector::from_column_slice(q.probs());
        SectorDistribution::from_weights(self.n, p.as_slice().to_vec())
    }

    /// `q'(l) = D(m, l) q(l) / P(m)`: the sector content of
    /// `√E_m ρ √E_m / P(m)` for an in-sector-uniform `ρ`.
    pub fn posterior(&self, q: &SectorDistribution, outcome_doubled: i64) -> Result<SectorDistribution> {
        q.check_same_n(self.n)?;
        let m = SectorIndex::from_doubled(self.n, outcome_doubled)?.index();
        let weights: Vec<f64> = q
            .probs()
            .iter()
            .enumerate()
            .map(|(l, p)| self.matrix[(m, l)] * p)
            .collect();
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(Error::ImpossibleOutcome {
                doubled: outcome_doubled,
            });
        }
        SectorDistribution::from_weights(self.n, weights)
    }

    /// Checks the POVM constraints: unit column sums (hard error), the
    /// diagonal maximum and monotone decay away from it (interior only;
    /// boundary violations become warnings), and records the asymmetry.
    pub fn validate(&self) -> Result<ValidationReport> {
        let dim = self.n + 1;
        let mut max_column_deviation: f64 = 0.0;
        for l in 0..dim {
            let column = self.matrix.column(l);
            if let Some(m) = column.iter().position(|v| !v.is_finite() || *v < 0.0) {
                return Err(Error::InvalidProbability {
                    index: m,
                    value: column[m],
                });
            }
            let sum: f64 = column.iter().sum();
            let deviation = (sum - 1.0).abs();
            if deviation > TRACE_TOLERANCE {
                return Err(Error::NotTracePreserving {
                    column: doubled_of(self.n, l),
                    sum,
                });
            }
            max_column_deviation = max_column_deviation.max(deviation);
        }

        let interior_bound = self.interior_bound_doubled();
        let is_interior = |i: usize| doubled_of(self.n, i).abs() <= interior_bound;
        let mut interior_violations = Vec::new();
        let mut boundary_warnings = Vec::new();
        let mut report = |v: KernelViolation, indices: &[usize]| {
            if indices.iter().all(|&i| is_interior(i)) {
                interior_violations.push(v);
            } else {
                boundary_warnings.push(v);
            }
        };
        let exceeds = |a: f64, b: f64| a > b * (1.0 + 1e-12);

        for m in 0..dim {
            let diag = self.matrix[(m, m)];
            for l in 0..dim {
                if l != m && exceeds(self.matrix[(m, l)], diag) {
                    report(
                        KernelViolation {
                            constraint: Constraint::MaximumOnDiagonal,
                            outcome_doubled: doubled_of(self.n, m),
                            sector_doubled: doubled_of(self.n, l),
                        },
                        &[m, l],
                    );
                }
            }
            // row decay: moving l away from m must not increase D(m, l)
            for l in 0..dim {
                let next = if l > m {
                    l.checked_add(1).filter(|&x| x < dim)
                } else if l < m {
                    l.checked_sub(1)
                } else {
                    None
                };
                if let Some(far) = next {
                    if exceeds(self.matrix[(m, far)], self.matrix[(m, l)]) {
                        report(
                            KernelViolation {
                                constraint: Constraint::DecayAwayFromDiagonal,
                                outcome_doubled: doubled_of(self.n, m),
                                sector_doubled: doubled_of(self.n, far),
                            },
                            &[m, l, far],
                        );
                    }
                }
            }
        }
        // column decay: for a fixed sector, outcomes far from it are less likely
        for l in 0..dim {
            for m in 0..dim {
                let far = if m > l {
                    Some(m + 1).filter(|&x| x < dim)
                } else if m < l {
                    m.checked_sub(1)
                } else {
                    None
                };
                if let Some(far) = far {
                    if exceeds(self.matrix[(far, l)], self.matrix[(m, l)]) {
                        report(
                            KernelViolation {
                                constraint: Constraint::DecayAwayFromDiagonal,
                                outcome_doubled: doubled_of(self.n, far),
                                sector_doubled: doubled_of(self.n, l),
                            },
                            &[m, l, far],
                        );
                    }
                }
            }
        }

        let max_asymmetry = (0..dim)
            .flat_map(|a| (0..dim).map(move |b| (a, b)))
            .map(|(a, b)| (self.matrix[(a, b)] - self.matrix[(b, a)]).abs())
            .fold(0.0, f64::max);

        Ok(ValidationReport {
            max_column_deviation,
            interior_bound_doubled: interior_bound,
            interior_violations,
            boundary_warnings,
            max_asymmetry,
        })
    }

    /// `N - 2⌈4w⌉` in doubled units; the whole range for projective or
    /// custom kernels, negative (empty) when the kernel is wider than the range.
    fn interior_bound_doubled(&self) -> i64 {
        let n = self.n as i64;
        match self.width {
            Some(w) if w.is_infinite() => -1,
            Some(w) => {
                let margin = (4.0 * w).ceil();
                if margin > n as f64 {
                    -1
                } else {
                    n - 2 * margin as i64
                }
            }
            None => n,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Constraint {
    /// `max_l D(m, l) = D(m, m)`.
    MaximumOnDiagonal,
    /// `D(m, l)` non-increasing in `|m - l|` along rows and columns.
    DecayAwayFromDiagonal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KernelViolation {
    pub constraint: Constraint,
    pub outcome_doubled: i64,
    pub sector_doubled: i64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub max_column_deviation: f64,
    /// Violations with `|m|, |l|` inside the bound are errors, others warnings.
    pub interior_bound_doubled: i64,
    pub interior_violations: Vec<KernelViolation>,
    pub boundary_warnings: Vec<KernelViolation>,
    /// `max |D(a, b) - D(b, a)|`; non-zero is allowed.
    pub max_asymmetry: f64,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.interior_violations.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strong_and_uniform_limits() {
        let k = MeasurementKernel::gaussian(4, 0.0).unwrap();
        assert_eq!(k.matrix(), &DMatrix::identity(5, 5));
        let k = MeasurementKernel::gaussian(4, f64::INFINITY).unwrap();
        assert!(k.matrix().iter().all(|&v| v == 0.2));
        assert!(matches!(
            MeasurementKernel::gaussian(4, -1.0),
            Err(Error::InvalidWidth(_))
        ));
        assert!(MeasurementKernel::gaussian(4, f64::NAN).is_err());
    }

    #[test]
    fn unit_width_column() {
        let k = MeasurementKernel::gaussian(2, 1.0).unwrap();
        let e = (-0.5f64).exp();
        let z = 1.0 + 2.0 * e;
        let col: Vec<f64> = k.matrix().column(1).iter().copied().collect();
        for (got, want) in col.iter().zip([e / z, 1.0 / z, e / z]) {
            assert!((got - want).abs() < 1e-15);
        }
        assert!((k.normalizers()[1] - 1.0 / z).abs() < 1e-15);
    }

    #[test]
    fn outcome_distribution_limits() {
        let q = SectorDistribution::binomial(6, 0.3).unwrap();
        let p = MeasurementKernel::strong(6).outcome_distribution(&q).unwrap();
        assert_eq!(p, q);
        let p = MeasurementKernel::gaussian(6, f64::INFINITY)
            .unwrap()
            .outcome_distribution(&q)
            .unwrap();
        assert!(p.probs().iter().all(|v| (v - 1.0 / 7.0).abs() < 1e-15));
        let wrong = SectorDistribution::mixed(5);
        assert!(matches!(
            MeasurementKernel::strong(6).outcome_distribution(&wrong),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn posterior_examples() {
        let q = SectorDistribution::mixed(10);
        let post = MeasurementKernel::strong(10).posterior(&q, 6).unwrap();
        assert_eq!(post, SectorDistribution::delta(10, 6).unwrap());

        let uniform = MeasurementKernel::gaussian(10, f64::INFINITY).unwrap();
        let post = uniform.posterior(&q, -4).unwrap();
        assert!(post.total_variation(&q).unwrap() < 1e-15);

        // N = 2, w = 1, outcome m = +1 (doubled 2)
        let k = MeasurementKernel::gaussian(2, 1.0).unwrap();
        let q = SectorDistribution::new(2, vec![0.25, 0.5, 0.25]).unwrap();
        let post = k.posterior(&q, 2).unwrap();
        let e = |x: f64| x.exp();
        let a = |l: f64| {
            1.0 / [-1.0, 0.0, 1.0]
                .iter()
                .map(|m: &f64| e(-(m - l) * (m - l) / 2.0))
                .sum::<f64>()
        };
        let w = [
            0.25 * e(-2.0) * a(-1.0),
            0.5 * e(-0.5) * a(0.0),
            0.25 * a(1.0),
        ];
        let z: f64 = w.iter().sum();
        for (got, want) in post.probs().iter().zip(w) {
            assert!((got - want / z).abs() < 1e-15);
        }
    }

    #[test]
    fn impossible_outcome_is_an_error() {
        let q = SectorDistribution::delta(4, 0).unwrap();
        assert!(matches!(
            MeasurementKernel::strong(4).posterior(&q, 2),
            Err(Error::ImpossibleOutcome { doubled: 2 })
        ));
    }

    #[test]
    fn validation() {
        let r = MeasurementKernel::strong(8).validate().unwrap();
        assert!(r.passed());
        assert!(r.boundary_warnings.is_empty());
        assert_eq!(r.max_asymmetry, 0.0);

        let mut m = DMatrix::identity(5, 5);
        m.row_mut(2).fill(0.0);
        let k = MeasurementKernel::from_matrix(4, m).unwrap();
        assert!(matches!(
            k.validate(),
            Err(Error::NotTracePreserving { column: 0, .. })
        ));
    }

    #[test]
    fn wide_kernel_boundary_warnings() {
        let k = MeasurementKernel::gaussian(100, 5.0).unwrap();
        let r = k.validate().unwrap();
        assert!(r.max_column_deviation <= TRACE_TOLERANCE);
        assert_eq!(r.interior_bound_doubled, 60);
        assert!(r.passed(), "{:?}", r.interior_violations);
        assert!(!r.boundary_warnings.is_empty());
        for w in &r.boundary_warnings {
            assert!(w.outcome_doubled.abs() > 60 || w.sector_doubled.abs() > 60);
        }
        assert!(r.max_asymmetry > 0.0);
    }
}
