//! Brute-force `2^N × 2^N` density-matrix simulator.
//!
//! Computational basis state `x` has spin `q` up when bit `q` of `x` is set,
//! so the Hamming weight of `x` is its sector index. Operators diagonal in
//! this basis (projectors, POVM elements and their roots) are stored as real
//! vectors; states are full complex matrices, so coherences created by the
//! channels are kept and can feed back into later statistics.

mod channel;
mod crosscheck;

pub use channel::{DenseChannel, SingleSpinKraus};
pub use crosscheck::{crosscheck, crosscheck_model, CrosscheckOptions, CrosscheckReport};

use nalgebra::{Complex, DMatrix};

use crate::chain::InitialState;
use crate::measurement::MeasurementKernel;
use crate::sector::{exact_choose, SectorDistribution, SectorIndex};
use crate::{Error, Result};

pub type C64 = Complex<f64>;

/// Largest ensemble the dense oracle accepts.
pub const MAX_ORACLE_N: usize = 10;

pub(crate) fn check_size(n: usize) -> Result<()> {
    if n > MAX_ORACLE_N {
        Err(Error::OracleTooLarge {
            n,
            max: MAX_ORACLE_N,
        })
    } else {
        Ok(())
    }
}

#[inline]
pub(crate) fn weight(x: usize) -> usize {
    x.count_ones() as usize
}

/// Operator diagonal in the computational basis.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalOperator(pub Vec<f64>);

impl DiagonalOperator {
    pub fn rank(&self) -> usize {
        self.0.iter().filter(|v| **v != 0.0).count()
    }

    pub fn trace(&self) -> f64 {
        self.0.iter().sum()
    }

    /// `Tr[self · ρ]`.
    pub fn expectation(&self, state: &DenseState) -> f64 {
        self.0
            .iter()
            .enumerate()
            .map(|(x, e)| e * state.rho[(x, x)].re)
            .sum()
    }
}

/// Projectors `Π_m` onto fixed Hamming weight, indexed by up-spin count.
pub fn dense_projectors(n: usize) -> Result<Vec<DiagonalOperator>> {
    check_size(n)?;
    let dim = 1usize << n;
    Ok((0..=n)
        .map(|up| DiagonalOperator((0..dim).map(|x| f64::from(u8::from(weight(x) == up))).collect()))
        .collect())
}

/// Density matrix of `N ≤ 10` spins.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseState {
    n: usize,
    rho: DMatrix<C64>,
}

/// Deviations from a valid density matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateDiagnostics {
    pub hermiticity: f64,
    pub trace_error: f64,
    pub min_eigenvalue: f64,
}

impl StateDiagnostics {
    pub fn is_valid(&self) -> bool {
        self.hermiticity < 1e-12 && self.trace_error < 1e-12 && self.min_eigenvalue > -1e-10
    }
}

impl DenseState {
    pub fn from_matrix(n: usize, rho: DMatrix<C64>) -> Result<Self> {
        check_size(n)?;
        let dim = 1usize << n;
        if rho.nrows() != dim || rho.ncols() != dim {
            return Err(Error::InvalidConfig(format!(
                "expected a {dim}x{dim} density matrix, got {}x{}",
                rho.nrows(),
                rho.ncols()
            )));
        }
        Ok(Self { n, rho })
    }

    pub fn mixed(n: usize) -> Result<Self> {
        check_size(n)?;
        let dim = 1usize << n;
        Ok(Self {
            n,
            rho: DMatrix::identity(dim, dim) / C64::new(dim as f64, 0.0),
        })
    }

    /// `ϱ^{⊗N}` with `ϱ = a|↑⟩⟨↑| + (1-a)|↓⟩⟨↓| + b|↑⟩⟨↓| + b*|↓⟩⟨↑|`.
    pub fn product(n: usize, a: f64, b: C64) -> Result<Self> {
        check_size(n)?;
        InitialState::Product {
            up_probability: a,
            coherence: b,
        }
        .validate(n)?;
        // single[row][col], index 1 = up
        let single = [
            [C64::new(1.0 - a, 0.0), b.conj()],
            [b, C64::new(a, 0.0)],
        ];
        let dim = 1usize << n;
        let rho = DMatrix::from_fn(dim, dim, |r, c| {
            (0..n).fold(C64::new(1.0, 0.0), |acc, q| {
                acc * single[(r >> q) & 1][(c >> q) & 1]
            })
        });
        Ok(Self { n, rho })
    }

    /// `Σ_k q(k) Π_k / Tr Π_k`.
    pub fn from_sector(q: &SectorDistribution) -> Result<Self> {
        let n = q.n();
        check_size(n)?;
        let dim = 1usize << n;
        let mut rho = DMatrix::zeros(dim, dim);
        for x in 0..dim {
            let w = weight(x);
            let size = exact_choose(n as u64, w as u64).expect("small n") as f64;
            rho[(x, x)] = C64::new(q.probs()[w] / size, 0.0);
        }
        Ok(Self { n, rho })
    }

    pub fn from_initial(initial: &InitialState, n: usize) -> Result<Self> {
        match initial {
            InitialState::Mixed => Self::mixed(n),
            InitialState::Product {
                up_probability,
                coherence,
            } => Self::product(n, *up_probability, *coherence),
            InitialState::SectorDensity(q) => {
                q.check_same_n(n)?;
                Self::from_sector(q)
            }
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.rho
    }

    pub fn trace(&self) -> C64 {
        self.rho.trace()
    }

    /// Population of each sector, `Tr[Π_m ρ]`.
    pub fn sector_populations(&self) -> Vec<f64> {
        let mut pops = vec![0.0; self.n + 1];
        for x in 0..self.rho.nrows() {
            pops[weight(x)] += self.rho[(x, x)].re;
        }
        pops
    }

    /// Largest entrywise deviation from `Σ_k q(k) Π_k / Tr Π_k`.
    pub fn deviation_from_sector_uniform(&self, q: &SectorDistribution) -> f64 {
        let target = Self::from_sector(q).expect("same size as self");
        (&self.rho - &target.rho)
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    /// Hermiticity, trace and positivity diagnostics (full eigendecomposition).
    pub fn diagnostics(&self) -> StateDiagnostics {
        let hermiticity = (&self.rho - self.rho.adjoint())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        let trace_error = (self.trace() - C64::new(1.0, 0.0)).norm();
        let hermitian_part = (&self.rho + self.rho.adjoint()) * C64::new(0.5, 0.0);
        let min_eigenvalue = hermitian_part
            .symmetric_eigenvalues()
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        StateDiagnostics {
            hermiticity,
            trace_error,
            min_eigenvalue,
        }
    }
}

/// POVM `E_m = Σ_l D(m, l) Π_l` and its square roots, all diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct DensePovm {
    n: usize,
    pub elements: Vec<DiagonalOperator>,
    pub roots: Vec<DiagonalOperator>,
}

impl DensePovm {
    pub fn from_kernel(kernel: &MeasurementKernel) -> Result<Self> {
        let n = kernel.n();
        check_size(n)?;
        let dim = 1usize << n;
        let d = kernel.matrix();
        let elements: Vec<DiagonalOperator> = (0..=n)
            .map(|m| DiagonalOperator((0..dim).map(|x| d[(m, weight(x))]).collect()))
            .collect();
        let roots = elements
            .iter()
            .map(|e| DiagonalOperator(e.0.iter().map(|v| v.sqrt()).collect()))
            .collect();
        Ok(Self { n, elements, roots })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `max_x |Σ_m E_m(x) - 1|`.
    pub fn completeness_error(&self) -> f64 {
        let dim = 1usize << self.n;
        (0..dim)
            .map(|x| (self.elements.iter().map(|e| e.0[x]).sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max)
    }
}

/// Outcome law and normalized post-measurement states of a dense measurement.
#[derive(Debug, Clone)]
pub struct DenseMeasurement {
    /// `P(m) = Tr[E_m ρ]` indexed by up-spin count.
    pub probabilities: Vec<f64>,
    /// `√E_m ρ √E_m / P(m)`; `None` for outcomes with `P(m) = 0`.
    pub posteriors: Vec<Option<DenseState>>,
}

/// Outcome probabilities only.
pub fn dense_outcome_probabilities(state: &DenseState, povm: &DensePovm) -> Result<Vec<f64>> {
    if state.n != povm.n {
        return Err(Error::DimensionMismatch {
            expected: povm.n,
            found: state.n,
        });
    }
    Ok(povm.elements.iter().map(|e| e.expectation(state)).collect())
}

/// `√E_m ρ √E_m / P(m)`.
pub fn dense_posterior(state: &DenseState, povm: &DensePovm, outcome: usize) -> Result<DenseState> {
    let root = &povm.roots[outcome].0;
    let p = povm.elements[outcome].expectation(state);
    if p <= 0.0 {
        return Err(Error::ImpossibleOutcome {
            doubled: 2 * outcome as i64 - state.n as i64,
        });
    }
    let dim = state.rho.nrows();
    let rho = DMatrix::from_fn(dim, dim, |r, c| state.rho[(r, c)] * (root[r] * root[c] / p));
    Ok(DenseState { n: state.n, rho })
}

pub fn dense_measure(state: &DenseState, povm: &DensePovm) -> Result<DenseMeasurement> {
    let probabilities = dense_outcome_probabilities(state, povm)?;
    let posteriors = probabilities
        .iter()
        .enumerate()
        .map(|(m, &p)| {
            if p > 0.0 {
                dense_posterior(state, povm, m).map(Some)
            } else {
                Ok(None)
            }
        })
        .collect::<Result<_>>()?;
    Ok(DenseMeasurement {
        probabilities,
        posteriors,
    })
}

/// Doubled magnetization of the outcome index.
pub fn outcome_doubled(n: usize, outcome: usize) -> i64 {
    SectorIndex::from_index(n, outcome)
        .expect("outcome index in range")
        .doubled()
}
