use nalgebra::{DMatrix, Matrix2};

use super::{check_size, weight, DenseState, C64};
use crate::channels::ChannelSpec;
use crate::sector::{exact_choose, SectorDistribution};
use crate::Result;

/// Kraus operators of a single-spin map, basis order `(|↓⟩, |↑⟩)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SingleSpinKraus(pub Vec<Matrix2<C64>>);

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

impl SingleSpinKraus {
    /// `{diag(√(1-β), √(1-α)), √α |↓⟩⟨↑|, √β |↑⟩⟨↓|}`: incoherent flips.
    pub fn flips(alpha: f64, beta: f64) -> Self {
        let zero = c(0.0);
        Self(vec![
            Matrix2::new(c((1.0 - beta).sqrt()), zero, zero, c((1.0 - alpha).sqrt())),
            Matrix2::new(zero, c(alpha.sqrt()), zero, zero),
            Matrix2::new(zero, zero, c(beta.sqrt()), zero),
        ])
    }

    /// `{√(1-λ) U, (√λ/2) 𝟙, (√λ/2) X, (√λ/2) Y, (√λ/2) Z}` with
    /// `U = exp(-iθX) = cos θ 𝟙 - i sin θ X`.
    pub fn depolarized_rotation(lambda: f64, theta: f64) -> Self {
        let zero = c(0.0);
        let i = C64::new(0.0, 1.0);
        let (s, co) = theta.sin_cos();
        let u = Matrix2::new(c(co), -i * s, -i * s, c(co));
        let id = Matrix2::new(c(1.0), zero, zero, c(1.0));
        let x = Matrix2::new(zero, c(1.0), c(1.0), zero);
        let y = Matrix2::new(zero, -i, i, zero);
        let z = Matrix2::new(c(-1.0), zero, zero, c(1.0));
        let w = c(lambda.sqrt() / 2.0);
        Self(vec![u * c((1.0 - lambda).sqrt()), id * w, x * w, y * w, z * w])
    }

    /// `max |Σ K†K - 𝟙|`.
    pub fn completeness_error(&self) -> f64 {
        let sum: Matrix2<C64> = self.0.iter().map(|k| k.adjoint() * k).sum();
        (sum - Matrix2::identity()).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Superoperator on the vectorized 2×2 block, `(a, b)` at `2a + b`:
    /// `S[(a,b), (a',b')] = Σ_K K[a][a'] K*[b][b']`.
    fn superoperator(&self) -> [[C64; 4]; 4] {
        let mut s = [[c(0.0); 4]; 4];
        for k in &self.0 {
            for a in 0..2 {
                for b in 0..2 {
                    for ap in 0..2 {
                        for bp in 0..2 {
                            s[2 * a + b][2 * ap + bp] += k[(a, ap)] * k[(b, bp)].conj();
                        }
                    }
                }
            }
        }
        s
    }

    /// `Φ[ρ]` for a single-spin `ρ` given as a 2×2 matrix.
    pub fn apply_single(&self, rho: &Matrix2<C64>) -> Matrix2<C64> {
        self.0.iter().map(|k| k * rho * k.adjoint()).sum()
    }
}

/// Exact CPTP action on a dense state.
#[derive(Debug, Clone, PartialEq)]
pub enum DenseChannel {
    /// `ρ ↦ (1 - λ) ρ + λ Tr[ρ] ρ_target` with a diagonal target.
    Mixing { lambda: f64, target: Vec<f64> },
    /// The same single-spin map on every spin.
    Product(SingleSpinKraus),
}

impl DenseChannel {
    pub fn from_spec(spec: &ChannelSpec, n: usize) -> Result<Self> {
        check_size(n)?;
        spec.validate()?;
        let dim = 1usize << n;
        let sector_target = |q: &SectorDistribution| -> Vec<f64> {
            (0..dim)
                .map(|x| {
                    let w = weight(x);
                    q.probs()[w] / exact_choose(n as u64, w as u64).expect("small n") as f64
                })
                .collect()
        };
        Ok(match spec {
            ChannelSpec::CollectiveDepolarizing { lambda } => Self::Mixing {
                lambda: *lambda,
                target: vec![1.0 / dim as f64; dim],
            },
            ChannelSpec::EpsilonPolarizing { lambda, reference } => {
                reference.check_same_n(n)?;
                Self::Mixing {
                    lambda: *lambda,
                    target: sector_target(reference),
                }
            }
            ChannelSpec::ProductMap { alpha, beta } => {
                Self::Product(SingleSpinKraus::flips(*alpha, *beta))
            }
            ChannelSpec::DepolarizedRotation { lambda, theta } => {
                Self::Product(SingleSpinKraus::depolarized_rotation(*lambda, *theta))
            }
        })
    }

    /// Kraus completeness error for product channels; mixing channels are
    /// applied in closed form and report `None`.
    pub fn completeness_error(&self) -> Option<f64> {
        match self {
            Self::Product(k) => Some(k.completeness_error()),
            Self::Mixing { .. } => None,
        }
    }

    pub fn apply(&self, state: &DenseState) -> DenseState {
        let n = state.n;
        let rho = match self {
            Self::Mixing { lambda, target } => {
                let tr = state.rho.trace();
                let mut out = &state.rho * c(1.0 - lambda);
                for (x, t) in target.iter().enumerate() {
                    out[(x, x)] += tr * (lambda * t);
                }
                out
            }
            Self::Product(kraus) => {
                let s = kraus.superoperator();
                let mut rho = state.rho.clone();
                for q in 0..n {
                    rho = apply_on_spin(&rho, q, &s);
                }
                rho
            }
        };
        DenseState { n, rho }
    }
}

fn apply_on_spin(rho: &DMatrix<C64>, spin: usize, s: &[[C64; 4]; 4]) -> DMatrix<C64> {
    let dim = rho.nrows();
    let bit = 1usize << spin;
    let mut out = DMatrix::zeros(dim, dim);
    for c0 in (0..dim).filter(|x| x & bit == 0) {
        for r0 in (0..dim).filter(|x| x & bit == 0) {
            let block = [
                rho[(r0, c0)],
                rho[(r0, c0 | bit)],
                rho[(r0 | bit, c0)],
                rho[(r0 | bit, c0 | bit)],
            ];
            let mut mapped = [c(0.0); 4];
            for (i, row) in s.iter().enumerate() {
                mapped[i] = row.iter().zip(&block).map(|(a, b)| a * b).sum();
            }
            out[(r0, c0)] = mapped[0];
            out[(r0, c0 | bit)] = mapped[1];
            out[(r0 | bit, c0)] = mapped[2];
            out[(r0 | bit, c0 | bit)] = mapped[3];
        }
    }
    out
}
