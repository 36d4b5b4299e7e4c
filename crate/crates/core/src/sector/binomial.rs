//! Log-domain binomial probabilities and exact sector counts.
//!
//! The pmf uses Loader's saddle-point decomposition: the Stirling remainder
//! and the deviance term `bd0` are evaluated separately, which keeps the
//! relative error near machine precision for `n` in the tens of thousands
//! where a plain `lgamma` difference loses several digits to cancellation.

use crate::{Error, Result};

const LN_2PI: f64 = 1.837_877_066_409_345_5;

/// Stirling remainder `ln n! - [(n + ½) ln n - n + ½ ln 2π]` for `n = 1..=15`.
const STIRLING_ERROR: [f64; 16] = [
    0.0,
    0.081_061_466_795_327_258,
    0.041_340_695_955_409_294,
    0.027_677_925_684_998_339,
    0.020_790_672_103_765_093,
    0.016_644_691_189_821_192,
    0.013_876_128_823_070_748,
    0.011_896_709_945_891_770,
    0.010_411_265_261_972_096,
    0.009_255_462_182_712_733,
    0.008_330_563_433_362_871,
    0.007_573_675_487_951_841,
    0.006_942_840_107_209_530,
    0.006_408_994_188_004_207,
    0.005_951_370_112_758_848,
    0.005_554_733_551_962_801,
];

fn stirling_error(n: f64) -> f64 {
    const S0: f64 = 1.0 / 12.0;
    const S1: f64 = 1.0 / 360.0;
    const S2: f64 = 1.0 / 1260.0;
    const S3: f64 = 1.0 / 1680.0;
    const S4: f64 = 1.0 / 1188.0;

    if n <= 15.0 {
        return STIRLING_ERROR[n as usize];
    }
    let nn = n * n;
    if n > 500.0 {
        (S0 - S1 / nn) / n
    } else if n > 80.0 {
        (S0 - (S1 - S2 / nn) / nn) / n
    } else if n > 35.0 {
        (S0 - (S1 - (S2 - S3 / nn) / nn) / nn) / n
    } else {
        (S0 - (S1 - (S2 - (S3 - S4 / nn) / nn) / nn) / nn) / n
    }
}

/// Deviance `x ln(x / np) + np - x`, series-expanded when `x ≈ np`.
fn deviance(x: f64, np: f64) -> f64 {
    if (x - np).abs() < 0.1 * (x + np) {
        let mut v = (x - np) / (x + np);
        let mut s = (x - np) * v;
        let mut ej = 2.0 * x * v;
        v *= v;
        for j in 1..1000 {
            ej *= v;
            let s1 = s + ej / f64::from(2 * j + 1);
            if s1 == s {
                return s1;
            }
            s = s1;
        }
        s
    } else {
        x * (x / np).ln() + np - x
    }
}

fn check_probability(name: &'static str, p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::ProbabilityOutOfRange { name, value: p })
    }
}

/// `ln[C(n, k) p^k (1-p)^(n-k)]`.
///
/// Returns `0` or `-inf` exactly at `p ∈ {0, 1}`.
pub fn log_binomial_pmf(n: u64, k: u64, p: f64) -> Result<f64> {
    check_probability("p", p)?;
    if k > n {
        return Err(Error::CountOutOfRange { k, n });
    }
    let q = 1.0 - p;
    let (nf, x) = (n as f64, k as f64);

    if p == 0.0 {
        return Ok(if k == 0 { 0.0 } else { f64::NEG_INFINITY });
    }
    if q == 0.0 {
        return Ok(if k == n { 0.0 } else { f64::NEG_INFINITY });
    }
    if k == 0 {
        if n == 0 {
            return Ok(0.0);
        }
        return Ok(if p < 0.1 {
            -deviance(nf, nf * q) - nf * p
        } else {
            nf * q.ln()
        });
    }
    if k == n {
        return Ok(if q < 0.1 {
            -deviance(nf, nf * p) - nf * q
        } else {
            nf * p.ln()
        });
    }
    let lc = stirling_error(nf)
        - stirling_error(x)
        - stirling_error(nf - x)
        - deviance(x, nf * p)
        - deviance(nf - x, nf * q);
    let lf = LN_2PI + x.ln() + (-x / nf).ln_1p();
    Ok(lc - 0.5 * lf)
}

/// Linear-domain pmf vector `Bin(n, k, p)` for `k = 0..=n`.
pub(crate) fn binomial_pmf_vec(n: usize, p: f64) -> Result<Vec<f64>> {
    (0..=n as u64)
        .map(|k| log_binomial_pmf(n as u64, k, p).map(f64::exp))
        .collect()
}

/// `ln C(n, k)`.
pub fn log_choose(n: u64, k: u64) -> Result<f64> {
    Ok(log_binomial_pmf(n, k, 0.5)? + n as f64 * std::f64::consts::LN_2)
}

/// Exact `C(n, k)` when it fits in `u128` arithmetic without overflow of
/// the intermediate products (`n <= 64` always does).
pub fn exact_choose(n: u64, k: u64) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.checked_mul(u128::from(n - i))? / u128::from(i + 1);
    }
    Some(acc)
}
