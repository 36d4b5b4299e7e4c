//! Combinatorics checked against exact big-integer arithmetic.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};
use spinnoise::sector::{degeneracy, log_binomial_pmf, log_choose, sector_multiplicity};
use spinnoise::SectorDistribution;

fn big_choose(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::from(0u32);
    }
    let mut acc = BigUint::one();
    for i in 0..k {
        acc = acc * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    acc
}

/// `C(n, k) / 2^n` as an `f64`; both parts are rounded once, so the
/// quotient is good to a couple of ulps.
fn big_half_pmf(n: u64, k: u64) -> f64 {
    let num = big_choose(n, k).to_f64().unwrap();
    let den = (BigUint::one() << n).to_f64().unwrap();
    num / den
}

#[test]
fn central_binomial_at_one_hundred() {
    let exact = big_half_pmf(100, 50);
    assert!((exact - 0.079_589_237_387_178_8).abs() < 1e-15);
    let got = log_binomial_pmf(100, 50, 0.5).unwrap();
    assert!((got - exact.ln()).abs() < 1e-13, "{got} vs {}", exact.ln());
}

#[test]
fn half_pmf_matches_big_integers() {
    for n in [1u64, 2, 7, 20, 33, 64, 100, 151] {
        for k in 0..=n {
            let exact = big_half_pmf(n, k);
            if exact == 0.0 {
                continue;
            }
            let got = log_binomial_pmf(n, k, 0.5).unwrap().exp();
            assert!(
                ((got - exact) / exact).abs() < 1e-13,
                "n={n} k={k}: {got} vs {exact}"
            );
        }
    }
}

#[test]
fn multiplicities_match_big_integers() {
    let m = sector_multiplicity(100, 0).unwrap();
    let exact = big_choose(100, 50).to_f64().unwrap();
    assert!(((m.log.exp() - exact) / exact).abs() < 1e-13);
    for n in 0..=64usize {
        for up in 0..=n {
            let d = 2 * up as i64 - n as i64;
            let got = sector_multiplicity(n, d).unwrap().exact.unwrap();
            assert_eq!(BigUint::from(got), big_choose(n as u64, up as u64));
        }
    }
}

#[test]
fn multiplicities_sum_to_hilbert_dimension() {
    for n in 0..=20usize {
        let total: u128 = (0..=n)
            .map(|up| {
                sector_multiplicity(n, 2 * up as i64 - n as i64)
                    .unwrap()
                    .exact
                    .unwrap()
            })
            .sum();
        assert_eq!(total, 1u128 << n);
    }
}

#[test]
fn degeneracies_telescope_to_multiplicities() {
    for n in 1..=20usize {
        let n_i = n as i64;
        for m in (-n_i..=n_i).step_by(2) {
            let total: u128 = (m.abs()..=n_i)
                .step_by(2)
                .map(|j| degeneracy(n, j).unwrap().exact.unwrap())
                .sum();
            assert_eq!(Some(total), sector_multiplicity(n, m).unwrap().exact, "n={n} m={m}");
        }
    }
}

#[test]
fn degeneracy_log_matches_exact() {
    for n in [10usize, 40, 64] {
        for j in ((n % 2) as i64..=n as i64).step_by(2) {
            let a = degeneracy(n, j).unwrap();
            let exact = a.exact.unwrap() as f64;
            assert!(((a.log.exp() - exact) / exact).abs() < 1e-12);
        }
    }
}

#[test]
fn pmf_sums_to_one_for_large_n() {
    for &n in &[1u64, 10, 101, 1000, 4321, 10_000] {
        for &p in &[0.5, 0.1, 0.013, 0.77, 0.999] {
            let total: f64 = (0..=n).map(|k| log_binomial_pmf(n, k, p).unwrap().exp()).sum();
            assert!((total - 1.0).abs() < 1e-12, "n={n} p={p}: {total}");
        }
    }
}

#[test]
fn log_choose_is_consistent() {
    assert!((log_choose(2, 1).unwrap() - 2f64.ln()).abs() < 1e-15);
    let exact = big_choose(300, 120).to_f64().unwrap().ln();
    assert!((log_choose(300, 120).unwrap() - exact).abs() < 1e-11);
}

#[test]
fn mixed_state_moments_are_half_root_n() {
    for n in [1usize, 2, 5, 30, 100, 513, 2000] {
        let m = SectorDistribution::mixed(n).moments();
        assert!(m.mean.abs() < 1e-12, "n={n}");
        assert!((m.std - 0.5 * (n as f64).sqrt()).abs() < 1e-12, "n={n}: {}", m.std);
    }
}
