use approx::assert_abs_diff_eq;
use proptest::prelude::*;
use spinnoise::chain::empirical_distribution;
use spinnoise::{
    break_even_spin_count, covariance_closed_form, covariance_empirical, eta, BreakEven,
    ChainModel, ChannelSpec, InitialState, MeasurementKernel, RunConfig, SectorDistribution,
};

fn config(n: usize, width: f64, channel: ChannelSpec, initial: InitialState) -> RunConfig {
    RunConfig {
        n,
        width,
        channel,
        initial,
        steps: 2,
        trajectories: 0,
        seed: 7,
    }
}

fn depolarizing(n: usize, lambda: f64) -> ChainModel {
    ChainModel::new(&config(
        n,
        0.0,
        ChannelSpec::CollectiveDepolarizing { lambda },
        InitialState::Mixed,
    ))
    .unwrap()
}

#[test]
fn eta_examples() {
    assert_eq!(eta(0.4, 0), 0.0);
    assert_abs_diff_eq!(eta(0.4, 1), 0.4, epsilon = 1e-16);
    assert_abs_diff_eq!(eta(0.3, 4), 0.7599, epsilon = 1e-15);
}

#[test]
fn covariance_routes_agree() {
    for n in 1..=40 {
        for lambda in [0.0, 0.1, 0.5, 0.9, 1.0] {
            let model = depolarizing(n, lambda);
            for lag in 1..=8u32 {
                let exact = model.exact_joint(1 + lag as usize, 1).unwrap().covariance();
                let closed = covariance_closed_form(n, lambda, lag, 0.0);
                assert!(
                    (exact - closed).abs() < 1e-10,
                    "n={n} λ={lambda} k={lag}: {exact} vs {closed}"
                );
            }
        }
    }
}

#[test]
fn covariance_examples() {
    let r = depolarizing(20, 0.3).exact_joint(4, 1).unwrap().covariance();
    assert_abs_diff_eq!(r, 5.0 * 0.7f64.powi(3), epsilon = 1e-12);
    assert_abs_diff_eq!(r, 1.715, epsilon = 1e-12);
    let diag = depolarizing(100, 0.0).exact_joint(2, 1).unwrap().covariance();
    assert_abs_diff_eq!(diag, 25.0, epsilon = 1e-11);
    assert_abs_diff_eq!(covariance_closed_form(100, 0.2, 2, 0.0), 16.0, epsilon = 1e-12);
    assert_abs_diff_eq!(covariance_closed_form(100, 1e-9, 7, 0.0), 25.0, epsilon = 1e-6);
    assert_eq!(covariance_closed_form(100, 1.0, 3, 2.5), 0.0);
}

#[test]
fn depolarizing_joint_has_two_terms() {
    let n = 20;
    for lambda in [0.0, 0.3, 1.0] {
        let model = depolarizing(n, lambda);
        let p = model.outcome_marginal(1).unwrap();
        for lag in 1..=4usize {
            let joint = model.exact_joint(1 + lag, 1).unwrap();
            let keep = (1.0 - lambda).powi(lag as i32);
            let e = eta(lambda, lag as u32);
            for i in 0..=n {
                for j in 0..=n {
                    let delta = if i == j { p.probs()[j] } else { 0.0 };
                    let want = keep * delta + e * p.probs()[i] * p.probs()[j];
                    assert!((joint.matrix()[(i, j)] - want).abs() < 1e-12);
                }
            }
        }
    }
}

#[test]
fn depolarizing_conditional_law() {
    let n = 16;
    let lambda = 0.35;
    let model = depolarizing(n, lambda);
    let p = model.outcome_marginal(1).unwrap();
    for (m1, _) in p.iter_doubled() {
        let cond = model.conditional_next(m1).unwrap();
        for (m2, got) in cond.iter_doubled() {
            let delta = if m1 == m2 { 1.0 - lambda } else { 0.0 };
            let want = delta + lambda * p.prob(m2).unwrap();
            assert!((got - want).abs() < 1e-12);
        }
    }
}

#[test]
fn posterior_equivalence_for_product_starts() {
    let n = 30;
    let channels = [
        ChannelSpec::CollectiveDepolarizing { lambda: 0.2 },
        ChannelSpec::ProductMap {
            alpha: 0.3,
            beta: 0.1,
        },
        ChannelSpec::DepolarizedRotation {
            lambda: 0.1,
            theta: 0.4,
        },
    ];
    for channel in channels {
        let mixed = ChainModel::new(&config(n, 0.0, channel.clone(), InitialState::Mixed)).unwrap();
        let product =
            ChainModel::new(&config(n, 0.0, channel, InitialState::product(0.7))).unwrap();
        let a = mixed.exact_joint(2, 1).unwrap();
        let b = product.exact_joint(2, 1).unwrap();
        for m1 in (-(n as i64)..=n as i64).step_by(2) {
            let ca = a.conditional_on_earlier(m1).unwrap();
            let cb = b.conditional_on_earlier(m1).unwrap();
            assert!(ca.total_variation(&cb).unwrap() < 1e-12);
        }
        let first = a.earlier_marginal().unwrap();
        assert!(first.total_variation(&b.earlier_marginal().unwrap()).unwrap() > 0.1);
    }
}

#[test]
fn weak_joint_for_polarizing_channel() {
    let n = 24;
    let lambda = 0.15;
    let reference = SectorDistribution::binomial(n, 0.6).unwrap();
    let model = ChainModel::new(&config(
        n,
        2.0,
        ChannelSpec::EpsilonPolarizing {
            lambda,
            reference: reference.clone(),
        },
        InitialState::SectorDensity(reference.clone()),
    ))
    .unwrap();
    let d = MeasurementKernel::gaussian(n, 2.0).unwrap();
    let p = d.outcome_distribution(&reference).unwrap();
    for (later, earlier) in [(2, 1), (4, 1), (5, 3), (9, 2)] {
        let lag = later - earlier;
        let joint = model.exact_joint(later, earlier).unwrap();
        let keep = (1.0 - lambda).powi(lag as i32);
        let e = eta(lambda, lag as u32);
        for i in 0..=n {
            for j in 0..=n {
                let overlap: f64 = (0..=n)
                    .map(|l| d.matrix()[(i, l)] * d.matrix()[(j, l)] * reference.probs()[l])
                    .sum();
                let want = keep * overlap + e * p.probs()[i] * p.probs()[j];
                assert!((joint.matrix()[(i, j)] - want).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn independence_and_perfect_memory() {
    let n = 10;
    let memoryless = ChainModel::new(&config(
        n,
        0.0,
        ChannelSpec::DepolarizedRotation {
            lambda: 1.0,
            theta: 0.0,
        },
        InitialState::Mixed,
    ))
    .unwrap();
    let joint = memoryless.exact_joint(2, 1).unwrap();
    let p = memoryless.outcome_marginal(1).unwrap();
    for i in 0..=n {
        for j in 0..=n {
            assert!((joint.matrix()[(i, j)] - p.probs()[i] * p.probs()[j]).abs() < 1e-15);
        }
    }
    assert!(joint.covariance().abs() < 1e-12);

    let frozen = ChainModel::new(&config(
        n,
        0.0,
        ChannelSpec::DepolarizedRotation {
            lambda: 0.0,
            theta: 0.0,
        },
        InitialState::Mixed,
    ))
    .unwrap();
    let joint = frozen.exact_joint(3, 1).unwrap();
    for i in 0..=n {
        for j in 0..=n {
            let want = if i == j { p.probs()[i] } else { 0.0 };
            assert_eq!(joint.matrix()[(i, j)], want);
        }
    }
    assert_abs_diff_eq!(joint.correlation(), 1.0, epsilon = 1e-14);
}

fn channel_strategy(n: usize) -> impl Strategy<Value = ChannelSpec> {
    prop_oneof![
        (0.0f64..=1.0).prop_map(|lambda| ChannelSpec::CollectiveDepolarizing { lambda }),
        (0.0f64..=1.0, 0.0f64..=1.0).prop_map(move |(lambda, a)| {
            ChannelSpec::EpsilonPolarizing {
                lambda,
                reference: SectorDistribution::binomial(n, a).unwrap(),
            }
        }),
        (0.0f64..=1.0, 0.0f64..=1.0)
            .prop_map(|(alpha, beta)| ChannelSpec::ProductMap { alpha, beta }),
        (0.0f64..=1.0, -1.6f64..1.6)
            .prop_map(|(lambda, theta)| ChannelSpec::DepolarizedRotation { lambda, theta }),
    ]
}

fn model_strategy() -> impl Strategy<Value = ChainModel> {
    (1usize..=30).prop_flat_map(|n| {
        (
            prop_oneof![Just(0.0), 0.2f64..6.0],
            channel_strategy(n),
            0.0f64..=1.0,
        )
            .prop_map(move |(w, channel, a)| {
                ChainModel::new(&config(n, w, channel, InitialState::product(a))).unwrap()
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn joint_marginals_match_forward_laws(
        model in model_strategy(),
        earlier in 1usize..=3,
        lag in 1usize..=4,
    ) {
        let later = earlier + lag;
        let joint = model.exact_joint(later, earlier).unwrap();
        prop_assert!((joint.total() - 1.0).abs() < 1e-12);
        let fwd_i = model.outcome_marginal(later).unwrap();
        let fwd_j = model.outcome_marginal(earlier).unwrap();
        let got_i = joint.later_marginal().unwrap();
        let got_j = joint.earlier_marginal().unwrap();
        for (a, b) in got_i.probs().iter().zip(fwd_i.probs()) {
            prop_assert!((a - b).abs() < 1e-12);
        }
        for (a, b) in got_j.probs().iter().zip(fwd_j.probs()) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn first_conditional_matches_joint_slice(model in model_strategy(), pick in 0.0f64..1.0) {
        let n = model.n();
        let joint = model.exact_joint(2, 1).unwrap();
        let p1 = model.outcome_marginal(1).unwrap();
        let idx = ((n + 1) as f64 * pick) as usize;
        let m1 = 2 * idx as i64 - n as i64;
        prop_assume!(p1.probs()[idx] > 1e-12);
        let a = joint.conditional_on_earlier(m1).unwrap();
        let b = model.conditional_next(m1).unwrap();
        prop_assert!(a.total_variation(&b).unwrap() < 1e-10);
    }
}

#[test]
fn strong_identity_trajectories_are_constant() {
    let model = ChainModel::new(&config(
        25,
        0.0,
        ChannelSpec::ProductMap {
            alpha: 0.0,
            beta: 0.0,
        },
        InitialState::product(0.3),
    ))
    .unwrap();
    for t in model.sample(11, 200, 6, None).unwrap() {
        let first = t.records[0].outcome_doubled;
        assert!(t.outcomes().all(|d| d == first));
    }
}

#[test]
fn sampling_is_reproducible_and_thread_independent() {
    let model = ChainModel::new(&config(
        40,
        3.0,
        ChannelSpec::DepolarizedRotation {
            lambda: 0.1,
            theta: 0.2,
        },
        InitialState::Mixed,
    ))
    .unwrap();
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| model.sample(99, 500, 5, None).unwrap())
    };
    let one = run(1);
    assert_eq!(one, run(8));
    assert_eq!(one, run(3));
    let other = model.sample(100, 500, 5, None).unwrap();
    assert_ne!(one, other);
}

#[test]
fn postselection_fixes_the_first_outcome() {
    let model = depolarizing(20, 0.3);
    let runs = model.sample(5, 300, 3, Some(4)).unwrap();
    assert!(runs.iter().all(|t| t.records[0].outcome_doubled == 4));
    assert!(model.sample(5, 3, 3, Some(5)).is_err());
}

#[test]
fn empirical_covariance_tracks_exact_values() {
    let trajectories = 10_000;
    // i.i.d. draws
    let iid = depolarizing(100, 1.0);
    let runs = iid.sample(2024, trajectories, 3, None).unwrap();
    for lag in 1..=2 {
        let est = covariance_empirical(&runs, lag).unwrap();
        assert!(est.estimate.abs() < 3.0 * est.stderr, "{est:?}");
    }

    let memory = depolarizing(100, 0.2);
    let runs = memory.sample(2025, trajectories, 3, None).unwrap();
    let est = covariance_empirical(&runs, 1).unwrap();
    assert!((est.estimate - 20.0).abs() < 3.0 * est.stderr, "{est:?}");
    let est = covariance_empirical(&runs, 2).unwrap();
    assert!((est.estimate - 16.0).abs() < 3.0 * est.stderr, "{est:?}");

    let hist = empirical_distribution(100, &runs, 1).unwrap();
    let exact = memory.outcome_marginal(1).unwrap();
    assert!(hist.total_variation(&exact).unwrap() < 0.05);
}

#[test]
fn break_even_examples() {
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_6};
    assert_eq!(break_even_spin_count(FRAC_PI_2, 1e-3).unwrap(), BreakEven::Finite(1_000_000));
    assert_eq!(break_even_spin_count(FRAC_PI_2, 0.999).unwrap(), BreakEven::Finite(1));
    // tan(π/12) = 2 - √3, so the bound is 10¹⁰ (7 + 4√3)
    assert_eq!(
        break_even_spin_count(FRAC_PI_6, 1e-5).unwrap(),
        BreakEven::Finite(139_282_032_302)
    );
    assert_eq!(break_even_spin_count(1.0, 0.0).unwrap(), BreakEven::Unbounded);
    assert!(break_even_spin_count(0.0, 0.1).is_err());
    assert!(break_even_spin_count(2.0, 0.1).is_err());
    assert!(break_even_spin_count(1.0, 1.0).is_err());
}
