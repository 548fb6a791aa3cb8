mod common;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tp53_classify::bpnn::{
    gradient_check, init_network, load_model, mse, save_model, train, Network, Sample, StopReason, Topology,
    TrainConfig,
};
use tp53_classify::dataset::{fit_encoder, load_records};

use common::central_difference;

fn random_case(rng: &mut ChaCha8Rng, max: (usize, usize, usize)) -> (Network, Vec<f64>, Vec<f64>) {
    let topo = Topology::new(
        rng.random_range(1..=max.0),
        rng.random_range(1..=max.1),
        rng.random_range(1..=max.2),
    )
    .unwrap();
    let mut net = init_network(topo, rng.random());
    // widen the weights so the sigmoid is not always near its linear region
    for i in 0..net.n_params() {
        *net.param_mut(i) *= 4.0;
    }
    let x = (0..topo.n_in).map(|_| rng.random_range(0.0..1.0)).collect();
    let t = (0..topo.n_out).map(|_| rng.random_range(0.0..1.0)).collect();
    (net, x, t)
}

/// Finite differences taken through `mse` rather than through the gradient
/// checker, so the two share no code beyond the forward pass.
#[test]
fn updates_match_central_differences_of_mse() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for _ in 0..20 {
        let (net, x, t) = random_case(&mut rng, (6, 8, 3));
        let alpha = 0.1;
        let mut stepped = net.clone();
        stepped.train_step(&x, &t, alpha).unwrap();
        let n_out = net.topology.n_out as f64;
        let sample = [Sample::new(x.clone(), t.clone())];
        let before: Vec<f64> = net.params().collect();
        let after: Vec<f64> = stepped.params().collect();
        for idx in 0..net.n_params() {
            let mut probe = net.clone();
            let grad = central_difference(
                |p| {
                    *probe.param_mut(idx) = p;
                    // E/2 = n_out * mse / 2 for a single sample
                    0.5 * n_out * mse(&probe, &sample).unwrap()
                },
                before[idx],
                1e-6,
            );
            let analytic = -(after[idx] - before[idx]) / alpha;
            let denom = analytic.abs().max(grad.abs()).max(1e-12);
            assert!((analytic - grad).abs() / denom < 1e-5 || (analytic - grad).abs() < 1e-10, "param {idx}: {analytic} vs {grad}");
        }
    }
}

#[test]
fn gradient_check_fifty_random_nets() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..50 {
        let (net, x, t) = random_case(&mut rng, (11, 20, 3));
        let err = gradient_check(&net, &x, &t, 1e-6).unwrap();
        assert!(err < 1e-5, "{err}");
    }
}

#[test]
fn gradient_check_at_zero_error() {
    let net = init_network(Topology::new(3, 5, 2).unwrap(), 9);
    let x = [0.3, 0.6, 0.9];
    let t = net.predict(&x).unwrap();
    assert!(gradient_check(&net, &x, &t, 1e-6).unwrap() < 1e-5);
}

#[test]
fn single_sample_descent() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut checked = 0;
    while checked < 100 {
        let (mut net, x, t) = random_case(&mut rng, (6, 10, 3));
        let (d, before) = net.deltas(&x, &t, 1.0).unwrap();
        let norm: f64 = d.v.iter().chain(&d.v0).chain(&d.w).chain(&d.w0).map(|g| g * g).sum::<f64>().sqrt();
        if norm <= 1e-8 {
            continue;
        }
        net.train_step(&x, &t, 1e-3).unwrap();
        let after: f64 = net.predict(&x).unwrap().iter().zip(&t).map(|(y, t)| (t - y) * (t - y)).sum();
        assert!(after < before, "{after} >= {before}");
        checked += 1;
    }
}

fn xor() -> Vec<Sample> {
    vec![
        Sample::new(vec![0.0, 0.0], vec![0.0]),
        Sample::new(vec![0.0, 1.0], vec![1.0]),
        Sample::new(vec![1.0, 0.0], vec![1.0]),
        Sample::new(vec![1.0, 1.0], vec![0.0]),
    ]
}

#[test]
fn xor_converges() {
    let mut net = init_network(Topology::new(2, 4, 1).unwrap(), 7);
    let cfg = TrainConfig {
        alpha: 0.5,
        max_epochs: 20_000,
        goal_mse: 0.01,
        seed: 7,
        shuffle_each_epoch: false,
    };
    let report = train(&mut net, &xor(), &cfg).unwrap();
    assert_eq!(report.stopped_by, StopReason::GoalReached);
    assert!(report.final_mse < 0.01);
    assert_eq!(report.mse_history.len(), report.epochs_run);
}

#[test]
fn training_is_deterministic() {
    for shuffle in [false, true] {
        let cfg = TrainConfig {
            alpha: 0.5,
            max_epochs: 300,
            goal_mse: 0.0,
            seed: 3,
            shuffle_each_epoch: shuffle,
        };
        let run = || {
            let mut net = init_network(Topology::new(2, 4, 1).unwrap(), cfg.seed);
            let rep = train(&mut net, &xor(), &cfg).unwrap();
            (net, rep)
        };
        let (na, ra) = run();
        let (nb, rb) = run();
        assert_eq!(na, nb);
        let bits = |r: &tp53_classify::TrainReport| r.mse_history.iter().map(|v| v.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&ra), bits(&rb));
        assert_eq!(ra.stopped_by, StopReason::MaxEpochs);
    }
}

#[test]
fn parameters_stay_finite_over_long_training() {
    let mut net = init_network(Topology::new(3, 6, 2).unwrap(), 1);
    let data = vec![
        Sample::new(vec![0.0, 1.0, 0.5], vec![1.0, 0.0]),
        Sample::new(vec![1.0, 1.0, 0.0], vec![0.0, 1.0]),
        Sample::new(vec![0.2, 0.0, 1.0], vec![1.0, 1.0]),
    ];
    let cfg = TrainConfig {
        alpha: 1.0,
        max_epochs: 100_000,
        goal_mse: 0.0,
        seed: 1,
        shuffle_each_epoch: true,
    };
    let rep = train(&mut net, &data, &cfg).unwrap();
    assert_eq!(rep.epochs_run, 100_000);
    assert!(net.is_finite());
    assert!(rep.mse_history.iter().all(|v| v.is_finite()));
}

#[test]
fn empty_dataset_rejected() {
    let mut net = init_network(Topology::new(2, 2, 1).unwrap(), 0);
    assert!(train(&mut net, &[], &TrainConfig::default()).is_err());
}

fn encoder() -> tp53_classify::Encoder {
    fit_encoder(&load_records(common::fixture_text("fig5_sample.csv").as_bytes()).unwrap()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn forward_outputs_in_open_unit_interval(seed in any::<u64>(), xs in proptest::collection::vec(-5.0f64..5.0, 4)) {
        let net = init_network(Topology::new(4, 3, 2).unwrap(), seed);
        let (z, y) = net.forward(&xs).unwrap();
        prop_assert!(z.iter().chain(&y).all(|v| *v > 0.0 && *v < 1.0));
    }

    #[test]
    fn model_round_trip_is_bit_exact(seed in any::<u64>(), hidden in 1usize..12, scale in -6i32..6) {
        let mut net = init_network(Topology::new(11, hidden, 1).unwrap(), seed);
        let factor = 10f64.powi(scale) * 1.000_000_1;
        for i in 0..net.n_params() {
            *net.param_mut(i) *= factor;
        }
        let enc = encoder();
        let text = save_model(&net, &enc).unwrap();
        let (back, enc_back) = load_model(&text).unwrap();
        prop_assert!(back.params().zip(net.params()).all(|(a, b)| a.to_bits() == b.to_bits()));
        prop_assert_eq!(enc_back, enc);
    }
}

#[test]
fn saved_model_predicts_identically() {
    let net = init_network(Topology::new(11, 100, 1).unwrap(), 42);
    let (back, _) = load_model(&save_model(&net, &encoder()).unwrap()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..100 {
        let x: Vec<f64> = (0..11).map(|_| rng.random_range(0.0..1.0)).collect();
        assert_eq!(net.predict(&x).unwrap()[0].to_bits(), back.predict(&x).unwrap()[0].to_bits());
    }
}
