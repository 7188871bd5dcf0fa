use bsc::codelen::{integer_codelen, lnml_codelen, lnml_complexity, log2_multinomial_complexity};
use bsc::summary::{summarize_at, summary_codelen};
use bsc::{
    build_summary, change_statistic, concat_codelen, generate_stream, run, threshold,
    BetaLuckiness, BlockAssignment, BscConfig, BscDetector, BscError, GraphSnapshot,
    InferenceOptions, SynthConfig,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn prior() -> BetaLuckiness {
    BetaLuckiness::with_lambda(1.0).unwrap()
}

fn random_graph(t: usize, n: usize, p: f64, rng: &mut ChaCha8Rng) -> GraphSnapshot {
    let mut edges = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if i != j && rng.random::<f64>() < p {
                edges.push((i as u32, j as u32));
            }
        }
    }
    GraphSnapshot::new(t, n, edges).unwrap()
}

fn small_stream(seed: u64) -> Vec<GraphSnapshot> {
    generate_stream(&SynthConfig {
        n_nodes: 40,
        t_max: 8,
        t_change: 4,
        seed,
        ..Default::default()
    })
    .unwrap()
    .0
}

#[test]
fn concat_on_identical_snapshots_doubles() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let g = random_graph(1, 25, 0.3, &mut rng);
    let opts = InferenceOptions::default();
    for k in 1..=4 {
        let (kc, value) = concat_codelen(&g, &g.with_t(2), &[k], &prior(), &opts).unwrap();
        let single = summarize_at(&g, k, &prior(), &opts).unwrap();
        assert_eq!(kc, k);
        assert_eq!(value, 2.0 * single.breakdown.summary_bits());
    }
}

#[test]
fn concat_k1_closed_form() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let a = random_graph(1, 10, 0.4, &mut rng);
    let b = random_graph(2, 10, 0.4, &mut rng);
    let (_, value) = concat_codelen(&a, &b, &[1], &prior(), &InferenceOptions::default()).unwrap();
    let y = |g: &GraphSnapshot| {
        let (y, _) = summary_codelen(g, &BlockAssignment::single_block(10), &prior()).unwrap();
        lnml_codelen(y.count_ones(), 1, &prior()).unwrap()
    };
    let expected = 2.0 * 2.865 + y(&a) + y(&b);
    assert!((value - expected).abs() < 1e-12);
}

/// Six-term sum at a shared k, minimized over every assignment pair.
fn brute_concat(a: &GraphSnapshot, b: &GraphSnapshot, kset: &[usize]) -> f64 {
    let n = a.n_nodes();
    let best_single = |g: &GraphSnapshot, k: usize| {
        (0..k.pow(n as u32))
            .map(|mut code| {
                let labels: Vec<u32> = (0..n)
                    .map(|_| {
                        let l = (code % k) as u32;
                        code /= k;
                        l
                    })
                    .collect();
                let z = BlockAssignment::new(labels, k).unwrap();
                let (y, b) = summary_codelen(g, &z, &prior()).unwrap();
                // Compare on the four-term total, report the summary part.
                (
                    b.total,
                    b.l_k + b.l_z + lnml_codelen(y.count_ones(), (k * k) as u64, &prior()).unwrap(),
                )
            })
            .fold(
                (f64::INFINITY, 0.0),
                |acc, x| if x.0 < acc.0 { x } else { acc },
            )
            .1
    };
    kset.iter()
        .map(|&k| best_single(a, k) + best_single(b, k))
        .fold(f64::INFINITY, f64::min)
}

#[test]
fn concat_matches_brute_force_small_pair() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let opts = InferenceOptions {
        exhaustive: true,
        ..Default::default()
    };
    for _ in 0..4 {
        let a = random_graph(1, 6, 0.4, &mut rng);
        let b = random_graph(2, 6, 0.4, &mut rng);
        let (_, value) = concat_codelen(&a, &b, &[1, 2], &prior(), &opts).unwrap();
        let oracle = brute_concat(&a, &b, &[1, 2]);
        assert!((value - oracle).abs() < 1e-9, "{value} vs {oracle}");
    }
}

#[test]
fn driver_phi_matches_standalone_statistic() {
    let stream = small_stream(5);
    let cfg = BscConfig {
        seed: 5,
        ..Default::default()
    };
    let reports = run(&stream, &cfg).unwrap();
    let opts = InferenceOptions {
        seed: 5,
        ..cfg.inference
    };
    let p = cfg.prior().unwrap();
    for t in 1..stream.len() {
        let s_t = build_summary(&stream[t], &cfg.kset, &p, &opts).unwrap();
        let s_prev = build_summary(&stream[t - 1], &cfg.kset, &p, &opts).unwrap();
        let stat = change_statistic(
            &stream[t],
            &stream[t - 1],
            &s_t,
            &s_prev,
            &cfg.kset,
            &p,
            &opts,
        )
        .unwrap();
        assert_eq!(reports[t].phi, Some(stat.phi));
        assert_eq!(reports[t].k_concat, Some(stat.k_concat));
        assert_eq!(reports[t].k_hat, s_t.k);
        let eps = threshold(&p, cfg.delta, reports[t - 1].k_hat, 40).unwrap();
        assert_eq!(reports[t].epsilon, Some(eps));
        assert_eq!(reports[t].alarm, stat.phi > eps);
    }
}

#[test]
fn threshold_formula_and_monotonicity() {
    let p = prior();
    let eps = threshold(&p, 0.05, 3, 200).unwrap();
    let expected = lnml_complexity(9, &p)
        + log2_multinomial_complexity(200, 3).unwrap()
        + (integer_codelen(3).unwrap() - 0.05f64.log2()) / 2.0;
    assert!((eps - expected).abs() < 1e-12);
    let by_lambda: Vec<f64> = [0.5, 1.0, 5.0]
        .iter()
        .map(|&l| threshold(&BetaLuckiness::with_lambda(l).unwrap(), 0.05, 3, 200).unwrap())
        .collect();
    assert!(by_lambda[0] > by_lambda[1] && by_lambda[1] > by_lambda[2]);
}

#[test]
fn driver_first_step_and_single_snapshot() {
    let stream = small_stream(1);
    let reports = run(&stream[..1], &BscConfig::default()).unwrap();
    assert_eq!(reports.len(), 1);
    let r = &reports[0];
    assert!(r.phi.is_none() && r.epsilon.is_none() && r.k_concat.is_none() && !r.alarm);
    assert!(
        (r.summary_total - (r.breakdown.l_k + r.breakdown.l_z + r.breakdown.l_y)).abs() < 1e-12
    );
    assert!(run(&[], &BscConfig::default()).is_err());
}

#[test]
fn driver_is_online() {
    let stream = small_stream(2);
    let cfg = BscConfig::default();
    let full = run(&stream, &cfg).unwrap();
    let mut detector = BscDetector::new(cfg).unwrap();
    for (g, expected) in stream.iter().zip(&full) {
        assert_eq!(&detector.push(g).unwrap(), expected);
    }
    let prefix = run(&stream[..4], &BscConfig::default()).unwrap();
    assert_eq!(prefix[..], full[..4]);
}

#[test]
fn driver_errors_carry_t() {
    let mut detector = BscDetector::new(BscConfig::default()).unwrap();
    detector
        .push(&GraphSnapshot::new(1, 10, vec![]).unwrap())
        .unwrap();
    let err = detector
        .push(&GraphSnapshot::new(2, 11, vec![]).unwrap())
        .unwrap_err();
    assert!(matches!(err, BscError::AtStep { t: 2, .. }), "{err:?}");
}

#[test]
fn bad_config_rejected() {
    for cfg in [
        BscConfig {
            kset: vec![],
            ..Default::default()
        },
        BscConfig {
            delta: 1.0,
            ..Default::default()
        },
        BscConfig {
            lambda: 0.0,
            ..Default::default()
        },
        BscConfig {
            prior_a: -1.0,
            ..Default::default()
        },
    ] {
        assert!(BscDetector::new(cfg).is_err());
    }
    let stream = small_stream(3);
    let too_many = BscConfig {
        kset: vec![2, 41],
        ..Default::default()
    };
    assert!(run(&stream, &too_many).is_err());
}
