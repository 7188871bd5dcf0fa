use bsc::infer::assignment_objective;
use bsc::summary::{estimate_xi, summarize_at};
use bsc::{infer_blocks, BetaLuckiness, BlockAssignment, GraphSnapshot, InferenceOptions};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn prior() -> BetaLuckiness {
    BetaLuckiness::with_lambda(1.0).unwrap()
}

fn planted(n: usize, k: usize, p_in: f64, p_out: f64, seed: u64) -> (GraphSnapshot, Vec<usize>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let truth: Vec<usize> = (0..n).map(|i| i * k / n).collect();
    let mut edges = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let p = if truth[i] == truth[j] { p_in } else { p_out };
            if i != j && rng.random::<f64>() < p {
                edges.push((i as u32, j as u32));
            }
        }
    }
    (GraphSnapshot::new(1, n, edges).unwrap(), truth)
}

fn choose2(x: u64) -> f64 {
    (x * x.saturating_sub(1)) as f64 / 2.0
}

/// Hubert-Arabie adjusted Rand index.
fn adjusted_rand(a: &[usize], b: &[usize]) -> f64 {
    let ka = a.iter().max().unwrap() + 1;
    let kb = b.iter().max().unwrap() + 1;
    let mut table = vec![vec![0u64; kb]; ka];
    for (&x, &y) in a.iter().zip(b) {
        table[x][y] += 1;
    }
    let index: f64 = table.iter().flatten().map(|&c| choose2(c)).sum();
    let rows: f64 = table.iter().map(|r| choose2(r.iter().sum())).sum();
    let cols: f64 = (0..kb)
        .map(|j| choose2(table.iter().map(|r| r[j]).sum()))
        .sum();
    let expected = rows * cols / choose2(a.len() as u64);
    let max = (rows + cols) / 2.0;
    (index - expected) / (max - expected)
}

#[test]
fn ari_oracle_sanity() {
    assert!((adjusted_rand(&[0, 0, 1, 1], &[1, 1, 0, 0]) - 1.0).abs() < 1e-12);
    assert!(adjusted_rand(&[0, 0, 1, 1], &[0, 1, 0, 1]) < 0.0);
}

#[test]
fn planted_partition_recovered() {
    let opts = InferenceOptions::default();
    for seed in 0..10 {
        let (g, truth) = planted(60, 3, 0.6, 0.05, seed);
        let z = infer_blocks(&g, 3, &prior(), &InferenceOptions { seed, ..opts }).unwrap();
        let labels: Vec<usize> = z.labels().iter().map(|&l| l as usize).collect();
        let ari = adjusted_rand(&labels, &truth);
        assert!(ari >= 0.9, "seed {seed}: ARI {ari}");
    }
}

#[test]
fn disconnected_cliques_split_and_match_exhaustive_optimum() {
    let mut edges = Vec::new();
    for base in [0u32, 5] {
        for i in 0..5 {
            for j in 0..5 {
                if i != j {
                    edges.push((base + i, base + j));
                }
            }
        }
    }
    let g = GraphSnapshot::new(1, 10, edges).unwrap();
    let z = infer_blocks(&g, 2, &prior(), &InferenceOptions::default()).unwrap();
    let l = z.labels();
    assert!(l[..5].iter().all(|&x| x == l[0]) && l[5..].iter().all(|&x| x == l[5]));
    assert_ne!(l[0], l[5]);

    // Enumerate all 2^10 assignments to confirm the planted split is optimal.
    let found = assignment_objective(&g, &z, &prior()).unwrap();
    let best = (0u32..1 << 10)
        .map(|code| {
            let labels = (0..10).map(|i| (code >> i) & 1).collect();
            let z = BlockAssignment::new(labels, 2).unwrap();
            assignment_objective(&g, &z, &prior()).unwrap()
        })
        .fold(f64::INFINITY, f64::min);
    assert!((found - best).abs() < 1e-9);
}

#[test]
fn deterministic_per_seed() {
    let (g, _) = planted(50, 4, 0.4, 0.1, 3);
    let opts = InferenceOptions {
        seed: 9,
        ..Default::default()
    };
    let a = infer_blocks(&g, 4, &prior(), &opts).unwrap();
    let b = infer_blocks(&g, 4, &prior(), &opts).unwrap();
    assert_eq!(a, b);
}

#[test]
fn degenerate_inputs() {
    let (g, _) = planted(12, 2, 0.5, 0.1, 1);
    let z = infer_blocks(&g, 1, &prior(), &InferenceOptions::default()).unwrap();
    assert!(z.labels().iter().all(|&l| l == 0));
    assert!(infer_blocks(&g, 13, &prior(), &InferenceOptions::default()).is_err());

    let empty = GraphSnapshot::new(1, 7, vec![]).unwrap();
    let z = infer_blocks(&empty, 3, &prior(), &InferenceOptions::default()).unwrap();
    assert_eq!(z, BlockAssignment::round_robin(7, 3));

    let bad = InferenceOptions {
        n_restarts: 0,
        ..Default::default()
    };
    assert!(infer_blocks(&g, 2, &prior(), &bad).is_err());
    let big = GraphSnapshot::new(1, 9, vec![(0, 1)]).unwrap();
    let exhaustive = InferenceOptions {
        exhaustive: true,
        ..Default::default()
    };
    assert!(infer_blocks(&big, 2, &prior(), &exhaustive).is_err());
}

#[test]
fn single_block_closed_form() {
    let (g, _) = planted(20, 2, 0.5, 0.2, 4);
    let s = summarize_at(&g, 1, &prior(), &InferenceOptions::default()).unwrap();
    let m = g.n_edges() as u64;
    let slots = 20 * 19;
    let nml = bsc::codelen::bernoulli_nml_codelen(m, slots).unwrap();
    let counting = bsc::codelen::counting_codelen(m, slots).unwrap();
    let ones = u64::from(nml < counting);
    let expected =
        2.865 + bsc::codelen::lnml_codelen(ones, 1, &prior()).unwrap() + nml.min(counting);
    assert!((s.breakdown.total - expected).abs() < 1e-9);
    assert_eq!(s.breakdown.l_z, 0.0);
}

#[test]
fn xi_examples() {
    let xi = |labels: Vec<u32>, k| estimate_xi(&BlockAssignment::new(labels, k).unwrap());
    assert_eq!(xi(vec![0, 0, 1, 1], 2), vec![0.5, 0.5]);
    assert_eq!(xi(vec![0, 0, 0], 1), vec![1.0]);
    assert_eq!(xi(vec![0, 1, 1, 2], 3), vec![0.25, 0.5, 0.25]);
}
