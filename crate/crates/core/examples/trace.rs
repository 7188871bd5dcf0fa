use std::time::Instant;

use bsc::{generate_stream, run, BscConfig, SynthConfig};

fn main() {
    let seed: u64 = std::env::args()
        .nth(1)
        .map(|s| s.parse().unwrap())
        .unwrap_or(0);
    let lambda: f64 = std::env::args()
        .nth(2)
        .map(|s| s.parse().unwrap())
        .unwrap_or(1.0);
    let (stream, truth) = generate_stream(&SynthConfig {
        seed,
        ..Default::default()
    })
    .unwrap();
    println!(
        "theta before {:?}\ntheta after {:?}",
        truth.theta_x_before, truth.theta_x_after
    );
    let start = Instant::now();
    let cfg = BscConfig {
        lambda,
        seed,
        ..Default::default()
    };
    let reports = run(&stream, &cfg).unwrap();
    for r in &reports {
        println!(
            "t={:2} k={} kc={:?} phi={:?} eps={:?} alarm={} S={:.2} total={:.1}",
            r.t,
            r.k_hat,
            r.k_concat,
            r.phi.map(|p| (p * 100.0).round() / 100.0),
            r.epsilon.map(|p| (p * 100.0).round() / 100.0),
            r.alarm,
            r.summary_total,
            r.data_total
        );
    }
    eprintln!("elapsed {:?}", start.elapsed());
}
