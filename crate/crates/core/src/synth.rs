//! Synthetic SBM streams with a single planted parameter change.
//!
//! Block memberships are drawn once and kept for the whole stream. Between
//! changes each block pair is independently redrawn with probability
//! `regen_prob`. At `t_change` every edge probability is shifted by a
//! uniform jitter (clipped to `[tau_clip, 1 - tau_clip]`) and every block
//! pair whose probability moved is redrawn under the new value.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, Distribution, Gamma};
use serde::{Deserialize, Serialize};

use crate::error::{BscError, Result};
use crate::graph::GraphSnapshot;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub n_nodes: usize,
    pub k_true: usize,
    pub t_change: usize,
    pub t_max: usize,
    pub regen_prob: f64,
    pub jitter: f64,
    pub tau_clip: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            n_nodes: 200,
            k_true: 2,
            t_change: 15,
            t_max: 30,
            regen_prob: 0.05,
            jitter: 0.1,
            tau_clip: 0.001,
            seed: 0,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        let prob = |p: f64| (0.0..=1.0).contains(&p);
        if !(1 < self.t_change && self.t_change < self.t_max) {
            return Err(BscError::invalid("need 1 < t_change < t_max"));
        }
        if self.k_true == 0 || self.n_nodes < 2 {
            return Err(BscError::invalid("need k_true >= 1 and n_nodes >= 2"));
        }
        if !prob(self.regen_prob)
            || !prob(self.jitter)
            || !prob(self.tau_clip)
            || self.tau_clip > 0.5
        {
            return Err(BscError::invalid("probabilities must lie in [0, 1]"));
        }
        Ok(())
    }
}

/// What the generator planted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub t_star: usize,
    pub theta_x_before: Vec<Vec<f64>>,
    pub theta_x_after: Vec<Vec<f64>>,
    pub z: Vec<u32>,
}

fn dirichlet_ones(k: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let gamma = Gamma::new(1.0, 1.0).expect("valid gamma");
    let draws: Vec<f64> = (0..k).map(|_| gamma.sample(rng)).collect();
    let total: f64 = draws.iter().sum();
    draws.into_iter().map(|d| d / total).collect()
}

fn categorical(weights: &[f64], rng: &mut ChaCha8Rng) -> u32 {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, w) in weights.iter().enumerate() {
        acc += w;
        if u < acc {
            return i as u32;
        }
    }
    (weights.len() - 1) as u32
}

/// Dense adjacency plus the block structure it is drawn from.
struct Sampler {
    n: usize,
    members: Vec<Vec<usize>>,
    adj: Vec<bool>,
}

impl Sampler {
    fn redraw_pair(&mut self, l: usize, m: usize, p: f64, rng: &mut ChaCha8Rng) {
        for &i in &self.members[l] {
            for &j in &self.members[m] {
                if i != j {
                    self.adj[i * self.n + j] = rng.random::<f64>() < p;
                }
            }
        }
    }

    fn snapshot(&self, t: usize) -> GraphSnapshot {
        let edges = (0..self.n)
            .flat_map(|i| (0..self.n).map(move |j| (i, j)))
            .filter(|&(i, j)| self.adj[i * self.n + j])
            .map(|(i, j)| (i as u32, j as u32))
            .collect();
        GraphSnapshot::new(t, self.n, edges).expect("sampler never emits self-loops")
    }
}

/// Generates `t_max` snapshots with a parameter change at `t_change`.
#[allow(clippy::needless_range_loop)]
pub fn generate_stream(cfg: &SynthConfig) -> Result<(Vec<GraphSnapshot>, GroundTruth)> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let k = cfg.k_true;
    let beta = Beta::new(0.5, 0.5).expect("valid beta");
    let theta_before: Vec<Vec<f64>> = (0..k)
        .map(|_| (0..k).map(|_| beta.sample(&mut rng)).collect())
        .collect();
    let theta_z = dirichlet_ones(k, &mut rng);
    let z: Vec<u32> = (0..cfg.n_nodes)
        .map(|_| categorical(&theta_z, &mut rng))
        .collect();

    let mut members = vec![Vec::new(); k];
    for (i, &b) in z.iter().enumerate() {
        members[b as usize].push(i);
    }
    let mut sampler = Sampler {
        n: cfg.n_nodes,
        members,
        adj: vec![false; cfg.n_nodes * cfg.n_nodes],
    };
    for l in 0..k {
        for m in 0..k {
            sampler.redraw_pair(l, m, theta_before[l][m], &mut rng);
        }
    }

    let mut theta = theta_before.clone();
    let mut theta_after = theta_before.clone();
    let mut snapshots = vec![sampler.snapshot(1)];
    for t in 2..=cfg.t_max {
        if t == cfg.t_change {
            for l in 0..k {
                for m in 0..k {
                    let u = rng.random_range(-1.0..=1.0) * cfg.jitter;
                    theta_after[l][m] = (theta[l][m] + u).min(1.0 - cfg.tau_clip).max(cfg.tau_clip);
                }
            }
            for l in 0..k {
                for m in 0..k {
                    if theta_after[l][m] != theta[l][m] {
                        sampler.redraw_pair(l, m, theta_after[l][m], &mut rng);
                    }
                }
            }
            theta = theta_after.clone();
        }
        for l in 0..k {
            for m in 0..k {
                if rng.random::<f64>() < cfg.regen_prob {
                    sampler.redraw_pair(l, m, theta[l][m], &mut rng);
                }
            }
        }
        snapshots.push(sampler.snapshot(t));
    }

    Ok((
        snapshots,
        GroundTruth {
            t_star: cfg.t_change,
            theta_x_before: theta_before,
            theta_x_after: theta_after,
            z,
        },
    ))
}
