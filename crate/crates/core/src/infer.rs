//! Block inference at a fixed block count.
//!
//! The objective is the summary's total code-length for the candidate
//! assignment: the NML code of `z`, the LNML code of the superedges decided
//! under `z`, and the code of the graph given both. Each restart starts from
//! a randomized seeding (k random seed nodes, spread k-means++ style over
//! neighbourhood dissimilarity, every node joining its closest seed),
//! optionally anneals, and then runs best-improvement single-node relabeling
//! sweeps until no move helps.

use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::codelen::{
    integer_codelen, lnml_codelen_table, log2_multinomial_complexity, BetaLuckiness, Bits,
};
use crate::error::{BscError, Result};
use crate::graph::{pair_slots, BlockAssignment, GraphSnapshot};
use crate::summary::PairCoder;

/// Largest graph the exhaustive search accepts.
pub const EXHAUSTIVE_MAX_NODES: usize = 8;

/// Moves must improve the objective by more than this to be taken.
const IMPROVEMENT_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct InferenceOptions {
    pub seed: u64,
    pub n_restarts: usize,
    pub max_sweeps: usize,
    pub anneal: bool,
    /// Enumerate every assignment instead (test oracle; small graphs only).
    #[serde(default)]
    pub exhaustive: bool,
}

impl Default for InferenceOptions {
    fn default() -> Self {
        Self {
            seed: 0,
            n_restarts: 5,
            max_sweeps: 50,
            anneal: false,
            exhaustive: false,
        }
    }
}

impl InferenceOptions {
    pub fn validate(&self) -> Result<()> {
        if self.n_restarts == 0 || self.max_sweeps == 0 {
            return Err(BscError::invalid("n_restarts and max_sweeps must be >= 1"));
        }
        Ok(())
    }
}

/// Constant inputs shared by every restart on one `(graph, k)` problem.
struct Problem<'a> {
    g: &'a GraphSnapshot,
    k: usize,
    coder: Arc<PairCoder>,
    lnml: Vec<Bits>,
    constant: Bits,
}

impl<'a> Problem<'a> {
    fn new(g: &'a GraphSnapshot, k: usize, prior: &BetaLuckiness) -> Result<Self> {
        let n = g.n_nodes() as u64;
        let max_slots = n * n.saturating_sub(1);
        let constant = integer_codelen(k as u64)? + log2_multinomial_complexity(n, k as u64)?;
        Ok(Self {
            g,
            k,
            coder: Arc::new(PairCoder::new(max_slots)),
            lnml: lnml_codelen_table((k * k) as u64, prior)?,
            constant,
        })
    }
}

fn size_cost(size: u64, n: f64) -> f64 {
    if size == 0 {
        0.0
    } else {
        let s = size as f64;
        -s * (s / n).log2()
    }
}

/// Mutable search state for one restart.
struct BlockState<'p, 'g> {
    problem: &'p Problem<'g>,
    labels: Vec<u32>,
    sizes: Vec<u64>,
    present: Vec<u64>,
    superedge: Vec<bool>,
    pair_cost: Vec<Bits>,
    ones: usize,
    // scratch
    out_to: Vec<u64>,
    in_from: Vec<u64>,
    touched: Vec<(usize, u64, bool, Bits)>,
}

impl<'p, 'g> BlockState<'p, 'g> {
    fn new(problem: &'p Problem<'g>, labels: Vec<u32>) -> Self {
        let k = problem.k;
        let mut state = Self {
            problem,
            labels,
            sizes: vec![0; k],
            present: vec![0; k * k],
            superedge: vec![false; k * k],
            pair_cost: vec![0.0; k * k],
            ones: 0,
            out_to: vec![0; k],
            in_from: vec![0; k],
            touched: Vec::with_capacity(4 * k),
        };
        state.rebuild();
        state
    }

    fn rebuild(&mut self) {
        let k = self.problem.k;
        self.sizes.iter_mut().for_each(|s| *s = 0);
        self.present.iter_mut().for_each(|p| *p = 0);
        for &z in &self.labels {
            self.sizes[z as usize] += 1;
        }
        for &(i, j) in self.problem.g.edges() {
            let (l, m) = (
                self.labels[i as usize] as usize,
                self.labels[j as usize] as usize,
            );
            self.present[l * k + m] += 1;
        }
        self.ones = 0;
        for l in 0..k {
            for m in 0..k {
                let idx = l * k + m;
                let slots = pair_slots(self.sizes[l], self.sizes[m], l == m);
                let (y, cost) = self.problem.coder.decide(self.present[idx], slots);
                self.superedge[idx] = y;
                self.pair_cost[idx] = cost;
                self.ones += y as usize;
            }
        }
    }

    fn objective(&self) -> Bits {
        let n = self.labels.len() as f64;
        let l_z: f64 = self.sizes.iter().map(|&s| size_cost(s, n)).sum();
        self.problem.constant
            + l_z
            + self.problem.lnml[self.ones]
            + self.pair_cost.iter().sum::<f64>()
    }

    /// Fills `out_to` / `in_from` with node `i`'s edge counts per block.
    fn load_neighbourhood(&mut self, i: usize) {
        self.out_to.iter_mut().for_each(|c| *c = 0);
        self.in_from.iter_mut().for_each(|c| *c = 0);
        let g = self.problem.g;
        for &j in g.out_neighbors(i) {
            self.out_to[self.labels[j as usize] as usize] += 1;
        }
        for &j in g.in_neighbors(i) {
            self.in_from[self.labels[j as usize] as usize] += 1;
        }
    }

    /// Objective change if node `i` (neighbourhood loaded) moves to `to`.
    /// Leaves the new per-pair values in `touched`.
    fn move_delta(&mut self, i: usize, to: usize) -> Bits {
        let k = self.problem.k;
        let from = self.labels[i] as usize;
        debug_assert_ne!(from, to);
        let n = self.labels.len() as f64;
        let size_after = |b: usize| -> u64 {
            if b == from {
                self.sizes[b] - 1
            } else if b == to {
                self.sizes[b] + 1
            } else {
                self.sizes[b]
            }
        };
        let mut delta = size_cost(self.sizes[from] - 1, n) + size_cost(self.sizes[to] + 1, n)
            - size_cost(self.sizes[from], n)
            - size_cost(self.sizes[to], n);
        self.touched.clear();
        let mut ones = self.ones as i64;
        for l in 0..k {
            for m in 0..k {
                if l != from && l != to && m != from && m != to {
                    continue;
                }
                let idx = l * k + m;
                let mut present = self.present[idx] as i64;
                if l == from {
                    present -= self.out_to[m] as i64;
                }
                if l == to {
                    present += self.out_to[m] as i64;
                }
                if m == from {
                    present -= self.in_from[l] as i64;
                }
                if m == to {
                    present += self.in_from[l] as i64;
                }
                let present = present as u64;
                let slots = pair_slots(size_after(l), size_after(m), l == m);
                let (y, cost) = self.problem.coder.decide(present, slots);
                delta += cost - self.pair_cost[idx];
                ones += y as i64 - self.superedge[idx] as i64;
                self.touched.push((idx, present, y, cost));
            }
        }
        delta + self.problem.lnml[ones as usize] - self.problem.lnml[self.ones]
    }

    /// Applies the values left in `touched` by the last `move_delta`.
    fn commit(&mut self, i: usize, to: usize) {
        let from = self.labels[i] as usize;
        self.sizes[from] -= 1;
        self.sizes[to] += 1;
        self.labels[i] = to as u32;
        for &(idx, present, y, cost) in &self.touched {
            self.ones = self.ones + y as usize - self.superedge[idx] as usize;
            self.present[idx] = present;
            self.superedge[idx] = y;
            self.pair_cost[idx] = cost;
        }
    }

    /// One best-improvement sweep over `order`. Returns the number of moves.
    fn greedy_sweep(&mut self, order: &[usize]) -> usize {
        let k = self.problem.k;
        let mut moves = 0;
        for &i in order {
            self.load_neighbourhood(i);
            let from = self.labels[i] as usize;
            let mut best: Option<(usize, Bits)> = None;
            for to in (0..k).filter(|&b| b != from) {
                let d = self.move_delta(i, to);
                if best.is_none_or(|(_, bd)| d < bd) {
                    best = Some((to, d));
                }
            }
            if let Some((to, d)) = best {
                if d < -IMPROVEMENT_EPS {
                    // Recompute so `touched` holds the chosen move.
                    self.move_delta(i, to);
                    self.commit(i, to);
                    moves += 1;
                }
            }
        }
        moves
    }

    /// Metropolis sweep at temperature `temp` (bits) with random targets.
    fn anneal_sweep(&mut self, order: &[usize], temp: f64, rng: &mut ChaCha8Rng) {
        let k = self.problem.k;
        for &i in order {
            let from = self.labels[i] as usize;
            let mut to = rng.random_range(0..k - 1);
            if to >= from {
                to += 1;
            }
            self.load_neighbourhood(i);
            let d = self.move_delta(i, to);
            if d < 0.0 || rng.random::<f64>() < (-d / temp).exp() {
                self.commit(i, to);
            }
        }
    }
}

/// Result of one restart: assignment, final objective and per-sweep trace.
#[derive(Debug, Clone)]
pub struct RestartOutcome {
    pub assignment: BlockAssignment,
    pub objective: Bits,
    /// Objective after each greedy sweep, starting with the initial value.
    pub trace: Vec<Bits>,
}

fn restart_seed(seed: u64, k: usize, restart: usize) -> u64 {
    seed ^ (k as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
        ^ (restart as u64 + 1).wrapping_mul(0xD1B5_4A32_D192_ED03)
}

/// Size of the symmetric difference of two sorted neighbour lists.
fn sorted_sym_diff(a: &[u32], b: &[u32]) -> usize {
    let (mut i, mut j, mut common) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                common += 1;
                i += 1;
                j += 1;
            }
        }
    }
    a.len() + b.len() - 2 * common
}

fn dissimilarity(g: &GraphSnapshot, u: usize, v: usize) -> usize {
    sorted_sym_diff(g.out_neighbors(u), g.out_neighbors(v))
        + sorted_sym_diff(g.in_neighbors(u), g.in_neighbors(v))
}

/// k-means++ style seeding; ties go to the lowest seed index.
fn seeded_labels(g: &GraphSnapshot, k: usize, rng: &mut ChaCha8Rng) -> Vec<u32> {
    let n = g.n_nodes();
    let mut labels = vec![0u32; n];
    let first = rng.random_range(0..n);
    let mut nearest: Vec<usize> = (0..n).map(|v| dissimilarity(g, first, v)).collect();
    for block in 1..k {
        let total: usize = nearest.iter().sum();
        let seed = if total == 0 {
            rng.random_range(0..n)
        } else {
            let mut ticket = rng.random_range(0..total);
            nearest
                .iter()
                .position(|&d| {
                    if ticket < d {
                        true
                    } else {
                        ticket -= d;
                        false
                    }
                })
                .expect("ticket below total")
        };
        for v in 0..n {
            let d = dissimilarity(g, seed, v);
            if d < nearest[v] || v == seed {
                nearest[v] = d;
                labels[v] = block as u32;
            }
        }
    }
    labels
}

fn run_restart(problem: &Problem<'_>, opts: &InferenceOptions, restart: usize) -> RestartOutcome {
    let n = problem.g.n_nodes();
    let k = problem.k;
    let mut rng = ChaCha8Rng::seed_from_u64(restart_seed(opts.seed, k, restart));
    let labels = seeded_labels(problem.g, k, &mut rng);
    let mut state = BlockState::new(problem, labels);
    let mut order: Vec<usize> = (0..n).collect();

    let mut sweeps_left = opts.max_sweeps;
    if opts.anneal {
        let anneal_sweeps = (opts.max_sweeps / 5).max(1).min(sweeps_left);
        let mut temp = 4.0;
        for _ in 0..anneal_sweeps {
            order.shuffle(&mut rng);
            state.anneal_sweep(&order, temp, &mut rng);
            temp *= 0.5;
        }
        sweeps_left = sweeps_left.saturating_sub(anneal_sweeps).max(1);
    }

    let mut trace = vec![state.objective()];
    for _ in 0..sweeps_left {
        order.shuffle(&mut rng);
        let moves = state.greedy_sweep(&order);
        state.rebuild();
        trace.push(state.objective());
        if moves == 0 {
            break;
        }
    }
    RestartOutcome {
        assignment: BlockAssignment::new(state.labels.clone(), k).expect("labels < k"),
        objective: state.objective(),
        trace,
    }
}

fn check_k(g: &GraphSnapshot, k: usize) -> Result<()> {
    if k == 0 || k > g.n_nodes() {
        return Err(BscError::invalid(format!(
            "block count k = {k} outside 1..={}",
            g.n_nodes()
        )));
    }
    Ok(())
}

/// All restarts of the greedy search, in restart order.
pub fn infer_restarts(
    g: &GraphSnapshot,
    k: usize,
    prior: &BetaLuckiness,
    opts: &InferenceOptions,
) -> Result<Vec<RestartOutcome>> {
    opts.validate()?;
    check_k(g, k)?;
    let problem = Problem::new(g, k, prior)?;
    Ok((0..opts.n_restarts)
        .into_par_iter()
        .map(|r| run_restart(&problem, opts, r))
        .collect())
}

/// Every assignment of `n` nodes to `k` blocks, node 0 as the most
/// significant digit.
fn for_each_assignment(n: usize, k: usize, mut f: impl FnMut(&[u32])) {
    let mut labels = vec![0u32; n];
    loop {
        f(&labels);
        let mut pos = n;
        loop {
            if pos == 0 {
                return;
            }
            pos -= 1;
            labels[pos] += 1;
            if (labels[pos] as usize) < k {
                break;
            }
            labels[pos] = 0;
        }
    }
}

fn exhaustive(problem: &Problem<'_>) -> BlockAssignment {
    let n = problem.g.n_nodes();
    let mut best: Option<(Vec<u32>, Bits)> = None;
    for_each_assignment(n, problem.k, |labels| {
        let value = BlockState::new(problem, labels.to_vec()).objective();
        if best
            .as_ref()
            .is_none_or(|(_, b)| value < *b - IMPROVEMENT_EPS)
        {
            best = Some((labels.to_vec(), value));
        }
    });
    let (labels, _) = best.expect("at least one assignment");
    BlockAssignment::new(labels, problem.k).expect("labels < k")
}

/// Infers a block assignment of `g` into `k` blocks.
///
/// Deterministic in `(g, k, prior, opts)`. An edgeless graph yields the
/// round-robin assignment.
pub fn infer_blocks(
    g: &GraphSnapshot,
    k: usize,
    prior: &BetaLuckiness,
    opts: &InferenceOptions,
) -> Result<BlockAssignment> {
    opts.validate()?;
    check_k(g, k)?;
    if k == 1 {
        return Ok(BlockAssignment::single_block(g.n_nodes()));
    }
    if opts.exhaustive {
        if g.n_nodes() > EXHAUSTIVE_MAX_NODES {
            return Err(BscError::invalid(format!(
                "exhaustive search is limited to {EXHAUSTIVE_MAX_NODES} nodes"
            )));
        }
        return Ok(exhaustive(&Problem::new(g, k, prior)?));
    }
    if g.n_edges() == 0 {
        return Ok(BlockAssignment::round_robin(g.n_nodes(), k));
    }
    let outcomes = infer_restarts(g, k, prior, opts)?;
    // First restart wins ties.
    let best = outcomes
        .into_iter()
        .reduce(|best, next| {
            if next.objective < best.objective {
                next
            } else {
                best
            }
        })
        .expect("n_restarts >= 1");
    Ok(best.assignment)
}

/// Total code-length the search assigns to `z` on `g` (same value the
/// summarizer reports, up to rounding).
pub fn assignment_objective(
    g: &GraphSnapshot,
    z: &BlockAssignment,
    prior: &BetaLuckiness,
) -> Result<Bits> {
    if z.len() != g.n_nodes() {
        return Err(BscError::invalid("assignment does not cover the graph"));
    }
    let problem = Problem::new(g, z.k(), prior)?;
    Ok(BlockState::new(&problem, z.labels().to_vec()).objective())
}
