//! Summary graphs: superedge decisions, the four-term code-length and the
//! choice of block count.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::codelen::{
    bernoulli_nml_codelen, bernoulli_nml_complexity, categorical_nml_codelen, counting_codelen,
    integer_codelen, lnml_codelen, BetaLuckiness, Bits,
};
use crate::error::{BscError, Result};
use crate::graph::{block_edge_counts, BlockAssignment, GraphSnapshot, SuperedgeMatrix};
use crate::infer::{infer_blocks, InferenceOptions};

/// The four additive terms of a summary's two-part code, in bits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CodeLenBreakdown {
    /// Integer code for the block count.
    pub l_k: Bits,
    /// NML code for the block assignment.
    pub l_z: Bits,
    /// LNML code for the superedge matrix.
    pub l_y: Bits,
    /// Code for the graph given the summary.
    pub l_x: Bits,
    pub total: Bits,
}

impl CodeLenBreakdown {
    pub fn new(l_k: Bits, l_z: Bits, l_y: Bits, l_x: Bits) -> Self {
        Self {
            l_k,
            l_z,
            l_y,
            l_x,
            total: l_k + l_z + l_y + l_x,
        }
    }

    /// Code-length of the summary alone, `l_k + l_z + l_y`.
    pub fn summary_bits(&self) -> Bits {
        self.l_k + self.l_z + self.l_y
    }
}

/// A summarized snapshot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryGraph {
    pub t: usize,
    pub k: usize,
    pub z: BlockAssignment,
    pub y: SuperedgeMatrix,
    /// Block proportions `n_k / N`.
    pub xi_hat: Vec<f64>,
    pub breakdown: CodeLenBreakdown,
}

/// Chooses between the Bernoulli NML code (superedge present) and the
/// counting code (absent) for one block pair. Ties go to "absent".
pub fn superedge_decision(m: u64, n: u64) -> Result<(bool, Bits)> {
    let nml = bernoulli_nml_codelen(m, n)?;
    let counting = counting_codelen(m, n)?;
    Ok(if nml < counting {
        (true, nml)
    } else {
        (false, counting)
    })
}

/// Fast superedge decisions for repeated use during inference.
///
/// Uses a cumulative log-factorial table covering every slot count up to
/// `max_slots`; results agree with [`superedge_decision`] to rounding.
#[derive(Debug, Clone)]
pub(crate) struct PairCoder {
    ln_fact: Vec<f64>,
}

impl PairCoder {
    pub(crate) fn new(max_slots: u64) -> Self {
        let mut ln_fact = Vec::with_capacity(max_slots as usize + 1);
        let mut acc = 0.0f64;
        ln_fact.push(0.0);
        for i in 1..=max_slots {
            acc += (i as f64).ln();
            ln_fact.push(acc);
        }
        Self { ln_fact }
    }

    pub(crate) fn decide(&self, m: u64, n: u64) -> (bool, Bits) {
        use std::f64::consts::LN_2;
        let (mu, nu) = (m as usize, n as usize);
        let ln_binom = self.ln_fact[nu] - self.ln_fact[mu] - self.ln_fact[nu - mu];
        let counting = ((n + 1) as f64).log2() + ln_binom / LN_2;
        let nf = n as f64;
        let xlog = |c: u64| {
            if c == 0 {
                0.0
            } else {
                let c = c as f64;
                -c * (c / nf).log2()
            }
        };
        let nml = xlog(m) + xlog(n - m) + bernoulli_nml_complexity(n);
        if nml < counting {
            (true, nml)
        } else {
            (false, counting)
        }
    }
}

/// Decides every superedge of `z` on `g` and evaluates the four code-length
/// terms.
pub fn summary_codelen(
    g: &GraphSnapshot,
    z: &BlockAssignment,
    prior: &BetaLuckiness,
) -> Result<(SuperedgeMatrix, CodeLenBreakdown)> {
    let k = z.k();
    let counts = block_edge_counts(g, z)?;
    let mut y = SuperedgeMatrix::empty(k);
    let mut l_x = 0.0;
    for l in 0..k {
        for m in 0..k {
            let c = counts[l * k + m];
            let (present, bits) = superedge_decision(c.present, c.slots)?;
            y.set(l, m, present);
            l_x += bits;
        }
    }
    let l_k = integer_codelen(k as u64)?;
    let l_z = categorical_nml_codelen(&z.block_sizes(), k as u64)?;
    let l_y = lnml_codelen(y.count_ones(), (k * k) as u64, prior)?;
    Ok((y, CodeLenBreakdown::new(l_k, l_z, l_y, l_x)))
}

/// Maximum-likelihood block proportions.
pub fn estimate_xi(z: &BlockAssignment) -> Vec<f64> {
    let n = z.len();
    z.block_sizes()
        .into_iter()
        .map(|c| if n == 0 { 0.0 } else { c as f64 / n as f64 })
        .collect()
}

/// Infers blocks at a fixed `k` and packages the summary.
pub fn summarize_at(
    g: &GraphSnapshot,
    k: usize,
    prior: &BetaLuckiness,
    opts: &InferenceOptions,
) -> Result<SummaryGraph> {
    let z = infer_blocks(g, k, prior, opts)?;
    let (y, breakdown) = summary_codelen(g, &z, prior)?;
    Ok(SummaryGraph {
        t: g.t(),
        k,
        xi_hat: estimate_xi(&z),
        z,
        y,
        breakdown,
    })
}

fn validate_kset(kset: &[usize], n_nodes: usize) -> Result<()> {
    if kset.is_empty() {
        return Err(BscError::invalid("candidate block-count set is empty"));
    }
    if let Some(&bad) = kset.iter().find(|&&k| k == 0 || k > n_nodes) {
        return Err(BscError::invalid(format!(
            "candidate k = {bad} outside 1..={n_nodes}"
        )));
    }
    Ok(())
}

/// Sorted, deduplicated copy of a candidate set.
pub(crate) fn canonical_kset(kset: &[usize]) -> Vec<usize> {
    let mut ks = kset.to_vec();
    ks.sort_unstable();
    ks.dedup();
    ks
}

/// Summaries for every candidate `k`, in ascending `k`.
pub fn summarize_candidates(
    g: &GraphSnapshot,
    kset: &[usize],
    prior: &BetaLuckiness,
    opts: &InferenceOptions,
) -> Result<Vec<SummaryGraph>> {
    validate_kset(kset, g.n_nodes())?;
    canonical_kset(kset)
        .into_par_iter()
        .map(|k| summarize_at(g, k, prior, opts))
        .collect()
}

/// Index of the candidate with the smallest total; ties go to the first.
pub(crate) fn best_candidate(candidates: &[SummaryGraph]) -> usize {
    let mut best = 0;
    for (i, c) in candidates.iter().enumerate().skip(1) {
        if c.breakdown.total < candidates[best].breakdown.total {
            best = i;
        }
    }
    best
}

/// Summarizes `g`, selecting the block count in `kset` with the shortest
/// total code-length (smallest `k` on ties).
pub fn build_summary(
    g: &GraphSnapshot,
    kset: &[usize],
    prior: &BetaLuckiness,
    opts: &InferenceOptions,
) -> Result<SummaryGraph> {
    let mut candidates = summarize_candidates(g, kset, prior, opts)?;
    let best = best_candidate(&candidates);
    Ok(candidates.swap_remove(best))
}
