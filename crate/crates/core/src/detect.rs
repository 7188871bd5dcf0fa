//! MDL change statistic, alarm threshold and the change test.

use serde::{Deserialize, Serialize};

use crate::codelen::{
    integer_codelen, lnml_complexity, log2_multinomial_complexity, BetaLuckiness, Bits,
};
use crate::error::{BscError, Result};
use crate::graph::GraphSnapshot;
use crate::infer::InferenceOptions;
use crate::summary::{summarize_candidates, CodeLenBreakdown, SummaryGraph};

/// One step of the online detector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChangeReport {
    pub t: usize,
    pub k_hat: usize,
    /// Shared block count of the concatenated code; `None` at the first step.
    pub k_concat: Option<usize>,
    pub phi: Option<Bits>,
    pub epsilon: Option<Bits>,
    pub alarm: bool,
    pub breakdown: CodeLenBreakdown,
    /// Code-length of the summary graph, `l_k + l_z + l_y`.
    pub summary_total: Bits,
    /// Code-length of graph plus summary (the four-term total).
    pub data_total: Bits,
}

/// Column order of the per-step report CSV.
pub const REPORT_CSV_HEADER: &str =
    "t,k_hat,k_concat,phi,epsilon,alarm,l_k,l_z,l_y,l_x,summary_total,data_total";

impl ChangeReport {
    /// One CSV row matching [`REPORT_CSV_HEADER`]; reals carry 6 decimals
    /// and unset fields are left empty.
    pub fn csv_row(&self) -> String {
        let opt_real = |v: Option<f64>| v.map(|x| format!("{x:.6}")).unwrap_or_default();
        let b = &self.breakdown;
        format!(
            "{},{},{},{},{},{},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6}",
            self.t,
            self.k_hat,
            self.k_concat.map(|k| k.to_string()).unwrap_or_default(),
            opt_real(self.phi),
            opt_real(self.epsilon),
            self.alarm as u8,
            b.l_k,
            b.l_z,
            b.l_y,
            b.l_x,
            self.summary_total,
            self.data_total
        )
    }
}

/// Full CSV document (header plus one row per report, LF-terminated).
pub fn reports_to_csv(reports: &[ChangeReport]) -> String {
    let mut out = String::from(REPORT_CSV_HEADER);
    out.push('\n');
    for r in reports {
        out.push_str(&r.csv_row());
        out.push('\n');
    }
    out
}

/// Value of the concatenated code and the change statistic at one step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChangeStatistic {
    pub k_concat: usize,
    pub concat: Bits,
    pub phi: Bits,
}

/// Minimizes the six-term concatenated code over candidates computed for the
/// two snapshots at the same ascending block counts.
pub(crate) fn concat_from_candidates(
    current: &[SummaryGraph],
    previous: &[SummaryGraph],
) -> Result<(usize, Bits)> {
    if current.is_empty() || current.len() != previous.len() {
        return Err(BscError::invalid("candidate lists differ in length"));
    }
    let mut best: Option<(usize, Bits)> = None;
    for (a, b) in current.iter().zip(previous) {
        if a.k != b.k {
            return Err(BscError::invalid(
                "candidate lists use different block counts",
            ));
        }
        let value = a.breakdown.summary_bits() + b.breakdown.summary_bits();
        if best.is_none_or(|(_, v)| value < v) {
            best = Some((a.k, value));
        }
    }
    Ok(best.expect("non-empty"))
}

/// Code-length of the two summaries encoded under one shared block count,
/// minimized over `kset` (smallest `k` on ties).
pub fn concat_codelen(
    g_t: &GraphSnapshot,
    g_prev: &GraphSnapshot,
    kset: &[usize],
    prior: &BetaLuckiness,
    opts: &InferenceOptions,
) -> Result<(usize, Bits)> {
    if g_t.n_nodes() != g_prev.n_nodes() {
        return Err(BscError::invalid(format!(
            "snapshots have different node counts ({} vs {})",
            g_t.n_nodes(),
            g_prev.n_nodes()
        )));
    }
    let current = summarize_candidates(g_t, kset, prior, opts)?;
    let previous = summarize_candidates(g_prev, kset, prior, opts)?;
    concat_from_candidates(&current, &previous)
}

/// `Phi_t`: concatenated code minus the two separate summary codes. May be
/// negative.
#[allow(clippy::too_many_arguments)]
pub fn change_statistic(
    g_t: &GraphSnapshot,
    g_prev: &GraphSnapshot,
    summary_t: &SummaryGraph,
    summary_prev: &SummaryGraph,
    kset: &[usize],
    prior: &BetaLuckiness,
    opts: &InferenceOptions,
) -> Result<ChangeStatistic> {
    let (k_concat, concat) = concat_codelen(g_t, g_prev, kset, prior, opts)?;
    Ok(ChangeStatistic {
        k_concat,
        concat,
        phi: concat - (summary_t.breakdown.summary_bits() + summary_prev.breakdown.summary_bits()),
    })
}

/// Smallest threshold keeping the false-alarm probability below `delta`:
///
/// `log C_{Y|Z}(lambda, k0) + log C_Z(N, k0) + (L_N(k0) - log delta) / 2`.
pub fn threshold(prior: &BetaLuckiness, delta: f64, k0: usize, n_nodes: usize) -> Result<Bits> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(BscError::invalid(format!(
            "delta must lie in (0, 1), got {delta}"
        )));
    }
    if k0 == 0 {
        return Err(BscError::invalid("k0 must be >= 1"));
    }
    let k0 = k0 as u64;
    Ok(lnml_complexity(k0 * k0, prior)
        + log2_multinomial_complexity(n_nodes as u64, k0)?
        + (integer_codelen(k0)? - delta.log2()) / 2.0)
}

/// Alarm iff `phi` strictly exceeds `epsilon`.
pub fn mdl_change_test(phi: Bits, epsilon: Bits) -> bool {
    phi > epsilon
}
