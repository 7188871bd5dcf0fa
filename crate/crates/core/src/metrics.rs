//! Evaluation metrics over repeated trials: Type I/II error rates,
//! benefit-based AUC and code-length at a given step.

use serde::{Deserialize, Serialize};

use crate::codelen::Bits;
use crate::detect::ChangeReport;
use crate::error::{BscError, Result};

/// Change scores of one trial, one `(t, score)` per tested step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialScores {
    pub scores: Vec<(usize, f64)>,
    pub t_star: usize,
}

impl TrialScores {
    /// Scores `phi_t - epsilon_t` from detector reports; compare against 0.
    pub fn margins(reports: &[ChangeReport], t_star: usize) -> Self {
        Self {
            scores: reports
                .iter()
                .filter_map(|r| Some((r.t, r.phi? - r.epsilon?)))
                .collect(),
            t_star,
        }
    }

    /// Raw `phi_t` scores from detector reports.
    pub fn phis(reports: &[ChangeReport], t_star: usize) -> Self {
        Self {
            scores: reports.iter().filter_map(|r| Some((r.t, r.phi?))).collect(),
            t_star,
        }
    }
}

/// Fraction of trials with a false alarm (`s >= epsilon` at
/// `|t - t*| >= tau`) and fraction missing the change (every `s < epsilon`
/// for `|t - t*| < tau`).
pub fn type_errors(trials: &[TrialScores], epsilon: f64, tau: usize) -> Result<(f64, f64)> {
    if tau == 0 {
        return Err(BscError::invalid("tau must be >= 1"));
    }
    if trials.is_empty() {
        return Err(BscError::invalid("no trials"));
    }
    let mut false_alarm = 0usize;
    let mut missed = 0usize;
    for trial in trials {
        let inside = |t: usize| t.abs_diff(trial.t_star) < tau;
        if trial
            .scores
            .iter()
            .any(|&(t, s)| !inside(t) && s >= epsilon)
        {
            false_alarm += 1;
        }
        if trial.scores.iter().all(|&(t, s)| !inside(t) || s < epsilon) {
            missed += 1;
        }
    }
    let n = trials.len() as f64;
    Ok((false_alarm as f64 / n, missed as f64 / n))
}

/// Benefit of an alarm at `t`: `1 - |t - t*| / T_b` inside the tolerance
/// window, 0 outside.
pub fn benefit(t: usize, t_star: usize, tolerance: usize) -> f64 {
    let offset = t.abs_diff(t_star);
    if offset < tolerance {
        1.0 - offset as f64 / tolerance as f64
    } else {
        0.0
    }
}

/// Area under the recall-of-benefit vs false-alarm-rate curve, sweeping the
/// alarm threshold over every observed score.
///
/// If every score is equal the sweep has no interior point; the result is
/// then 1.0 when alarming everywhere earns benefit without false alarms and
/// 0.5 otherwise.
pub fn benefit_auc(trial: &TrialScores, t_star: usize, tolerance: usize) -> Result<f64> {
    if tolerance == 0 {
        return Err(BscError::invalid("benefit tolerance T_b must be >= 1"));
    }
    let mut thresholds: Vec<f64> = trial.scores.iter().map(|&(_, s)| s).collect();
    if thresholds.iter().any(|s| s.is_nan()) {
        return Err(BscError::invalid("NaN change score"));
    }
    thresholds.sort_by(f64::total_cmp);
    thresholds.dedup();

    let evaluate = |eps: f64| -> (f64, f64) {
        trial
            .scores
            .iter()
            .filter(|&&(_, s)| s > eps)
            .fold((0.0, 0.0), |(b, fa), &(t, _)| {
                let gain = benefit(t, t_star, tolerance);
                (b + gain, fa + if gain == 0.0 { 1.0 } else { 0.0 })
            })
    };
    let (sup_benefit, sup_fa) = evaluate(f64::NEG_INFINITY);

    if thresholds.len() <= 1 {
        return Ok(if sup_benefit > 0.0 && sup_fa == 0.0 {
            1.0
        } else {
            0.5
        });
    }

    let normalize = |x: f64, sup: f64| if sup > 0.0 { x / sup } else { 0.0 };
    let mut curve: Vec<(f64, f64)> = vec![(0.0, 0.0), (1.0, 1.0)];
    for eps in std::iter::once(f64::NEG_INFINITY).chain(thresholds.iter().copied()) {
        let (b, fa) = evaluate(eps);
        curve.push((normalize(fa, sup_fa), normalize(b, sup_benefit)));
    }
    curve.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let area = curve
        .windows(2)
        .map(|w| (w[1].0 - w[0].0) * (w[0].1 + w[1].1) / 2.0)
        .sum();
    Ok(area)
}

/// Summary code-length reported at step `t`.
pub fn compression_at(reports: &[ChangeReport], t: usize) -> Result<Bits> {
    reports
        .iter()
        .find(|r| r.t == t)
        .map(|r| r.summary_total)
        .ok_or_else(|| BscError::NotFound(format!("no report at t={t}")))
}

/// Mean and sample standard deviation (0 for fewer than two values).
pub fn mean_sd(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}
