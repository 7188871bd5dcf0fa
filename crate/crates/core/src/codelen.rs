//! Code-lengths and parametric complexities, all in bits.
//!
//! Everything here is a pure function of its arguments. The Bernoulli NML
//! normalizer is memoized process-wide because the block inference asks for
//! the same slot counts many thousands of times.

use std::collections::HashMap;
use std::f64::consts::LN_2;
use std::sync::{OnceLock, RwLock};

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{BscError, Result};

/// A code-length in bits.
pub type Bits = f64;

/// Normalizing constant of the universal code for positive integers.
pub const INTEGER_CODE_CONSTANT: f64 = 2.865;

/// Beta luckiness `rho^(a-1) (1-rho)^(b+lambda-1)` on the superedge density.
///
/// `lambda` inflates the second shape parameter, pulling the superedge
/// density toward zero (sparser summaries) as it grows.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BetaLuckiness {
    pub a: f64,
    pub b: f64,
    pub lambda: f64,
}

impl BetaLuckiness {
    pub fn new(a: f64, b: f64, lambda: f64) -> Result<Self> {
        let positive = |x: f64| x.is_finite() && x > 0.0;
        if !positive(a) || !positive(b) || !positive(lambda) {
            return Err(BscError::invalid(format!(
                "beta luckiness requires a, b, lambda > 0 (got a={a}, b={b}, lambda={lambda})"
            )));
        }
        Ok(Self { a, b, lambda })
    }

    /// Default shape `(a, b) = (0.5, 0.5)` with the given balancing parameter.
    pub fn with_lambda(lambda: f64) -> Result<Self> {
        Self::new(0.5, 0.5, lambda)
    }

    /// True when the luckiness stays finite on `[0, 1]`.
    pub fn is_bounded(&self) -> bool {
        self.a >= 1.0 && self.b + self.lambda >= 1.0
    }

    /// Natural log of the (unnormalized) luckiness at `rho`.
    fn ln_weight(&self, rho: f64) -> f64 {
        xlny(self.a - 1.0, rho) + xlny(self.b + self.lambda - 1.0, 1.0 - rho)
    }
}

/// `x * ln(y)` with the convention `0 * ln 0 = 0`.
fn xlny(x: f64, y: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * y.ln()
    }
}

fn ln_binomial(n: u64, m: u64) -> f64 {
    if m == 0 || m == n {
        return 0.0;
    }
    ln_gamma(n as f64 + 1.0) - ln_gamma(m as f64 + 1.0) - ln_gamma((n - m) as f64 + 1.0)
}

/// Numerically stable `ln(exp(a) + exp(b))`.
fn ln_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

fn ln_sum_exp(terms: &[f64]) -> f64 {
    let max = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + terms.iter().map(|t| (t - max).exp()).sum::<f64>().ln()
}

/// Rissanen's universal code-length for a positive integer:
/// `2.865 + log k + log log k + ...` over the strictly positive terms.
pub fn integer_codelen(k: u64) -> Result<Bits> {
    if k == 0 {
        return Err(BscError::invalid("integer code is defined for k >= 1"));
    }
    let mut total = INTEGER_CODE_CONSTANT;
    let mut term = (k as f64).log2();
    while term > 0.0 {
        total += term;
        term = term.log2();
    }
    Ok(total)
}

/// Empirical entropy `-sum c log2(c/N)` in bits, with `0 log 0 = 0`.
pub(crate) fn entropy_bits(counts: impl IntoIterator<Item = u64>, total: u64) -> Bits {
    if total == 0 {
        return 0.0;
    }
    let n = total as f64;
    counts
        .into_iter()
        .filter(|&c| c > 0)
        .map(|c| {
            let c = c as f64;
            -c * (c / n).log2()
        })
        .sum()
}

static BERNOULLI_CACHE: OnceLock<RwLock<HashMap<u64, f64>>> = OnceLock::new();

/// Natural log of the binary NML normalizer over `n` trials.
fn ln_bernoulli_normalizer(n: u64) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let cache = BERNOULLI_CACHE.get_or_init(|| RwLock::new(HashMap::new()));
    if let Some(&v) = cache.read().expect("cache poisoned").get(&n) {
        return v;
    }
    let v = ln_bernoulli_normalizer_uncached(n);
    cache.write().expect("cache poisoned").insert(n, v);
    v
}

// Every term is <= 1 (the m = 0 term is exactly 1), so a plain sum is safe.
// Terms are symmetric in m <-> n - m; only the lower half is walked.
fn ln_bernoulli_normalizer_uncached(n: u64) -> f64 {
    let nf = n as f64;
    let ln_n = nf.ln();
    let mut ln_binom = 0.0;
    let mut sum = 0.0;
    for m in 0..=n / 2 {
        if m > 0 {
            ln_binom += ((n - m + 1) as f64).ln() - (m as f64).ln();
        }
        let mf = m as f64;
        let rest = nf - mf;
        let ln_term = ln_binom
            + if m > 0 { mf * (mf.ln() - ln_n) } else { 0.0 }
            + if rest > 0.0 {
                rest * (rest.ln() - ln_n)
            } else {
                0.0
            };
        let weight = if 2 * m == n { 1.0 } else { 2.0 };
        sum += weight * ln_term.exp();
    }
    sum.ln()
}

/// `log2` of the multinomial NML normalizer `C_Z(N, k)`.
///
/// Uses the linear recursion `C(N,k) = C(N,k-1) + N/(k-2) C(N,k-2)` seeded
/// with `C(N,1) = 1` and the binary normalizer, carried out in log space.
pub fn log2_multinomial_complexity(n: u64, k: u64) -> Result<Bits> {
    if k == 0 {
        return Err(BscError::invalid("multinomial complexity needs k >= 1"));
    }
    if k == 1 || n == 0 {
        return Ok(0.0);
    }
    let mut prev = 0.0; // ln C(N, 1)
    let mut cur = ln_bernoulli_normalizer(n); // ln C(N, 2)
    let ln_n = (n as f64).ln();
    for j in 3..=k {
        let next = ln_add_exp(cur, ln_n - ((j - 2) as f64).ln() + prev);
        prev = cur;
        cur = next;
    }
    Ok(cur / LN_2)
}

/// The raw multinomial normalizer `C_Z(N, k)` (not its log).
pub fn multinomial_complexity(n: u64, k: u64) -> Result<f64> {
    log2_multinomial_complexity(n, k).map(f64::exp2)
}

/// NML code-length of a block assignment with the given block sizes.
pub fn categorical_nml_codelen(counts: &[u64], k: u64) -> Result<Bits> {
    if counts.len() as u64 != k {
        return Err(BscError::invalid(format!(
            "{} block counts given for k = {k}",
            counts.len()
        )));
    }
    let total: u64 = counts.iter().sum();
    Ok(entropy_bits(counts.iter().copied(), total) + log2_multinomial_complexity(total, k)?)
}

/// `log2` of the Bernoulli NML normalizer over `n` trials; 0 when `n = 0`.
pub fn bernoulli_nml_complexity(n: u64) -> Bits {
    ln_bernoulli_normalizer(n) / LN_2
}

fn check_count(m: u64, n: u64) -> Result<()> {
    if m > n {
        return Err(BscError::invalid(format!("count {m} exceeds trials {n}")));
    }
    Ok(())
}

/// Bernoulli NML code-length of a binary sequence with `m` ones in `n` trials.
pub fn bernoulli_nml_codelen(m: u64, n: u64) -> Result<Bits> {
    check_count(m, n)?;
    Ok(entropy_bits([m, n - m], n) + bernoulli_nml_complexity(n))
}

/// Two-part counting code: `log2(n+1) + log2 binom(n, m)`.
pub fn counting_codelen(m: u64, n: u64) -> Result<Bits> {
    check_count(m, n)?;
    Ok(((n + 1) as f64).log2() + ln_binomial(n, m) / LN_2)
}

/// Maximizer of `rho^m (1-rho)^(n-m)` times the luckiness.
///
/// A bounded luckiness (`a >= 1` and `b + lambda >= 1`) is maximized over
/// `[0, 1]`. Otherwise the luckiness blows up at a boundary and the search
/// is restricted to `[1/(2n), 1 - 1/(2n)]` for every count, so the clamp is
/// applied consistently across the whole normalizer.
pub fn lnml_estimator(m: u64, n: u64, prior: &BetaLuckiness) -> Result<f64> {
    if n == 0 {
        return Err(BscError::invalid("LNML estimator needs n >= 1"));
    }
    check_count(m, n)?;
    let alpha = m as f64 + prior.a - 1.0;
    let beta = (n - m) as f64 + prior.b + prior.lambda - 1.0;
    let (lo, hi) = if prior.is_bounded() {
        (0.0, 1.0)
    } else {
        let rho_min = 1.0 / (2.0 * n as f64);
        (rho_min, 1.0 - rho_min)
    };
    let rho = if alpha > 0.0 && beta > 0.0 {
        (alpha / (alpha + beta)).clamp(lo, hi)
    } else if alpha <= 0.0 && beta <= 0.0 {
        // Convex (or flat) objective: the better endpoint, `lo` on ties.
        let f = |r: f64| xlny(alpha, r) + xlny(beta, 1.0 - r);
        if f(hi) > f(lo) {
            hi
        } else {
            lo
        }
    } else if alpha <= 0.0 {
        lo
    } else {
        hi
    };
    Ok(rho)
}

/// Natural log of `rho^m (1-rho)^(n-m) w(rho)` at the LNML estimate.
fn ln_penalized_max(m: u64, n: u64, prior: &BetaLuckiness) -> Result<f64> {
    let rho = lnml_estimator(m, n, prior)?;
    Ok(xlny(m as f64, rho) + xlny((n - m) as f64, 1.0 - rho) + prior.ln_weight(rho))
}

/// `log2` of the LNML normalizer over all binary sequences of length `n`.
pub fn lnml_complexity(n: u64, prior: &BetaLuckiness) -> Bits {
    if n == 0 {
        return 0.0;
    }
    let terms: Vec<f64> = (0..=n)
        .map(|m| ln_binomial(n, m) + ln_penalized_max(m, n, prior).expect("m <= n and n >= 1"))
        .collect();
    ln_sum_exp(&terms) / LN_2
}

/// LNML code-length of a binary sequence with `m` ones among `n` slots.
pub fn lnml_codelen(m: u64, n: u64, prior: &BetaLuckiness) -> Result<Bits> {
    let fit = ln_penalized_max(m, n, prior)?;
    Ok(-fit / LN_2 + lnml_complexity(n, prior))
}

/// `lnml_codelen(m, n, prior)` for every `m` in `0..=n`, sharing one
/// normalizer evaluation.
pub fn lnml_codelen_table(n: u64, prior: &BetaLuckiness) -> Result<Vec<Bits>> {
    if n == 0 {
        return Err(BscError::invalid("LNML table needs n >= 1"));
    }
    let complexity = lnml_complexity(n, prior);
    (0..=n)
        .map(|m| Ok(-ln_penalized_max(m, n, prior)? / LN_2 + complexity))
        .collect()
}
