//! Weighted multiple testing procedures.
//!
//! Every procedure takes p-values `P` and weights `W` with `sum W = m` and
//! compares `P_i` against a per-hypothesis threshold that scales with `W_i`.
//! A hypothesis with `W_i = 0` can only be rejected when `P_i = 0`
//! (the weighted p-value `P_i / W_i` is `+inf` for `P_i > 0` and 0 for `0/0`).
//!
//! Holm and Šidák are applied fold by fold at level `alpha * |I_l| / m` and
//! the rejections are pooled, which is what keeps them valid when the weights
//! come from cross-weighting.

use crate::error::{check_len, check_level, IhwError, Result};
use crate::hypothesis::FoldPartition;

/// Which procedure produced a [`TestOutcome`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProcedureId {
    Bonferroni,
    KBonferroni { k: usize },
    Holm,
    Sidak,
    /// Weighted step-up; BH or BY depending on the reshaping, censored when
    /// `tau < 1`.
    StepUp,
    /// Conditional local fdr step-up.
    Cfdr,
}

/// Reshaping of the rejection count in the step-up rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Reshaping {
    /// `beta(r) = r` (Benjamini-Hochberg).
    Identity,
    /// `beta(r) = r / H_m` (Benjamini-Yekutieli).
    Harmonic,
}

impl Reshaping {
    /// Constant `c` with `beta(r) = r / c` for a problem of size `m`.
    pub fn divisor(self, m: usize) -> f64 {
        match self {
            Reshaping::Identity => 1.0,
            Reshaping::Harmonic => harmonic_number(m),
        }
    }

    pub fn beta(self, r: usize, m: usize) -> f64 {
        r as f64 / self.divisor(m)
    }
}

pub fn harmonic_number(m: usize) -> f64 {
    (1..=m).rev().map(|k| 1.0 / k as f64).sum()
}

/// Result of one weighted testing step.
#[derive(Debug, Clone, PartialEq)]
pub struct TestOutcome {
    pub rejected: Vec<bool>,
    /// Number of rejections.
    pub k_star: usize,
    /// Threshold each p-value was compared against.
    pub thresholds: Vec<f64>,
    pub procedure: ProcedureId,
    pub alpha: f64,
    pub tau: Option<f64>,
    pub reshaping: Option<Reshaping>,
}

impl TestOutcome {
    pub fn discoveries(&self) -> usize {
        self.k_star
    }

    pub fn rejected_indices(&self) -> Vec<usize> {
        (0..self.rejected.len()).filter(|&i| self.rejected[i]).collect()
    }

    fn from_thresholds(
        pvalues: &[f64],
        thresholds: Vec<f64>,
        procedure: ProcedureId,
        alpha: f64,
    ) -> Self {
        let rejected: Vec<bool> = pvalues.iter().zip(&thresholds).map(|(p, t)| p <= t).collect();
        let k_star = rejected.iter().filter(|&&r| r).count();
        TestOutcome {
            rejected,
            k_star,
            thresholds,
            procedure,
            alpha,
            tau: None,
            reshaping: None,
        }
    }
}

/// `P_i / W_i` with `P/0 = +inf` for `P > 0` and `0/0 = 0`.
pub fn weighted_pvalue(p: f64, w: f64) -> f64 {
    if w > 0.0 {
        p / w
    } else if p > 0.0 {
        f64::INFINITY
    } else {
        0.0
    }
}

fn check_inputs(pvalues: &[f64], weights: &[f64], alpha: f64) -> Result<()> {
    check_len(pvalues.len(), weights.len())?;
    check_level(alpha)?;
    if let Some((index, &value)) = weights
        .iter()
        .enumerate()
        .find(|(_, w)| !(w.is_finite() && **w >= 0.0))
    {
        return Err(IhwError::NegativeWeight { index, value });
    }
    Ok(())
}

/// Rejects `P_i <= alpha * W_i / m`.
pub fn weighted_bonferroni(pvalues: &[f64], weights: &[f64], alpha: f64) -> Result<TestOutcome> {
    check_inputs(pvalues, weights, alpha)?;
    Ok(bonferroni_at(pvalues, weights, alpha, ProcedureId::Bonferroni))
}

fn bonferroni_at(pvalues: &[f64], weights: &[f64], level: f64, id: ProcedureId) -> TestOutcome {
    let m = pvalues.len() as f64;
    let thresholds = weights.iter().map(|w| level * w / m).collect();
    TestOutcome::from_thresholds(pvalues, thresholds, id, level)
}

/// Weighted Bonferroni at level `k * alpha`, which controls the k-FWER.
pub fn k_bonferroni(
    pvalues: &[f64],
    weights: &[f64],
    alpha: f64,
    k: usize,
) -> Result<TestOutcome> {
    if k == 0 {
        return Err(IhwError::InvalidConfig("k must be at least 1".into()));
    }
    check_inputs(pvalues, weights, alpha)?;
    let level = k as f64 * alpha;
    check_level(level)?;
    let mut out = bonferroni_at(pvalues, weights, level, ProcedureId::KBonferroni { k });
    out.alpha = alpha;
    Ok(out)
}

fn fold_level(alpha: f64, fold_size: usize, m: usize) -> f64 {
    alpha * fold_size as f64 / m as f64
}

/// Fold-aware weighted Holm step-down.
pub fn weighted_holm(
    pvalues: &[f64],
    weights: &[f64],
    alpha: f64,
    partition: &FoldPartition,
) -> Result<TestOutcome> {
    check_inputs(pvalues, weights, alpha)?;
    check_len(pvalues.len(), partition.m())?;
    let m = pvalues.len();
    let mut thresholds = vec![0.0; m];
    let mut rejected = vec![false; m];
    for fold in partition.members() {
        let level = fold_level(alpha, fold.len(), m);
        let mut order = fold.clone();
        order.sort_by(|&a, &b| {
            weighted_pvalue(pvalues[a], weights[a]).total_cmp(&weighted_pvalue(pvalues[b], weights[b]))
        });
        // remaining[l] = total weight of order[l..]
        let mut remaining = vec![0.0; order.len() + 1];
        for l in (0..order.len()).rev() {
            remaining[l] = remaining[l + 1] + weights[order[l]];
        }
        let step_bound = |l: usize, w: f64| {
            if remaining[l] > 0.0 {
                w * (level / remaining[l])
            } else {
                0.0
            }
        };
        let passed = order
            .iter()
            .enumerate()
            .take_while(|&(l, &i)| pvalues[i] <= step_bound(l, weights[i]))
            .count();
        // Level of the step at which the procedure stopped; every rejected
        // hypothesis passed a step with a smaller or equal level.
        let stop = if remaining[passed] > 0.0 {
            passed
        } else {
            passed.saturating_sub(1)
        };
        for &i in &fold {
            thresholds[i] = step_bound(stop, weights[i]);
        }
        for (l, &i) in order.iter().enumerate().take(passed) {
            thresholds[i] = thresholds[i].max(step_bound(l, weights[i]));
            rejected[i] = true;
        }
    }
    let k_star = rejected.iter().filter(|&&r| r).count();
    Ok(TestOutcome {
        rejected,
        k_star,
        thresholds,
        procedure: ProcedureId::Holm,
        alpha,
        tau: None,
        reshaping: None,
    })
}

/// Fold-aware weighted Šidák: `P_i <= 1 - (1 - alpha_l)^(W_i / |I_l|)`.
///
/// Needs independent null p-values within a fold; this is not checked.
pub fn weighted_sidak(
    pvalues: &[f64],
    weights: &[f64],
    alpha: f64,
    partition: &FoldPartition,
) -> Result<TestOutcome> {
    check_inputs(pvalues, weights, alpha)?;
    check_len(pvalues.len(), partition.m())?;
    let m = pvalues.len();
    let mut thresholds = vec![0.0; m];
    for fold in partition.members() {
        let level = fold_level(alpha, fold.len(), m);
        let n = fold.len() as f64;
        for &i in &fold {
            thresholds[i] = sidak_threshold(level, weights[i] / n);
        }
    }
    Ok(TestOutcome::from_thresholds(pvalues, thresholds, ProcedureId::Sidak, alpha))
}

/// `1 - (1 - level)^exponent`, accurate for small levels.
pub fn sidak_threshold(level: f64, exponent: f64) -> f64 {
    -(exponent * (-level).ln_1p()).exp_m1()
}

#[inline]
fn step_up_threshold(level: f64, w: f64, k: usize, m: usize, tau: f64) -> f64 {
    (level * w * k as f64 / m as f64).min(tau)
}

/// Weighted step-up: reject `P_i <= (alpha W_i beta(k*) / m) ∧ tau` where
/// `k* = max{k : #{i : P_i <= (alpha W_i beta(k) / m) ∧ tau} >= k}`.
///
/// `tau = None` means no censoring. BY is computed as BH at level
/// `alpha / H_m`, so the two agree bit for bit.
pub fn weighted_bh(
    pvalues: &[f64],
    weights: &[f64],
    alpha: f64,
    reshaping: Reshaping,
    censor_tau: Option<f64>,
) -> Result<TestOutcome> {
    check_inputs(pvalues, weights, alpha)?;
    if let Some(tau) = censor_tau {
        if !(tau > 0.0 && tau <= 1.0) {
            return Err(IhwError::InvalidConfig(format!("tau must lie in (0, 1], got {tau}")));
        }
    }
    let m = pvalues.len();
    let tau = censor_tau.unwrap_or(1.0);
    let level = alpha / reshaping.divisor(m);

    let mut candidates: Vec<(f64, usize)> = (0..m)
        .filter(|&i| pvalues[i] <= tau)
        .map(|i| (weighted_pvalue(pvalues[i], weights[i]), i))
        .filter(|(q, _)| q.is_finite())
        .collect();
    candidates.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let k_star = candidates
        .iter()
        .enumerate()
        .filter(|&(j, &(_, i))| pvalues[i] <= step_up_threshold(level, weights[i], j + 1, m, tau))
        .map(|(j, _)| j + 1)
        .last()
        .unwrap_or(0);

    let thresholds = weights
        .iter()
        .map(|&w| step_up_threshold(level, w, k_star, m, tau))
        .collect();
    let mut out = TestOutcome::from_thresholds(pvalues, thresholds, ProcedureId::StepUp, alpha);
    out.tau = censor_tau;
    out.reshaping = Some(reshaping);
    Ok(out)
}

/// Weighted Storey-type null proportion estimate for one fold:
/// `(max W + sum W 1{P > tau'}) / (n (1 - tau'))`.
pub fn storey_pi0(pvalues: &[f64], weights: &[f64], tau_prime: f64) -> Result<f64> {
    check_len(pvalues.len(), weights.len())?;
    if pvalues.is_empty() {
        return Err(IhwError::EmptyInput);
    }
    if !(0.0..1.0).contains(&tau_prime) {
        return Err(IhwError::InvalidTauPrime { tau: 0.0, tau_prime });
    }
    let max_w = weights.iter().copied().fold(0.0, f64::max);
    let above: f64 = pvalues
        .iter()
        .zip(weights)
        .filter(|(p, _)| **p > tau_prime)
        .map(|(_, w)| w)
        .sum();
    Ok((max_w + above) / (pvalues.len() as f64 * (1.0 - tau_prime)))
}
