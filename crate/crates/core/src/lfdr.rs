//! Conditional local fdr and the Cfdr step-up procedure.
//!
//! `lfdr(t | x) = pi0(x) / f(t | x)` with `f` the Grenander density of the
//! hypothesis' bin. The density is `+inf` at `t = 0`, so a zero p-value gets
//! lfdr 0; a zero density gives `+inf`.
//!
//! This is a diagnostic. Unlike the censored procedure it carries no
//! finite-sample guarantee when the model is misspecified.

use crate::error::{check_len, check_level, IhwError, Result};
use crate::learner::ConditionalModel;
use crate::procedures::{ProcedureId, TestOutcome};

/// Local fdr of each hypothesis, in `[0, +inf]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LfdrEstimate {
    pub values: Vec<f64>,
}

pub fn conditional_lfdr(
    model: &ConditionalModel,
    pvalues: &[f64],
    bins: &[usize],
) -> Result<LfdrEstimate> {
    check_len(pvalues.len(), bins.len())?;
    let values = pvalues
        .iter()
        .zip(bins)
        .map(|(&p, &b)| {
            let cdf = model.per_bin_cdf.get(b).ok_or_else(|| {
                IhwError::InvalidConfig(format!("bin {b} out of range for {} bins", model.n_bins()))
            })?;
            let pi0 = model.per_bin_pi0[b];
            let density = cdf.eval_density(p)?;
            Ok(if pi0 == 0.0 || density == f64::INFINITY {
                0.0
            } else {
                pi0 / density
            })
        })
        .collect::<Result<_>>()?;
    Ok(LfdrEstimate { values })
}

/// Rejects every hypothesis with `lfdr <= lfdr_(k*)`, where `k*` is the
/// largest `k` whose `k` smallest lfdr values average at most `alpha`.
///
/// Tied values are rejected together, so the rejection count may exceed
/// `k*`; `k_star` in the outcome is the actual count. Thresholds are on the
/// lfdr scale (`-inf` when nothing is rejected).
pub fn cfdr_procedure(lfdr: &LfdrEstimate, alpha: f64) -> Result<TestOutcome> {
    check_level(alpha)?;
    let values = &lfdr.values;
    if let Some((index, &value)) = values.iter().enumerate().find(|(_, v)| !(**v >= 0.0)) {
        return Err(IhwError::NegativeWeight { index, value });
    }
    let mut sorted = values.clone();
    sorted.sort_by(f64::total_cmp);
    let mut sum = 0.0;
    let mut k_star = 0;
    for (k, v) in sorted.iter().enumerate() {
        sum += v;
        if sum / (k + 1) as f64 <= alpha {
            k_star = k + 1;
        }
    }
    let cut = if k_star == 0 {
        f64::NEG_INFINITY
    } else {
        sorted[k_star - 1]
    };
    let rejected: Vec<bool> = values.iter().map(|&v| v <= cut).collect();
    Ok(TestOutcome {
        k_star: rejected.iter().filter(|&&r| r).count(),
        rejected,
        thresholds: vec![cut; values.len()],
        procedure: ProcedureId::Cfdr,
        alpha,
        tau: None,
        reshaping: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grenander::GrenanderCdf;
    use proptest::prelude::*;

    fn model(cdfs: Vec<GrenanderCdf>) -> ConditionalModel {
        let n = cdfs.len();
        ConditionalModel {
            per_bin_cdf: cdfs,
            per_bin_pi0: vec![1.0; n],
            per_bin_mass: vec![1.0 / n as f64; n],
            pooled_fallback: vec![false; n],
        }
    }

    fn lfdr(v: &[f64]) -> LfdrEstimate {
        LfdrEstimate { values: v.to_vec() }
    }

    #[test]
    fn uniform_bin_has_lfdr_one() {
        let m = model(vec![GrenanderCdf::identity()]);
        let est = conditional_lfdr(&m, &[0.1, 0.5, 1.0], &[0, 0, 0]).unwrap();
        assert_eq!(est.values, vec![1.0; 3]);
    }

    #[test]
    fn single_point_grenander() {
        let m = model(vec![GrenanderCdf::from_pvalues(&[0.5]).unwrap()]);
        let est = conditional_lfdr(&m, &[0.25, 0.75, 0.0], &[0, 0, 0]).unwrap();
        assert_eq!(est.values[0], 0.5);
        assert_eq!(est.values[1], f64::INFINITY);
        assert_eq!(est.values[2], 0.0);
    }

    #[test]
    fn running_mean_example() {
        let out = cfdr_procedure(&lfdr(&[0.01, 0.05, 0.2, 0.5]), 0.1).unwrap();
        assert_eq!(out.rejected, vec![true, true, true, false]);
        assert_eq!(out.k_star, 3);
        assert_eq!(out.procedure, ProcedureId::Cfdr);
    }

    #[test]
    fn nothing_small_enough() {
        let out = cfdr_procedure(&lfdr(&[0.3, 0.2, f64::INFINITY]), 0.1).unwrap();
        assert_eq!(out.k_star, 0);
        assert!(out.rejected.iter().all(|r| !r));
    }

    #[test]
    fn zero_lfdr_rejects_everything() {
        let out = cfdr_procedure(&lfdr(&[0.0; 5]), 0.05).unwrap();
        assert_eq!(out.k_star, 5);
    }

    #[test]
    fn ties_are_rejected_together() {
        // means 0.05, 0.1, 0.1333: k* = 2 but the third value ties the second
        let out = cfdr_procedure(&lfdr(&[0.05, 0.15, 0.15, 0.9]), 0.1).unwrap();
        assert_eq!(out.rejected, vec![true, true, true, false]);
        assert_eq!(out.k_star, 3);
    }

    #[test]
    fn bad_inputs() {
        assert!(cfdr_procedure(&lfdr(&[0.1]), 1.5).is_err());
        assert!(cfdr_procedure(&lfdr(&[-0.1]), 0.1).is_err());
        let m = model(vec![GrenanderCdf::identity()]);
        assert!(conditional_lfdr(&m, &[0.1], &[1]).is_err());
        assert!(conditional_lfdr(&m, &[0.1], &[0, 0]).is_err());
    }

    proptest! {
        #[test]
        fn prefixes_up_to_k_star_have_small_means(v in prop::collection::vec(0.0f64..1.0, 1..30), alpha in 0.01f64..0.5) {
            let out = cfdr_procedure(&lfdr(&v), alpha).unwrap();
            let mut sorted = v.clone();
            sorted.sort_by(f64::total_cmp);
            let rejected: Vec<f64> = v.iter().zip(&out.rejected).filter(|(_, r)| **r).map(|(x, _)| *x).collect();
            if !rejected.is_empty() {
                let k = rejected.len();
                // the rejected set is a prefix of the sorted values
                let mut r = rejected.clone();
                r.sort_by(f64::total_cmp);
                prop_assert_eq!(&r[..], &sorted[..k]);
            }
            // the definition of k*: some prefix of length >= 1 has mean <= alpha iff anything is rejected
            let any = (1..=v.len()).any(|k| sorted[..k].iter().sum::<f64>() / k as f64 <= alpha);
            prop_assert_eq!(any, out.k_star > 0);
        }

        #[test]
        fn lfdr_is_monotone_within_a_bin(p in prop::collection::vec(0.0f64..=1.0, 1..40), q in prop::collection::vec(0.0f64..=1.0, 2..20)) {
            let m = model(vec![GrenanderCdf::from_pvalues(&p).unwrap()]);
            let mut q = q;
            q.sort_by(f64::total_cmp);
            let est = conditional_lfdr(&m, &q, &vec![0; q.len()]).unwrap();
            for w in est.values.windows(2) {
                prop_assert!(w[0] <= w[1]);
            }
        }
    }
}
