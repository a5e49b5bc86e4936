//! End-to-end IHW: split, learn, normalize, test.
//!
//! Fold `k` gets its weights from a weight function learned on the p-values
//! of all other folds (and all covariates), so a null `P_i` is independent
//! of its own weight. The weights are rescaled to mean one inside each fold
//! and handed to the configured weighted procedure.

use rayon::prelude::*;

use crate::error::{check_level, IhwError, Result};
use crate::hypothesis::{
    normalize_weights, split_folds, Covariates, FoldPartition, FoldStrategy, HypothesisTable,
    WeightVector,
};
use crate::learner::{
    bin_covariate, default_bin_count, learn_weight_function, BinnedCovariate, LearnerConfig,
    Regularization,
};
use crate::procedures::{
    k_bonferroni, storey_pi0, weighted_bh, weighted_bonferroni, weighted_holm, weighted_sidak,
    Reshaping, TestOutcome,
};
use crate::rng::derive_seed;

pub const DEFAULT_FOLDS: usize = 5;
pub const DEFAULT_TAU: f64 = 1e-4;
pub const DEFAULT_TAU_PRIME: f64 = 0.5;

/// Weighted procedure applied after learning.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Procedure {
    Bonferroni,
    KBonferroni { k: usize },
    Holm,
    Sidak,
    Bh,
    By,
    /// Censored BH: learning sees p-values `<= tau` as 0 and nothing above
    /// `tau` is rejected.
    Ihwc { tau: f64 },
    /// [`Procedure::Ihwc`] with weights divided by a weighted Storey `pi0`
    /// estimate per fold.
    IhwcStorey { tau: f64, tau_prime: f64 },
}

impl Procedure {
    pub fn name(&self) -> &'static str {
        match self {
            Procedure::Bonferroni => "bonferroni",
            Procedure::KBonferroni { .. } => "k-bonferroni",
            Procedure::Holm => "holm",
            Procedure::Sidak => "sidak",
            Procedure::Bh => "bh",
            Procedure::By => "by",
            Procedure::Ihwc { .. } => "ihwc",
            Procedure::IhwcStorey { .. } => "ihwc-storey",
        }
    }

    /// Censoring level used both for learning and for testing.
    pub fn censor_tau(&self) -> Option<f64> {
        match *self {
            Procedure::Ihwc { tau } | Procedure::IhwcStorey { tau, .. } => Some(tau),
            _ => None,
        }
    }

    fn fold_aware(&self) -> bool {
        matches!(
            self,
            Procedure::Holm | Procedure::Sidak | Procedure::IhwcStorey { .. }
        )
    }

    fn validate(&self) -> Result<()> {
        match *self {
            Procedure::KBonferroni { k: 0 } => {
                Err(IhwError::InvalidConfig("k must be at least 1".into()))
            }
            Procedure::Ihwc { tau } => check_tau(tau),
            Procedure::IhwcStorey { tau, tau_prime } => {
                check_tau(tau)?;
                if tau_prime >= tau && tau_prime < 1.0 {
                    Ok(())
                } else {
                    Err(IhwError::InvalidTauPrime { tau, tau_prime })
                }
            }
            _ => Ok(()),
        }
    }
}

fn check_tau(tau: f64) -> Result<()> {
    if tau > 0.0 && tau < 1.0 {
        Ok(())
    } else {
        Err(IhwError::InvalidConfig(format!("tau must lie in (0, 1), got {tau}")))
    }
}

/// Where the outer folds come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FoldSource {
    /// The table's fold labels.
    Labels,
    /// Balanced random split from the config seed.
    Random,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IhwConfig {
    pub alpha: f64,
    pub procedure: Procedure,
    pub n_folds: usize,
    pub fold_source: FoldSource,
    pub seed: u64,
    /// Number of random splits whose weights are averaged.
    pub splits: usize,
    /// `alpha` and `censor_tau` of the learner are taken from this config.
    pub learner: LearnerConfig,
}

impl IhwConfig {
    pub fn new(alpha: f64, procedure: Procedure) -> Self {
        IhwConfig {
            alpha,
            procedure,
            n_folds: DEFAULT_FOLDS,
            fold_source: FoldSource::Random,
            seed: 0,
            splits: 1,
            learner: LearnerConfig::new(alpha),
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_level(self.alpha)?;
        self.procedure.validate()?;
        if self.splits == 0 {
            return Err(IhwError::InvalidConfig("need at least one split".into()));
        }
        if self.splits > 1 {
            if self.fold_source != FoldSource::Random {
                return Err(IhwError::ConfigMismatch(
                    "averaging over splits needs random folds".into(),
                ));
            }
            if self.procedure.fold_aware() {
                return Err(IhwError::ConfigMismatch(format!(
                    "{} needs a single fold partition and cannot use averaged weights",
                    self.procedure.name()
                )));
            }
        }
        if let Some(tau) = self.learner.censor_tau {
            if self.procedure.censor_tau() != Some(tau) {
                return Err(IhwError::ConfigMismatch(format!(
                    "learner censors at {tau} but {} does not",
                    self.procedure.name()
                )));
            }
        }
        self.learner_config().validate()
    }

    fn learner_config(&self) -> LearnerConfig {
        LearnerConfig {
            alpha: self.alpha,
            censor_tau: self.procedure.censor_tau(),
            ..self.learner.clone()
        }
    }
}

/// What the learner did for one outer fold.
#[derive(Debug, Clone, PartialEq)]
pub struct FoldDiagnostics {
    /// Per-bin threshold function (raw weights before normalization).
    pub threshold_function: Vec<f64>,
    pub lambda: Option<Regularization>,
    pub uniform_fallback: bool,
    pub pooled_bins: Vec<bool>,
    /// Weighted Storey estimate, for the Storey variant.
    pub storey_pi0: Option<f64>,
}

/// Weights learned for one partition, before any procedure is applied.
#[derive(Debug, Clone, PartialEq)]
pub struct LearnedSplit {
    pub partition: FoldPartition,
    pub bins: BinnedCovariate,
    /// Normalized to mean one within every fold.
    pub weights: WeightVector,
    pub folds: Vec<FoldDiagnostics>,
    pub censor_tau: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IhwResult {
    /// Normalized weights (averaged over splits when `splits > 1`).
    pub weights: WeightVector,
    /// Weights the procedure actually used; differs from `weights` only for
    /// the Storey variant.
    pub applied_weights: Vec<f64>,
    pub outcome: TestOutcome,
    pub bins: BinnedCovariate,
    /// Diagnostics per split, then per fold.
    pub splits: Vec<Vec<FoldDiagnostics>>,
    pub censor_tau: Option<f64>,
}

impl IhwResult {
    /// Chosen regularization per fold of the first split.
    pub fn lambdas(&self) -> Vec<Option<Regularization>> {
        self.splits[0].iter().map(|f| f.lambda).collect()
    }
}

/// Bins the covariate with the configured or default bin count.
pub fn bin_table(table: &HypothesisTable, n_bins: Option<usize>) -> Result<BinnedCovariate> {
    let covariates = table.covariates();
    let n_bins = match (n_bins, covariates) {
        (Some(j), _) => j,
        (None, Covariates::Categorical(values)) => crate::hypothesis::levels(values).0.len(),
        (None, Covariates::Numeric(values)) => {
            let mut distinct = values.clone();
            distinct.sort_by(f64::total_cmp);
            distinct.dedup();
            default_bin_count(table.m()).min(distinct.len())
        }
    };
    bin_covariate(covariates, n_bins)
}

fn partition_for(table: &HypothesisTable, config: &IhwConfig, split: usize) -> Result<FoldPartition> {
    let strategy = match config.fold_source {
        FoldSource::Labels => FoldStrategy::UserSupplied,
        FoldSource::Random => FoldStrategy::Random {
            seed: if split == 0 {
                config.seed
            } else {
                derive_seed(&[config.seed, split as u64])
            },
        },
    };
    split_folds(table, config.n_folds, strategy)
}

/// Learns normalized weights for one split (the learn and normalize steps).
pub fn learn_split(table: &HypothesisTable, config: &IhwConfig, split: usize) -> Result<LearnedSplit> {
    config.validate()?;
    let partition = partition_for(table, config, split)?;
    let bins = bin_table(table, config.learner.n_bins)?;
    learn_on_partition(table, config, partition, bins, split)
}

fn learn_on_partition(
    table: &HypothesisTable,
    config: &IhwConfig,
    partition: FoldPartition,
    bins: BinnedCovariate,
    split: usize,
) -> Result<LearnedSplit> {
    let learner = config.learner_config();
    let pvalues = table.pvalues();
    let members = partition.members();
    let folds: Vec<FoldDiagnostics> = (0..partition.n_folds())
        .into_par_iter()
        .map(|k| {
            if bins.n_bins() == 1 {
                return Ok(FoldDiagnostics {
                    threshold_function: vec![1.0],
                    lambda: None,
                    uniform_fallback: true,
                    pooled_bins: vec![false],
                    storey_pi0: None,
                });
            }
            let heldout: Vec<usize> = (0..table.m()).filter(|&i| partition.fold_of(i) != k).collect();
            let heldout_p: Vec<f64> = heldout.iter().map(|&i| pvalues[i]).collect();
            let heldout_b: Vec<usize> = heldout.iter().map(|&i| bins.bin_of()[i]).collect();
            let target_mass = bins.mass(&members[k]);
            let inner_seed = derive_seed(&[config.seed, split as u64, k as u64]);
            let learned = learn_weight_function(
                &heldout_p,
                &heldout_b,
                &target_mass,
                bins.kind(),
                &learner,
                inner_seed,
            )?;
            Ok(FoldDiagnostics {
                threshold_function: learned.raw,
                lambda: learned.lambda,
                uniform_fallback: learned.uniform_fallback,
                pooled_bins: learned.pooled_bins,
                storey_pi0: None,
            })
        })
        .collect::<Result<_>>()?;
    let raw: Vec<f64> = (0..table.m())
        .map(|i| folds[partition.fold_of(i)].threshold_function[bins.bin_of()[i]])
        .collect();
    let weights = normalize_weights(&raw, &partition)?;
    Ok(LearnedSplit {
        partition,
        bins,
        weights,
        folds,
        censor_tau: learner.censor_tau,
    })
}

/// Applies `procedure` to the table's p-values with learned weights.
///
/// Several procedures can share one [`LearnedSplit`] as long as they agree
/// on censoring. Returns the weights actually used and the outcome.
pub fn apply_procedure(
    pvalues: &[f64],
    learned: &LearnedSplit,
    procedure: Procedure,
    alpha: f64,
) -> Result<(Vec<f64>, TestOutcome, Vec<Option<f64>>)> {
    procedure.validate()?;
    if procedure.censor_tau() != learned.censor_tau {
        return Err(IhwError::ConfigMismatch(format!(
            "weights were learned with censoring {:?} but {} uses {:?}",
            learned.censor_tau,
            procedure.name(),
            procedure.censor_tau()
        )));
    }
    let weights = learned.weights.weights();
    let partition = &learned.partition;
    let mut pi0s = vec![None; partition.n_folds()];
    let outcome = match procedure {
        Procedure::Bonferroni => weighted_bonferroni(pvalues, weights, alpha)?,
        Procedure::KBonferroni { k } => k_bonferroni(pvalues, weights, alpha, k)?,
        Procedure::Holm => weighted_holm(pvalues, weights, alpha, partition)?,
        Procedure::Sidak => weighted_sidak(pvalues, weights, alpha, partition)?,
        Procedure::Bh => weighted_bh(pvalues, weights, alpha, Reshaping::Identity, None)?,
        Procedure::By => weighted_bh(pvalues, weights, alpha, Reshaping::Harmonic, None)?,
        Procedure::Ihwc { tau } => weighted_bh(pvalues, weights, alpha, Reshaping::Identity, Some(tau))?,
        Procedure::IhwcStorey { tau, tau_prime } => {
            let mut adjusted = weights.to_vec();
            for (k, fold) in partition.members().iter().enumerate() {
                let p: Vec<f64> = fold.iter().map(|&i| pvalues[i]).collect();
                let w: Vec<f64> = fold.iter().map(|&i| weights[i]).collect();
                let pi0 = storey_pi0(&p, &w, tau_prime)?;
                fold.iter().for_each(|&i| adjusted[i] = weights[i] / pi0);
                pi0s[k] = Some(pi0);
            }
            let outcome = weighted_bh(pvalues, &adjusted, alpha, Reshaping::Identity, Some(tau))?;
            return Ok((adjusted, outcome, pi0s));
        }
    };
    Ok((weights.to_vec(), outcome, pi0s))
}

/// Averages normalized weights over `config.splits` random splits.
///
/// The result keeps the global budget `sum W = m` but has no partition.
pub fn average_weights_over_splits(table: &HypothesisTable, config: &IhwConfig) -> Result<WeightVector> {
    config.validate()?;
    if config.fold_source != FoldSource::Random {
        return Err(IhwError::ConfigMismatch(
            "averaging over splits needs random folds".into(),
        ));
    }
    let bins = bin_table(table, config.learner.n_bins)?;
    let learned = (0..config.splits)
        .map(|b| {
            let partition = partition_for(table, config, b)?;
            learn_on_partition(table, config, partition, bins.clone(), b)
        })
        .collect::<Result<Vec<_>>>()?;
    let weights: Vec<WeightVector> = learned.into_iter().map(|l| l.weights).collect();
    average(&weights)
}

fn average(splits: &[WeightVector]) -> Result<WeightVector> {
    let m = splits[0].len();
    let b = splits.len() as f64;
    let mean: Vec<f64> = (0..m)
        .map(|i| splits.iter().map(|w| w.weights()[i]).sum::<f64>() / b)
        .collect();
    let total: f64 = mean.iter().sum();
    if (total - m as f64).abs() > 1e-8 * m as f64 {
        return Err(IhwError::NumericalFailure(format!(
            "averaged weights sum to {total}, expected {m}"
        )));
    }
    WeightVector::with_global_budget(mean)
}

/// Runs IHW with the configured procedure.
pub fn run_ihw(table: &HypothesisTable, config: &IhwConfig) -> Result<IhwResult> {
    config.validate()?;
    if config.splits == 1 {
        let learned = learn_split(table, config, 0)?;
        let (applied, outcome, pi0s) =
            apply_procedure(table.pvalues(), &learned, config.procedure, config.alpha)?;
        let mut folds = learned.folds;
        for (f, pi0) in folds.iter_mut().zip(pi0s) {
            f.storey_pi0 = pi0;
        }
        return Ok(IhwResult {
            weights: learned.weights,
            applied_weights: applied,
            outcome,
            bins: learned.bins,
            splits: vec![folds],
            censor_tau: learned.censor_tau,
        });
    }
    let bins = bin_table(table, config.learner.n_bins)?;
    let learned = (0..config.splits)
        .map(|b| {
            let partition = partition_for(table, config, b)?;
            learn_on_partition(table, config, partition, bins.clone(), b)
        })
        .collect::<Result<Vec<_>>>()?;
    let weights = average(&learned.iter().map(|l| l.weights.clone()).collect::<Vec<_>>())?;
    let p = table.pvalues();
    let w = weights.weights();
    let outcome = match config.procedure {
        Procedure::Bonferroni => weighted_bonferroni(p, w, config.alpha)?,
        Procedure::KBonferroni { k } => k_bonferroni(p, w, config.alpha, k)?,
        Procedure::Bh => weighted_bh(p, w, config.alpha, Reshaping::Identity, None)?,
        Procedure::By => weighted_bh(p, w, config.alpha, Reshaping::Harmonic, None)?,
        Procedure::Ihwc { tau } => weighted_bh(p, w, config.alpha, Reshaping::Identity, Some(tau))?,
        Procedure::Holm | Procedure::Sidak | Procedure::IhwcStorey { .. } => unreachable!(),
    };
    Ok(IhwResult {
        applied_weights: w.to_vec(),
        weights,
        outcome,
        bins,
        splits: learned.into_iter().map(|l| l.folds).collect(),
        censor_tau: config.procedure.censor_tau(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use rand::Rng;
    use statrs::distribution::{ContinuousCDF, Normal};

    /// One-sided p-value of `mu + e`.
    fn normal_pvalue(mu: f64, e: f64) -> f64 {
        Normal::new(0.0, 1.0).unwrap().sf(mu + e)
    }

    fn std_normal(r: &mut rng::Stream) -> f64 {
        // Box-Muller
        let u1: f64 = r.gen::<f64>().max(f64::MIN_POSITIVE);
        let u2: f64 = r.gen();
        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    }

    /// Covariate in [0, 1); signal only for x < 0.5.
    fn informative(m: usize, seed: u64) -> HypothesisTable {
        let mut r = rng::substream(seed, 1);
        let mut p = Vec::with_capacity(m);
        let mut x = Vec::with_capacity(m);
        for _ in 0..m {
            let xi: f64 = r.gen();
            let alt = xi < 0.5 && r.gen::<f64>() < 0.4;
            let e = std_normal(&mut r);
            p.push(normal_pvalue(if alt { 3.0 } else { 0.0 }, e));
            x.push(xi);
        }
        HypothesisTable::new(p, Covariates::Numeric(x), None).unwrap()
    }

    fn uninformative(m: usize, seed: u64) -> HypothesisTable {
        let mut r = rng::substream(seed, 2);
        let p = (0..m).map(|_| r.gen::<f64>()).collect();
        let x = (0..m).map(|_| r.gen::<f64>()).collect();
        HypothesisTable::new(p, Covariates::Numeric(x), None).unwrap()
    }

    fn config(procedure: Procedure) -> IhwConfig {
        let mut c = IhwConfig::new(0.1, procedure);
        c.learner.n_bins = Some(4);
        c
    }

    #[test]
    fn weights_have_fold_mean_one() {
        let t = informative(2000, 1);
        let res = run_ihw(&t, &config(Procedure::Bh)).unwrap();
        assert!(res.weights.max_fold_mean_error() <= 1e-10);
        assert_eq!(res.lambdas().len(), DEFAULT_FOLDS);
    }

    #[test]
    fn informative_covariate_upweights_signal() {
        let t = informative(4000, 2);
        let res = run_ihw(&t, &config(Procedure::Bh)).unwrap();
        let x = match t.covariates() {
            Covariates::Numeric(x) => x.clone(),
            _ => unreachable!(),
        };
        let mean = |pred: &dyn Fn(f64) -> bool| {
            let (s, n) = x
                .iter()
                .zip(res.weights.weights())
                .filter(|(xi, _)| pred(**xi))
                .fold((0.0, 0.0), |(s, n), (_, w)| (s + w, n + 1.0));
            s / n
        };
        assert!(mean(&|xi| xi < 0.5) > mean(&|xi| xi >= 0.5));
        let unweighted = weighted_bh(t.pvalues(), &vec![1.0; 4000], 0.1, Reshaping::Identity, None)
            .unwrap();
        assert!(res.outcome.k_star >= unweighted.k_star);
    }

    #[test]
    fn uninformative_weights_stay_near_one() {
        let mut deviation = 0.0;
        let reps = 20;
        for rep in 0..reps {
            let t = uninformative(1000, rep);
            let res = run_ihw(&t, &config(Procedure::Bh)).unwrap();
            let w = res.weights.weights();
            deviation += w.iter().map(|v| (v - 1.0).abs()).sum::<f64>() / w.len() as f64;
        }
        assert!(deviation / (reps as f64) < 0.1);
    }

    #[test]
    fn ihwc_never_rejects_above_tau() {
        let t = informative(2000, 3);
        let labels: Vec<usize> = (0..2000).map(|i| 1 + i % 2).collect();
        let t = HypothesisTable::new(t.pvalues().to_vec(), t.covariates().clone(), Some(labels)).unwrap();
        let mut c = config(Procedure::Ihwc { tau: 1e-4 });
        c.n_folds = 2;
        c.fold_source = FoldSource::Labels;
        let res = run_ihw(&t, &c).unwrap();
        assert!(res.outcome.k_star > 0);
        for i in res.outcome.rejected_indices() {
            assert!(t.pvalues()[i] <= 1e-4);
        }
    }

    #[test]
    fn censored_pvalues_do_not_move_weights() {
        let t = informative(1500, 4);
        let c = config(Procedure::Ihwc { tau: 1e-3 });
        let base = run_ihw(&t, &c).unwrap();
        let perturbed: Vec<f64> = t
            .pvalues()
            .iter()
            .map(|&p| if p <= 1e-3 { p / 7.0 } else { p })
            .collect();
        let again = run_ihw(&t.with_pvalues(perturbed).unwrap(), &c).unwrap();
        assert_eq!(base.weights, again.weights);
        assert_eq!(base.outcome.rejected, again.outcome.rejected);
    }

    #[test]
    fn runs_are_deterministic() {
        let t = informative(1000, 5);
        let c = config(Procedure::Bh);
        assert_eq!(run_ihw(&t, &c).unwrap(), run_ihw(&t, &c).unwrap());
    }

    #[test]
    fn storey_rescales_per_fold() {
        let t = informative(2000, 6);
        let res = run_ihw(
            &t,
            &config(Procedure::IhwcStorey {
                tau: 1e-4,
                tau_prime: 0.5,
            }),
        )
        .unwrap();
        let partition = res.weights.partition().unwrap();
        for i in 0..t.m() {
            let pi0 = res.splits[0][partition.fold_of(i)].storey_pi0.unwrap();
            let w = res.weights.weights()[i];
            assert!((res.applied_weights[i] * pi0 - w).abs() < 1e-12 * w.max(1.0));
        }
    }

    #[test]
    fn shared_learning_matches_separate_runs() {
        let t = informative(1000, 7);
        let c = config(Procedure::Bonferroni);
        let learned = learn_split(&t, &c, 0).unwrap();
        let (_, by, _) = apply_procedure(t.pvalues(), &learned, Procedure::By, 0.1).unwrap();
        let direct = run_ihw(&t, &config(Procedure::By)).unwrap();
        assert_eq!(by, direct.outcome);
        assert!(matches!(
            apply_procedure(t.pvalues(), &learned, Procedure::Ihwc { tau: 1e-4 }, 0.1),
            Err(IhwError::ConfigMismatch(_))
        ));
    }

    #[test]
    fn config_checks() {
        let t = informative(200, 8);
        let mut c = config(Procedure::Holm);
        c.splits = 2;
        assert!(matches!(run_ihw(&t, &c), Err(IhwError::ConfigMismatch(_))));
        let mut c = config(Procedure::Bh);
        c.splits = 2;
        c.fold_source = FoldSource::Labels;
        assert!(matches!(run_ihw(&t, &c), Err(IhwError::ConfigMismatch(_))));
        let c = config(Procedure::IhwcStorey {
            tau: 0.1,
            tau_prime: 0.05,
        });
        assert!(matches!(run_ihw(&t, &c), Err(IhwError::InvalidTauPrime { .. })));
        let mut c = config(Procedure::Bh);
        c.learner.censor_tau = Some(0.01);
        assert!(matches!(run_ihw(&t, &c), Err(IhwError::ConfigMismatch(_))));
        let c = config(Procedure::Ihwc { tau: 1.0 });
        assert!(run_ihw(&t, &c).is_err());
    }

    #[test]
    fn averaging_identical_splits_is_a_no_op() {
        let t = informative(1000, 9);
        let c = config(Procedure::Bh);
        let single = learn_split(&t, &c, 0).unwrap().weights;
        let twice = average(&[single.clone(), single.clone()]).unwrap();
        for (a, b) in twice.weights().iter().zip(single.weights()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn averaging_pairs() {
        let a = WeightVector::with_global_budget(vec![2.0, 0.0]).unwrap();
        let b = WeightVector::with_global_budget(vec![0.0, 2.0]).unwrap();
        assert_eq!(average(&[a, b]).unwrap().weights(), &[1.0, 1.0]);
    }

    #[test]
    fn averaged_weights_keep_only_the_global_budget() {
        let t = informative(2000, 10);
        let mut c = config(Procedure::Bh);
        c.splits = 2;
        let avg = average_weights_over_splits(&t, &c).unwrap();
        assert!(avg.partition().is_none());
        let total: f64 = avg.weights().iter().sum();
        assert!((total - 2000.0).abs() < 1e-8);
        // under the first split's partition the fold means are no longer exact
        let first = learn_split(&t, &c, 0).unwrap().partition;
        let mut worst: f64 = 0.0;
        for fold in first.members() {
            let mean = fold.iter().map(|&i| avg.weights()[i]).sum::<f64>() / fold.len() as f64;
            worst = worst.max((mean - 1.0).abs());
        }
        assert!(worst > 1e-10);
        let res = run_ihw(&t, &c).unwrap();
        assert_eq!(res.weights, avg);
        assert_eq!(res.splits.len(), 2);
    }

    #[test]
    fn single_bin_gives_unweighted_procedure() {
        let t = informative(500, 11);
        let mut c = config(Procedure::Bh);
        c.learner.n_bins = Some(1);
        let res = run_ihw(&t, &c).unwrap();
        let plain = weighted_bh(t.pvalues(), &vec![1.0; 500], 0.1, Reshaping::Identity, None).unwrap();
        assert_eq!(res.outcome.rejected, plain.rejected);
    }
}
