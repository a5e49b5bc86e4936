//! Covariate-powered cross-weighted multiple testing.
//!
//! Each hypothesis comes with a p-value and a covariate that is independent
//! of the p-value under the null. Weights are learned from the covariates by
//! cross-weighting: the hypotheses are split into folds and the weights of a
//! fold are learned only from the p-values of the other folds. The weights
//! then feed a weighted Bonferroni, Holm, Šidák, BH, BY or censored BH step.

pub mod engine;
pub mod error;
pub mod grenander;
pub mod hypothesis;
pub mod learner;
pub mod lfdr;
pub mod lp;
pub mod procedures;
pub mod rng;
pub mod simulation;

pub use error::{IhwError, Result};
