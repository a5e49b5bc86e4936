//! Learning a weighting function from held-out p-values.
//!
//! The covariate is discretized into bins. Within each bin the conditional
//! p-value distribution `F(t | bin)` is estimated by the Grenander estimator
//! (null proportion fixed at 1), and per-bin thresholds `t_j` are chosen to
//! maximize the expected number of discoveries `sum_j mass_j F_j(t_j)`
//! subject to the plug-in FDR constraint
//! `sum_j mass_j (pi0_j t_j - alpha F_j(t_j)) <= 0`. Because every `F_j` is
//! concave and piecewise linear this is a linear program. The thresholds,
//! rescaled to mean one, are the weights.
//!
//! Regularization bounds the total variation of the thresholds (ordered
//! covariates) or their deviation from uniformity (categorical covariates)
//! by `lambda * sum_j mass_j t_j`; `lambda` is picked by nested
//! cross-validation on the held-out p-values.

use crate::error::{check_len, check_level, IhwError, Result};
use crate::grenander::GrenanderCdf;
use crate::hypothesis::{self, normalize_weights, Covariates, FoldPartition, FoldStrategy};
use crate::lp::{solve_lp, LinearProgram, LpStatus, Relation};
use crate::procedures::{weighted_bh, Reshaping};

/// Whether bins carry a natural order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinKind {
    Ordered,
    Unordered,
}

/// A discretized covariate.
#[derive(Debug, Clone, PartialEq)]
pub struct BinnedCovariate {
    n_bins: usize,
    bin_of: Vec<usize>,
    kind: BinKind,
    edges: Vec<f64>,
    levels: Vec<String>,
}

impl BinnedCovariate {
    pub fn n_bins(&self) -> usize {
        self.n_bins
    }

    /// 0-based bin of every hypothesis.
    pub fn bin_of(&self) -> &[usize] {
        &self.bin_of
    }

    pub fn kind(&self) -> BinKind {
        self.kind
    }

    /// Left-closed interior bin boundaries (ordered kind).
    pub fn edges(&self) -> &[f64] {
        &self.edges
    }

    /// Level name of each bin (unordered kind).
    pub fn levels(&self) -> &[String] {
        &self.levels
    }

    /// Fraction of `indices` falling into each bin.
    pub fn mass(&self, indices: &[usize]) -> Vec<f64> {
        let mut mass = vec![0.0; self.n_bins];
        for &i in indices {
            mass[self.bin_of[i]] += 1.0;
        }
        let n = indices.len().max(1) as f64;
        mass.iter_mut().for_each(|v| *v /= n);
        mass
    }
}

/// Default bin count: about 1500 hypotheses per bin, between 1 and 40.
pub fn default_bin_count(m: usize) -> usize {
    (m / 1500).clamp(1, 40)
}

/// Discretizes the covariate into `n_bins` bins.
///
/// Numeric covariates are cut at the empirical quantiles `j / n_bins`
/// (linear interpolation between order statistics) into left-closed
/// intervals; bins left empty by heavy ties are dropped, so the result may
/// have fewer bins than requested. Categorical covariates get one bin per
/// level, in order of first appearance, and `n_bins` must match the level
/// count.
pub fn bin_covariate(covariates: &Covariates, n_bins: usize) -> Result<BinnedCovariate> {
    if n_bins == 0 {
        return Err(IhwError::InvalidConfig("need at least one bin".into()));
    }
    if covariates.is_empty() {
        return Err(IhwError::EmptyInput);
    }
    match covariates {
        Covariates::Categorical(values) => {
            let (levels, bin_of) = hypothesis::levels(values);
            if n_bins > levels.len() {
                return Err(IhwError::TooManyBins {
                    requested: n_bins,
                    distinct: levels.len(),
                });
            }
            if n_bins < levels.len() {
                return Err(IhwError::InvalidConfig(format!(
                    "categorical covariate has {} levels but {n_bins} bins were requested",
                    levels.len()
                )));
            }
            Ok(BinnedCovariate {
                n_bins,
                bin_of,
                kind: BinKind::Unordered,
                edges: Vec::new(),
                levels,
            })
        }
        Covariates::Numeric(values) => {
            let mut sorted = values.clone();
            sorted.sort_by(f64::total_cmp);
            let mut distinct = sorted.clone();
            distinct.dedup();
            if n_bins > distinct.len() {
                return Err(IhwError::TooManyBins {
                    requested: n_bins,
                    distinct: distinct.len(),
                });
            }
            let mut edges: Vec<f64> = (1..n_bins)
                .map(|j| quantile_sorted(&sorted, j as f64 / n_bins as f64))
                .collect();
            edges.dedup();
            let raw: Vec<usize> = values
                .iter()
                .map(|x| edges.partition_point(|e| e <= x))
                .collect();
            // Drop bins nobody landed in and relabel consecutively.
            let mut used = vec![false; edges.len() + 1];
            raw.iter().for_each(|&b| used[b] = true);
            let mut relabel = vec![usize::MAX; used.len()];
            let mut next = 0;
            let mut kept_edges = Vec::new();
            for (b, &u) in used.iter().enumerate() {
                if u {
                    if next > 0 {
                        kept_edges.push(edges[b - 1]);
                    }
                    relabel[b] = next;
                    next += 1;
                }
            }
            Ok(BinnedCovariate {
                n_bins: next,
                bin_of: raw.iter().map(|&b| relabel[b]).collect(),
                kind: BinKind::Ordered,
                edges: kept_edges,
                levels: Vec::new(),
            })
        }
    }
}

fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Estimated conditional two-groups model on the bins.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalModel {
    pub per_bin_cdf: Vec<GrenanderCdf>,
    pub per_bin_pi0: Vec<f64>,
    /// Empirical covariate measure of the fold being weighted.
    pub per_bin_mass: Vec<f64>,
    /// Bins without p-values, estimated by the pooled fit instead.
    pub pooled_fallback: Vec<bool>,
}

impl ConditionalModel {
    pub fn n_bins(&self) -> usize {
        self.per_bin_cdf.len()
    }
}

/// `P * 1{P > tau}`: p-values at or below `tau` become 0.
pub fn censor(pvalues: &[f64], tau: f64) -> Vec<f64> {
    pvalues.iter().map(|&p| if p <= tau { 0.0 } else { p }).collect()
}

/// Per-bin Grenander fits of held-out p-values, with `pi0 = 1` everywhere.
pub fn estimate_conditional_model(
    pvalues: &[f64],
    bins: &[usize],
    mass: Vec<f64>,
    censor_tau: Option<f64>,
) -> Result<ConditionalModel> {
    check_len(pvalues.len(), bins.len())?;
    if pvalues.is_empty() {
        return Err(IhwError::EmptyInput);
    }
    let n_bins = mass.len();
    let pvalues = match censor_tau {
        Some(tau) => censor(pvalues, tau),
        None => pvalues.to_vec(),
    };
    let mut grouped: Vec<Vec<f64>> = vec![Vec::new(); n_bins];
    for (&p, &b) in pvalues.iter().zip(bins) {
        if b >= n_bins {
            return Err(IhwError::InvalidConfig(format!(
                "bin {b} out of range for {n_bins} bins"
            )));
        }
        grouped[b].push(p);
    }
    let mut pooled: Option<GrenanderCdf> = None;
    let mut per_bin_cdf = Vec::with_capacity(n_bins);
    let mut pooled_fallback = vec![false; n_bins];
    for (b, group) in grouped.iter().enumerate() {
        if group.is_empty() {
            if pooled.is_none() {
                pooled = Some(GrenanderCdf::from_pvalues(&pvalues)?);
            }
            per_bin_cdf.push(pooled.clone().unwrap());
            pooled_fallback[b] = true;
        } else {
            per_bin_cdf.push(GrenanderCdf::from_pvalues(group)?);
        }
    }
    Ok(ConditionalModel {
        per_bin_cdf,
        per_bin_pi0: vec![1.0; n_bins],
        per_bin_mass: mass,
        pooled_fallback,
    })
}

/// Constraint on the shape of the threshold function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Regularization {
    Lambda(f64),
    Unregularized,
}

impl Regularization {
    /// Sort key; unregularized counts as `lambda = +inf`.
    pub fn strength(self) -> f64 {
        match self {
            Regularization::Lambda(l) => l,
            Regularization::Unregularized => f64::INFINITY,
        }
    }
}

/// Per-bin rejection thresholds `t_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdFunction {
    pub thresholds: Vec<f64>,
    /// LP objective: the plug-in expected discovery proportion.
    pub objective: f64,
}

/// Variable layout of the threshold LP.
#[derive(Debug, Clone)]
pub struct LpLayout {
    pub n_bins: usize,
    /// Offset of each bin's first segment variable; one past the last at the end.
    segment_start: Vec<usize>,
}

impl LpLayout {
    fn new(model: &ConditionalModel) -> Self {
        let n_bins = model.n_bins();
        let mut segment_start = Vec::with_capacity(n_bins + 1);
        let mut next = n_bins;
        for cdf in &model.per_bin_cdf {
            segment_start.push(next);
            next += cdf.slopes().len();
        }
        segment_start.push(next);
        LpLayout {
            n_bins,
            segment_start,
        }
    }

    pub fn t(&self, j: usize) -> usize {
        j
    }

    /// CDF mass taken from piece `s` of bin `j` (its length in `t` if flat).
    pub fn u(&self, j: usize, s: usize) -> usize {
        self.segment_start[j] + s
    }

    pub fn n_structural(&self) -> usize {
        self.segment_start[self.n_bins]
    }
}

/// Builds the threshold LP for `model`.
///
/// `F_j` is concave and piecewise linear, so `F_j(t_j)` is written as the
/// atom at zero plus the mass `u_js in [0, dF_s]` taken from each piece, with
/// `t_j = sum_s u_js / a_s` (a flat piece contributes its length in `t`
/// instead). A higher slope gives more mass and less FDR cost
/// per unit of `t`, so optimal solutions fill the pieces in order and the LP
/// equals the epigraph form `max sum w_j F_j(t_j)`. Split variables carry the
/// absolute values in the regularizer. The objective omits the constant
/// `sum_j w_j F_j(0)`.
pub fn build_threshold_lp(
    model: &ConditionalModel,
    alpha: f64,
    regularization: Regularization,
    kind: BinKind,
) -> Result<(LinearProgram, LpLayout)> {
    check_level(alpha)?;
    if let Regularization::Lambda(l) = regularization {
        if !(l >= 0.0 && l.is_finite()) {
            return Err(IhwError::InvalidConfig(format!("lambda must be >= 0, got {l}")));
        }
    }
    let j_bins = model.n_bins();
    let layout = LpLayout::new(model);
    let regularized = matches!(regularization, Regularization::Lambda(_)) && j_bins > 1;
    let n_abs = match (regularized, kind) {
        (false, _) => 0,
        (true, BinKind::Ordered) => j_bins - 1,
        (true, BinKind::Unordered) => j_bins,
    };
    let first_abs = layout.n_structural();
    let n_vars = first_abs + 2 * n_abs;
    let mut objective = vec![0.0; n_vars];
    let mut fdr: Vec<(usize, f64)> = Vec::new();
    let mut fdr_rhs = 0.0;
    let mut lp_rows: Vec<Vec<(usize, f64)>> = Vec::with_capacity(j_bins);
    let mut bounds: Vec<(usize, f64)> = Vec::new();
    for (j, cdf) in model.per_bin_cdf.iter().enumerate() {
        let w = model.per_bin_mass[j];
        let pi0 = model.per_bin_pi0[j];
        fdr_rhs += alpha * w * cdf.mass_at_zero();
        let (knots, values) = (cdf.knots(), cdf.knot_values());
        let mut link = vec![(layout.t(j), 1.0)];
        for (s, &a) in cdf.slopes().iter().enumerate() {
            let v = layout.u(j, s);
            if a > 0.0 {
                objective[v] = w;
                fdr.push((v, w * (pi0 / a - alpha)));
                link.push((v, -1.0 / a));
                bounds.push((v, values[s + 1] - values[s]));
            } else {
                // a flat piece is measured in units of t
                fdr.push((v, w * pi0));
                link.push((v, -1.0));
                bounds.push((v, knots[s + 1] - knots[s]));
            }
        }
        lp_rows.push(link);
    }
    let mut lp = LinearProgram::new(objective);
    for j in 0..j_bins {
        lp.set_bounds(layout.t(j), 0.0, 1.0);
    }
    for (v, width) in bounds {
        lp.set_bounds(v, 0.0, width.max(0.0));
    }
    for link in lp_rows {
        lp.add_sparse(&link, Relation::Eq, 0.0);
    }
    lp.add_sparse(&fdr, Relation::Le, fdr_rhs);

    if let (true, Regularization::Lambda(lambda)) = (regularized, regularization) {
        let plus = |k: usize| first_abs + 2 * k;
        let minus = |k: usize| first_abs + 2 * k + 1;
        match kind {
            BinKind::Ordered => {
                for k in 0..n_abs {
                    lp.add_sparse(
                        &[
                            (layout.t(k + 1), 1.0),
                            (layout.t(k), -1.0),
                            (plus(k), -1.0),
                            (minus(k), 1.0),
                        ],
                        Relation::Eq,
                        0.0,
                    );
                }
            }
            BinKind::Unordered => {
                let inv = 1.0 / j_bins as f64;
                for k in 0..n_abs {
                    let mut terms: Vec<(usize, f64)> =
                        (0..j_bins).map(|j| (layout.t(j), -inv)).collect();
                    terms.push((layout.t(k), 1.0));
                    terms.push((plus(k), -1.0));
                    terms.push((minus(k), 1.0));
                    lp.add_sparse(&terms, Relation::Eq, 0.0);
                }
            }
        }
        let mut budget: Vec<(usize, f64)> = (0..n_abs)
            .flat_map(|k| [(plus(k), 1.0), (minus(k), 1.0)])
            .collect();
        budget.extend((0..j_bins).map(|j| (layout.t(j), -lambda * model.per_bin_mass[j])));
        lp.add_sparse(&budget, Relation::Le, 0.0);
    }
    Ok((lp, layout))
}

/// Solves the threshold LP and returns the per-bin thresholds.
pub fn solve_thresholds(
    model: &ConditionalModel,
    alpha: f64,
    regularization: Regularization,
    kind: BinKind,
) -> Result<ThresholdFunction> {
    let (lp, layout) = build_threshold_lp(model, alpha, regularization, kind)?;
    let sol = solve_lp(&lp)?;
    if sol.status != LpStatus::Optimal {
        return Err(IhwError::NumericalFailure(format!(
            "threshold LP reported {:?}",
            sol.status
        )));
    }
    let thresholds = (0..layout.n_bins)
        .map(|j| sol.primal[layout.t(j)].clamp(0.0, 1.0))
        .collect();
    let atoms: f64 = model
        .per_bin_cdf
        .iter()
        .zip(&model.per_bin_mass)
        .map(|(cdf, w)| w * cdf.mass_at_zero())
        .sum();
    Ok(ThresholdFunction {
        thresholds,
        objective: sol.objective_value + atoms,
    })
}

/// Settings of the weight learner.
#[derive(Debug, Clone, PartialEq)]
pub struct LearnerConfig {
    /// Bin count; `None` picks [`default_bin_count`] (or the level count for
    /// categorical covariates).
    pub n_bins: Option<usize>,
    pub lambda_grid: Vec<Regularization>,
    pub alpha: f64,
    pub inner_folds: usize,
    pub censor_tau: Option<f64>,
}

impl LearnerConfig {
    pub fn new(alpha: f64) -> Self {
        LearnerConfig {
            n_bins: None,
            lambda_grid: default_lambda_grid(),
            alpha,
            inner_folds: 5,
            censor_tau: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_level(self.alpha)?;
        if self.lambda_grid.is_empty() {
            return Err(IhwError::InvalidConfig("lambda grid is empty".into()));
        }
        for r in &self.lambda_grid {
            if let Regularization::Lambda(l) = r {
                if !(*l >= 0.0 && l.is_finite()) {
                    return Err(IhwError::InvalidConfig(format!("invalid lambda {l}")));
                }
            }
        }
        if self.n_bins == Some(0) {
            return Err(IhwError::InvalidConfig("need at least one bin".into()));
        }
        if self.inner_folds < 2 && self.lambda_grid.len() > 1 {
            return Err(IhwError::InvalidConfig(
                "tuning lambda needs at least 2 inner folds".into(),
            ));
        }
        if let Some(tau) = self.censor_tau {
            if !(tau > 0.0 && tau < 1.0) {
                return Err(IhwError::InvalidConfig(format!("tau must lie in (0, 1), got {tau}")));
            }
        }
        Ok(())
    }
}

/// Unregularized plus seven log-spaced values from 1e-3 to 10.
pub fn default_lambda_grid() -> Vec<Regularization> {
    let mut grid: Vec<Regularization> = (0..7)
        .map(|k| Regularization::Lambda(10f64.powf(-3.0 + 4.0 * k as f64 / 6.0)))
        .collect();
    grid.push(Regularization::Unregularized);
    grid
}

/// Output of [`learn_weight_function`].
#[derive(Debug, Clone, PartialEq)]
pub struct LearnedWeights {
    /// Raw per-bin weights (the thresholds), before normalization.
    pub raw: Vec<f64>,
    /// Chosen regularization; `None` when the learner fell back to uniform.
    pub lambda: Option<Regularization>,
    pub uniform_fallback: bool,
    /// Bins estimated from pooled p-values in the final fit.
    pub pooled_bins: Vec<bool>,
}

impl LearnedWeights {
    fn uniform(n_bins: usize) -> Self {
        LearnedWeights {
            raw: vec![1.0; n_bins],
            lambda: None,
            uniform_fallback: true,
            pooled_bins: vec![false; n_bins],
        }
    }
}

/// Learns raw per-bin weights from held-out p-values.
///
/// `heldout_bins` are the bins of the held-out p-values and `target_mass` the
/// covariate measure of the fold the weights are for. Censoring (if
/// configured) is applied to the held-out p-values here, both for fitting
/// and for the inner scoring step.
pub fn learn_weight_function(
    heldout_pvalues: &[f64],
    heldout_bins: &[usize],
    target_mass: &[f64],
    kind: BinKind,
    config: &LearnerConfig,
    inner_seed: u64,
) -> Result<LearnedWeights> {
    config.validate()?;
    check_len(heldout_pvalues.len(), heldout_bins.len())?;
    let n_bins = target_mass.len();
    if heldout_pvalues.is_empty() {
        return Ok(LearnedWeights::uniform(n_bins));
    }
    let mut grid = config.lambda_grid.clone();
    grid.sort_by(|a, b| a.strength().total_cmp(&b.strength()));
    grid.dedup();

    let chosen = if grid.len() == 1 {
        grid[0]
    } else if heldout_pvalues.len() < 2 * config.inner_folds {
        // Too little data to cross-validate: stay closest to uniform.
        grid[0]
    } else {
        let scores = score_lambdas(heldout_pvalues, heldout_bins, n_bins, kind, config, &grid, inner_seed)?;
        let best = scores.iter().copied().max().unwrap_or(0);
        if best == 0 {
            return Ok(LearnedWeights::uniform(n_bins));
        }
        // First maximum, i.e. the smallest lambda among ties.
        grid[scores.iter().position(|&s| s == best).unwrap()]
    };

    let model = estimate_conditional_model(
        heldout_pvalues,
        heldout_bins,
        target_mass.to_vec(),
        config.censor_tau,
    )?;
    let fit = solve_thresholds(&model, config.alpha, chosen, kind)?;
    let all_zero = fit.thresholds.iter().all(|&t| t == 0.0);
    Ok(LearnedWeights {
        raw: if all_zero { vec![1.0; n_bins] } else { fit.thresholds },
        lambda: Some(chosen),
        uniform_fallback: all_zero,
        pooled_bins: model.pooled_fallback,
    })
}

/// Total inner-CV discoveries of weighted BH for each candidate.
fn score_lambdas(
    pvalues: &[f64],
    bins: &[usize],
    n_bins: usize,
    kind: BinKind,
    config: &LearnerConfig,
    grid: &[Regularization],
    seed: u64,
) -> Result<Vec<usize>> {
    let n = pvalues.len();
    let partition = hypothesis::random_partition(n, config.inner_folds, seed);
    let folds = partition.members();
    let mut scores = vec![0usize; grid.len()];
    for (f, test) in folds.iter().enumerate() {
        let train: Vec<usize> = (0..n).filter(|&i| partition.fold_of(i) != f).collect();
        let train_p: Vec<f64> = train.iter().map(|&i| pvalues[i]).collect();
        let train_b: Vec<usize> = train.iter().map(|&i| bins[i]).collect();
        let mut mass = vec![0.0; n_bins];
        for &i in test {
            mass[bins[i]] += 1.0 / test.len() as f64;
        }
        let model = estimate_conditional_model(&train_p, &train_b, mass, config.censor_tau)?;
        let test_p: Vec<f64> = test.iter().map(|&i| pvalues[i]).collect();
        let single = FoldPartition::from_assignments(
            vec![0; test.len()],
            1,
            FoldStrategy::UserSupplied,
        )?;
        for (g, &reg) in grid.iter().enumerate() {
            let fit = solve_thresholds(&model, config.alpha, reg, kind)?;
            let raw: Vec<f64> = test.iter().map(|&i| fit.thresholds[bins[i]]).collect();
            let w = normalize_weights(&raw, &single)?;
            let out = weighted_bh(&test_p, w.weights(), config.alpha, Reshaping::Identity, config.censor_tau)?;
            scores[g] += out.k_star;
        }
    }
    Ok(scores)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use rand::Rng;

    fn numeric(v: &[f64]) -> Covariates {
        Covariates::Numeric(v.to_vec())
    }

    /// CDF with given knots (starting at 0) and slopes, no atom.
    fn cdf_from(knots: &[f64], slopes: &[f64]) -> GrenanderCdf {
        // Build through p-values would be indirect; sample the shape exactly
        // by placing ECDF mass at the knots instead.
        let mut p = Vec::new();
        let n = 10_000usize;
        let mut acc = 0.0;
        for s in 0..slopes.len() {
            let mass = slopes[s] * (knots[s + 1] - knots[s]);
            let count = (mass * n as f64).round() as usize;
            acc += mass;
            p.extend(std::iter::repeat(knots[s + 1]).take(count));
        }
        assert!((acc - 1.0).abs() < 1e-9);
        GrenanderCdf::from_pvalues(&p).unwrap()
    }

    #[test]
    fn median_split() {
        let b = bin_covariate(&numeric(&[1.0, 2.0, 3.0, 4.0]), 2).unwrap();
        assert_eq!(b.bin_of(), &[0, 0, 1, 1]);
        assert_eq!(b.kind(), BinKind::Ordered);
    }

    #[test]
    fn categorical_levels() {
        let c = Covariates::Categorical(vec!["A".into(), "B".into(), "A".into()]);
        let b = bin_covariate(&c, 2).unwrap();
        assert_eq!(b.bin_of(), &[0, 1, 0]);
        assert_eq!(b.kind(), BinKind::Unordered);
        assert!(bin_covariate(&c, 1).is_err());
    }

    #[test]
    fn constant_covariate_has_too_many_bins() {
        assert_eq!(
            bin_covariate(&numeric(&[5.0; 4]), 2).unwrap_err(),
            IhwError::TooManyBins { requested: 2, distinct: 1 }
        );
    }

    #[test]
    fn quantile_bins_are_balanced() {
        let x: Vec<f64> = (0..103).map(|i| (i * 37 % 103) as f64).collect();
        let b = bin_covariate(&numeric(&x), 5).unwrap();
        let mut counts = vec![0; 5];
        b.bin_of().iter().for_each(|&k| counts[k] += 1);
        let (lo, hi) = (counts.iter().min().unwrap(), counts.iter().max().unwrap());
        assert!(hi - lo <= 1, "{counts:?}");
    }

    #[test]
    fn tied_covariates_drop_empty_bins() {
        let b = bin_covariate(&numeric(&[0.0, 5.0, 10.0, 10.0, 10.0, 10.0]), 3).unwrap();
        assert_eq!(b.n_bins(), 2);
        assert_eq!(b.bin_of(), &[0, 0, 1, 1, 1, 1]);
    }

    #[test]
    fn default_bins() {
        assert_eq!(default_bin_count(100), 1);
        assert_eq!(default_bin_count(4500), 3);
        assert_eq!(default_bin_count(10_000_000), 40);
    }

    #[test]
    fn uniform_grid_model_is_identity() {
        let m = estimate_conditional_model(&[0.25, 0.5, 0.75, 1.0], &[0; 4], vec![1.0], None)
            .unwrap();
        assert_eq!(m.per_bin_cdf[0], GrenanderCdf::identity());
        assert_eq!(m.per_bin_pi0, vec![1.0]);
    }

    #[test]
    fn empty_bin_uses_pooled_fit() {
        let p = [0.1, 0.3, 0.8];
        let m = estimate_conditional_model(&p, &[0, 0, 0], vec![0.5, 0.5], None).unwrap();
        assert_eq!(m.pooled_fallback, vec![false, true]);
        assert_eq!(m.per_bin_cdf[1], GrenanderCdf::from_pvalues(&p).unwrap());
    }

    #[test]
    fn censoring_zeroes_small_pvalues() {
        assert_eq!(censor(&[0.05, 0.2, 0.9], 0.1), vec![0.0, 0.2, 0.9]);
        let m = estimate_conditional_model(&[0.05, 0.2, 0.9], &[0; 3], vec![1.0], Some(0.1))
            .unwrap();
        assert_eq!(m.per_bin_cdf[0], GrenanderCdf::from_pvalues(&[0.0, 0.2, 0.9]).unwrap());
    }

    fn model(cdfs: Vec<GrenanderCdf>, mass: Vec<f64>) -> ConditionalModel {
        let n = cdfs.len();
        ConditionalModel {
            per_bin_cdf: cdfs,
            per_bin_pi0: vec![1.0; n],
            per_bin_mass: mass,
            pooled_fallback: vec![false; n],
        }
    }

    #[test]
    fn uniform_bin_gets_zero_threshold() {
        let m = model(vec![GrenanderCdf::identity()], vec![1.0]);
        for alpha in [0.01, 0.1, 0.5] {
            let fit = solve_thresholds(&m, alpha, Regularization::Unregularized, BinKind::Ordered)
                .unwrap();
            assert!(fit.thresholds[0].abs() < 1e-12);
        }
    }

    #[test]
    fn single_bin_matches_grid_search() {
        // F has slope 5 on [0, 0.1] and 0.5/0.9 afterwards.
        let cdf = cdf_from(&[0.0, 0.1, 1.0], &[5.0, 0.5 / 0.9]);
        let m = model(vec![cdf.clone()], vec![1.0]);
        let fit = solve_thresholds(&m, 0.2, Regularization::Unregularized, BinKind::Ordered).unwrap();
        let mut best = (0.0, 0.0);
        for k in 0..=10_000 {
            let t = k as f64 * 1e-4;
            let f = cdf.eval_cdf(t).unwrap();
            if t <= 0.2 * f && f > best.1 {
                best = (t, f);
            }
        }
        assert!((fit.objective - best.1).abs() < 1e-3, "{fit:?} vs {best:?}");
        assert!((fit.thresholds[0] - best.0).abs() < 1e-3);
    }

    #[test]
    fn enriched_bin_beats_uniform_bin() {
        let enriched = cdf_from(&[0.0, 0.05, 1.0], &[12.0, 0.4 / 0.95]);
        let m = model(vec![enriched.clone(), GrenanderCdf::identity()], vec![0.5, 0.5]);
        let fit = solve_thresholds(&m, 0.1, Regularization::Unregularized, BinKind::Ordered).unwrap();
        // 2-D grid oracle at resolution 1e-3
        let mut best = (0.0f64, 0.0, 0.0);
        for a in 0..=1000 {
            let t1 = a as f64 / 1000.0;
            let f1 = enriched.eval_cdf(t1).unwrap();
            for b in 0..=1000 {
                let t2 = b as f64 / 1000.0;
                let f2 = t2;
                let value = 0.5 * f1 + 0.5 * f2;
                if 0.5 * (t1 - 0.1 * f1) + 0.5 * (t2 - 0.1 * f2) <= 0.0 && value > best.0 {
                    best = (value, t1, t2);
                }
            }
        }
        assert!(best.1 > best.2);
        assert!(fit.thresholds[0] > fit.thresholds[1], "{fit:?}");
        assert!((fit.objective - best.0).abs() < 1e-2, "{fit:?} vs {best:?}");
        assert!((fit.thresholds[0] - best.1).abs() < 1e-2);
        assert!((fit.thresholds[1] - best.2).abs() < 1e-2);
    }

    #[test]
    fn regularization_path_is_monotone() {
        let a = cdf_from(&[0.0, 0.02, 1.0], &[20.0, 0.6 / 0.98]);
        let b = cdf_from(&[0.0, 0.1, 1.0], &[3.0, 0.7 / 0.9]);
        let c = GrenanderCdf::identity();
        let m = model(vec![a, b, c], vec![0.3, 0.3, 0.4]);
        for kind in [BinKind::Ordered, BinKind::Unordered] {
            let mut last = -1.0;
            for lambda in [0.0, 0.01, 0.1, 0.5, 1.0, 3.0, 10.0] {
                let fit = solve_thresholds(&m, 0.1, Regularization::Lambda(lambda), kind).unwrap();
                assert!(fit.objective >= last - 1e-9, "{kind:?} {lambda}");
                last = fit.objective;
            }
            let free = solve_thresholds(&m, 0.1, Regularization::Unregularized, kind).unwrap();
            assert!(free.objective >= last - 1e-9);
        }
    }

    #[test]
    fn zero_lambda_forces_equal_thresholds() {
        let a = cdf_from(&[0.0, 0.02, 1.0], &[20.0, 0.6 / 0.98]);
        let m = model(vec![a, GrenanderCdf::identity()], vec![0.5, 0.5]);
        let fit = solve_thresholds(&m, 0.1, Regularization::Lambda(0.0), BinKind::Ordered).unwrap();
        assert!((fit.thresholds[0] - fit.thresholds[1]).abs() < 1e-9);
    }

    #[test]
    fn empty_grid_is_invalid() {
        let mut config = LearnerConfig::new(0.1);
        config.lambda_grid.clear();
        assert!(matches!(
            learn_weight_function(&[0.5], &[0], &[1.0], BinKind::Ordered, &config, 1),
            Err(IhwError::InvalidConfig(_))
        ));
    }

    fn two_bin_sample(n: usize, enriched: bool, seed: u64) -> (Vec<f64>, Vec<usize>) {
        let mut r = rng::substream(seed, 0);
        let mut p = Vec::with_capacity(n);
        let mut b = Vec::with_capacity(n);
        for i in 0..n {
            let bin = i % 2;
            let signal = enriched && bin == 0 && r.gen::<f64>() < 0.4;
            let u: f64 = r.gen();
            // alternatives: P = U^8 concentrates near zero
            p.push(if signal { u.powi(8) } else { u });
            b.push(bin);
        }
        (p, b)
    }

    #[test]
    fn enriched_bin_gets_more_weight() {
        let (p, b) = two_bin_sample(4000, true, 3);
        let config = LearnerConfig::new(0.1);
        let w = learn_weight_function(&p, &b, &[0.5, 0.5], BinKind::Ordered, &config, 9).unwrap();
        assert!(!w.uniform_fallback);
        assert!(w.raw[0] > w.raw[1], "{w:?}");
    }

    #[test]
    fn null_data_gives_equal_weights() {
        let config = LearnerConfig::new(0.1);
        let mut equal = 0;
        for rep in 0..100 {
            let (p, b) = two_bin_sample(1000, false, 100 + rep);
            let w = learn_weight_function(&p, &b, &[0.5, 0.5], BinKind::Ordered, &config, rep)
                .unwrap();
            // small-lambda fits stay within rounding of uniform
            let mean = (w.raw[0] + w.raw[1]) / 2.0;
            if w.raw.iter().all(|r| (r / mean - 1.0).abs() <= 0.01) {
                equal += 1;
            }
        }
        assert!(equal >= 95, "{equal}");
    }
}
