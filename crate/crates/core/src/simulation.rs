//! Monte Carlo harness: conditional two-groups data, error-rate estimates and
//! the naive-weighting counterexample.
//!
//! A replicate draws `X_i` from the covariate law, `H_i ~ Bernoulli(1 -
//! pi0(X_i))`, `Z_i = sqrt(N(X_i)) mu(X_i) H_i + e_i` and `P_i = 1 - Phi(Z_i)`.
//! Under fold-block dependence `e_i = sqrt(rho) G_fold + sqrt(1 - rho) E_i`,
//! so z-scores are equicorrelated within a fold and independent across folds.
//!
//! Replicate `r` under seed `s` uses its own random stream derived from
//! `(s, r)`, so parallel and sequential runs agree bit for bit.

use std::io;

use rand::distributions::WeightedIndex;
use rand::prelude::*;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{check_level, IhwError, Result};
use crate::hypothesis::{Covariates, HypothesisTable};
use crate::procedures::{weighted_bh, Reshaping};
use crate::rng::{derive_seed, substream, Stream};

/// Piecewise-constant function of the covariate.
///
/// `values[k]` applies on `[breaks[k-1], breaks[k])`. Categorical covariates
/// are evaluated at their 0-based level index.
#[derive(Debug, Clone, PartialEq)]
pub struct StepFunction {
    pub breaks: Vec<f64>,
    pub values: Vec<f64>,
}

impl StepFunction {
    pub fn constant(value: f64) -> Self {
        StepFunction {
            breaks: Vec::new(),
            values: vec![value],
        }
    }

    /// `values.len()` equal-width pieces on [0, 1].
    pub fn equal_pieces(values: Vec<f64>) -> Self {
        let n = values.len();
        StepFunction {
            breaks: (1..n).map(|j| j as f64 / n as f64).collect(),
            values,
        }
    }

    /// One piece per categorical level.
    pub fn per_level(values: Vec<f64>) -> Self {
        StepFunction {
            breaks: (1..values.len()).map(|j| j as f64).collect(),
            values,
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.values[self.breaks.partition_point(|&b| b <= x)]
    }

    fn validate(&self, name: &str, ok: impl Fn(f64) -> bool) -> Result<()> {
        if self.values.len() != self.breaks.len() + 1 {
            return Err(IhwError::InvalidConfig(format!(
                "{name}: {} values need {} breaks, got {}",
                self.values.len(),
                self.values.len() - 1,
                self.breaks.len()
            )));
        }
        if self.breaks.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(IhwError::InvalidConfig(format!("{name}: breaks must increase")));
        }
        if let Some(v) = self.values.iter().find(|v| !ok(**v)) {
            return Err(IhwError::InvalidConfig(format!("{name}: invalid value {v}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum CovariateLaw {
    Uniform,
    /// Level `k` (named `L{k+1}`) with probability `probabilities[k]`.
    Categorical { probabilities: Vec<f64> },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Dependence {
    Independent,
    /// `folds` contiguous blocks with equicorrelated z-scores; the table gets
    /// the blocks as fold labels.
    FoldBlock { folds: usize, rho: f64 },
}

/// One-sided z-test two-groups scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub m: usize,
    pub covariate_law: CovariateLaw,
    pub pi0: StepFunction,
    /// Effect size `mu(x)`.
    pub effect: StepFunction,
    /// Sample size `N(x)`.
    pub sample_size: StepFunction,
    pub dependence: Dependence,
}

impl Scenario {
    /// Global null with a uniform covariate.
    pub fn null(name: &str, m: usize) -> Self {
        Scenario {
            name: name.to_string(),
            m,
            covariate_law: CovariateLaw::Uniform,
            pi0: StepFunction::constant(1.0),
            effect: StepFunction::constant(0.0),
            sample_size: StepFunction::constant(1.0),
            dependence: Dependence::Independent,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.m == 0 {
            return Err(IhwError::InvalidConfig("m must be positive".into()));
        }
        self.pi0.validate("pi0", |v| (0.0..=1.0).contains(&v))?;
        self.effect.validate("effect", f64::is_finite)?;
        self.sample_size.validate("sample_size", |v| v >= 1.0 && v.is_finite())?;
        if let CovariateLaw::Categorical { probabilities } = &self.covariate_law {
            let total: f64 = probabilities.iter().sum();
            if probabilities.is_empty()
                || probabilities.iter().any(|p| !(*p >= 0.0))
                || (total - 1.0).abs() > 1e-9
            {
                return Err(IhwError::InvalidConfig(
                    "probabilities must be nonnegative and sum to 1".into(),
                ));
            }
        }
        if let Dependence::FoldBlock { folds, rho } = self.dependence {
            if folds < 2 || folds > self.m {
                return Err(IhwError::InvalidConfig(format!(
                    "folds must lie in 2..={}, got {folds}",
                    self.m
                )));
            }
            if !(0.0..1.0).contains(&rho) {
                return Err(IhwError::InvalidConfig(format!("rho must lie in [0, 1), got {rho}")));
            }
        }
        Ok(())
    }
}

/// A simulated table and its ground truth (`true` = alternative).
#[derive(Debug, Clone, PartialEq)]
pub struct Replicate {
    pub table: HypothesisTable,
    pub truth: Vec<bool>,
}

pub fn generate_replicate(scenario: &Scenario, seed: u64) -> Result<Replicate> {
    scenario.validate()?;
    let m = scenario.m;
    let mut rng = substream(seed, 0);
    let normal = Normal::new(0.0, 1.0).expect("standard normal");

    let (folds, rho) = match scenario.dependence {
        Dependence::Independent => (1, 0.0),
        Dependence::FoldBlock { folds, rho } => (folds, rho),
    };
    let shared: Vec<f64> = (0..folds).map(|_| rng.sample(StandardNormal)).collect();
    let block = |i: usize| i * folds / m;

    let levels = match &scenario.covariate_law {
        CovariateLaw::Uniform => None,
        CovariateLaw::Categorical { probabilities } => Some(
            WeightedIndex::new(probabilities)
                .map_err(|e| IhwError::InvalidConfig(format!("probabilities: {e}")))?,
        ),
    };

    let mut x = Vec::with_capacity(m);
    let mut pvalues = Vec::with_capacity(m);
    let mut truth = Vec::with_capacity(m);
    for i in 0..m {
        let xi = match &levels {
            None => rng.gen::<f64>(),
            Some(dist) => dist.sample(&mut rng) as f64,
        };
        let alt = rng.gen::<f64>() >= scenario.pi0.eval(xi);
        let own: f64 = rng.sample(StandardNormal);
        let noise = rho.sqrt() * shared[block(i)] + (1.0 - rho).sqrt() * own;
        let shift = if alt {
            scenario.sample_size.eval(xi).sqrt() * scenario.effect.eval(xi)
        } else {
            0.0
        };
        pvalues.push(normal.sf(shift + noise));
        x.push(xi);
        truth.push(alt);
    }
    let covariates = match levels {
        None => Covariates::Numeric(x),
        Some(_) => Covariates::Categorical(
            x.iter().map(|&k| format!("L{}", k as usize + 1)).collect(),
        ),
    };
    let labels = match scenario.dependence {
        Dependence::Independent => None,
        Dependence::FoldBlock { .. } => Some((0..m).map(|i| block(i) + 1).collect()),
    };
    Ok(Replicate {
        table: HypothesisTable::new(pvalues, covariates, labels)?,
        truth,
    })
}

/// Stream seed of replicate `index` under `seed`.
pub fn replicate_seed(seed: u64, index: usize) -> u64 {
    derive_seed(&[seed, index as u64])
}

/// Monte Carlo error rates of one procedure.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorReport {
    pub reps: usize,
    pub fdr: f64,
    pub fdr_se: f64,
    pub fwer: f64,
    pub fwer_se: f64,
    /// Fraction of replicates with at least `kfwer_k` false rejections.
    pub kfwer: f64,
    pub kfwer_se: f64,
    pub kfwer_k: usize,
    pub mean_discoveries: f64,
    pub discoveries_se: f64,
    pub mean_true_discoveries: f64,
    pub true_discoveries_se: f64,
}

/// False (`v`) and total (`r`) rejections of one replicate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Counts {
    pub v: usize,
    pub r: usize,
}

impl Counts {
    pub fn score(rejected: &[bool], truth: &[bool]) -> Self {
        let r = rejected.iter().filter(|&&x| x).count();
        let v = rejected.iter().zip(truth).filter(|(x, t)| **x && !**t).count();
        Counts { v, r }
    }
}

fn mean_se(xs: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = xs.clone().count() as f64;
    let mean = xs.clone().sum::<f64>() / n;
    if n < 2.0 {
        return (mean, 0.0);
    }
    let var = xs.map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

impl ErrorReport {
    pub fn from_counts(counts: &[Counts], kfwer_k: usize) -> Self {
        let fdp = counts.iter().map(|c| c.v as f64 / c.r.max(1) as f64);
        let any = counts.iter().map(|c| (c.v >= 1) as u8 as f64);
        let k = counts.iter().map(|c| (c.v >= kfwer_k) as u8 as f64);
        let r = counts.iter().map(|c| c.r as f64);
        let t = counts.iter().map(|c| (c.r - c.v) as f64);
        let (fdr, fdr_se) = mean_se(fdp);
        let (fwer, fwer_se) = mean_se(any);
        let (kfwer, kfwer_se) = mean_se(k);
        let (mean_discoveries, discoveries_se) = mean_se(r);
        let (mean_true_discoveries, true_discoveries_se) = mean_se(t);
        ErrorReport {
            reps: counts.len(),
            fdr,
            fdr_se,
            fwer,
            fwer_se,
            kfwer,
            kfwer_se,
            kfwer_k,
            mean_discoveries,
            discoveries_se,
            mean_true_discoveries,
            true_discoveries_se,
        }
    }
}

/// k used for the k-FWER column when none is given.
pub const DEFAULT_KFWER_K: usize = 2;

/// Runs `reps` replicates of `scenario` and scores `method`'s rejections.
pub fn estimate_error_rates<F>(scenario: &Scenario, reps: usize, seed: u64, method: F) -> Result<ErrorReport>
where
    F: Fn(&Replicate) -> Result<Vec<bool>> + Sync,
{
    let reports = estimate_error_rates_batch(scenario, reps, seed, 1, |rep| Ok(vec![method(rep)?]))?;
    Ok(reports.into_iter().next().unwrap())
}

/// Like [`estimate_error_rates`] for `n_methods` procedures scored on the
/// same replicates; `method` returns one rejection vector per procedure.
pub fn estimate_error_rates_batch<F>(
    scenario: &Scenario,
    reps: usize,
    seed: u64,
    n_methods: usize,
    method: F,
) -> Result<Vec<ErrorReport>>
where
    F: Fn(&Replicate) -> Result<Vec<Vec<bool>>> + Sync,
{
    if reps == 0 {
        return Err(IhwError::InvalidConfig("need at least one replicate".into()));
    }
    scenario.validate()?;
    let per_rep: Vec<Vec<Counts>> = (0..reps)
        .into_par_iter()
        .map(|r| {
            let rep = generate_replicate(scenario, replicate_seed(seed, r))?;
            let rejections = method(&rep)?;
            if rejections.len() != n_methods {
                return Err(IhwError::LengthMismatch {
                    expected: n_methods,
                    actual: rejections.len(),
                });
            }
            rejections
                .iter()
                .map(|rej| {
                    crate::error::check_len(scenario.m, rej.len())?;
                    Ok(Counts::score(rej, &rep.truth))
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    Ok((0..n_methods)
        .map(|j| {
            let counts: Vec<Counts> = per_rep.iter().map(|c| c[j]).collect();
            ErrorReport::from_counts(&counts, DEFAULT_KFWER_K)
        })
        .collect())
}

/// Closed-form FWER of the adversarial scheme: `alpha + alpha^2 / 4 (1 - alpha)`.
pub fn counterexample_fwer(alpha: f64) -> f64 {
    alpha + alpha * alpha / 4.0 * (1.0 - alpha)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CounterexampleWeights {
    /// Weights of hypotheses 3, 4 depend on `P_1`, those of 1, 2 on `P_3`.
    Adversarial,
    /// `W = 1` for all four.
    Uniform,
}

const COUNTEREXAMPLE_BLOCK: usize = 10_000;

/// Four independent null p-values with weights that are independent of
/// their own p-value but not of the others, then weighted BH at `alpha`.
pub fn counterexample_naive_weighting(alpha: f64, reps: usize, seed: u64) -> Result<ErrorReport> {
    counterexample(alpha, reps, seed, CounterexampleWeights::Adversarial)
}

pub fn counterexample(
    alpha: f64,
    reps: usize,
    seed: u64,
    scheme: CounterexampleWeights,
) -> Result<ErrorReport> {
    check_level(alpha)?;
    if reps == 0 {
        return Err(IhwError::InvalidConfig("need at least one replicate".into()));
    }
    let blocks = reps.div_ceil(COUNTEREXAMPLE_BLOCK);
    let counts: Vec<Vec<Counts>> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = substream(seed, b as u64);
            let n = COUNTEREXAMPLE_BLOCK.min(reps - b * COUNTEREXAMPLE_BLOCK);
            (0..n)
                .map(|_| counterexample_once(&mut rng, alpha, scheme))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    let counts: Vec<Counts> = counts.into_iter().flatten().collect();
    Ok(ErrorReport::from_counts(&counts, DEFAULT_KFWER_K))
}

fn counterexample_once(rng: &mut Stream, alpha: f64, scheme: CounterexampleWeights) -> Result<Counts> {
    let p: [f64; 4] = [rng.gen(), rng.gen(), rng.gen(), rng.gen()];
    let weights = match scheme {
        CounterexampleWeights::Uniform => [1.0; 4],
        CounterexampleWeights::Adversarial => {
            let hit = |x: f64| alpha / 2.0 <= x && x <= alpha;
            let (w1, w2) = if hit(p[2]) { (2.0, 0.0) } else { (0.0, 2.0) };
            let (w3, w4) = if hit(p[0]) { (2.0, 0.0) } else { (0.0, 2.0) };
            [w1, w2, w3, w4]
        }
    };
    let out = weighted_bh(&p, &weights, alpha, Reshaping::Identity, None)?;
    Ok(Counts {
        v: out.k_star,
        r: out.k_star,
    })
}

/// Parses scenario sections from `key = value` text.
///
/// Each `[name]` section is one scenario. Keys: `m`, `covariate`
/// (`uniform` or `categorical`), `probabilities`, `pi0`, `effect`,
/// `sample_size` (comma-separated piece values), `pi0_breaks`,
/// `effect_breaks`, `sample_size_breaks`, `dependence` (`independent` or
/// `fold-block`), `folds`, `rho`. Without explicit breaks, pieces split
/// [0, 1] evenly (uniform covariate) or map one-to-one onto levels.
pub fn parse_scenarios(text: &str) -> Result<Vec<Scenario>> {
    let ini = ini::Ini::load_from_str(text)
        .map_err(|e| IhwError::InvalidConfig(format!("scenario file: {e}")))?;
    let mut out = Vec::new();
    for (section, props) in ini.iter() {
        let Some(name) = section else {
            if let Some((key, _)) = props.iter().next() {
                return Err(IhwError::InvalidConfig(format!(
                    "key `{key}` appears before any [scenario] section"
                )));
            }
            continue;
        };
        out.push(parse_section(name, props)?);
    }
    if out.is_empty() {
        return Err(IhwError::InvalidConfig("no scenario sections found".into()));
    }
    Ok(out)
}

const KEYS: &[&str] = &[
    "m",
    "covariate",
    "probabilities",
    "pi0",
    "pi0_breaks",
    "effect",
    "effect_breaks",
    "sample_size",
    "sample_size_breaks",
    "dependence",
    "folds",
    "rho",
];

fn parse_section(name: &str, props: &ini::Properties) -> Result<Scenario> {
    let bad = |key: &str, value: &str| {
        IhwError::InvalidConfig(format!("scenario `{name}`: invalid value `{value}` for key `{key}`"))
    };
    for (key, _) in props.iter() {
        if !KEYS.contains(&key) {
            return Err(IhwError::InvalidConfig(format!(
                "scenario `{name}`: unknown key `{key}`"
            )));
        }
    }
    let list = |key: &str| -> Result<Option<Vec<f64>>> {
        props
            .get(key)
            .map(|v| {
                v.split(',')
                    .map(|s| s.trim().parse::<f64>().map_err(|_| bad(key, v)))
                    .collect()
            })
            .transpose()
    };
    let m = match props.get("m") {
        Some(v) => v.trim().parse::<usize>().map_err(|_| bad("m", v))?,
        None => {
            return Err(IhwError::InvalidConfig(format!(
                "scenario `{name}`: missing key `m`"
            )))
        }
    };
    let covariate_law = match props.get("covariate").map(str::trim) {
        None | Some("uniform") => CovariateLaw::Uniform,
        Some("categorical") => CovariateLaw::Categorical {
            probabilities: list("probabilities")?.ok_or_else(|| {
                IhwError::InvalidConfig(format!(
                    "scenario `{name}`: categorical covariate needs key `probabilities`"
                ))
            })?,
        },
        Some(v) => return Err(bad("covariate", v)),
    };
    let step = |key: &str, default: f64| -> Result<StepFunction> {
        let values = list(key)?.unwrap_or_else(|| vec![default]);
        let breaks_key = format!("{key}_breaks");
        Ok(match list(&breaks_key)? {
            Some(breaks) => StepFunction { breaks, values },
            None => match covariate_law {
                CovariateLaw::Uniform => StepFunction::equal_pieces(values),
                CovariateLaw::Categorical { .. } => StepFunction::per_level(values),
            },
        })
    };
    let pi0 = step("pi0", 1.0)?;
    let effect = step("effect", 0.0)?;
    let sample_size = step("sample_size", 1.0)?;
    let dependence = match props.get("dependence").map(str::trim) {
        None | Some("independent") => Dependence::Independent,
        Some("fold-block") => {
            let folds = match props.get("folds") {
                Some(v) => v.trim().parse().map_err(|_| bad("folds", v))?,
                None => 2,
            };
            let rho = match props.get("rho") {
                Some(v) => v.trim().parse().map_err(|_| bad("rho", v))?,
                None => 0.5,
            };
            Dependence::FoldBlock { folds, rho }
        }
        Some(v) => return Err(bad("dependence", v)),
    };
    let scenario = Scenario {
        name: name.to_string(),
        m,
        covariate_law,
        pi0,
        effect,
        sample_size,
        dependence,
    };
    scenario
        .validate()
        .map_err(|e| IhwError::InvalidConfig(format!("scenario `{name}`: {e}")))?;
    Ok(scenario)
}

/// One line of the simulation report.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub scenario: String,
    pub procedure: String,
    pub alpha: f64,
    pub report: ErrorReport,
}

pub const REPORT_COLUMNS: [&str; 9] = [
    "scenario",
    "procedure",
    "alpha",
    "fdr",
    "fdr_se",
    "fwer",
    "fwer_se",
    "mean_discoveries",
    "reps",
];

pub fn write_report_csv<W: io::Write>(rows: &[ReportRow], writer: W) -> io::Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(REPORT_COLUMNS)?;
    for row in rows {
        let r = &row.report;
        w.write_record([
            row.scenario.clone(),
            row.procedure.clone(),
            row.alpha.to_string(),
            r.fdr.to_string(),
            r.fdr_se.to_string(),
            r.fwer.to_string(),
            r.fwer_se.to_string(),
            r.mean_discoveries.to_string(),
            r.reps.to_string(),
        ])?;
    }
    w.flush()
}
