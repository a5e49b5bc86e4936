//! Shape-constrained distribution estimates on [0, 1].
//!
//! The Grenander estimator of a p-value distribution is the least concave
//! majorant (LCM) of its empirical CDF; its left derivative is the maximum
//! likelihood nonincreasing density. We build the LCM as the upper convex
//! hull of the ECDF vertices, which is exact and runs in O(n log n).

use crate::error::{IhwError, Result};

/// Right-continuous empirical CDF with tied points merged.
#[derive(Debug, Clone, PartialEq)]
pub struct StepEcdf {
    points: Vec<f64>,
    jumps: Vec<f64>,
    cumulative: Vec<f64>,
}

impl StepEcdf {
    /// Strictly increasing jump locations.
    pub fn points(&self) -> &[f64] {
        &self.points
    }

    /// Jump sizes; they sum to one.
    pub fn jumps(&self) -> &[f64] {
        &self.jumps
    }

    /// ECDF value at each jump location.
    pub fn cumulative(&self) -> &[f64] {
        &self.cumulative
    }

    pub fn value(&self, t: f64) -> f64 {
        let k = self.points.partition_point(|&p| p <= t);
        if k == 0 {
            0.0
        } else {
            self.cumulative[k - 1]
        }
    }
}

/// Empirical CDF of values in [0, 1].
pub fn ecdf(values: &[f64]) -> Result<StepEcdf> {
    if values.is_empty() {
        return Err(IhwError::EmptyInput);
    }
    if let Some(&bad) = values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
        return Err(IhwError::OutOfDomain { value: bad });
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut points: Vec<f64> = Vec::new();
    let mut counts: Vec<usize> = Vec::new();
    for v in sorted {
        match points.last() {
            Some(&last) if last == v => *counts.last_mut().unwrap() += 1,
            _ => {
                points.push(v);
                counts.push(1);
            }
        }
    }
    let mut running = 0usize;
    let mut cumulative = Vec::with_capacity(counts.len());
    for &c in &counts {
        running += c;
        cumulative.push(running as f64 / n);
    }
    let jumps = counts.iter().map(|&c| c as f64 / n).collect();
    Ok(StepEcdf {
        points,
        jumps,
        cumulative,
    })
}

/// Weighted least-squares projection of `values` onto nonincreasing sequences.
pub fn pava_decreasing(values: &[f64], block_weights: &[f64]) -> Result<Vec<f64>> {
    crate::error::check_len(values.len(), block_weights.len())?;
    for (index, &value) in block_weights.iter().enumerate() {
        if !(value > 0.0 && value.is_finite()) {
            return Err(IhwError::NonpositiveWeight { index, value });
        }
    }
    // (weighted mean, total weight, count)
    let mut blocks: Vec<(f64, f64, usize)> = Vec::with_capacity(values.len());
    for (&v, &w) in values.iter().zip(block_weights) {
        let mut cur = (v, w, 1);
        while let Some(&prev) = blocks.last() {
            if prev.0 >= cur.0 {
                break;
            }
            blocks.pop();
            let weight = prev.1 + cur.1;
            cur = ((prev.0 * prev.1 + cur.0 * cur.1) / weight, weight, prev.2 + cur.2);
        }
        blocks.push(cur);
    }
    Ok(blocks
        .into_iter()
        .flat_map(|(mean, _, count)| std::iter::repeat(mean).take(count))
        .collect())
}

/// Concave piecewise-linear CDF on [0, 1].
///
/// `values[0]` is the mass at exactly zero; it is 0 unless some of the input
/// p-values were 0 (as happens after censoring).
#[derive(Debug, Clone, PartialEq)]
pub struct GrenanderCdf {
    knots: Vec<f64>,
    values: Vec<f64>,
    slopes: Vec<f64>,
}

impl GrenanderCdf {
    /// The uniform distribution, `G(t) = t`.
    pub fn identity() -> Self {
        GrenanderCdf {
            knots: vec![0.0, 1.0],
            values: vec![0.0, 1.0],
            slopes: vec![1.0],
        }
    }

    /// Grenander estimate straight from p-values.
    pub fn from_pvalues(pvalues: &[f64]) -> Result<Self> {
        Ok(least_concave_majorant(&ecdf(pvalues)?))
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn slopes(&self) -> &[f64] {
        &self.slopes
    }

    /// CDF value at each knot.
    pub fn knot_values(&self) -> &[f64] {
        &self.values
    }

    pub fn mass_at_zero(&self) -> f64 {
        self.values[0]
    }

    /// `(slope, intercept)` of each linear piece; `G` is their pointwise minimum.
    pub fn segments(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.slopes
            .iter()
            .enumerate()
            .map(move |(s, &a)| (a, self.values[s] - a * self.knots[s]))
    }

    pub fn eval_cdf(&self, t: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&t) {
            return Err(IhwError::OutOfDomain { value: t });
        }
        let s = self.segment_of(t);
        Ok((self.values[s] + self.slopes[s] * (t - self.knots[s])).min(1.0))
    }

    /// Left derivative at `t`; `+inf` at `t = 0`.
    pub fn eval_density(&self, t: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&t) {
            return Err(IhwError::OutOfDomain { value: t });
        }
        if t == 0.0 {
            return Ok(f64::INFINITY);
        }
        Ok(self.slopes[self.segment_of(t)])
    }

    /// Segment `s` with `knots[s] < t <= knots[s + 1]` (segment 0 for t = 0).
    fn segment_of(&self, t: f64) -> usize {
        let k = self.knots.partition_point(|&x| x < t);
        k.saturating_sub(1).min(self.slopes.len() - 1)
    }
}

/// Least concave majorant of an ECDF over [0, 1].
///
/// Hull vertices are `(0, F(0))`, every `(p, F(p))` and `(1, 1)`; collinear
/// vertices are dropped so consecutive slopes strictly decrease.
pub fn least_concave_majorant(ecdf: &StepEcdf) -> GrenanderCdf {
    let mut vertices: Vec<(f64, f64)> = Vec::with_capacity(ecdf.points.len() + 2);
    if ecdf.points[0] > 0.0 {
        vertices.push((0.0, 0.0));
    }
    vertices.extend(ecdf.points.iter().copied().zip(ecdf.cumulative.iter().copied()));
    if *ecdf.points.last().unwrap() < 1.0 {
        vertices.push((1.0, 1.0));
    }

    let mut hull: Vec<(f64, f64)> = Vec::with_capacity(vertices.len());
    for v in vertices {
        while hull.len() >= 2 {
            let o = hull[hull.len() - 2];
            let a = hull[hull.len() - 1];
            let cross = (a.0 - o.0) * (v.1 - o.1) - (a.1 - o.1) * (v.0 - o.0);
            if cross >= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(v);
    }

    let knots: Vec<f64> = hull.iter().map(|v| v.0).collect();
    let mut values: Vec<f64> = hull.iter().map(|v| v.1).collect();
    *values.last_mut().unwrap() = 1.0;
    let slopes = hull
        .windows(2)
        .map(|w| (w[1].1 - w[0].1) / (w[1].0 - w[0].0))
        .collect();
    GrenanderCdf {
        knots,
        values,
        slopes,
    }
}
