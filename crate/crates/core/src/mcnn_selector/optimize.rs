//! Threshold optimizer.
//!
//! When `A_3D >= A_2D >= A_SP` the expected accuracy grows with both
//! thresholds, so optima sit on the budget boundary. If in addition the 3D
//! stream never costs less than the 2D stream (`a_3D >= a_2D`,
//! `b_3D >= b_2D`), the transmitted rate grows with `R_L` for a fixed
//! `R_H`, and the largest affordable `R_L` can be found by bisection. The
//! optimizer scans `R_H`, bisects `R_L` on each candidate and then refines
//! around the best few candidates. Problems outside these conditions fall
//! back to an exhaustive grid.

use std::cmp::Ordering;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::closed_form::ThresholdMass;
use super::{OptimizationProblem, OptimizationResult, SelectorError, SelectorPolicy};
use crate::rate_model::RATE_SENTINEL;

/// Upper end of the threshold scan, as a source CDF level.
const SCAN_CDF_LEVEL: f64 = 1.0 - 1e-12;
const COARSE_POINTS: usize = 512;
const REFINE_POINTS: usize = 16;
const REFINE_TOLERANCE: f64 = 1e-3;
const REFINE_SEEDS: usize = 3;
const FALLBACK_GRID_POINTS: usize = 2_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct OptimizeOptions {
    /// Reject accuracy triples violating `A_3D >= A_2D >= A_SP` instead of
    /// falling back to grid search.
    pub strict: bool,
}

/// One row of a rate-accuracy sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub budget_kbps: f64,
    pub r_low: f64,
    pub r_high: f64,
    pub a_mcnn: f64,
    pub r_sent: f64,
    pub feasible: bool,
}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    r_low: f64,
    r_high: f64,
    accuracy: f64,
    rate: f64,
}

impl Candidate {
    /// Ordering where greater is better: higher accuracy, then lower rate,
    /// lower `r_high`, lower `r_low`.
    fn rank(&self, other: &Candidate) -> Ordering {
        self.accuracy
            .total_cmp(&other.accuracy)
            .then(other.rate.total_cmp(&self.rate))
            .then(other.r_high.total_cmp(&self.r_high))
            .then(other.r_low.total_cmp(&self.r_low))
    }

    fn into_result(self, problem: &OptimizationProblem, feasible: bool) -> OptimizationResult {
        OptimizationResult {
            policy: SelectorPolicy {
                r_low: self.r_low,
                r_high: self.r_high,
                accuracies: problem.accuracies,
            },
            predicted_a_mcnn: self.accuracy,
            predicted_r_sent: self.rate,
            feasible,
        }
    }
}

fn keep_best(best: &mut Option<Candidate>, c: Candidate) {
    if best.is_none_or(|b| c.rank(&b) == Ordering::Greater) {
        *best = Some(c);
    }
}

fn evaluate(problem: &OptimizationProblem, r_low: f64, r_high: f64) -> Candidate {
    Candidate {
        r_low,
        r_high,
        accuracy: problem.accuracy_at(r_low, r_high),
        rate: problem.rate_at(r_low, r_high),
    }
}

fn all_spatial(problem: &OptimizationProblem) -> Candidate {
    evaluate(problem, 0.0, 0.0)
}

pub fn optimize(problem: &OptimizationProblem) -> Result<OptimizationResult, SelectorError> {
    optimize_with(problem, OptimizeOptions::default())
}

/// Maximises expected accuracy subject to expected rate `<= r_available`.
///
/// Infinite thresholds are reported as [`RATE_SENTINEL`]. If no policy fits
/// the budget the result is the all-spatial policy with `feasible = false`.
pub fn optimize_with(
    problem: &OptimizationProblem,
    options: OptimizeOptions,
) -> Result<OptimizationResult, SelectorError> {
    problem.validate()?;
    let ordered = problem.accuracies.is_ordered();
    if !ordered && options.strict {
        return Err(SelectorError::InvalidAccuracyOrder);
    }
    let rates = &problem.rates;
    let rate_grows_with_low = rates.a_3d >= rates.a_2d && rates.b_3d >= rates.b_2d;
    if !ordered || !rate_grows_with_low {
        return Ok(fallback_grid(problem));
    }

    let budget = problem.r_available;
    let top = evaluate(problem, RATE_SENTINEL, RATE_SENTINEL);
    if top.rate <= budget {
        return Ok(top.into_result(problem, true));
    }

    let upper = problem.source.quantile(SCAN_CDF_LEVEL);
    let step = upper / COARSE_POINTS as f64;
    let mut coarse: Vec<Candidate> = (0..=COARSE_POINTS)
        .map(|i| i as f64 * step)
        .chain([RATE_SENTINEL])
        .chain(cheapest_high(problem))
        .filter_map(|r_high| boundary_point(problem, r_high, upper))
        .collect();
    if coarse.is_empty() {
        return Ok(all_spatial(problem).into_result(problem, false));
    }
    coarse.sort_by(|a, b| b.rank(a));

    let mut best = None;
    for seed in coarse.iter().take(REFINE_SEEDS) {
        keep_best(&mut best, *seed);
        if seed.r_high < RATE_SENTINEL {
            if let Some(c) = refine(problem, seed.r_high, step, upper) {
                keep_best(&mut best, c);
            }
        }
    }
    Ok(best.expect("nonempty").into_result(problem, true))
}

/// For `a_2D > 0` and `b_2D < I_SP`, routing the lowest rates to the 2D
/// stream is cheaper than the spatial stream; the all-2D-below threshold
/// with the least expected rate is `(I_SP - b_2D) / a_2D`.
fn cheapest_high(problem: &OptimizationProblem) -> Option<f64> {
    let r = &problem.rates;
    (r.a_2d > 0.0 && r.b_2d < problem.i_sp).then(|| (problem.i_sp - r.b_2d) / r.a_2d)
}

/// Best feasible policy with the given `r_high`: the largest affordable
/// `r_low` in `[0, min(r_high, upper)]`.
fn boundary_point(problem: &OptimizationProblem, r_high: f64, upper: f64) -> Option<Candidate> {
    let budget = problem.r_available;
    let high = problem.mass(r_high);
    let rate = |r_low: f64| problem.rate_from(problem.mass(r_low), high);
    if rate(0.0) > budget {
        return None;
    }
    let cap = r_high.min(upper);
    let r_low = if rate(cap) <= budget {
        cap
    } else {
        let (mut lo, mut hi) = (0.0f64, cap);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if rate(mid) <= budget {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-12 * hi.max(1.0) {
                break;
            }
        }
        lo
    };
    let low = problem.mass(r_low);
    Some(Candidate {
        r_low,
        r_high,
        accuracy: problem.accuracy_from(low, high),
        rate: problem.rate_from(low, high),
    })
}

/// Shrinking local search on `r_high` around `center`.
fn refine(
    problem: &OptimizationProblem,
    center: f64,
    half_width: f64,
    upper: f64,
) -> Option<Candidate> {
    let (mut lo, mut hi) = (
        (center - half_width).max(0.0),
        (center + half_width).min(upper),
    );
    let mut best: Option<Candidate> = boundary_point(problem, center, upper);
    while hi - lo > REFINE_TOLERANCE {
        let step = (hi - lo) / REFINE_POINTS as f64;
        for i in 0..=REFINE_POINTS {
            if let Some(c) = boundary_point(problem, lo + i as f64 * step, upper) {
                keep_best(&mut best, c);
            }
        }
        let mid = best?.r_high;
        lo = (mid - step).max(0.0);
        hi = (mid + step).min(upper);
    }
    best
}

fn fallback_grid(problem: &OptimizationProblem) -> OptimizationResult {
    let upper = problem.source.quantile(SCAN_CDF_LEVEL);
    let step = upper / FALLBACK_GRID_POINTS as f64;
    let mut values: Vec<f64> = (0..=FALLBACK_GRID_POINTS)
        .map(|i| i as f64 * step)
        .collect();
    values.extend(cheapest_high(problem));
    values.push(RATE_SENTINEL);
    values.sort_by(f64::total_cmp);
    grid_search(problem, &values)
}

/// Exhaustive search over all pairs `r_low <= r_high` drawn from `values`
/// (ascending). Ties resolve to lower rate, then lower `r_high`, then lower
/// `r_low`. Returns the all-spatial policy flagged infeasible when nothing
/// fits the budget.
pub fn grid_search(problem: &OptimizationProblem, values: &[f64]) -> OptimizationResult {
    let masses: Vec<ThresholdMass> = values.iter().map(|&v| problem.mass(v)).collect();
    let budget = problem.r_available;
    let best = (0..values.len())
        .into_par_iter()
        .filter_map(|j| {
            let mut best = None;
            for i in 0..=j {
                let rate = problem.rate_from(masses[i], masses[j]);
                if rate <= budget {
                    keep_best(
                        &mut best,
                        Candidate {
                            r_low: values[i],
                            r_high: values[j],
                            accuracy: problem.accuracy_from(masses[i], masses[j]),
                            rate,
                        },
                    );
                }
            }
            best
        })
        .reduce_with(|a, b| {
            if b.rank(&a) == Ordering::Greater {
                b
            } else {
                a
            }
        });
    match best {
        Some(c) => c.into_result(problem, true),
        None => all_spatial(problem).into_result(problem, false),
    }
}

/// Optimizes every budget, in order. A policy that fits a smaller budget
/// also fits every larger one, so each point keeps the better of its own
/// optimum and the previous point's policy.
pub fn sweep(
    problem: &OptimizationProblem,
    budgets: &[f64],
    options: OptimizeOptions,
) -> Result<Vec<SweepPoint>, SelectorError> {
    if budgets.is_empty() {
        return Err(SelectorError::EmptyBudgetList);
    }
    if let Some(&b) = budgets.iter().find(|b| !(**b > 0.0)) {
        return Err(SelectorError::InvalidBudget(b));
    }
    if budgets.windows(2).any(|w| w[1] < w[0]) {
        return Err(SelectorError::BudgetsNotAscending);
    }
    let results = budgets
        .par_iter()
        .map(|&b| optimize_with(&problem.with_budget(b), options))
        .collect::<Result<Vec<_>, _>>()?;

    let mut points = Vec::with_capacity(budgets.len());
    let mut carried: Option<Candidate> = None;
    for (&budget, result) in budgets.iter().zip(results) {
        let mut own = Candidate {
            r_low: result.policy.r_low,
            r_high: result.policy.r_high,
            accuracy: result.predicted_a_mcnn,
            rate: result.predicted_r_sent,
        };
        if result.feasible {
            if let Some(prev) = carried {
                if prev.rank(&own) == Ordering::Greater {
                    own = prev;
                }
            }
            carried = Some(own);
        }
        points.push(SweepPoint {
            budget_kbps: budget,
            r_low: own.r_low,
            r_high: own.r_high,
            a_mcnn: own.accuracy,
            r_sent: own.rate,
            feasible: result.feasible,
        });
    }
    Ok(points)
}
