//! Multi-classifier selection under a bitrate budget.
//!
//! Each video is routed by its motion-vector rate `R_motion` to one of three
//! classifiers: the 3D temporal CNN below `r_low`, the 2D temporal CNN in
//! `[r_low, r_high)`, and the spatial-only CNN from `r_high` up. Under a
//! Gamma source model the expected accuracy and expected transmitted rate of
//! a threshold pair have closed forms in the Gamma CDF, and the optimizer
//! picks the pair with the best expected accuracy that fits the budget.

mod closed_form;
mod optimize;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rate_model::{RateModel, RateModelError, SourceModel, RATE_SENTINEL};

pub use closed_form::{a_mcnn_closed, r_sent_closed};
pub use optimize::{grid_search, optimize, optimize_with, sweep, OptimizeOptions, SweepPoint};

#[derive(Debug, Error, PartialEq)]
pub enum SelectorError {
    #[error("negative or undefined rate {0}")]
    NegativeRate(f64),
    #[error("thresholds must satisfy 0 <= r_low <= r_high, got ({r_low}, {r_high})")]
    InvalidThresholds { r_low: f64, r_high: f64 },
    #[error("accuracy {name} = {value} outside [0, 1]")]
    InvalidAccuracy { name: &'static str, value: f64 },
    #[error("accuracies must satisfy A_3D >= A_2D >= A_SP in strict mode")]
    InvalidAccuracyOrder,
    #[error("budget {budget} kbps cannot cover the spatial route ({i_sp} kbps)")]
    InfeasibleBudget { budget: f64, i_sp: f64 },
    #[error("budget must be positive, got {0}")]
    InvalidBudget(f64),
    #[error("spatial rate I_SP must be non-negative, got {0}")]
    InvalidSpatialRate(f64),
    #[error("empty budget list")]
    EmptyBudgetList,
    #[error("budgets must be ascending")]
    BudgetsNotAscending,
    #[error("grid step must be positive, got {0}")]
    NonPositiveStep(f64),
    #[error(transparent)]
    Model(#[from] RateModelError),
}

/// Accuracies of the 3D, 2D and spatial classifiers, each in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Accuracies {
    pub a_3d: f64,
    pub a_2d: f64,
    pub a_sp: f64,
}

impl Accuracies {
    pub fn new(a_3d: f64, a_2d: f64, a_sp: f64) -> Result<Self, SelectorError> {
        let acc = Accuracies { a_3d, a_2d, a_sp };
        acc.validate()?;
        Ok(acc)
    }

    pub fn validate(&self) -> Result<(), SelectorError> {
        for (name, value) in [
            ("a_3d", self.a_3d),
            ("a_2d", self.a_2d),
            ("a_sp", self.a_sp),
        ] {
            if !(0.0..=1.0).contains(&value) {
                return Err(SelectorError::InvalidAccuracy { name, value });
            }
        }
        Ok(())
    }

    /// `A_3D >= A_2D >= A_SP`, the ordering under which expected accuracy
    /// grows with both thresholds.
    pub fn is_ordered(&self) -> bool {
        self.a_3d >= self.a_2d && self.a_2d >= self.a_sp
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Route {
    #[serde(rename = "CNN_3D")]
    Cnn3d,
    #[serde(rename = "CNN_2D")]
    Cnn2d,
    #[serde(rename = "SPATIAL")]
    Spatial,
}

impl Route {
    pub const ALL: [Route; 3] = [Route::Cnn3d, Route::Cnn2d, Route::Spatial];

    pub fn as_str(self) -> &'static str {
        match self {
            Route::Cnn3d => "CNN_3D",
            Route::Cnn2d => "CNN_2D",
            Route::Spatial => "SPATIAL",
        }
    }
}

impl std::fmt::Display for Route {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Threshold pair `{R_L, R_H}` in kbps with the classifier accuracies it
/// was derived for. [`RATE_SENTINEL`] stands for an infinite threshold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SelectorPolicy {
    pub r_low: f64,
    pub r_high: f64,
    pub accuracies: Accuracies,
}

impl SelectorPolicy {
    pub fn new(r_low: f64, r_high: f64, accuracies: Accuracies) -> Result<Self, SelectorError> {
        check_thresholds(r_low, r_high)?;
        accuracies.validate()?;
        Ok(SelectorPolicy {
            r_low,
            r_high,
            accuracies,
        })
    }

    pub fn is_unbounded(&self) -> bool {
        self.r_low >= RATE_SENTINEL
    }
}

pub(crate) fn check_thresholds(r_low: f64, r_high: f64) -> Result<(), SelectorError> {
    if r_low >= 0.0 && r_low <= r_high {
        Ok(())
    } else {
        Err(SelectorError::InvalidThresholds { r_low, r_high })
    }
}

/// Band lookup with half-open intervals: `[0, R_L)` → 3D,
/// `[R_L, R_H)` → 2D, `[R_H, ∞)` → spatial.
pub fn classify_route(policy: &SelectorPolicy, r_motion: f64) -> Result<Route, SelectorError> {
    if !(r_motion >= 0.0) {
        return Err(SelectorError::NegativeRate(r_motion));
    }
    Ok(if r_motion < policy.r_low {
        Route::Cnn3d
    } else if r_motion < policy.r_high {
        Route::Cnn2d
    } else {
        Route::Spatial
    })
}

/// Everything the closed forms and the optimizer need.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizationProblem {
    pub source: SourceModel,
    pub rates: RateModel,
    /// Dataset-average rate of the spatial route (first IDR frame), kbps.
    pub i_sp: f64,
    pub accuracies: Accuracies,
    pub r_available: f64,
}

impl OptimizationProblem {
    pub fn validate(&self) -> Result<(), SelectorError> {
        SourceModel::new(self.source.alpha, self.source.beta)?;
        self.rates.validate()?;
        self.accuracies.validate()?;
        if !(self.i_sp >= 0.0 && self.i_sp.is_finite()) {
            return Err(SelectorError::InvalidSpatialRate(self.i_sp));
        }
        if !(self.r_available > 0.0) {
            return Err(SelectorError::InvalidBudget(self.r_available));
        }
        Ok(())
    }

    pub fn with_budget(&self, r_available: f64) -> Self {
        OptimizationProblem {
            r_available,
            ..*self
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizationResult {
    pub policy: SelectorPolicy,
    pub predicted_a_mcnn: f64,
    pub predicted_r_sent: f64,
    pub feasible: bool,
}

impl OptimizationResult {
    /// Turns an infeasible result into [`SelectorError::InfeasibleBudget`].
    pub fn require_feasible(self, problem: &OptimizationProblem) -> Result<Self, SelectorError> {
        if self.feasible {
            Ok(self)
        } else {
            Err(SelectorError::InfeasibleBudget {
                budget: problem.r_available,
                i_sp: problem.i_sp,
            })
        }
    }
}
