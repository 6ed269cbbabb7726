//! Expected accuracy and transmitted rate of a threshold pair.
//!
//! With `F` the Gamma CDF and `G` the CDF of the size-biased Gamma
//! (shape `α + 1`), integrating the per-band accuracies and rates against
//! the source density telescopes to
//!
//! ```text
//! A    = (A_3D - A_2D) F(R_L) + (A_2D - A_SP) F(R_H) + A_SP
//! Rsnt = (b_3D - b_2D) F(R_L) + (b_2D - I_SP) F(R_H)
//!      + (α/β)(a_3D - a_2D) G(R_L) + (α/β) a_2D G(R_H) + I_SP
//! ```

use super::{check_thresholds, OptimizationProblem, SelectorError};

/// CDF values of a threshold under the source and size-biased models.
#[derive(Debug, Clone, Copy)]
pub(crate) struct ThresholdMass {
    pub f: f64,
    pub g: f64,
}

impl OptimizationProblem {
    pub(crate) fn mass(&self, threshold: f64) -> ThresholdMass {
        ThresholdMass {
            f: self.source.cdf(threshold),
            g: self.source.size_biased().cdf(threshold),
        }
    }

    pub(crate) fn accuracy_from(&self, low: ThresholdMass, high: ThresholdMass) -> f64 {
        let a = &self.accuracies;
        (a.a_3d - a.a_2d) * low.f + (a.a_2d - a.a_sp) * high.f + a.a_sp
    }

    pub(crate) fn rate_from(&self, low: ThresholdMass, high: ThresholdMass) -> f64 {
        let r = &self.rates;
        let mean = self.source.mean();
        (r.b_3d - r.b_2d) * low.f
            + (r.b_2d - self.i_sp) * high.f
            + mean * (r.a_3d - r.a_2d) * low.g
            + mean * r.a_2d * high.g
            + self.i_sp
    }

    pub(crate) fn accuracy_at(&self, r_low: f64, r_high: f64) -> f64 {
        let a = &self.accuracies;
        (a.a_3d - a.a_2d) * self.source.cdf(r_low)
            + (a.a_2d - a.a_sp) * self.source.cdf(r_high)
            + a.a_sp
    }

    pub(crate) fn rate_at(&self, r_low: f64, r_high: f64) -> f64 {
        self.rate_from(self.mass(r_low), self.mass(r_high))
    }
}

/// Expected accuracy of the policy `{r_low, r_high}` under the source model.
pub fn a_mcnn_closed(
    problem: &OptimizationProblem,
    r_low: f64,
    r_high: f64,
) -> Result<f64, SelectorError> {
    check_thresholds(r_low, r_high)?;
    Ok(problem.accuracy_at(r_low, r_high))
}

/// Expected transmitted rate (kbps) of the policy `{r_low, r_high}`.
pub fn r_sent_closed(
    problem: &OptimizationProblem,
    r_low: f64,
    r_high: f64,
) -> Result<f64, SelectorError> {
    check_thresholds(r_low, r_high)?;
    Ok(problem.rate_at(r_low, r_high))
}
