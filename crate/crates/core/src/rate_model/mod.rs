//! Source and rate models.
//!
//! The motion-vector rate `R_motion` of a video population is modelled as
//! Gamma(α, β) with shape α and rate β (per kbps). The rates actually sent
//! to the two temporal classifiers are modelled as linear functions of
//! `R_motion`. All rates are in kbps.

mod gamma;
mod regression;
pub mod special;

use thiserror::Error;

pub use gamma::{
    fit_source, fit_source_moments, gamma_cdf, gamma_expectation_shift, gamma_pdf,
    kl_divergence_empirical, SourceModel, DEFAULT_KL_BINS, RATE_SENTINEL,
};
pub use regression::{fit_line, fit_rates, LineFit, RateFit, RateModel};

#[derive(Debug, Error, PartialEq)]
pub enum RateModelError {
    #[error("negative argument {0}")]
    NegativeArgument(f64),
    #[error("invalid parameter {name} = {value}")]
    InvalidParameter { name: &'static str, value: f64 },
    #[error("need at least {needed} samples, got {got}")]
    InsufficientSamples { needed: usize, got: usize },
    #[error("samples have zero variance")]
    DegenerateSamples,
    #[error("sample {index} is not positive ({value})")]
    NonPositiveSample { index: usize, value: f64 },
    #[error("regressor has zero variance")]
    ZeroVarianceRegressor,
    #[error("shape estimate did not converge")]
    NoConvergence,
}
