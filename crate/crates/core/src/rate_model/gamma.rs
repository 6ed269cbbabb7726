use serde::{Deserialize, Serialize};

use super::special::{digamma, gamma_p, ln_gamma, trigamma};
use super::RateModelError;

/// Stand-in for an infinite rate threshold. The CDF of any source model is
/// exactly 1 at (and beyond) this value.
pub const RATE_SENTINEL: f64 = f64::MAX;

pub const DEFAULT_KL_BINS: usize = 50;

/// Gamma(α, β) model of `R_motion`: shape `alpha`, rate `beta` per kbps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSourceModel")]
pub struct SourceModel {
    pub alpha: f64,
    pub beta: f64,
}

#[derive(Deserialize)]
struct RawSourceModel {
    alpha: f64,
    beta: f64,
}

impl TryFrom<RawSourceModel> for SourceModel {
    type Error = RateModelError;

    fn try_from(raw: RawSourceModel) -> Result<Self, Self::Error> {
        SourceModel::new(raw.alpha, raw.beta)
    }
}

impl SourceModel {
    pub fn new(alpha: f64, beta: f64) -> Result<Self, RateModelError> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(RateModelError::InvalidParameter {
                name: "alpha",
                value: alpha,
            });
        }
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(RateModelError::InvalidParameter {
                name: "beta",
                value: beta,
            });
        }
        Ok(SourceModel { alpha, beta })
    }

    pub fn mean(&self) -> f64 {
        self.alpha / self.beta
    }

    pub fn variance(&self) -> f64 {
        self.alpha / (self.beta * self.beta)
    }

    /// Same rate, shape `α + 1`: the density of the size-biased variable,
    /// since `x f(x; α, β) = (α/β) f(x; α+1, β)`.
    pub fn size_biased(&self) -> SourceModel {
        SourceModel {
            alpha: self.alpha + 1.0,
            beta: self.beta,
        }
    }

    /// Natural log of the density; `-inf` at the origin when `α > 1`.
    pub fn ln_pdf(&self, x: f64) -> f64 {
        if x == 0.0 {
            return match self.alpha.partial_cmp(&1.0) {
                Some(std::cmp::Ordering::Less) => f64::INFINITY,
                Some(std::cmp::Ordering::Equal) => self.beta.ln(),
                _ => f64::NEG_INFINITY,
            };
        }
        self.alpha * self.beta.ln() + (self.alpha - 1.0) * x.ln()
            - self.beta * x
            - ln_gamma(self.alpha)
    }

    pub fn pdf(&self, x: f64) -> f64 {
        self.ln_pdf(x).exp()
    }

    /// `P(α, βx)`; exactly 0 at the origin and exactly 1 at
    /// [`RATE_SENTINEL`] or infinity.
    pub fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        if x >= RATE_SENTINEL {
            return 1.0;
        }
        gamma_p(self.alpha, self.beta * x)
    }

    /// Smallest `x` with `cdf(x) >= p`, by bisection to about 1e-12 relative.
    pub fn quantile(&self, p: f64) -> f64 {
        if p <= 0.0 {
            return 0.0;
        }
        if p >= 1.0 {
            return f64::INFINITY;
        }
        let mut hi = self.mean().max(1e-12);
        while self.cdf(hi) < p {
            hi *= 2.0;
        }
        let mut lo = 0.0;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.cdf(mid) < p {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-12 * hi {
                break;
            }
        }
        hi
    }

    pub fn log_likelihood(&self, samples: &[f64]) -> f64 {
        samples.iter().map(|&x| self.ln_pdf(x)).sum()
    }
}

fn check_non_negative(x: f64) -> Result<(), RateModelError> {
    if x < 0.0 || x.is_nan() {
        Err(RateModelError::NegativeArgument(x))
    } else {
        Ok(())
    }
}

pub fn gamma_pdf(model: &SourceModel, x: f64) -> Result<f64, RateModelError> {
    check_non_negative(x)?;
    Ok(model.pdf(x))
}

pub fn gamma_cdf(model: &SourceModel, x: f64) -> Result<f64, RateModelError> {
    check_non_negative(x)?;
    Ok(model.cdf(x))
}

/// `(α/β) f(x; α+1, β)`, which equals `x f(x; α, β)`.
pub fn gamma_expectation_shift(model: &SourceModel, x: f64) -> Result<f64, RateModelError> {
    check_non_negative(x)?;
    Ok(model.mean() * model.size_biased().pdf(x))
}

struct Moments {
    mean: f64,
    variance: f64,
    mean_ln: f64,
}

fn moments(samples: &[f64]) -> Result<Moments, RateModelError> {
    if samples.len() < 2 {
        return Err(RateModelError::InsufficientSamples {
            needed: 2,
            got: samples.len(),
        });
    }
    if let Some((index, &value)) = samples
        .iter()
        .enumerate()
        .find(|(_, x)| !(**x > 0.0 && x.is_finite()))
    {
        return Err(RateModelError::NonPositiveSample { index, value });
    }
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let variance = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    if variance <= 0.0 || samples.iter().all(|&x| x == samples[0]) {
        return Err(RateModelError::DegenerateSamples);
    }
    let mean_ln = samples.iter().map(|x| x.ln()).sum::<f64>() / n;
    Ok(Moments {
        mean,
        variance,
        mean_ln,
    })
}

/// Method-of-moments Gamma fit: `α = m²/v`, `β = m/v`.
pub fn fit_source_moments(samples: &[f64]) -> Result<SourceModel, RateModelError> {
    let m = moments(samples)?;
    SourceModel::new(m.mean * m.mean / m.variance, m.mean / m.variance)
}

/// Maximum-likelihood Gamma fit.
///
/// The shape solves `ln α - ψ(α) = ln(mean) - mean(ln x)` by safeguarded
/// Newton iteration started from the moment estimate; the rate follows as
/// `β = α / mean`.
pub fn fit_source(samples: &[f64]) -> Result<SourceModel, RateModelError> {
    let m = moments(samples)?;
    let s = m.mean.ln() - m.mean_ln;
    if !(s > 0.0) {
        // AM-GM gap vanishes only for constant data
        return Err(RateModelError::DegenerateSamples);
    }
    let mut alpha = m.mean * m.mean / m.variance;
    let mut converged = false;
    for _ in 0..100 {
        let g = alpha.ln() - digamma(alpha) - s;
        let dg = 1.0 / alpha - trigamma(alpha);
        let mut next = alpha - g / dg;
        if !(next > 0.0) || !next.is_finite() {
            next = alpha / 2.0;
        }
        let step = (next - alpha).abs();
        alpha = next;
        if step <= 1e-12 * alpha {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(RateModelError::NoConvergence);
    }
    SourceModel::new(alpha, alpha / m.mean)
}

/// `KL(empirical || model)` over `bins` equal-width bins spanning
/// `[0, max sample]`, natural log. The model's mass beyond the last edge is
/// assigned to the last bin so both distributions sum to one.
pub fn kl_divergence_empirical(
    samples: &[f64],
    model: &SourceModel,
    bins: usize,
) -> Result<f64, RateModelError> {
    if bins < 2 || samples.len() < bins {
        return Err(RateModelError::InsufficientSamples {
            needed: bins.max(2),
            got: samples.len(),
        });
    }
    if let Some(&x) = samples.iter().find(|x| !(**x >= 0.0) || !x.is_finite()) {
        return Err(RateModelError::NegativeArgument(x));
    }
    let max = samples.iter().cloned().fold(0.0, f64::max);
    if max == 0.0 {
        return Err(RateModelError::DegenerateSamples);
    }
    let width = max / bins as f64;
    let mut counts = vec![0usize; bins];
    for &x in samples {
        let i = ((x / width) as usize).min(bins - 1);
        counts[i] += 1;
    }
    let n = samples.len() as f64;
    let mut kl = 0.0;
    for (i, &count) in counts.iter().enumerate() {
        if count == 0 {
            continue;
        }
        let lo = model.cdf(i as f64 * width);
        let hi = if i + 1 == bins {
            1.0
        } else {
            model.cdf((i + 1) as f64 * width)
        };
        let p = count as f64 / n;
        kl += p * (p / (hi - lo)).ln();
    }
    Ok(kl.max(0.0))
}
