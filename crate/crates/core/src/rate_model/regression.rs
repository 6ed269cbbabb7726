use serde::{Deserialize, Serialize};

use super::RateModelError;

/// Linear rate models of the two temporal streams:
/// `R_3D = a_3d·R_motion + b_3d`, `R_2D = a_2d·R_motion + b_2d` (kbps).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateModel {
    pub a_3d: f64,
    pub b_3d: f64,
    pub a_2d: f64,
    pub b_2d: f64,
}

impl RateModel {
    pub fn new(a_3d: f64, b_3d: f64, a_2d: f64, b_2d: f64) -> Result<Self, RateModelError> {
        for (name, value) in [
            ("a_3d", a_3d),
            ("b_3d", b_3d),
            ("a_2d", a_2d),
            ("b_2d", b_2d),
        ] {
            if !(value >= 0.0 && value.is_finite()) {
                return Err(RateModelError::InvalidParameter { name, value });
            }
        }
        Ok(RateModel {
            a_3d,
            b_3d,
            a_2d,
            b_2d,
        })
    }

    pub fn validate(&self) -> Result<(), RateModelError> {
        Self::new(self.a_3d, self.b_3d, self.a_2d, self.b_2d).map(|_| ())
    }

    pub fn rate_3d(&self, r_motion: f64) -> f64 {
        self.a_3d * r_motion + self.b_3d
    }

    pub fn rate_2d(&self, r_motion: f64) -> f64 {
        self.a_2d * r_motion + self.b_2d
    }
}

/// Fitted rate model with the coefficient of determination of each stream.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    #[serde(flatten)]
    pub model: RateModel,
    pub r2_3d: f64,
    pub r2_2d: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

/// Ordinary least squares `y = slope·x + intercept` on `(x, y)` pairs.
pub fn fit_line(points: &[(f64, f64)]) -> Result<LineFit, RateModelError> {
    if points.len() < 2 {
        return Err(RateModelError::InsufficientSamples {
            needed: 2,
            got: points.len(),
        });
    }
    let n = points.len() as f64;
    let mean_x = points.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / n;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for &(x, y) in points {
        let (dx, dy) = (x - mean_x, y - mean_y);
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if sxx == 0.0 {
        return Err(RateModelError::ZeroVarianceRegressor);
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let ss_res: f64 = points
        .iter()
        .map(|&(x, y)| (y - slope * x - intercept).powi(2))
        .sum();
    let r2 = if syy == 0.0 { 1.0 } else { 1.0 - ss_res / syy };
    Ok(LineFit {
        slope,
        intercept,
        r2,
    })
}

/// Fits both temporal rate models from `(R_motion, observed rate)` pairs.
///
/// Fails with [`RateModelError::InvalidParameter`] if a fitted slope or
/// intercept comes out negative.
pub fn fit_rates(
    points_3d: &[(f64, f64)],
    points_2d: &[(f64, f64)],
) -> Result<RateFit, RateModelError> {
    let l3 = fit_line(points_3d)?;
    let l2 = fit_line(points_2d)?;
    Ok(RateFit {
        model: RateModel::new(l3.slope, l3.intercept, l2.slope, l2.intercept)?,
        r2_3d: l3.r2,
        r2_2d: l2.r2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_distr::{Distribution, Normal};

    fn line(a: f64, b: f64, xs: &[f64]) -> Vec<(f64, f64)> {
        xs.iter().map(|&x| (x, a * x + b)).collect()
    }

    // Normal equations on raw (uncentred) sums.
    fn normal_equations(points: &[(f64, f64)]) -> (f64, f64) {
        let n = points.len() as f64;
        let sx: f64 = points.iter().map(|p| p.0).sum();
        let sy: f64 = points.iter().map(|p| p.1).sum();
        let sxx: f64 = points.iter().map(|p| p.0 * p.0).sum();
        let sxy: f64 = points.iter().map(|p| p.0 * p.1).sum();
        let det = n * sxx - sx * sx;
        ((n * sxy - sx * sy) / det, (sxx * sy - sx * sxy) / det)
    }

    #[test]
    fn noiseless_recovery() {
        let xs: Vec<f64> = (0..40).map(|i| 0.7 * i as f64 + 0.3).collect();
        let fit = fit_rates(&line(2.21, 9.04, &xs), &line(0.83, 4.27, &xs)).unwrap();
        assert!((fit.model.a_3d - 2.21).abs() < 1e-9);
        assert!((fit.model.b_3d - 9.04).abs() < 1e-9);
        assert!((fit.model.a_2d - 0.83).abs() < 1e-9);
        assert!((fit.model.b_2d - 4.27).abs() < 1e-9);
        assert!((fit.r2_3d - 1.0).abs() < 1e-12);
    }

    #[test]
    fn refit_is_fixed_point() {
        let xs = [1.0, 5.0, 8.0, 20.0, 33.0];
        let fit = fit_rates(&line(2.21, 9.04, &xs), &line(0.83, 4.27, &xs)).unwrap();
        let m = fit.model;
        let again = fit_rates(
            &xs.iter().map(|&x| (x, m.rate_3d(x))).collect::<Vec<_>>(),
            &xs.iter().map(|&x| (x, m.rate_2d(x))).collect::<Vec<_>>(),
        )
        .unwrap();
        assert!((again.model.a_3d - m.a_3d).abs() < 1e-12);
        assert!((again.model.b_2d - m.b_2d).abs() < 1e-12);
    }

    #[test]
    fn noisy_fit_matches_normal_equations() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(3);
        let noise = Normal::new(0.0, 1.0).unwrap();
        let points: Vec<(f64, f64)> = (0..1000)
            .map(|_| {
                let x = rng.gen_range(0.0..60.0);
                (x, 2.21 * x + 9.04 + noise.sample(&mut rng))
            })
            .collect();
        let fit = fit_line(&points).unwrap();
        let (a, b) = normal_equations(&points);
        assert!((fit.slope - a).abs() < 1e-9);
        assert!((fit.intercept - b).abs() < 1e-9);
        assert!((fit.slope / 2.21 - 1.0).abs() < 0.05);
        assert!((fit.intercept / 9.04 - 1.0).abs() < 0.05);
        assert!(fit.r2 > 0.99);
    }

    #[test]
    fn degenerate_regressors() {
        assert_eq!(
            fit_line(&[(1.0, 2.0)]),
            Err(RateModelError::InsufficientSamples { needed: 2, got: 1 })
        );
        assert_eq!(
            fit_line(&[(3.0, 2.0), (3.0, 5.0)]),
            Err(RateModelError::ZeroVarianceRegressor)
        );
        // negative slope violates the rate model invariant
        let falling = line(-1.0, 50.0, &[1.0, 2.0, 3.0]);
        assert!(matches!(
            fit_rates(&falling, &falling),
            Err(RateModelError::InvalidParameter { name: "a_3d", .. })
        ));
    }

    #[test]
    fn json_shape() {
        let fit = RateFit {
            model: RateModel::new(2.21, 9.04, 0.83, 4.27).unwrap(),
            r2_3d: 0.93,
            r2_2d: 0.88,
        };
        let v: serde_json::Value = serde_json::to_value(fit).unwrap();
        let keys: Vec<_> = v.as_object().unwrap().keys().cloned().collect();
        assert_eq!(keys.len(), 6);
        for k in ["a_3d", "b_3d", "a_2d", "b_2d", "r2_3d", "r2_2d"] {
            assert!(v.get(k).is_some(), "{k}");
        }
    }
}
